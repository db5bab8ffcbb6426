#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace heterograph {

// Dense row-major matrix. Deliberately minimal: the toolkit only needs a
// handful of products and reductions, all with a fixed accumulation order
// so results are reproducible run to run.
template <typename T>
class MatrixT {
public:
    MatrixT() = default;
    MatrixT(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static MatrixT identity(std::size_t n) {
        MatrixT m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    T* row(std::size_t i) { return data_.data() + i * cols_; }
    const T* row(std::size_t i) const { return data_.data() + i * cols_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const MatrixT& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = MatrixT<double>;
using MatrixF = MatrixT<float>;

// C = A * B
template <typename T>
MatrixT<T> matmul(const MatrixT<T>& a, const MatrixT<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    MatrixT<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T* ci = c.row(i);
        const T* ai = a.row(i);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const T ail = ai[l];
            if (ail == T(0)) continue;
            const T* bl = b.row(l);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ail * bl[j];
        }
    }
    return c;
}

// C = A^T * B  (A is n x p, B is n x q, C is p x q)
template <typename T>
MatrixT<T> matmul_at_b(const MatrixT<T>& a, const MatrixT<T>& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: shape mismatch");
    MatrixT<T> c(a.cols(), b.cols());
    for (std::size_t l = 0; l < a.rows(); ++l) {
        const T* al = a.row(l);
        const T* bl = b.row(l);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const T ali = al[i];
            if (ali == T(0)) continue;
            T* ci = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += ali * bl[j];
        }
    }
    return c;
}

// C = A * B^T  (A is n x p, B is m x p, C is n x m)
template <typename T>
MatrixT<T> matmul_a_bt(const MatrixT<T>& a, const MatrixT<T>& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: shape mismatch");
    MatrixT<T> c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const T* ai = a.row(i);
        T* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const T* bj = b.row(j);
            T acc = T(0);
            for (std::size_t l = 0; l < a.cols(); ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
    return c;
}

template <typename T>
MatrixT<T> transpose(const MatrixT<T>& a) {
    MatrixT<T> t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// Horizontal concatenation; all blocks must share the row count.
template <typename T>
MatrixT<T> hstack(const std::vector<const MatrixT<T>*>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("hstack: no blocks");
    std::size_t rows = blocks[0]->rows(), cols = 0;
    for (const auto* b : blocks) {
        if (b->rows() != rows) throw std::invalid_argument("hstack: row mismatch");
        cols += b->cols();
    }
    MatrixT<T> out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        T* oi = out.row(i);
        for (const auto* b : blocks) {
            const T* bi = b->row(i);
            oi = std::copy(bi, bi + b->cols(), oi);
        }
    }
    return out;
}

template <typename T>
double frobenius_norm(const MatrixT<T>& a) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double v = a.data()[i];
        s += v * v;
    }
    return std::sqrt(s);
}

template <typename T>
double max_abs_diff(const MatrixT<T>& a, const MatrixT<T>& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i])));
    return m;
}

template <typename T>
double max_abs(const MatrixT<T>& a) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i])));
    return m;
}

template <typename T, typename U>
MatrixT<U> convert_matrix(const MatrixT<T>& a) {
    MatrixT<U> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = static_cast<U>(a.data()[i]);
    return out;
}

}  // namespace heterograph
