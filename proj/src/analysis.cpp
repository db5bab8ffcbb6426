#include "heterograph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace heterograph {

PerturbationReport gcn_perturbation_thresholds(double h, std::int64_t d,
                                               std::int32_t num_classes) {
    if (d < 1) throw std::invalid_argument("gcn_perturbation_thresholds: d must be >= 1");
    if (num_classes < 2)
        throw std::invalid_argument("gcn_perturbation_thresholds: num_classes must be >= 2");
    if (!(h >= 0.0 && h <= 1.0))
        throw std::invalid_argument("gcn_perturbation_thresholds: h outside [0,1]");
    const double k = static_cast<double>(num_classes);
    const double dd = static_cast<double>(d);

    PerturbationReport report;
    report.h = h;
    report.d = d;
    report.num_classes = num_classes;
    report.delta1_abs = std::abs((-h * k * dd - k + dd + 1.0) / (k - 1.0));
    report.delta2_abs = std::abs((1.0 - h * k) * dd / (k - 1.0));
    report.crossover_h = (1.0 - k + 2.0 * dd) / (2.0 * k * dd);
    // genuine boundaries of the proof's case split; detected with a relative
    // tolerance since h usually arrives as a rounded decimal
    report.singular_self_loop =
        std::abs(k - 1.0 + (k * h - 1.0) * dd) < 1e-9 * (k + dd);
    report.singular_no_self_loop = std::abs(1.0 - h * k) < 1e-9 * k;
    if (report.singular_self_loop || report.singular_no_self_loop)
        report.less_robust = "singular";
    else if (report.delta1_abs < report.delta2_abs)
        report.less_robust = "self_loop";
    else if (report.delta2_abs < report.delta1_abs)
        report.less_robust = "no_self_loop";
    else
        report.less_robust = "equal";
    return report;
}

namespace {

Matrix circulant(std::int32_t k, double diag, double off) {
    Matrix m(k, k, off);
    for (std::int32_t i = 0; i < k; ++i) m(i, i) = diag;
    return m;
}

}  // namespace

Matrix aggregated_features_self_loop(double h, std::int64_t d, std::int32_t num_classes) {
    const double k = static_cast<double>(num_classes);
    const double rho = (1.0 - h) / (k - 1.0);
    return circulant(num_classes, h * static_cast<double>(d) + 1.0,
                     rho * static_cast<double>(d));
}

Matrix aggregated_features_no_self_loop(double h, std::int64_t d, std::int32_t num_classes) {
    const double k = static_cast<double>(num_classes);
    const double rho = (1.0 - h) / (k - 1.0);
    return circulant(num_classes, h * static_cast<double>(d), rho * static_cast<double>(d));
}

Matrix optimal_weight_self_loop(double h, std::int64_t d, std::int32_t num_classes) {
    const double k = static_cast<double>(num_classes);
    const double dd = static_cast<double>(d);
    const double denom = (dd + 1.0) * (k - 1.0 + (k * h - 1.0) * dd);
    if (std::abs(k - 1.0 + (k * h - 1.0) * dd) < 1e-9 * (k + dd))
        throw std::runtime_error("optimal_weight_self_loop: singular configuration");
    return circulant(num_classes, ((k - 1.0) + (k - 2.0 + h) * dd) / denom,
                     (h - 1.0) * dd / denom);
}

Matrix optimal_weight_no_self_loop(double h, std::int64_t d, std::int32_t num_classes) {
    const double k = static_cast<double>(num_classes);
    const double dd = static_cast<double>(d);
    const double denom = (1.0 - h * k) * dd;
    if (std::abs(1.0 - h * k) < 1e-9 * k)
        throw std::runtime_error("optimal_weight_no_self_loop: singular configuration");
    return circulant(num_classes, -(k - 2.0 + h) / denom, (1.0 - h) / denom);
}

double verify_optimal_weight(double h, std::int64_t d, std::int32_t num_classes) {
    const Matrix identity = Matrix::identity(num_classes);
    const Matrix p1 =
        matmul(aggregated_features_self_loop(h, d, num_classes),
               optimal_weight_self_loop(h, d, num_classes));
    const Matrix p2 =
        matmul(aggregated_features_no_self_loop(h, d, num_classes),
               optimal_weight_no_self_loop(h, d, num_classes));
    return std::max(max_abs_diff(p1, identity), max_abs_diff(p2, identity));
}

TwoHopReport two_hop_compatibility(double h, std::int32_t num_classes) {
    if (num_classes < 2)
        throw std::invalid_argument("two_hop_compatibility: num_classes must be >= 2");
    Matrix p(num_classes, num_classes, (1.0 - h) / static_cast<double>(num_classes - 1));
    for (std::int32_t i = 0; i < num_classes; ++i) p(i, i) = h;
    TwoHopReport report;
    report.p_squared = matmul(p, p);
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::int32_t i = 0; i < num_classes; ++i)
        for (std::int32_t j = 0; j < num_classes; ++j)
            if (i != j)
                min_margin =
                    std::min(min_margin, report.p_squared(i, i) - report.p_squared(i, j));
    report.min_margin = min_margin;
    const double rho = (1.0 - h) / static_cast<double>(num_classes - 1);
    report.expected_margin = (h - rho) * (h - rho);
    return report;
}

namespace {

bool is_binary(const std::vector<double>& s) {
    for (double v : s)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

// Both smoothness routes; they must coincide exactly on binary signals.
double smoothness_dual(const std::vector<double>& signal, double quad_times_two,
                       double edge_sum) {
    if (is_binary(signal)) {
        if (quad_times_two != edge_sum)
            throw std::runtime_error("smoothness: quadratic form and edge iteration disagree");
    } else if (std::abs(quad_times_two - edge_sum) >
               1e-9 * std::max(1.0, std::abs(edge_sum))) {
        throw std::runtime_error("smoothness: quadratic form and edge iteration disagree");
    }
    return edge_sum;
}

}  // namespace

double smoothness(const Matrix& laplacian, const std::vector<double>& signal) {
    const std::size_t n = laplacian.rows();
    if (laplacian.cols() != n || signal.size() != n)
        throw std::invalid_argument("smoothness: shape mismatch");
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = laplacian.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * signal[j];
        quad += signal[i] * acc;
    }
    double edge_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = laplacian.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || row[j] == 0.0) continue;
            const double diff = signal[i] - signal[j];
            edge_sum += (-row[j]) * diff * diff;
        }
    }
    return smoothness_dual(signal, 2.0 * quad, edge_sum);
}

double smoothness(const Graph& g, const std::vector<double>& signal) {
    if (signal.size() != static_cast<std::size_t>(g.num_nodes()))
        throw std::invalid_argument("smoothness: shape mismatch");
    double edge_sum = 0.0;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u)) {
            const double diff = signal[u] - signal[v];
            edge_sum += diff * diff;
        }
    // quadratic form via L*s without materializing L
    double quad = 0.0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        double acc = static_cast<double>(g.degree(u)) * signal[u];
        for (NodeId v : g.neighbors(u)) acc -= signal[v];
        quad += signal[u] * acc;
    }
    return smoothness_dual(signal, 2.0 * quad, edge_sum);
}

double homophily_from_smoothness(const Graph& g, const std::vector<double>& signal) {
    if (!is_binary(signal))
        throw std::invalid_argument("homophily_from_smoothness: signal must be binary");
    if (g.num_edges() == 0)
        throw std::invalid_argument("homophily_from_smoothness: empty edge set");
    return 1.0 - smoothness(g, signal) / (2.0 * static_cast<double>(g.num_edges()));
}

EigenDecomposition jacobi_eigendecomposition(Matrix a, double rel_tol, int max_sweeps) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("jacobi: matrix must be square");
    const double scale = frobenius_norm(a);

    Matrix v = Matrix::identity(n);
    auto offdiag_norm = [&]() {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweeps = 0;
    double off = offdiag_norm();
    const double target = rel_tol * std::max(scale, std::numeric_limits<double>::min());
    while (off > target && sweeps < max_sweeps) {
        ++sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        off = offdiag_norm();
    }
    if (off > target)
        throw std::runtime_error("jacobi: no convergence after " + std::to_string(sweeps) +
                                 " sweeps (off-diagonal residual " + std::to_string(off) + ")");

    EigenDecomposition result;
    result.offdiag_residual = off;
    result.sweeps = sweeps;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        result.eigenvalues[r] = a(order[r], order[r]);
        for (std::size_t i = 0; i < n; ++i) result.eigenvectors(r, i) = v(i, order[r]);
    }
    return result;
}

SpectralReport spectral_energy(const Matrix& laplacian,
                               const std::vector<std::vector<double>>& signals) {
    const std::size_t n = laplacian.rows();
    if (n > 2000) throw std::invalid_argument("spectral_energy: n exceeds the 2000-node cap");
    SpectralReport report;
    report.eig = jacobi_eigendecomposition(laplacian);

    double num_directed = 0.0;
    for (std::size_t i = 0; i < n; ++i) num_directed += laplacian(i, i);

    for (const auto& s : signals) {
        if (s.size() != n) throw std::invalid_argument("spectral_energy: signal length");
        SignalSpectrum spec;
        spec.coefficients.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* vi = report.eig.eigenvectors.row(i);
            double c = 0;
            for (std::size_t j = 0; j < n; ++j) c += s[j] * vi[j];
            spec.coefficients[i] = c;
        }
        spec.tail_energy.assign(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;)
            spec.tail_energy[i] = spec.tail_energy[i + 1] +
                                  spec.coefficients[i] * spec.coefficients[i];
        for (double x : s) spec.norm_sq += x * x;
        spec.smoothness = smoothness(laplacian, s);
        spec.homophily = is_binary(s) && num_directed > 0
                             ? 1.0 - spec.smoothness / num_directed
                             : std::numeric_limits<double>::quiet_NaN();
        report.parseval_residual = std::max(report.parseval_residual,
                                            std::abs(spec.tail_energy[0] - spec.norm_sq));
        report.signals.push_back(std::move(spec));
    }
    return report;
}

std::optional<std::int64_t> energy_dominance(const Graph& g, const std::vector<double>& s,
                                             const std::vector<double>& t) {
    const Matrix laplacian = unnormalized_laplacian(g);
    SpectralReport report = spectral_energy(laplacian, {s, t});
    const auto& tail_s = report.signals[0].tail_energy;
    const auto& tail_t = report.signals[1].tail_energy;
    const std::size_t n = static_cast<std::size_t>(g.num_nodes());
    for (std::size_t m = 1; m + 1 <= n; ++m)
        if (tail_s[m] > tail_t[m]) return static_cast<std::int64_t>(m);
    return std::nullopt;
}

std::vector<DegreeBucket> degree_bucket_accuracy(const std::vector<std::int32_t>& predictions,
                                                 const std::vector<std::int32_t>& labels,
                                                 const Graph& g,
                                                 const std::vector<std::int64_t>& boundaries,
                                                 const std::vector<NodeId>& subset) {
    if (boundaries.empty())
        throw std::invalid_argument("degree_bucket_accuracy: no boundaries");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (boundaries[i] <= boundaries[i - 1])
            throw std::invalid_argument("degree_bucket_accuracy: boundaries must ascend");

    std::vector<DegreeBucket> buckets(boundaries.size());
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        buckets[i].lo = boundaries[i];
        buckets[i].hi = i + 1 < boundaries.size() ? boundaries[i + 1] : -1;
    }
    for (NodeId v : subset) {
        const std::int64_t deg = g.degree(v);
        if (deg < boundaries.front())
            throw std::invalid_argument(
                "degree_bucket_accuracy: buckets do not cover degree " + std::to_string(deg));
        std::size_t b = 0;
        while (b + 1 < boundaries.size() && deg >= boundaries[b + 1]) ++b;
        ++buckets[b].count;
        if (predictions[v] == labels[v]) ++buckets[b].correct;
    }
    for (auto& bucket : buckets)
        if (bucket.count > 0)
            bucket.accuracy = static_cast<double>(bucket.correct) /
                              static_cast<double>(bucket.count);
    return buckets;
}

}  // namespace heterograph
