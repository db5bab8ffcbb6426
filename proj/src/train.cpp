#include "heterograph/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace heterograph {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Mixes an epoch counter into the run seed for the per-epoch dropout mask.
std::uint64_t epoch_seed(std::uint64_t seed, std::int64_t epoch) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch + 1));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    return x;
}

template <typename T>
MatrixT<T> softmax_grad(const MatrixT<T>& logits, const std::vector<std::int32_t>& labels,
                        const std::vector<NodeId>& mask) {
    MatrixT<T> d(logits.rows(), logits.cols());
    const T inv = static_cast<T>(1.0 / static_cast<double>(mask.size()));
    for (NodeId v : mask) {
        const T* row = logits.row(v);
        T* out = d.row(v);
        T m = row[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) m = std::max(m, row[j]);
        T sum = T(0);
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            out[j] = std::exp(row[j] - m);
            sum += out[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) out[j] *= inv / sum;
        out[labels[v]] -= inv;
    }
    return d;
}

template <typename T>
void add_l2(MatrixT<T>& grad, const MatrixT<T>& w, double lambda) {
    if (lambda == 0.0) return;
    const T two_lambda = static_cast<T>(2.0 * lambda);
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] += two_lambda * w.data()[i];
}

template <typename T>
MatrixT<T> slice_cols(const MatrixT<T>& m, std::size_t begin, std::size_t width) {
    MatrixT<T> out(m.rows(), width);
    for (std::size_t i = 0; i < m.rows(); ++i)
        std::copy(m.row(i) + begin, m.row(i) + begin + width, out.row(i));
    return out;
}

template <typename T>
void add_into(MatrixT<T>& acc, const MatrixT<T>& x) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += x.data()[i];
}

template <typename T>
GradientsT<T> backward_impl(const ForwardCacheT<T>& cache, const MatrixT<T>& features,
                            const std::vector<SparseOperator>& ops,
                            const VariantConfig& variant,
                            const std::vector<std::int32_t>& labels,
                            const std::vector<NodeId>& mask, const ModelParamsT<T>& params,
                            double lambda) {
    if (cache.mode != Mode::Train)
        throw std::invalid_argument("backward: cache must come from a train-mode forward");
    if (cache.dropped.cols() != params.w_class.rows() ||
        cache.embed_pre.cols() != params.w_embed.cols())
        throw std::invalid_argument("backward: cache/params mismatch");
    const std::int64_t p = params.embed_dim();

    GradientsT<T> grads;
    MatrixT<T> dlogits = softmax_grad(cache.logits, labels, mask);

    grads.w_class = matmul_at_b(cache.dropped, dlogits);
    add_l2(grads.w_class, params.w_class, lambda);

    MatrixT<T> dfinal = matmul_a_bt(dlogits, params.w_class);
    if (cache.dropout_keep < 1.0) {
        const T scale = static_cast<T>(1.0 / cache.dropout_keep);
        for (std::size_t i = 0; i < dfinal.size(); ++i)
            dfinal.data()[i] = cache.dropout_mask[i] ? dfinal.data()[i] * scale : T(0);
    }

    // adjoint of the jumping-knowledge concatenation: slice back per round
    std::vector<MatrixT<T>> dreps(static_cast<std::size_t>(variant.rounds) + 1);
    for (int k = 0; k <= variant.rounds; ++k)
        dreps[k] = MatrixT<T>(cache.reps[k].rows(), cache.reps[k].cols());
    {
        std::size_t offset = 0;
        for (int k : variant.jk_keep) {
            const std::size_t w = cache.reps[k].cols();
            add_into(dreps[k], slice_cols(dfinal, offset, w));
            offset += w;
        }
    }

    if (variant.nonlinear_rounds)
        grads.w_round.resize(params.w_round.size());
    for (int k = variant.rounds; k >= 1; --k) {
        if (variant.nonlinear_rounds) {
            MatrixT<T> dz = dreps[k];
            for (std::size_t i = 0; i < dz.size(); ++i)
                if (cache.round_pre[k].data()[i] <= T(0)) dz.data()[i] = T(0);
            grads.w_round[k - 1] = matmul_at_b(cache.round_in[k], dz);
            add_l2(grads.w_round[k - 1], params.w_round[k - 1], lambda);
            MatrixT<T> dc = matmul_a_bt(dz, params.w_round[k - 1]);
            const std::size_t width = cache.reps[k - 1].cols();
            add_into(dreps[k - 1], slice_cols(dc, 0, width));
            for (std::size_t i = 0; i < ops.size(); ++i)
                add_into(dreps[k - 1], spmm(ops[i], slice_cols(dc, (i + 1) * width, width)));
        } else {
            const std::size_t width = cache.reps[k - 1].cols();
            for (std::size_t i = 0; i < ops.size(); ++i)
                add_into(dreps[k - 1], spmm(ops[i], slice_cols(dreps[k], i * width, width)));
        }
    }

    MatrixT<T> dembed = std::move(dreps[0]);
    if (variant.embed_nonlinearity == Nonlinearity::ReLU) {
        for (std::size_t i = 0; i < dembed.size(); ++i)
            if (cache.embed_pre.data()[i] <= T(0)) dembed.data()[i] = T(0);
    }
    grads.w_embed = matmul_at_b(features, dembed);
    add_l2(grads.w_embed, params.w_embed, lambda);
    (void)p;
    return grads;
}

template <typename T>
void adam_update(MatrixT<T>& param, const MatrixT<T>& grad, MatrixT<T>& m, MatrixT<T>& v,
                 double lr, std::int64_t t) {
    if (m.size() != param.size()) m = MatrixT<T>(param.rows(), param.cols());
    if (v.size() != param.size()) v = MatrixT<T>(param.rows(), param.cols());
    const T b1 = static_cast<T>(kBeta1), b2 = static_cast<T>(kBeta2);
    const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(kBeta1, static_cast<double>(t))));
    const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(kBeta2, static_cast<double>(t))));
    const T step = static_cast<T>(lr), eps = static_cast<T>(kAdamEps);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad.data()[i];
        m.data()[i] = b1 * m.data()[i] + (T(1) - b1) * g;
        v.data()[i] = b2 * v.data()[i] + (T(1) - b2) * g * g;
        const T mhat = m.data()[i] * c1;
        const T vhat = v.data()[i] * c2;
        param.data()[i] -= step * mhat / (std::sqrt(vhat) + eps);
    }
}

template <typename T>
void adam_step_impl(ModelParamsT<T>& params, const GradientsT<T>& grads,
                    AdamStateT<T>& state, double lr) {
    ++state.t;
    if (state.m.w_round.size() != params.w_round.size()) {
        state.m.w_round.resize(params.w_round.size());
        state.v.w_round.resize(params.w_round.size());
    }
    adam_update(params.w_embed, grads.w_embed, state.m.w_embed, state.v.w_embed, lr, state.t);
    adam_update(params.w_class, grads.w_class, state.m.w_class, state.v.w_class, lr, state.t);
    for (std::size_t k = 0; k < params.w_round.size(); ++k)
        adam_update(params.w_round[k], grads.w_round[k], state.m.w_round[k],
                    state.v.w_round[k], lr, state.t);
}

template <typename T>
double accuracy_of(const MatrixT<T>& logits, const std::vector<std::int32_t>& labels,
                   const std::vector<NodeId>& subset) {
    if (subset.empty()) throw std::invalid_argument("evaluate: empty subset");
    std::int64_t correct = 0;
    for (NodeId v : subset) {
        const T* row = logits.row(v);
        std::int32_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (row[j] > row[best]) best = static_cast<std::int32_t>(j);
        if (best == labels[v]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(subset.size());
}

template <typename T>
MatrixT<T> forward_dispatch(const ModelParamsT<T>& params, const Graph& g,
                            const std::vector<SparseOperator>& ops,
                            const VariantConfig& variant, Mode mode, std::uint64_t seed,
                            ForwardCacheT<T>* cache) {
    return forward(params, g, ops, variant, mode, seed, cache);
}

template <typename T>
TrainResult train_impl(const Graph& g, const SplitAssignment& split,
                       const VariantConfig& variant, const TrainConfig& config) {
    config.validate();
    variant.validate();
    const auto train_idx = split.indices_of(SplitTag::Train);
    const auto val_idx = split.indices_of(SplitTag::Val);
    if (train_idx.empty() || val_idx.empty())
        throw std::invalid_argument("train: split needs nonempty train and val sets");

    const auto ops = build_operators(g, variant);
    ModelParams init = init_params(g.feature_dim(), config.embed_dim, g.num_classes(), variant,
                                   config.seed);
    ModelParamsT<T> params;
    if constexpr (std::is_same_v<T, double>)
        params = std::move(init);
    else
        params = to_float32(init);

    MatrixT<T> features;
    if constexpr (std::is_same_v<T, double>)
        features = g.features();
    else
        features = convert_matrix<double, float>(g.features());

    AdamStateT<T> state;
    TrainResult result;
    ModelParamsT<T> best = params;
    double best_val = -1.0;
    std::int64_t best_epoch = 0;
    std::int64_t since_improvement = 0;

    ForwardCacheT<T> cache;
    for (std::int64_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        forward_dispatch<T>(params, g, ops, variant, Mode::Train,
                            epoch_seed(config.seed, epoch), &cache);
        double train_loss;
        if constexpr (std::is_same_v<T, double>) {
            train_loss = loss(cache.logits, g.labels(), train_idx, params, config.l2);
        } else {
            // float path reuses the double loss on converted logits/params
            ModelParams p64;
            p64.w_embed = convert_matrix<float, double>(params.w_embed);
            p64.w_class = convert_matrix<float, double>(params.w_class);
            for (const auto& w : params.w_round)
                p64.w_round.push_back(convert_matrix<float, double>(w));
            train_loss = loss(convert_matrix<float, double>(cache.logits), g.labels(),
                              train_idx, p64, config.l2);
        }
        if (!std::isfinite(train_loss)) throw TrainDivergence(epoch);

        GradientsT<T> grads = backward_impl<T>(cache, features, ops, variant, g.labels(),
                                               train_idx, params, config.l2);
        adam_step_impl<T>(params, grads, state, config.learning_rate);

        MatrixT<T> eval_logits =
            forward_dispatch<T>(params, g, ops, variant, Mode::Eval, 0, nullptr);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = train_loss;
        stats.train_acc = accuracy_of(eval_logits, g.labels(), train_idx);
        stats.val_acc = accuracy_of(eval_logits, g.labels(), val_idx);
        result.history.push_back(stats);
        result.epochs_run = epoch;

        if (stats.val_acc > best_val) {
            best_val = stats.val_acc;
            best = params;
            best_epoch = epoch;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        if (since_improvement >= config.patience) break;
    }

    if constexpr (std::is_same_v<T, double>) {
        result.best_params = std::move(best);
    } else {
        result.best_params.w_embed = convert_matrix<float, double>(best.w_embed);
        result.best_params.w_class = convert_matrix<float, double>(best.w_class);
        for (const auto& w : best.w_round)
            result.best_params.w_round.push_back(convert_matrix<float, double>(w));
    }
    result.best_epoch = best_epoch;
    result.best_val_acc = best_val;
    return result;
}

}  // namespace

Gradients backward(const ForwardCache& cache, const Graph& g,
                   const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                   const std::vector<std::int32_t>& labels, const std::vector<NodeId>& mask,
                   const ModelParams& params, double lambda) {
    return backward_impl<double>(cache, g.features(), ops, variant, labels, mask, params,
                                 lambda);
}

void adam_step(ModelParams& params, const Gradients& grads, AdamStateT<double>& state,
               double lr) {
    adam_step_impl<double>(params, grads, state, lr);
}

TrainResult train(const Graph& g, const SplitAssignment& split, const VariantConfig& variant,
                  const TrainConfig& config) {
    if (config.precision == Precision::Float32)
        return train_impl<float>(g, split, variant, config);
    return train_impl<double>(g, split, variant, config);
}

double evaluate(const ModelParams& params, const Graph& g,
                const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                const std::vector<NodeId>& subset) {
    Matrix logits = forward(params, g, ops, variant, Mode::Eval, 0, nullptr);
    return accuracy_of(logits, g.labels(), subset);
}

void write_history(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "epoch,train_loss,train_acc,val_acc\n";
    char buf[128];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g\n",
                      static_cast<long long>(e.epoch), e.train_loss, e.train_acc, e.val_acc);
        out << buf;
    }
}

}  // namespace heterograph
