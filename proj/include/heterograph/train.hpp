#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "heterograph/model.hpp"
#include "heterograph/synth.hpp"

namespace heterograph {

template <typename T>
struct GradientsT {
    MatrixT<T> w_embed;
    MatrixT<T> w_class;
    std::vector<MatrixT<T>> w_round;
};
using Gradients = GradientsT<double>;

// Exact adjoint of the forward pass. The cache must come from a matching
// train-mode forward; the hop operators are symmetric, so the spmm adjoint
// reuses the same operator.
Gradients backward(const ForwardCache& cache, const Graph& g,
                   const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                   const std::vector<std::int32_t>& labels, const std::vector<NodeId>& mask,
                   const ModelParams& params, double lambda);

template <typename T>
struct AdamStateT {
    std::int64_t t = 0;
    GradientsT<T> m;
    GradientsT<T> v;
};
using AdamState = AdamStateT<double>;

// Adam with beta1=0.9, beta2=0.999, eps=1e-8 and bias correction.
void adam_step(ModelParams& params, const Gradients& grads, AdamStateT<double>& state,
               double lr);

enum class Precision { Float64, Float32 };

struct TrainConfig {
    double learning_rate = 0.01;
    double l2 = 5e-4;
    std::int64_t max_epochs = 2000;
    std::int64_t patience = 100;  // epochs without a validation improvement
    std::int64_t embed_dim = 64;  // p
    std::uint64_t seed = 0;
    Precision precision = Precision::Float64;

    void validate() const {
        if (learning_rate <= 0) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
        if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs < 1");
        if (patience < 0) throw std::invalid_argument("TrainConfig: negative patience");
        if (embed_dim < 1) throw std::invalid_argument("TrainConfig: embed_dim < 1");
        if (l2 < 0) throw std::invalid_argument("TrainConfig: negative l2");
    }
};

struct EpochStats {
    std::int64_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    ModelParams best_params;
    std::vector<EpochStats> history;
    std::int64_t best_epoch = 0;
    double best_val_acc = 0.0;
    std::int64_t epochs_run = 0;
};

struct TrainDivergence : std::runtime_error {
    explicit TrainDivergence(std::int64_t epoch)
        : std::runtime_error("training diverged (non-finite loss) at epoch " +
                             std::to_string(epoch)),
          epoch(epoch) {}
    std::int64_t epoch;
};

// Full-batch loop: forward(train) -> masked loss -> backward -> adam, with
// early stopping on validation accuracy. Returns the checkpoint with the
// best validation accuracy seen, not the last epoch.
TrainResult train(const Graph& g, const SplitAssignment& split, const VariantConfig& variant,
                  const TrainConfig& config);

double evaluate(const ModelParams& params, const Graph& g,
                const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                const std::vector<NodeId>& subset);

// history CSV: epoch,train_loss,train_acc,val_acc
void write_history(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace heterograph
