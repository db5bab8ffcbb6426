#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heterograph/graph.hpp"

namespace heterograph {

enum class Nonlinearity { ReLU, Identity };
enum class Mode { Train, Eval };

// One configuration point on the design axes:
//   D1  separate_embeddings — exact hop neighborhoods vs. self-loop-merged
//   D2  use_one_hop / use_two_hop — which hop operators feed each round
//   D3  jk_keep — which round outputs are concatenated for classification
// rounds == 0 degenerates to the MLP baseline.
struct VariantConfig {
    std::string name = "H2GCN2";
    int rounds = 2;  // K
    bool use_one_hop = true;
    bool use_two_hop = true;
    bool separate_embeddings = true;
    std::vector<int> jk_keep = {0, 1, 2};
    bool nonlinear_rounds = false;  // per-round learned transform + ReLU
    double dropout_rate = 0.5;
    Nonlinearity embed_nonlinearity = Nonlinearity::ReLU;

    void validate() const;
    int num_hop_ops() const { return (use_one_hop ? 1 : 0) + (use_two_hop ? 1 : 0); }
    // Width of r^(k) for embedding width p.
    std::int64_t round_dim(int k, std::int64_t p) const;
    // Width of the concatenated final representation.
    std::int64_t final_dim(std::int64_t p) const;
};

// Registry keyed by the ablation codes used in configs:
// MLP, S0 (=H2GCN1=K2), S1 (=N2), NS0, NS1, N0, N1, K0, K1, R2, NL, H2GCN2.
VariantConfig variant_from_code(const std::string& code);
const std::vector<std::string>& known_variant_codes();

// Degree-normalized hop operators in the order the forward pass consumes
// them (1-hop first). Merged variants get self-loop-augmented 1-hop.
std::vector<SparseOperator> build_operators(const Graph& g, const VariantConfig& variant);

template <typename T>
struct ModelParamsT {
    MatrixT<T> w_embed;                // F x p
    MatrixT<T> w_class;                // final_dim x |Y|
    std::vector<MatrixT<T>> w_round;   // per-round transforms (nonlinear_rounds only)

    std::int64_t embed_dim() const { return static_cast<std::int64_t>(w_embed.cols()); }
};
using ModelParams = ModelParamsT<double>;

ModelParams init_params(std::int64_t feature_dim, std::int64_t embed_dim,
                        std::int32_t num_classes, const VariantConfig& variant,
                        std::uint64_t seed);

// Everything forward() produced that backward() needs: round outputs,
// pre-activations, the dropout mask and the final concatenation.
template <typename T>
struct ForwardCacheT {
    Mode mode = Mode::Eval;
    MatrixT<T> embed_pre;              // X * W_e before the nonlinearity
    std::vector<MatrixT<T>> reps;      // r^(0) .. r^(K)
    std::vector<MatrixT<T>> round_in;  // per-round concat inputs (nonlinear_rounds)
    std::vector<MatrixT<T>> round_pre; // per-round pre-activations (nonlinear_rounds)
    MatrixT<T> final_concat;           // before dropout
    std::vector<std::uint8_t> dropout_mask;
    double dropout_keep = 1.0;
    MatrixT<T> dropped;                // classifier input
    MatrixT<T> logits;
};
using ForwardCache = ForwardCacheT<double>;

Matrix forward(const ModelParams& params, const Graph& g,
               const std::vector<SparseOperator>& ops, const VariantConfig& variant,
               Mode mode, std::uint64_t seed, ForwardCache* cache = nullptr);

// Masked mean cross entropy plus lambda * sum of squared Frobenius norms of
// every learnable matrix. Softmax lives here as a log-sum-exp.
double loss(const Matrix& logits, const std::vector<std::int32_t>& labels,
            const std::vector<NodeId>& mask, const ModelParams& params, double lambda);

// Row-wise argmax; ties break toward the smallest class index.
std::vector<std::int32_t> predict(const Matrix& logits);

// Flat binary checkpoint: magic, tensor count, per-tensor shape header and
// row-major float64 payload.
void save_params(const std::string& path, const ModelParams& params);
ModelParams load_params(const std::string& path);

// float32 pipeline (speed knob; tests and defaults use float64)
using ModelParamsF = ModelParamsT<float>;
using ForwardCacheF = ForwardCacheT<float>;
ModelParamsF to_float32(const ModelParams& params);
MatrixF forward(const ModelParamsF& params, const Graph& g,
                const std::vector<SparseOperator>& ops, const VariantConfig& variant,
                Mode mode, std::uint64_t seed, ForwardCacheF* cache = nullptr);

}  // namespace heterograph
