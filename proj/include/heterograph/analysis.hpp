#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heterograph/graph.hpp"

namespace heterograph {

// Closed-form perturbation thresholds for the two simplified GCN layer
// formulations: |delta1| for (A+I)XW, |delta2| for AXW, plus the homophily
// level where they coincide. Degenerate parameter combinations are tagged
// singular instead of silently evaluated.
struct PerturbationReport {
    double h = 0.0;
    std::int64_t d = 0;
    std::int32_t num_classes = 0;
    double delta1_abs = 0.0;
    double delta2_abs = 0.0;
    double crossover_h = 0.0;
    bool singular_self_loop = false;  // (d+1)(|Y|-1+(|Y|h-1)d) == 0
    bool singular_no_self_loop = false;  // h == 1/|Y|
    // "self_loop" when |delta1| < |delta2|, "no_self_loop" when greater,
    // "equal" at the crossover, "singular" when either side degenerates.
    std::string less_robust;
};

PerturbationReport gcn_perturbation_thresholds(double h, std::int64_t d,
                                               std::int32_t num_classes);

// Builds the circulant aggregated-feature matrices of the robustness proof
// and multiplies them by their closed-form inverses; returns the largest
// max-norm residual against the identity over both formulations.
double verify_optimal_weight(double h, std::int64_t d, std::int32_t num_classes);

// Closed-form circulant inverses themselves (exposed for oracle checks).
Matrix optimal_weight_self_loop(double h, std::int64_t d, std::int32_t num_classes);
Matrix optimal_weight_no_self_loop(double h, std::int64_t d, std::int32_t num_classes);
Matrix aggregated_features_self_loop(double h, std::int64_t d, std::int32_t num_classes);
Matrix aggregated_features_no_self_loop(double h, std::int64_t d, std::int32_t num_classes);

struct TwoHopReport {
    Matrix p_squared;
    double min_margin = 0.0;       // min over i != j of [P^2]_ii - [P^2]_ij
    double expected_margin = 0.0;  // (h - rho)^2 with rho = (1-h)/(|Y|-1)
};

TwoHopReport two_hop_compatibility(double h, std::int32_t num_classes);

// Smoothness score of a signal: the directed-edge sum
// sum_u sum_{v in N(u)} (s_u - s_v)^2, cross-checked against the Laplacian
// quadratic form (they must agree exactly on binary signals).
double smoothness(const Matrix& laplacian, const std::vector<double>& signal);
double smoothness(const Graph& g, const std::vector<double>& signal);

// h_s = 1 - smoothness / (2|E|); equals edge_homophily when the signal is
// the label vector of a two-class graph.
double homophily_from_smoothness(const Graph& g, const std::vector<double>& signal);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // row i is the eigenvector of eigenvalues[i]
    double offdiag_residual = 0.0;    // Frobenius norm of the remaining off-diagonal
    int sweeps = 0;
};

// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius norm
// drops below rel_tol * ||A||_F. Strictly sequential sweeps, deterministic.
EigenDecomposition jacobi_eigendecomposition(Matrix a, double rel_tol = 1e-12,
                                             int max_sweeps = 64);

struct SignalSpectrum {
    std::vector<double> coefficients;  // c_i = s^T v_i
    std::vector<double> tail_energy;   // tail_energy[M] = sum_{i >= M} c_i^2
    double smoothness = 0.0;           // directed-edge convention
    double homophily = 0.0;            // NaN for non-binary signals
    double norm_sq = 0.0;
};

struct SpectralReport {
    EigenDecomposition eig;
    std::vector<SignalSpectrum> signals;
    double parseval_residual = 0.0;  // max |sum c^2 - ||s||^2| over signals
};

// Full dense eigendecomposition of L (n capped at 2000) plus per-signal
// spectra and tail energies for every cutoff M.
SpectralReport spectral_energy(const Matrix& laplacian,
                               const std::vector<std::vector<double>>& signals);

// Smallest M in (0, n-1] with tail_s(M) > tail_t(M); h_s < h_t guarantees
// one exists.
std::optional<std::int64_t> energy_dominance(const Graph& g, const std::vector<double>& s,
                                             const std::vector<double>& t);

struct DegreeBucket {
    std::int64_t lo = 0;  // inclusive
    std::int64_t hi = 0;  // exclusive; hi < 0 means unbounded
    std::int64_t count = 0;
    std::int64_t correct = 0;
    std::optional<double> accuracy;  // absent for empty buckets
};

std::vector<DegreeBucket> degree_bucket_accuracy(const std::vector<std::int32_t>& predictions,
                                                 const std::vector<std::int32_t>& labels,
                                                 const Graph& g,
                                                 const std::vector<std::int64_t>& boundaries,
                                                 const std::vector<NodeId>& subset);

}  // namespace heterograph
