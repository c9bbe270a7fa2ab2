#pragma once

// Seeded generators for synthetic shift operators and sparse AR taps.

#include "gsoid/graph_core.hpp"
#include "gsoid/rng.hpp"
#include "gsoid/var_types.hpp"

#include <variant>
#include <vector>

namespace gsoid {

struct RandomParams {
    double lo_frac = 0.3;
    double hi_frac = 0.7;
};

struct PowerLawParams {
    int seed_nodes = 3;
    double seed_connect_prob = 0.8;
    int edges_per_node = 2;
    double lo_frac = 0.05;
    double hi_frac = 0.95;
};

struct SbmParams {
    std::vector<int> cluster_sizes{3, 4, 5};
    double base_diag = 0.25;
    double prob_jitter_lo = 0.05;
    double prob_jitter_hi = 0.2;
    double weight_rate = 2.0;
};

struct TopologySpec {
    int n = 12;
    double norm_factor = 1.5;
    std::variant<RandomParams, PowerLawParams, SbmParams> params = RandomParams{};

    TopologyKind kind() const noexcept;
    /// Throws InvalidArgument when the parameters are inconsistent.
    void validate() const;

    static TopologySpec random(int n = 12);
    static TopologySpec power_law(int n = 12);
    static TopologySpec sbm(int n = 12);
};

/// Bookkeeping of one SBM draw, for tests and diagnostics.
struct SbmDraw {
    Matrix probabilities;             // k x k, symmetric
    std::vector<int> cluster_of;      // vertex -> cluster index
    Eigen::MatrixXi connected;        // n x n, symmetric 0/1, zero diagonal
    Matrix raw_weights;               // before spectral normalization
    GsoMatrix gso;                    // normalized result
};

/// Draw a GSO. Deterministic in (spec, seed). All-zero draws are retried up to
/// 100 times before DegenerateInput is thrown.
GsoMatrix gen_gso(const TopologySpec& spec, RngSeed seed);

/// Pre-normalization matrix of a single attempt (no retry, no normalization).
Matrix gen_gso_raw(const TopologySpec& spec, Rng& rng);

/// SBM draw with its bookkeeping. Same retry policy and result as gen_gso.
SbmDraw gen_sbm_detailed(const TopologySpec& spec, RngSeed seed);

/// Entries outside [lo_frac, hi_frac] * max|m| are set to zero.
void band_threshold(Matrix& m, double lo_frac, double hi_frac);

/// Taps h_{ij}, 1<=i<=p_order, 0<=j<=i: zero with probability zero_prob,
/// otherwise u / 2^{i+j} with u drawn from U(-1,-0.45) or U(0.45,1) with equal odds.
ArCoefficients gen_ar_coeffs(int p_order, RngSeed seed, double zero_prob = 0.25);

}  // namespace gsoid
