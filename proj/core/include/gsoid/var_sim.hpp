#pragma once

// Causal vertex-time AR process:  x_t = sum_p Psi_p x_{t-p} + w_t,
// Psi_p = H_p(W, h_p), with x_i = 0 for i <= 0.

#include "gsoid/graph_core.hpp"
#include "gsoid/rng.hpp"
#include "gsoid/var_types.hpp"

#include <filesystem>
#include <vector>

namespace gsoid {

struct SignalStream {
    Eigen::Index n = 0;
    std::vector<Vector> samples;  // x_1 .. x_T (after burn-in)
    std::vector<Vector> noise;    // matching w_t
    long burn_in_discarded = 0;

    std::size_t size() const noexcept { return samples.size(); }
    /// 1-based access; zero vector for t <= 0.
    Vector at(long t) const;
};

/// [Psi_1, ..., Psi_P], Psi_p = graph_filter(W, h_p).
std::vector<Matrix> build_psi(const GsoMatrix& w, const ArCoefficients& coeffs);

/// Largest |eigenvalue| of the NP x NP companion matrix of the recursion.
double companion_spectral_radius(const std::vector<Matrix>& psi);

struct SimulateOptions {
    double noise_std = 1.0;           // 0 gives the noiseless test hook
    double divergence_limit = 1e6;
};

/// Draws w_t ~ N(0, noise_std^2 I), runs t_total steps, drops the first burn_in.
SignalStream simulate(const GsoMatrix& w, const ArCoefficients& coeffs, long t_total, long burn_in,
                      RngSeed seed, const SimulateOptions& opts = {});

/// Same recursion driven by an explicit innovation record (no burn-in).
SignalStream simulate_with_noise(const std::vector<Matrix>& psi, const std::vector<Vector>& noise,
                                 double divergence_limit = 1e6);

/// x_{P,t} = [x_{t-1}; ...; x_{t-P}], zero-filled before the first sample. t is 1-based.
Vector lag_stack(const SignalStream& stream, long t, int p_order);

/// Signal CSV: one row per time step, N columns.
void write_signal_csv(const std::filesystem::path& path, const SignalStream& stream);
SignalStream read_signal_csv(const std::filesystem::path& path);

/// Coefficient CSV: ragged, row p holds the p + 1 taps of block p.
void write_coeffs_csv(const std::filesystem::path& path, const ArCoefficients& coeffs);
ArCoefficients read_coeffs_csv(const std::filesystem::path& path);

}  // namespace gsoid
