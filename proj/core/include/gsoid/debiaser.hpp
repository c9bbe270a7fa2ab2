#pragma once

// Support-restricted re-estimation of Psi (and hence W) followed by a
// sparsity-attracting LMS fit of the filter taps h.
//
// Sign conventions: the h update descends the least-squares cost,
//   h_t = h_{t-1} + rho_t (Y_t' e_t - eta_t b_t),           instantaneous form
//   h_t = h_{t-1} - rho_t (C_t h_{t-1} - u_t + eta_t b_t),  recursive form
// with b_i = sign(h_i) / (eps + |h_i|), sign(0) = 0. Taken literally, the
// textbook form adds eta_t b_t and +(C h - u), which ascends the cost.

#include "gsoid/graph_core.hpp"
#include "gsoid/identifier.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace gsoid {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class MaskRule {
    /// Block p allows entries reachable within p hops of the W support (plus self).
    Reachability,
    /// Every block copies the W support (plus the diagonal).
    FirstBlockPattern,
};

struct SupportMask {
    BoolMatrix psi_mask;  // N x NP
    BoolMatrix w_mask;    // N x N
};

/// support_eps is relative to max|W*|. Throws DegenerateInput when W* is all zero.
SupportMask build_support_mask(const Matrix& w_star, int p_order, double support_eps = 1e-6,
                               MaskRule rule = MaskRule::Reachability);

struct DebiasOptions {
    double lambda = 1.0;      // forgetting factor of the resumed correlations
    double eta = 0.0;         // attractor weight, eta_t = eta * max|Y' x|
    double epsilon = 0.1;     // attractor regularizer
    double delta = 0.0;       // stop once |e_t| < delta
    bool recursive_h = false; // use C_t, u_t instead of the instantaneous gradient
};

struct DebiasState {
    IdentifierState core;  // correlations, lag buffer, time index
    Matrix psi;            // N x NP, zero outside the mask
    Matrix w_hat;          // Psi_1
    Vector h_hat;          // M taps
    Matrix c;              // M x M
    Vector u;              // M
    Vector e;              // last h residual x_t - Y_t h_{t-1}
    double rho = 0.0;
    long armijo_failures = 0;
    std::vector<double> alphas;

    /// Picks up where the identifier stopped; psi starts as mask o Psi_{T*}.
    static DebiasState resume(const IdentifierState& from, const SupportMask& mask);
};

/// Masked least-squares descent for the current t (correlations already updated).
void debias_descend(DebiasState& state, const SupportMask& mask, const StepsizeController& sc);

/// update_correlations + debias_descend.
void debias_step(DebiasState& state, const SupportMask& mask, const Vector& x_t, double lambda,
                 const StepsizeController& sc);

/// Y_t = [x_{t-1}, W x_{t-1}, x_{t-2}, W x_{t-2}, W^2 x_{t-2}, ...], N x M.
Matrix build_regressor(const Matrix& w_hat, const Vector& x_lag, int p_order);

/// b_i = sign(h_i) / (eps + |h_i|).
Vector attractor(const Vector& h, double eps);

/// h + rho (Y'(x - Y h) - eta_t b(h)).
Vector gar_lms_update(const Vector& h, const Matrix& y, const Vector& x, double rho, double eta_t, double eps);

/// Taps update for the current t using x_{P,t} from the state; rho by Armijo.
void estimate_h_step(DebiasState& state, const Vector& x_t, const DebiasOptions& opts,
                     const StepsizeController& sc);

struct Algorithm2Result {
    DebiasState state;
    Matrix w_hat;
    Vector h_hat;
    std::vector<double> sigma;  // |e_t|^2 / |x_t|^2 with the h residual
    std::vector<double> zeta;   // empty unless w_true given
    long steps = 0;
};

struct Algorithm2Options {
    std::optional<Matrix> w_true;
    std::function<void(const DebiasState&)> on_step;
};

/// Runs from t = from.t + 1 over stream samples [first, last] (1-based), or
/// until |e_t| < delta.
Algorithm2Result run_algorithm2(const IdentifierState& from, const SignalStream& stream, long first, long last,
                                const SupportMask& mask, const DebiasOptions& opts,
                                const StepsizeController& sc, const Algorithm2Options& run_opts = {});

}  // namespace gsoid
