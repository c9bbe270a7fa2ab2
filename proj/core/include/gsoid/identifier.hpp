#pragma once

// Online identification of the lag matrices Psi_p and of the shift operator W
// by split gradient projection.
//
// Every signed unknown is carried as the difference of two entrywise
// non-negative matrices (Psi = Psi+ - Psi-, W = W+ - W-), so the l1 penalties
// become linear and a projected step onto the non-negative orthant produces
// exact zeros.
//
// Objectives the step sizes are searched on (t = current time):
//
//   psi sub-problem
//     F(Psi) = 1/2 sum_tau lambda^{t-tau} |x_tau - Psi x_{P,tau}|^2
//            + sum_p mu_{p,t} (1'Psi+_p 1 + 1'Psi-_p 1)
//            + gamma/4 sum_{i != j} |[Psi_i, Psi_j]|_F^2          (path 2 only)
//
//   W sub-problem (path 1)
//     F_W(W) = 1/2 |Psi_1 - W|_F^2 + mu_W (1'W+ 1 + 1'W- 1)
//            + gamma/2 sum_{p>=2} |[W, Psi_p]|_F^2
//
// The commutator weights gamma/4 and gamma/2 are exactly the ones whose
// gradients are gamma*Q_t and gamma*S_t, i.e. the update matrices below.
//
// mu_{p,t} is on the scale of the correlations P_t, while F_W is on the scale
// of Psi_1 itself, so by default the W step uses mu_W = mu_1 * max|Psi_{1,t}|.

#include "gsoid/graph_core.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace gsoid {

struct SignalStream;

enum class Path {
    /// Q_t = 0 in the psi step; commutator enforced in the separate W step.
    Path1 = 1,
    /// Commutator in the psi step; W_t := Psi_{1,t}.
    Path2 = 2,
};

enum class WThreshold {
    /// mu_1 * max|Psi_{1,t}|: the adaptive rule applied to the W sub-problem's own data term.
    SubproblemAdaptive,
    /// mu_{1,t} of the psi step, reused as is.
    Literal,
};

struct HyperParams {
    std::vector<double> mu;  // mu_1 >= mu_2 >= ... >= mu_P >= 0
    double gamma = 0.0;
    double lambda = 1.0;     // forgetting factor in (0, 1]
    Path path = Path::Path1;
    bool adjacency_only = false;  // pin Psi- and W- to zero
    WThreshold w_threshold = WThreshold::SubproblemAdaptive;

    void validate(int p_order) const;
};

struct StepsizeController {
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 40;
    double min_step = 1e-8;
    double init_eps = 1e-8;
    /// Skip the search and use this step everywhere (tests, replays).
    std::optional<double> fixed_step;

    void validate() const;
};

struct StepDiagnostics {
    std::vector<double> alphas;  // per-lag psi step sizes of the last step
    double beta = 0.0;           // W step size of the last step (path 1)
    int backtracks = 0;
    int floored = 0;
};

struct IdentifierState {
    Eigen::Index n = 0;
    int p_order = 0;
    long t = 0;

    Matrix psi_plus, psi_minus;  // N x NP
    Matrix w_plus, w_minus;      // N x N
    Matrix r;                    // NP x NP, sum lambda^{t-tau} x_{P,tau} x_{P,tau}'
    Matrix p_corr;               // N x NP, sum lambda^{t-tau} x_tau x_{P,tau}'
    Matrix q;                    // N x NP commutator gradient
    Matrix s;                    // N x N commutator gradient of the W step
    double data_energy = 0.0;    // sum lambda^{t-tau} |x_tau|^2

    /// x_{t-1}, ..., x_{t-P} after the last update (newest first).
    std::vector<Vector> history;
    /// x_{P,t} of the current step.
    Vector x_lag;
    Vector mu_t;
    double mu_w = 0.0;  // threshold of the last W step

    double last_objective = 0.0;
    long armijo_failures = 0;
    StepDiagnostics last_step;

    static IdentifierState zeros(Eigen::Index n, int p_order);

    Matrix psi() const { return psi_plus - psi_minus; }
    Matrix w_hat() const { return w_plus - w_minus; }
    Matrix psi_block(int p) const;  // 1-based
};

/// Shifts x_t into the lag buffer: R_t = lambda R_{t-1} + x_{P,t} x_{P,t}',
/// P_t = lambda P_{t-1} + x_t x_{P,t}'.
void update_correlations(IdentifierState& state, const Vector& x_t, double lambda);

/// Q_p = sum_{k != p} ([Psi_p, Psi_k] Psi_k' - Psi_k' [Psi_p, Psi_k]), blocks concatenated.
Matrix commutator_gradient(const Matrix& psi, int p_order);

/// Stores Q_t in the state (zero on path 1) and returns it.
const Matrix& compute_commutator_grad_q(IdentifierState& state, const HyperParams& hp);

/// mu_{p,t} = mu_p * max|P_{p,t} - gamma Q_{p,t}|.
Vector adaptive_mu(const HyperParams& hp, const IdentifierState& state);

/// Threshold of the path-1 W step for the current Psi_1 (see WThreshold).
double w_threshold(const IdentifierState& state, const HyperParams& hp);

/// G_t = Psi_{t-1} R_t - (P_t - gamma Q_t).
Matrix psi_gradient(const IdentifierState& state, const HyperParams& hp);

/// Value of the psi objective at the given splits (see header comment).
double psi_objective(const IdentifierState& state, const HyperParams& hp, const Vector& mu_t,
                     const Matrix& psi_plus, const Matrix& psi_minus);

/// Value of the path-1 W objective at the given splits.
double w_objective(const IdentifierState& state, const HyperParams& hp, double mu1_t,
                   const Matrix& w_plus, const Matrix& w_minus);

/// Projected split update of the psi matrices with per-lag steps.
void apply_psi_update(IdentifierState& state, const Matrix& m, const Matrix& g,
                      const std::vector<double>& alphas, bool adjacency_only);

/// One projected-gradient step on Psi; expects correlations already updated for t.
void step_psi(IdentifierState& state, const HyperParams& hp, const StepsizeController& sc);

/// W estimate for this t (path 2: copy Psi_1, path 1: projected step on F_W).
void step_w(IdentifierState& state, const HyperParams& hp, const StepsizeController& sc);

struct PlateauRule {
    int window = 50;
    double rel_change = 1e-3;
};

struct Algorithm1Options {
    std::optional<Matrix> w_true;            // enables the zeta trace
    std::optional<PlateauRule> plateau;      // optional early stop
    std::function<void(const IdentifierState&)> on_step;
};

struct Algorithm1Result {
    IdentifierState state;
    Matrix w_star;
    std::vector<double> sigma;   // one-step prediction NMSE
    std::vector<double> zeta;    // empty unless w_true given
    std::vector<long> nnz;       // non-zeros of W_t
    std::vector<std::vector<double>> alphas;
    long steps = 0;
};

/// Runs t = 1..t_star from a zero state.
Algorithm1Result run_algorithm1(const SignalStream& stream, const HyperParams& hp,
                                const StepsizeController& sc, long t_star,
                                const Algorithm1Options& opts = {});

}  // namespace gsoid
