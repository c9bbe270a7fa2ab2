#include "gsoid/identifier.hpp"

#include "gsoid/errors.hpp"
#include "gsoid/metrics.hpp"
#include "gsoid/var_sim.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gsoid {

void HyperParams::validate(int p_order) const {
    if (static_cast<int>(mu.size()) != p_order) {
        throw InvalidArgument("HyperParams: expected " + std::to_string(p_order) + " mu values, got " +
                              std::to_string(mu.size()));
    }
    for (std::size_t p = 0; p < mu.size(); ++p) {
        if (!(mu[p] >= 0.0)) throw InvalidArgument("HyperParams: mu must be non-negative");
        if (p > 0 && mu[p] > mu[p - 1]) throw InvalidArgument("HyperParams: mu must be non-increasing in p");
    }
    if (!(gamma >= 0.0)) throw InvalidArgument("HyperParams: gamma must be non-negative");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("HyperParams: lambda must be in (0, 1]");
}

void StepsizeController::validate() const {
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("StepsizeController: armijo_c in (0,1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("StepsizeController: shrink in (0,1)");
    if (max_backtracks < 0) throw InvalidArgument("StepsizeController: max_backtracks >= 0");
    if (!(min_step > 0.0)) throw InvalidArgument("StepsizeController: min_step > 0");
    if (fixed_step && !(*fixed_step > 0.0)) throw InvalidArgument("StepsizeController: fixed_step > 0");
}

IdentifierState IdentifierState::zeros(Eigen::Index n, int p_order) {
    if (n <= 0 || p_order <= 0) throw InvalidArgument("IdentifierState: n and p_order must be positive");
    const Eigen::Index np = n * p_order;
    IdentifierState s;
    s.n = n;
    s.p_order = p_order;
    s.psi_plus = Matrix::Zero(n, np);
    s.psi_minus = Matrix::Zero(n, np);
    s.w_plus = Matrix::Zero(n, n);
    s.w_minus = Matrix::Zero(n, n);
    s.r = Matrix::Zero(np, np);
    s.p_corr = Matrix::Zero(n, np);
    s.q = Matrix::Zero(n, np);
    s.s = Matrix::Zero(n, n);
    s.history.assign(static_cast<std::size_t>(p_order), Vector::Zero(n));
    s.x_lag = Vector::Zero(np);
    s.mu_t = Vector::Zero(p_order);
    return s;
}

Matrix IdentifierState::psi_block(int p) const {
    if (p < 1 || p > p_order) throw InvalidArgument("psi_block: lag out of range");
    return (psi_plus.middleCols((p - 1) * n, n) - psi_minus.middleCols((p - 1) * n, n));
}

void update_correlations(IdentifierState& state, const Vector& x_t, double lambda) {
    if (x_t.size() != state.n) throw InvalidArgument("update_correlations: sample has wrong dimension");
    const Eigen::Index n = state.n;
    for (int p = 0; p < state.p_order; ++p) {
        state.x_lag.segment(p * n, n) = state.history[static_cast<std::size_t>(p)];
    }
    state.r *= lambda;
    state.r.noalias() += state.x_lag * state.x_lag.transpose();
    state.p_corr *= lambda;
    state.p_corr.noalias() += x_t * state.x_lag.transpose();
    state.data_energy = lambda * state.data_energy + x_t.squaredNorm();

    for (std::size_t p = state.history.size() - 1; p > 0; --p) state.history[p] = state.history[p - 1];
    state.history.front() = x_t;
    ++state.t;
}

Matrix commutator_gradient(const Matrix& psi, int p_order) {
    const Eigen::Index n = psi.rows();
    if (psi.cols() != n * p_order) throw InvalidArgument("commutator_gradient: psi must be N x NP");
    Matrix q = Matrix::Zero(n, n * p_order);
    Matrix c(n, n);
    for (int p = 0; p < p_order; ++p) {
        const auto psi_p = psi.middleCols(p * n, n);
        auto q_p = q.middleCols(p * n, n);
        for (int k = 0; k < p_order; ++k) {
            if (k == p) continue;
            const auto psi_k = psi.middleCols(k * n, n);
            c.noalias() = psi_p * psi_k;
            c.noalias() -= psi_k * psi_p;
            q_p.noalias() += c * psi_k.transpose();
            q_p.noalias() -= psi_k.transpose() * c;
        }
    }
    return q;
}

const Matrix& compute_commutator_grad_q(IdentifierState& state, const HyperParams& hp) {
    if (hp.path == Path::Path2 && hp.gamma != 0.0 && state.p_order > 1) {
        state.q = commutator_gradient(state.psi(), state.p_order);
    } else {
        state.q.setZero();
    }
    return state.q;
}

Vector adaptive_mu(const HyperParams& hp, const IdentifierState& state) {
    const Eigen::Index n = state.n;
    Vector mu_t(state.p_order);
    for (int p = 0; p < state.p_order; ++p) {
        const double mu_p = hp.mu[static_cast<std::size_t>(p)];
        if (mu_p == 0.0) {
            mu_t[p] = 0.0;
            continue;
        }
        const double peak =
            (state.p_corr.middleCols(p * n, n) - hp.gamma * state.q.middleCols(p * n, n)).cwiseAbs().maxCoeff();
        mu_t[p] = mu_p * peak;
    }
    return mu_t;
}

Matrix psi_gradient(const IdentifierState& state, const HyperParams& hp) {
    Matrix g = state.psi() * state.r;
    g -= state.p_corr;
    g += hp.gamma * state.q;
    return g;
}

namespace {

double commutator_penalty_psi(const Matrix& psi, int p_order) {
    const Eigen::Index n = psi.rows();
    double sum = 0.0;
    for (int i = 0; i < p_order; ++i) {
        for (int j = i + 1; j < p_order; ++j) {
            const auto a = psi.middleCols(i * n, n);
            const auto b = psi.middleCols(j * n, n);
            sum += (a * b - b * a).squaredNorm();
        }
    }
    // sum over i < j; gamma/4 over ordered pairs equals gamma/2 over this sum
    return sum;
}

double commutator_penalty_w(const Matrix& w, const Matrix& psi, int p_order) {
    const Eigen::Index n = w.rows();
    double sum = 0.0;
    for (int k = 1; k < p_order; ++k) {
        const auto b = psi.middleCols(k * n, n);
        sum += (w * b - b * w).squaredNorm();
    }
    return sum;
}

double frobenius_dot(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
    return (a.array() * b.array()).sum();
}

/// Change of the psi objective when block p (0-based) moves from the current
/// splits to (new_plus, new_minus), all other blocks fixed.
double psi_block_delta(const IdentifierState& state, const HyperParams& hp, const Matrix& psi,
                       const Matrix& data_grad, int p, double mu_p, const Matrix& new_plus,
                       const Matrix& new_minus) {
    const Eigen::Index n = state.n;
    const auto old_plus = state.psi_plus.middleCols(p * n, n);
    const auto old_minus = state.psi_minus.middleCols(p * n, n);
    const Matrix delta = (new_plus - new_minus) - (old_plus - old_minus);

    const auto r_pp = state.r.block(p * n, p * n, n, n);
    double change = frobenius_dot(delta, data_grad.middleCols(p * n, n)) +
                    0.5 * frobenius_dot(delta * r_pp, delta);
    change += mu_p * (new_plus.sum() + new_minus.sum() - old_plus.sum() - old_minus.sum());

    if (hp.path == Path::Path2 && hp.gamma != 0.0) {
        const Matrix old_block = old_plus - old_minus;
        const Matrix new_block = new_plus - new_minus;
        double comm = 0.0;
        for (int k = 0; k < state.p_order; ++k) {
            if (k == p) continue;
            const auto b = psi.middleCols(k * n, n);
            comm += (new_block * b - b * new_block).squaredNorm() - (old_block * b - b * old_block).squaredNorm();
        }
        change += 0.5 * hp.gamma * comm;
    }
    return change;
}

Matrix positive_part(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace

double psi_objective(const IdentifierState& state, const HyperParams& hp, const Vector& mu_t,
                     const Matrix& psi_plus, const Matrix& psi_minus) {
    const Eigen::Index n = state.n;
    const Matrix psi = psi_plus - psi_minus;
    double f = 0.5 * state.data_energy - frobenius_dot(psi, state.p_corr) +
               0.5 * frobenius_dot(psi * state.r, psi);
    for (int p = 0; p < state.p_order; ++p) {
        f += mu_t[p] * (psi_plus.middleCols(p * n, n).sum() + psi_minus.middleCols(p * n, n).sum());
    }
    if (hp.path == Path::Path2 && hp.gamma != 0.0) {
        f += 0.5 * hp.gamma * commutator_penalty_psi(psi, state.p_order);
    }
    return f;
}

double w_objective(const IdentifierState& state, const HyperParams& hp, double mu1_t, const Matrix& w_plus,
                   const Matrix& w_minus) {
    const Matrix psi = state.psi();
    const Matrix w = w_plus - w_minus;
    double f = 0.5 * (psi.leftCols(state.n) - w).squaredNorm() + mu1_t * (w_plus.sum() + w_minus.sum());
    if (hp.gamma != 0.0) f += 0.5 * hp.gamma * commutator_penalty_w(w, psi, state.p_order);
    return f;
}

void apply_psi_update(IdentifierState& state, const Matrix& m, const Matrix& g, const std::vector<double>& alphas,
                      bool adjacency_only) {
    const Eigen::Index n = state.n;
    for (int p = 0; p < state.p_order; ++p) {
        const double a = alphas[static_cast<std::size_t>(p)];
        auto plus = state.psi_plus.middleCols(p * n, n);
        auto minus = state.psi_minus.middleCols(p * n, n);
        const auto m_p = m.middleCols(p * n, n);
        const auto g_p = g.middleCols(p * n, n);
        plus = (plus - a * (m_p + g_p)).cwiseMax(0.0);
        if (adjacency_only) {
            minus.setZero();
        } else {
            minus = (minus - a * (m_p - g_p)).cwiseMax(0.0);
        }
    }
}

void step_psi(IdentifierState& state, const HyperParams& hp, const StepsizeController& sc) {
    const Eigen::Index n = state.n;
    compute_commutator_grad_q(state, hp);
    state.mu_t = adaptive_mu(hp, state);

    const Matrix psi = state.psi();
    Matrix data_grad = psi * state.r;
    data_grad -= state.p_corr;
    const Matrix g = data_grad + hp.gamma * state.q;

    Matrix m(n, n * state.p_order);
    for (int p = 0; p < state.p_order; ++p) m.middleCols(p * n, n).setConstant(state.mu_t[p]);

    StepDiagnostics diag;
    diag.alphas.assign(static_cast<std::size_t>(state.p_order), 0.0);
    const double alpha0 = 1.0 / (state.r.trace() / state.p_order + sc.init_eps);

    for (int p = 0; p < state.p_order; ++p) {
        const auto m_p = m.middleCols(p * n, n);
        const auto g_p = g.middleCols(p * n, n);
        const Matrix d_plus = m_p + g_p;
        const Matrix d_minus = m_p - g_p;
        const auto old_plus = state.psi_plus.middleCols(p * n, n);
        const auto old_minus = state.psi_minus.middleCols(p * n, n);

        if (sc.fixed_step) {
            diag.alphas[static_cast<std::size_t>(p)] = *sc.fixed_step;
            continue;
        }

        double alpha = alpha0;
        bool accepted = false;
        for (int bt = 0; bt <= sc.max_backtracks; ++bt) {
            const Matrix new_plus = positive_part(old_plus - alpha * d_plus);
            const Matrix new_minus =
                hp.adjacency_only ? Matrix::Zero(n, n) : positive_part(old_minus - alpha * d_minus);
            const double change =
                psi_block_delta(state, hp, psi, data_grad, p, state.mu_t[p], new_plus, new_minus);
            const double predicted =
                frobenius_dot(d_plus, old_plus - new_plus) + frobenius_dot(d_minus, old_minus - new_minus);
            if (change <= -sc.armijo_c * predicted) {
                accepted = true;
                break;
            }
            alpha *= sc.shrink;
            ++diag.backtracks;
        }
        if (!accepted) {
            alpha = sc.min_step;
            ++diag.floored;
            ++state.armijo_failures;
        }
        diag.alphas[static_cast<std::size_t>(p)] = alpha;
    }

    if (!sc.fixed_step && state.p_order > 1) {
        // Blocks are coupled through the off-diagonal blocks of R, so steps that
        // are each acceptable alone can overshoot together. Shrink them jointly
        // until the combined update also passes the test on the full objective.
        const double f0 = psi_objective(state, hp, state.mu_t, state.psi_plus, state.psi_minus);
        IdentifierState trial = state;
        bool accepted = false;
        for (int bt = 0; bt <= sc.max_backtracks; ++bt) {
            trial.psi_plus = state.psi_plus;
            trial.psi_minus = state.psi_minus;
            apply_psi_update(trial, m, g, diag.alphas, hp.adjacency_only);
            const double change = psi_objective(state, hp, state.mu_t, trial.psi_plus, trial.psi_minus) - f0;
            const double predicted = frobenius_dot(m + g, state.psi_plus - trial.psi_plus) +
                                     frobenius_dot(m - g, state.psi_minus - trial.psi_minus);
            if (change <= -sc.armijo_c * predicted) {
                accepted = true;
                break;
            }
            for (auto& a : diag.alphas) a *= sc.shrink;
            ++diag.backtracks;
        }
        if (!accepted) {
            for (auto& a : diag.alphas) a = sc.min_step;
            ++diag.floored;
            ++state.armijo_failures;
        }
    }

    apply_psi_update(state, m, g, diag.alphas, hp.adjacency_only);
    state.last_objective = psi_objective(state, hp, state.mu_t, state.psi_plus, state.psi_minus);
    diag.beta = state.last_step.beta;
    state.last_step = std::move(diag);
}

double w_threshold(const IdentifierState& state, const HyperParams& hp) {
    if (hp.w_threshold == WThreshold::Literal) return state.mu_t.size() ? state.mu_t[0] : 0.0;
    if (hp.mu.empty() || state.psi_plus.size() == 0) return 0.0;
    const Eigen::Index n = state.n;
    const Matrix psi1 = state.psi_plus.leftCols(n) - state.psi_minus.leftCols(n);
    return hp.mu.front() * psi1.cwiseAbs().maxCoeff();
}

void step_w(IdentifierState& state, const HyperParams& hp, const StepsizeController& sc) {
    const Eigen::Index n = state.n;
    if (hp.path == Path::Path2) {
        state.w_plus = state.psi_plus.leftCols(n);
        state.w_minus = state.psi_minus.leftCols(n);
        state.s.setZero();
        state.last_step.beta = 0.0;
        return;
    }

    const Matrix psi = state.psi();
    const Matrix w = state.w_hat();
    state.s.setZero();
    if (hp.gamma != 0.0) {
        Matrix c(n, n);
        for (int k = 1; k < state.p_order; ++k) {
            const auto b = psi.middleCols(k * n, n);
            c.noalias() = w * b;
            c.noalias() -= b * w;
            state.s.noalias() += c * b.transpose();
            state.s.noalias() -= b.transpose() * c;
        }
    }
    const Matrix v = w - (psi.leftCols(n) - hp.gamma * state.s);
    const double mu1 = w_threshold(state, hp);
    state.mu_w = mu1;
    const Matrix d_plus = (v.array() + mu1).matrix();
    const Matrix d_minus = (mu1 - v.array()).matrix();

    double beta = 1.0;
    if (sc.fixed_step) {
        beta = *sc.fixed_step;
    } else {
        const double f0 = w_objective(state, hp, mu1, state.w_plus, state.w_minus);
        bool accepted = false;
        for (int bt = 0; bt <= sc.max_backtracks; ++bt) {
            const Matrix new_plus = positive_part(state.w_plus - beta * d_plus);
            const Matrix new_minus =
                hp.adjacency_only ? Matrix::Zero(n, n) : positive_part(state.w_minus - beta * d_minus);
            const double change = w_objective(state, hp, mu1, new_plus, new_minus) - f0;
            const double predicted = frobenius_dot(d_plus, state.w_plus - new_plus) +
                                     frobenius_dot(d_minus, state.w_minus - new_minus);
            if (change <= -sc.armijo_c * predicted) {
                accepted = true;
                break;
            }
            beta *= sc.shrink;
            ++state.last_step.backtracks;
        }
        if (!accepted) {
            beta = sc.min_step;
            ++state.last_step.floored;
            ++state.armijo_failures;
        }
    }

    state.w_plus = positive_part(state.w_plus - beta * d_plus);
    if (hp.adjacency_only) {
        state.w_minus.setZero();
    } else {
        state.w_minus = positive_part(state.w_minus - beta * d_minus);
    }
    state.last_step.beta = beta;
}

Algorithm1Result run_algorithm1(const SignalStream& stream, const HyperParams& hp, const StepsizeController& sc,
                                long t_star, const Algorithm1Options& opts) {
    const int p_order = static_cast<int>(hp.mu.size());
    hp.validate(p_order);
    sc.validate();
    if (t_star < 0 || t_star > static_cast<long>(stream.size())) {
        throw InvalidArgument("run_algorithm1: t_star = " + std::to_string(t_star) + " outside stream of length " +
                              std::to_string(stream.size()));
    }

    Algorithm1Result out;
    out.state = IdentifierState::zeros(stream.n, p_order);
    auto& st = out.state;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    out.sigma.reserve(static_cast<std::size_t>(t_star));

    for (long t = 1; t <= t_star; ++t) {
        const Vector& x = stream.samples[static_cast<std::size_t>(t - 1)];
        update_correlations(st, x, hp.lambda);

        const Vector residual = x - st.psi() * st.x_lag;
        out.sigma.push_back(nmse_signal(residual, x).value_or(nan));

        step_psi(st, hp, sc);
        step_w(st, hp, sc);

        const Matrix w = st.w_hat();
        if (opts.w_true) out.zeta.push_back(nmse_gso(*opts.w_true, w));
        out.nnz.push_back(static_cast<long>((w.array() != 0.0).count()));
        out.alphas.push_back(st.last_step.alphas);
        out.steps = t;
        if (opts.on_step) opts.on_step(st);

        if (opts.plateau) {
            const auto win = static_cast<std::size_t>(opts.plateau->window);
            if (win > 0 && out.sigma.size() >= 2 * win) {
                const auto end = out.sigma.end();
                const double recent = nan_mean(std::vector<double>(end - static_cast<std::ptrdiff_t>(win), end));
                const double before = nan_mean(std::vector<double>(end - static_cast<std::ptrdiff_t>(2 * win),
                                                                   end - static_cast<std::ptrdiff_t>(win)));
                if (std::isfinite(recent) && std::isfinite(before) && before > 0.0 &&
                    std::abs(recent - before) < opts.plateau->rel_change * before) {
                    break;
                }
            }
        }
    }
    out.w_star = st.w_hat();
    return out;
}

}  // namespace gsoid
