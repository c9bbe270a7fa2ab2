#include "gsoid/debiaser.hpp"

#include "gsoid/errors.hpp"
#include "gsoid/metrics.hpp"
#include "gsoid/var_sim.hpp"

#include <cmath>
#include <string>

namespace gsoid {

SupportMask build_support_mask(const Matrix& w_star, int p_order, double support_eps, MaskRule rule) {
    if (w_star.rows() != w_star.cols()) throw InvalidArgument("build_support_mask: W* must be square");
    if (p_order < 1) throw InvalidArgument("build_support_mask: p_order must be >= 1");
    if (!(support_eps >= 0.0)) throw InvalidArgument("build_support_mask: support_eps must be >= 0");

    const Eigen::Index n = w_star.rows();
    SupportMask mask;
    mask.w_mask = support_of(w_star, support_eps);
    if (!mask.w_mask.any()) throw DegenerateInput("build_support_mask: W* has empty support");

    mask.psi_mask = BoolMatrix::Constant(n, n * p_order, false);
    const BoolMatrix eye = BoolMatrix::Identity(n, n);

    if (rule == MaskRule::FirstBlockPattern) {
        const BoolMatrix block = mask.w_mask.array() || eye.array();
        for (int p = 0; p < p_order; ++p) mask.psi_mask.middleCols(p * n, n) = block;
        return mask;
    }

    // Boolean powers of the support: walks of length l, accumulated up to p.
    const Eigen::MatrixXi adj = mask.w_mask.cast<int>();
    Eigen::MatrixXi power = Eigen::MatrixXi::Identity(n, n);
    BoolMatrix reach = eye;
    for (int p = 0; p < p_order; ++p) {
        power = ((power * adj).array() > 0).cast<int>().matrix();
        reach = reach.array() || (power.array() > 0);
        mask.psi_mask.middleCols(p * n, n) = reach;
    }
    return mask;
}

DebiasState DebiasState::resume(const IdentifierState& from, const SupportMask& mask) {
    const Eigen::Index n = from.n;
    if (mask.psi_mask.rows() != n || mask.psi_mask.cols() != n * from.p_order) {
        throw InvalidArgument("DebiasState::resume: mask does not match the identifier state");
    }
    const Eigen::Index m = coefficient_count(from.p_order);
    DebiasState s;
    s.core = from;
    s.psi = mask.psi_mask.select(from.psi(), Matrix::Zero(n, n * from.p_order));
    s.w_hat = s.psi.leftCols(n);
    s.h_hat = Vector::Zero(m);
    s.c = Matrix::Zero(m, m);
    s.u = Vector::Zero(m);
    s.e = Vector::Zero(n);
    s.alphas.assign(static_cast<std::size_t>(from.p_order), 0.0);
    return s;
}

void debias_descend(DebiasState& state, const SupportMask& mask, const StepsizeController& sc) {
    const auto& core = state.core;
    const Eigen::Index n = core.n;
    Matrix data_grad = state.psi * core.r;
    data_grad -= core.p_corr;
    const Matrix g = mask.psi_mask.select(data_grad, Matrix::Zero(n, n * core.p_order));

    const double alpha0 = 1.0 / (core.r.trace() / core.p_order + sc.init_eps);
    for (int p = 0; p < core.p_order; ++p) {
        const auto g_p = g.middleCols(p * n, n);
        double alpha = sc.fixed_step.value_or(alpha0);
        if (!sc.fixed_step) {
            // Along -G_p: f(a) - f(0) = -a |G_p|^2 + a^2/2 <G_p R_pp, G_p>.
            const double slope = g_p.squaredNorm();
            const double curv = ((g_p * core.r.block(p * n, p * n, n, n)).array() * g_p.array()).sum();
            bool accepted = slope == 0.0;
            for (int bt = 0; !accepted && bt <= sc.max_backtracks; ++bt) {
                const double change = -alpha * slope + 0.5 * alpha * alpha * curv;
                if (change <= -sc.armijo_c * alpha * slope) {
                    accepted = true;
                } else {
                    alpha *= sc.shrink;
                }
            }
            if (!accepted) {
                alpha = sc.min_step;
                ++state.armijo_failures;
            }
        }
        state.alphas[static_cast<std::size_t>(p)] = alpha;
        state.psi.middleCols(p * n, n) -= alpha * g_p;
    }
    state.w_hat = state.psi.leftCols(n);
}

void debias_step(DebiasState& state, const SupportMask& mask, const Vector& x_t, double lambda,
                 const StepsizeController& sc) {
    update_correlations(state.core, x_t, lambda);
    debias_descend(state, mask, sc);
}

Matrix build_regressor(const Matrix& w_hat, const Vector& x_lag, int p_order) {
    const Eigen::Index n = w_hat.rows();
    if (w_hat.cols() != n || x_lag.size() != n * p_order) {
        throw InvalidArgument("build_regressor: dimension mismatch");
    }
    Matrix y(n, coefficient_count(p_order));
    Eigen::Index col = 0;
    for (int p = 0; p < p_order; ++p) {
        Vector v = x_lag.segment(p * n, n);
        for (int j = 0; j <= p + 1; ++j) {
            if (j > 0) v = w_hat * v;
            y.col(col++) = v;
        }
    }
    return y;
}

Vector attractor(const Vector& h, double eps) {
    return h.unaryExpr([eps](double v) {
        if (v == 0.0) return 0.0;
        return (v > 0.0 ? 1.0 : -1.0) / (eps + std::abs(v));
    });
}

Vector gar_lms_update(const Vector& h, const Matrix& y, const Vector& x, double rho, double eta_t, double eps) {
    const Vector e = x - y * h;
    return h + rho * (y.transpose() * e - eta_t * attractor(h, eps));
}

namespace {

double log_penalty(const Vector& h, double eps) { return (h.array().abs() + eps).log().sum(); }

}  // namespace

void estimate_h_step(DebiasState& state, const Vector& x_t, const DebiasOptions& opts,
                     const StepsizeController& sc) {
    const int p_order = state.core.p_order;
    const Matrix y = build_regressor(state.w_hat, state.core.x_lag, p_order);
    const Vector yx = y.transpose() * x_t;
    state.c = opts.lambda * state.c + y.transpose() * y;
    state.u = opts.lambda * state.u + yx;

    const double eta_t = opts.eta * (yx.size() ? yx.cwiseAbs().maxCoeff() : 0.0);
    state.e = x_t - y * state.h_hat;

    const Vector& h = state.h_hat;
    const Vector b = attractor(h, opts.epsilon);
    Vector grad;
    double curvature_scale = 0.0;
    if (opts.recursive_h) {
        grad = state.c * h - state.u + eta_t * b;
        curvature_scale = state.c.trace();
    } else {
        grad = -(y.transpose() * state.e) + eta_t * b;
        curvature_scale = y.squaredNorm();
    }

    auto objective = [&](const Vector& v) {
        const double pen = eta_t != 0.0 ? eta_t * log_penalty(v, opts.epsilon) : 0.0;
        if (opts.recursive_h) return 0.5 * v.dot(state.c * v) - state.u.dot(v) + pen;
        return 0.5 * (x_t - y * v).squaredNorm() + pen;
    };

    double rho = sc.fixed_step.value_or(1.0 / (curvature_scale + sc.init_eps));
    const double slope = grad.squaredNorm();
    if (!sc.fixed_step && slope > 0.0) {
        const double f0 = objective(h);
        bool accepted = false;
        for (int bt = 0; bt <= sc.max_backtracks; ++bt) {
            if (objective(h - rho * grad) <= f0 - sc.armijo_c * rho * slope) {
                accepted = true;
                break;
            }
            rho *= sc.shrink;
        }
        if (!accepted) {
            rho = sc.min_step;
            ++state.armijo_failures;
        }
    }
    state.rho = rho;
    state.h_hat = h - rho * grad;
}

Algorithm2Result run_algorithm2(const IdentifierState& from, const SignalStream& stream, long first, long last,
                                const SupportMask& mask, const DebiasOptions& opts, const StepsizeController& sc,
                                const Algorithm2Options& run_opts) {
    sc.validate();
    if (first != from.t + 1) {
        throw InvalidArgument("run_algorithm2: first sample " + std::to_string(first) +
                              " does not continue the identifier at t = " + std::to_string(from.t));
    }
    if (last < first || last > static_cast<long>(stream.size())) {
        throw InvalidArgument("run_algorithm2: sample range [" + std::to_string(first) + ", " +
                              std::to_string(last) + "] outside the stream");
    }
    if (!(opts.lambda > 0.0 && opts.lambda <= 1.0)) throw InvalidArgument("run_algorithm2: lambda in (0, 1]");

    Algorithm2Result out;
    out.state = DebiasState::resume(from, mask);
    auto& st = out.state;
    const auto nan = std::numeric_limits<double>::quiet_NaN();

    for (long t = first; t <= last; ++t) {
        const Vector& x = stream.samples[static_cast<std::size_t>(t - 1)];
        debias_step(st, mask, x, opts.lambda, sc);
        estimate_h_step(st, x, opts, sc);

        out.sigma.push_back(nmse_signal(st.e, x).value_or(nan));
        if (run_opts.w_true) out.zeta.push_back(nmse_gso(*run_opts.w_true, st.w_hat));
        ++out.steps;
        if (run_opts.on_step) run_opts.on_step(st);
        if (st.e.norm() < opts.delta) break;
    }
    out.w_hat = st.w_hat;
    out.h_hat = st.h_hat;
    return out;
}

}  // namespace gsoid
