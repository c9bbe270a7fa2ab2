#include "gsoid/metrics.hpp"

#include "gsoid/errors.hpp"

#include <cmath>
#include <limits>

namespace gsoid {

std::optional<double> nmse_signal(const Vector& e, const Vector& x) {
    if (e.size() != x.size()) throw InvalidArgument("nmse_signal: size mismatch");
    const double den = x.squaredNorm();
    if (den == 0.0) return std::nullopt;
    return e.squaredNorm() / den;
}

double nmse_gso(const Matrix& w_true, const Matrix& w_hat) {
    if (w_true.rows() != w_hat.rows() || w_true.cols() != w_hat.cols()) {
        throw InvalidArgument("nmse_gso: dimension mismatch");
    }
    const double den = w_true.squaredNorm();
    if (den == 0.0) throw DegenerateInput("nmse_gso: true matrix is zero");
    return (w_true - w_hat).squaredNorm() / den;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support_of(const Matrix& a, double support_eps) {
    const double peak = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    const double thr = support_eps * peak;
    return (a.array().abs() > thr).matrix();
}

SupportErrors support_errors(const Matrix& w_true, const Matrix& w_hat, const SupportOptions& opts) {
    if (w_true.rows() != w_hat.rows() || w_true.cols() != w_hat.cols()) {
        throw InvalidArgument("support_errors: dimension mismatch");
    }
    const auto truth = support_of(w_true, opts.support_eps);
    const auto est = support_of(w_hat, opts.support_eps);

    long zeros = 0, nonzeros = 0, false_alarms = 0, misses = 0, total = 0;
    for (Eigen::Index i = 0; i < w_true.rows(); ++i) {
        for (Eigen::Index j = 0; j < w_true.cols(); ++j) {
            if (opts.exclude_diagonal && i == j) continue;
            ++total;
            if (truth(i, j)) {
                ++nonzeros;
                if (!est(i, j)) ++misses;
            } else {
                ++zeros;
                if (est(i, j)) ++false_alarms;
            }
        }
    }
    SupportErrors out;
    if (zeros > 0) out.p_fa = static_cast<double>(false_alarms) / static_cast<double>(zeros);
    if (nonzeros > 0) out.p_m = static_cast<double>(misses) / static_cast<double>(nonzeros);
    out.support_accuracy =
        total ? static_cast<double>(total - false_alarms - misses) / static_cast<double>(total) : 1.0;
    return out;
}

double nan_mean(const std::vector<double>& values) {
    double sum = 0.0;
    long count = 0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
    }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace gsoid
