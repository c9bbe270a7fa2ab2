#pragma once

// Recovery metrics: signal / operator NMSE and support error rates.

#include "gsoid/graph_core.hpp"

#include <optional>
#include <vector>

namespace gsoid {

/// |e|^2 / |x|^2; empty when x is the zero vector.
std::optional<double> nmse_signal(const Vector& e, const Vector& x);

/// |W - W_hat|_F^2 / |W|_F^2.
double nmse_gso(const Matrix& w_true, const Matrix& w_hat);

struct SupportErrors {
    std::optional<double> p_fa;     // empty if the true matrix has no zeros
    std::optional<double> p_m;      // empty if the true matrix has no non-zeros
    double support_accuracy = 0.0;  // fraction of entries classified correctly
};

struct SupportOptions {
    double support_eps = 1e-6;      // relative to each matrix's max |entry|
    bool exclude_diagonal = false;
};

/// Non-zero pattern: |a_ij| > eps * max|a|.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support_of(const Matrix& a, double support_eps);

SupportErrors support_errors(const Matrix& w_true, const Matrix& w_hat, const SupportOptions& opts = {});

/// Undefined entries of a trace are stored as NaN and skipped by averages.
double nan_mean(const std::vector<double>& values);

struct RecoveryReport {
    std::optional<double> p_fa;
    std::optional<double> p_m;
    double support_accuracy = 0.0;
    std::vector<double> sigma_trace;
    std::vector<double> zeta_trace;
    long phase_boundary = 0;  // index of the first debias step in the traces
};

}  // namespace gsoid
