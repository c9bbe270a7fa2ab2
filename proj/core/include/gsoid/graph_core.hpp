#pragma once

// Dense real-matrix primitives for graph shift operators: polynomial graph
// filters, commutators and spectral-radius normalization.

#include <Eigen/Dense>

#include <initializer_list>
#include <string_view>
#include <utility>

namespace gsoid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class TopologyKind { Random, PowerLaw, Sbm, Estimated, Custom };

std::string_view to_string(TopologyKind kind);

/// A square shift operator together with where it came from.
struct GsoMatrix {
    Matrix entries;
    TopologyKind kind = TopologyKind::Custom;

    GsoMatrix() = default;
    explicit GsoMatrix(Matrix m, TopologyKind k = TopologyKind::Custom);

    Eigen::Index n() const noexcept { return entries.rows(); }
};

/// Taps [h_0, ..., h_L] of the filter sum_l h_l W^l.
struct FilterTaps {
    Vector taps;

    FilterTaps() = default;
    explicit FilterTaps(Vector t) : taps(std::move(t)) {}
    FilterTaps(std::initializer_list<double> t);

    Eigen::Index max_shift() const noexcept { return taps.size() - 1; }
};

/// sum_l taps[l] * W^l, evaluated by Horner's rule (max_shift multiplications).
Matrix graph_filter(const Matrix& w, const FilterTaps& taps);
inline Matrix graph_filter(const GsoMatrix& w, const FilterTaps& taps) {
    return graph_filter(w.entries, taps);
}

/// a*b - b*a.
Matrix commutator(const Matrix& a, const Matrix& b);

struct SpectralRadiusOptions {
    int max_iterations = 2000;
    double tolerance = 1e-13;
};

/// Largest eigenvalue modulus. Power iteration first; when the dominant
/// eigenvalue is complex or the iteration stalls, a dense eigensolve decides.
double spectral_radius(const Matrix& a, const SpectralRadiusOptions& opts = {});

/// Spectral radius from a dense eigensolve only.
double spectral_radius_dense(const Matrix& a);

/// w / (factor * rho(w)); the result has spectral radius 1/factor.
GsoMatrix spectral_normalize(const GsoMatrix& w, double factor);

/// max |H_K(W,a) H_L(W,b) - H_L(W,b) H_K(W,a)|.
double shift_invariance_check(const Matrix& w, const FilterTaps& a, const FilterTaps& b);

}  // namespace gsoid
