#include "gsoid/graph_core.hpp"

#include "gsoid/errors.hpp"

#include <cmath>
#include <string>

namespace gsoid {

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::Random: return "random";
        case TopologyKind::PowerLaw: return "powerlaw";
        case TopologyKind::Sbm: return "sbm";
        case TopologyKind::Estimated: return "estimated";
        case TopologyKind::Custom: return "custom";
    }
    return "custom";
}

GsoMatrix::GsoMatrix(Matrix m, TopologyKind k) : entries(std::move(m)), kind(k) {
    if (entries.rows() != entries.cols()) {
        throw InvalidArgument("GsoMatrix must be square, got " + std::to_string(entries.rows()) +
                              "x" + std::to_string(entries.cols()));
    }
}

FilterTaps::FilterTaps(std::initializer_list<double> t) : taps(static_cast<Eigen::Index>(t.size())) {
    Eigen::Index i = 0;
    for (double v : t) taps[i++] = v;
}

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw InvalidArgument(std::string(what) + ": matrix must be square");
    }
}

}  // namespace

Matrix graph_filter(const Matrix& w, const FilterTaps& taps) {
    require_square(w, "graph_filter");
    if (taps.taps.size() == 0) throw InvalidArgument("graph_filter: empty tap vector");

    const Eigen::Index n = w.rows();
    const Eigen::Index last = taps.max_shift();
    // ((h_L W + h_{L-1}) W + ...) W + h_0
    Matrix acc = Matrix::Identity(n, n) * taps.taps[last];
    for (Eigen::Index l = last - 1; l >= 0; --l) {
        acc = acc * w;
        acc.diagonal().array() += taps.taps[l];
    }
    return acc;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    require_square(a, "commutator");
    require_square(b, "commutator");
    if (a.rows() != b.rows()) throw InvalidArgument("commutator: size mismatch");
    return a * b - b * a;
}

double spectral_radius_dense(const Matrix& a) {
    require_square(a, "spectral_radius");
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw DegenerateInput("spectral_radius: dense eigensolve failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const Matrix& a, const SpectralRadiusOptions& opts) {
    require_square(a, "spectral_radius");
    const Eigen::Index n = a.rows();
    if (n == 0) return 0.0;
    const double scale = a.norm();
    if (scale == 0.0) return 0.0;

    // Deterministic start with no special symmetry.
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
    v.normalize();

    for (int it = 0; it < opts.max_iterations; ++it) {
        Vector y = a * v;
        const double rayleigh = v.dot(y);
        const double residual = (y - rayleigh * v).norm();
        if (residual <= opts.tolerance * scale) return std::abs(rayleigh);
        const double ny = y.norm();
        if (ny == 0.0) break;  // v fell into the null space
        v = y / ny;
    }
    return spectral_radius_dense(a);
}

GsoMatrix spectral_normalize(const GsoMatrix& w, double factor) {
    if (!(factor > 0.0)) throw InvalidArgument("spectral_normalize: factor must be positive");
    if (w.entries.size() == 0 || w.entries.isZero(0.0)) {
        throw DegenerateInput("spectral_normalize: zero matrix has no spectral scale");
    }
    const double rho = spectral_radius(w.entries);
    if (!(rho > 0.0)) throw DegenerateInput("spectral_normalize: nilpotent matrix (spectral radius 0)");
    return GsoMatrix(w.entries / (factor * rho), w.kind);
}

double shift_invariance_check(const Matrix& w, const FilterTaps& a, const FilterTaps& b) {
    const Matrix ha = graph_filter(w, a);
    const Matrix hb = graph_filter(w, b);
    return (ha * hb - hb * ha).cwiseAbs().maxCoeff();
}

}  // namespace gsoid
