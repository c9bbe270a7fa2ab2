#include "gsoid/var_sim.hpp"

#include "gsoid/errors.hpp"
#include "gsoid/matrix_io.hpp"

#include <cmath>
#include <string>

namespace gsoid {

ArCoefficients::ArCoefficients(std::vector<Vector> b) : blocks(std::move(b)) {
    for (std::size_t p = 0; p < blocks.size(); ++p) {
        if (blocks[p].size() != static_cast<Eigen::Index>(p + 2)) {
            throw InvalidArgument("ArCoefficients: block " + std::to_string(p + 1) + " must have " +
                                  std::to_string(p + 2) + " taps, got " +
                                  std::to_string(blocks[p].size()));
        }
    }
}

Eigen::Index ArCoefficients::total_size() const noexcept { return coefficient_count(p_order()); }

Vector ArCoefficients::flatten() const {
    Vector h(total_size());
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        h.segment(off, b.size()) = b;
        off += b.size();
    }
    return h;
}

ArCoefficients ArCoefficients::unflatten(const Vector& h, int p_order) {
    if (h.size() != coefficient_count(p_order)) {
        throw InvalidArgument("ArCoefficients::unflatten: expected " +
                              std::to_string(coefficient_count(p_order)) + " entries");
    }
    std::vector<Vector> blocks;
    Eigen::Index off = 0;
    for (int p = 1; p <= p_order; ++p) {
        blocks.emplace_back(h.segment(off, p + 1));
        off += p + 1;
    }
    return ArCoefficients(std::move(blocks));
}

ArCoefficients ArCoefficients::zeros(int p_order) {
    return unflatten(Vector::Zero(coefficient_count(p_order)), p_order);
}

Vector SignalStream::at(long t) const {
    if (t <= 0) return Vector::Zero(n);
    if (t > static_cast<long>(samples.size())) {
        throw InvalidArgument("SignalStream::at: t = " + std::to_string(t) + " beyond stream length " +
                              std::to_string(samples.size()));
    }
    return samples[static_cast<std::size_t>(t - 1)];
}

std::vector<Matrix> build_psi(const GsoMatrix& w, const ArCoefficients& coeffs) {
    std::vector<Matrix> psi;
    psi.reserve(coeffs.blocks.size());
    for (const auto& b : coeffs.blocks) psi.push_back(graph_filter(w.entries, FilterTaps(b)));
    return psi;
}

double companion_spectral_radius(const std::vector<Matrix>& psi) {
    if (psi.empty()) return 0.0;
    const Eigen::Index n = psi.front().rows();
    const auto p = static_cast<Eigen::Index>(psi.size());
    Matrix c = Matrix::Zero(n * p, n * p);
    for (Eigen::Index k = 0; k < p; ++k) c.block(0, k * n, n, n) = psi[static_cast<std::size_t>(k)];
    if (p > 1) c.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
    return spectral_radius_dense(c);
}

namespace {

void check_psi(const std::vector<Matrix>& psi) {
    if (psi.empty()) throw InvalidArgument("simulate: need at least one lag");
    const Eigen::Index n = psi.front().rows();
    for (const auto& m : psi) {
        if (m.rows() != n || m.cols() != n) throw InvalidArgument("simulate: lag matrices must be n x n");
    }
}

SignalStream run_recursion(const std::vector<Matrix>& psi, const std::vector<Vector>& noise,
                           long burn_in, double limit) {
    const Eigen::Index n = psi.front().rows();
    const auto total = static_cast<long>(noise.size());
    std::vector<Vector> x;
    x.reserve(noise.size());
    for (long t = 1; t <= total; ++t) {
        Vector xt = noise[static_cast<std::size_t>(t - 1)];
        for (std::size_t p = 1; p <= psi.size(); ++p) {
            const long lag = t - static_cast<long>(p);
            if (lag >= 1) xt.noalias() += psi[p - 1] * x[static_cast<std::size_t>(lag - 1)];
        }
        const double norm = xt.norm();
        if (!std::isfinite(norm) || norm > limit) {
            throw InstabilityError("simulate: sample norm exceeded " + format_double(limit) + " at t = " +
                                       std::to_string(t),
                                   t);
        }
        x.push_back(std::move(xt));
    }
    SignalStream s;
    s.n = n;
    s.burn_in_discarded = burn_in;
    s.samples.assign(x.begin() + burn_in, x.end());
    s.noise.assign(noise.begin() + burn_in, noise.end());
    return s;
}

}  // namespace

SignalStream simulate(const GsoMatrix& w, const ArCoefficients& coeffs, long t_total, long burn_in,
                      RngSeed seed, const SimulateOptions& opts) {
    if (!(t_total > burn_in && burn_in >= 0)) {
        throw InvalidArgument("simulate: need t_total > burn_in >= 0");
    }
    if (opts.noise_std < 0.0) throw InvalidArgument("simulate: noise_std must be >= 0");
    const auto psi = build_psi(w, coeffs);
    check_psi(psi);

    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> noise;
    noise.reserve(static_cast<std::size_t>(t_total));
    for (long t = 0; t < t_total; ++t) {
        Vector wt(w.n());
        for (Eigen::Index i = 0; i < wt.size(); ++i) wt[i] = opts.noise_std * normal(rng);
        noise.push_back(std::move(wt));
    }
    return run_recursion(psi, noise, burn_in, opts.divergence_limit);
}

SignalStream simulate_with_noise(const std::vector<Matrix>& psi, const std::vector<Vector>& noise,
                                 double divergence_limit) {
    check_psi(psi);
    for (const auto& v : noise) {
        if (v.size() != psi.front().rows()) throw InvalidArgument("simulate: noise dimension mismatch");
    }
    return run_recursion(psi, noise, 0, divergence_limit);
}

Vector lag_stack(const SignalStream& stream, long t, int p_order) {
    if (p_order < 1) throw InvalidArgument("lag_stack: p_order must be >= 1");
    const Eigen::Index n = stream.n;
    Vector out = Vector::Zero(n * p_order);
    for (int p = 1; p <= p_order; ++p) {
        const long lag = t - p;
        if (lag >= 1 && lag <= static_cast<long>(stream.size())) {
            out.segment((p - 1) * n, n) = stream.samples[static_cast<std::size_t>(lag - 1)];
        }
    }
    return out;
}

void write_signal_csv(const std::filesystem::path& path, const SignalStream& stream) {
    Matrix m(static_cast<Eigen::Index>(stream.size()), stream.n);
    for (std::size_t t = 0; t < stream.size(); ++t) m.row(static_cast<Eigen::Index>(t)) = stream.samples[t].transpose();
    write_matrix_csv(path, m);
}

SignalStream read_signal_csv(const std::filesystem::path& path) {
    const Matrix m = read_matrix_csv(path);
    if (m.rows() == 0 || m.cols() == 0) throw ConfigError("signal file " + path.string() + " is empty");
    SignalStream s;
    s.n = m.cols();
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        s.samples.push_back(m.row(t).transpose());
        s.noise.push_back(Vector::Zero(s.n));
    }
    return s;
}

void write_coeffs_csv(const std::filesystem::path& path, const ArCoefficients& coeffs) {
    std::vector<std::vector<double>> rows;
    for (const auto& b : coeffs.blocks) rows.emplace_back(b.data(), b.data() + b.size());
    write_csv_rows(path, rows);
}

ArCoefficients read_coeffs_csv(const std::filesystem::path& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw ConfigError("coefficient file " + path.string() + " is empty");
    std::vector<Vector> blocks;
    for (const auto& r : rows) blocks.push_back(Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size())));
    try {
        return ArCoefficients(std::move(blocks));
    } catch (const InvalidArgument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace gsoid
