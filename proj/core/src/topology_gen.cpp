#include "gsoid/topology_gen.hpp"

#include "gsoid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gsoid {

namespace {

constexpr int kMaxAttempts = 100;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void check_band(double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
        throw InvalidArgument("band fractions must satisfy 0 <= lo < hi <= 1");
    }
}

Matrix draw_random(int n, const RandomParams& p, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    }
    m.diagonal().setZero();
    band_threshold(m, p.lo_frac, p.hi_frac);
    return m;
}

Matrix draw_power_law(int n, const PowerLawParams& p, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution seed_edge(p.seed_connect_prob);
    Matrix m = Matrix::Zero(n, n);
    Vector strength = Vector::Zero(n);

    auto connect = [&](int i, int j) {
        m(i, j) = normal(rng);
        m(j, i) = normal(rng);
        const double s = std::abs(m(i, j)) + std::abs(m(j, i));
        strength[i] += s;
        strength[j] += s;
    };

    const int seeds = std::min(p.seed_nodes, n);
    for (int i = 0; i < seeds; ++i) {
        for (int j = i + 1; j < seeds; ++j) {
            if (seed_edge(rng)) connect(i, j);
        }
    }

    std::vector<double> weights;
    for (int v = seeds; v < n; ++v) {
        std::vector<int> candidates(static_cast<std::size_t>(v));
        std::iota(candidates.begin(), candidates.end(), 0);
        const int picks = std::min(p.edges_per_node, v);
        for (int k = 0; k < picks; ++k) {
            weights.assign(candidates.size(), 0.0);
            double total = 0.0;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                weights[c] = strength[candidates[c]];
                total += weights[c];
            }
            // Nobody has weight yet: attach uniformly.
            if (total <= 0.0) std::fill(weights.begin(), weights.end(), 1.0);
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            const std::size_t c = pick(rng);
            const int target = candidates[c];
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(c));
            connect(v, target);
        }
    }
    band_threshold(m, p.lo_frac, p.hi_frac);
    return m;
}

SbmDraw draw_sbm(int n, const SbmParams& p, Rng& rng) {
    const auto k = static_cast<Eigen::Index>(p.cluster_sizes.size());
    std::uniform_real_distribution<double> jitter(p.prob_jitter_lo, p.prob_jitter_hi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> weight(p.weight_rate);

    SbmDraw d;
    d.probabilities = Matrix::Zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a; b < k; ++b) {
            const double prob = (a == b ? p.base_diag : 0.0) + jitter(rng);
            d.probabilities(a, b) = prob;
            d.probabilities(b, a) = prob;
        }
    }
    d.cluster_of.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < static_cast<int>(k); ++c) {
        for (int s = 0; s < p.cluster_sizes[static_cast<std::size_t>(c)]; ++s) d.cluster_of.push_back(c);
    }

    d.connected = Eigen::MatrixXi::Zero(n, n);
    d.raw_weights = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double prob = d.probabilities(d.cluster_of[i], d.cluster_of[j]);
            if (unit(rng) < prob) {
                d.connected(i, j) = d.connected(j, i) = 1;
                d.raw_weights(i, j) = weight(rng);
                d.raw_weights(j, i) = weight(rng);
            }
        }
    }
    return d;
}

}  // namespace

TopologyKind TopologySpec::kind() const noexcept {
    return std::visit(overloaded{[](const RandomParams&) { return TopologyKind::Random; },
                                 [](const PowerLawParams&) { return TopologyKind::PowerLaw; },
                                 [](const SbmParams&) { return TopologyKind::Sbm; }},
                      params);
}

void TopologySpec::validate() const {
    if (n <= 0) throw InvalidArgument("topology: n must be positive");
    if (!(norm_factor > 0.0)) throw InvalidArgument("topology: norm_factor must be positive");
    std::visit(overloaded{
                   [](const RandomParams& p) { check_band(p.lo_frac, p.hi_frac); },
                   [](const PowerLawParams& p) {
                       check_band(p.lo_frac, p.hi_frac);
                       if (p.seed_nodes < 1) throw InvalidArgument("powerlaw: seed_nodes must be >= 1");
                       if (p.edges_per_node < 1) throw InvalidArgument("powerlaw: edges_per_node must be >= 1");
                       if (!(p.seed_connect_prob >= 0.0 && p.seed_connect_prob <= 1.0)) {
                           throw InvalidArgument("powerlaw: seed_connect_prob must be in [0,1]");
                       }
                   },
                   [this](const SbmParams& p) {
                       if (p.cluster_sizes.empty()) throw InvalidArgument("sbm: no clusters");
                       int total = 0;
                       for (int s : p.cluster_sizes) {
                           if (s <= 0) throw InvalidArgument("sbm: cluster sizes must be positive");
                           total += s;
                       }
                       if (total != n) {
                           throw InvalidArgument("sbm: cluster sizes sum to " + std::to_string(total) +
                                                 " but n = " + std::to_string(n));
                       }
                       if (!(p.weight_rate > 0.0)) throw InvalidArgument("sbm: weight_rate must be positive");
                       if (!(p.prob_jitter_lo <= p.prob_jitter_hi)) {
                           throw InvalidArgument("sbm: prob_jitter_lo > prob_jitter_hi");
                       }
                       if (p.base_diag + p.prob_jitter_hi > 1.0 || p.prob_jitter_lo < 0.0) {
                           throw InvalidArgument("sbm: connection probabilities leave [0,1]");
                       }
                   }},
               params);
}

TopologySpec TopologySpec::random(int n) { return TopologySpec{n, 1.5, RandomParams{}}; }
TopologySpec TopologySpec::power_law(int n) { return TopologySpec{n, 1.5, PowerLawParams{}}; }
TopologySpec TopologySpec::sbm(int n) {
    SbmParams p;
    if (n != 12) {
        // Three clusters as even as possible.
        p.cluster_sizes = {n / 3, n / 3, n - 2 * (n / 3)};
    }
    return TopologySpec{n, 1.5, p};
}

void band_threshold(Matrix& m, double lo_frac, double hi_frac) {
    check_band(lo_frac, hi_frac);
    if (m.size() == 0) return;
    const double peak = m.cwiseAbs().maxCoeff();
    const double lo = lo_frac * peak;
    const double hi = hi_frac * peak;
    m = m.unaryExpr([lo, hi](double v) {
        const double a = std::abs(v);
        return (a >= lo && a <= hi) ? v : 0.0;
    });
}

Matrix gen_gso_raw(const TopologySpec& spec, Rng& rng) {
    return std::visit(overloaded{[&](const RandomParams& p) { return draw_random(spec.n, p, rng); },
                                 [&](const PowerLawParams& p) { return draw_power_law(spec.n, p, rng); },
                                 [&](const SbmParams& p) { return draw_sbm(spec.n, p, rng).raw_weights; }},
                      spec.params);
}

GsoMatrix gen_gso(const TopologySpec& spec, RngSeed seed) {
    if (spec.kind() == TopologyKind::Sbm) return gen_sbm_detailed(spec, seed).gso;
    spec.validate();
    Rng rng = make_rng(seed);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Matrix raw = gen_gso_raw(spec, rng);
        if (raw.isZero(0.0)) continue;
        try {
            return spectral_normalize(GsoMatrix(std::move(raw), spec.kind()), spec.norm_factor);
        } catch (const DegenerateInput&) {
            continue;
        }
    }
    throw DegenerateInput("gen_gso: " + std::string(to_string(spec.kind())) + " generator produced " +
                          std::to_string(kMaxAttempts) + " degenerate draws");
}

SbmDraw gen_sbm_detailed(const TopologySpec& spec, RngSeed seed) {
    spec.validate();
    const auto* params = std::get_if<SbmParams>(&spec.params);
    if (!params) throw InvalidArgument("gen_sbm_detailed: spec is not an SBM spec");
    Rng rng = make_rng(seed);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        SbmDraw d = draw_sbm(spec.n, *params, rng);
        if (d.raw_weights.isZero(0.0)) continue;
        try {
            d.gso = spectral_normalize(GsoMatrix(d.raw_weights, TopologyKind::Sbm), spec.norm_factor);
            return d;
        } catch (const DegenerateInput&) {
            continue;
        }
    }
    throw DegenerateInput("gen_gso: sbm generator produced " + std::to_string(kMaxAttempts) +
                          " degenerate draws");
}

ArCoefficients gen_ar_coeffs(int p_order, RngSeed seed, double zero_prob) {
    if (p_order < 1) throw InvalidArgument("gen_ar_coeffs: p_order must be >= 1");
    if (!(zero_prob >= 0.0 && zero_prob <= 1.0)) {
        throw InvalidArgument("gen_ar_coeffs: zero_prob must be in [0,1]");
    }
    Rng rng = make_rng(seed);
    std::bernoulli_distribution is_zero(zero_prob);
    std::bernoulli_distribution negative(0.5);
    std::uniform_real_distribution<double> magnitude(0.45, 1.0);

    std::vector<Vector> blocks;
    blocks.reserve(static_cast<std::size_t>(p_order));
    for (int i = 1; i <= p_order; ++i) {
        Vector b(i + 1);
        for (int j = 0; j <= i; ++j) {
            // Draw all three variates unconditionally so the stream layout does not depend on zero_prob.
            const bool zero = is_zero(rng);
            const bool neg = negative(rng);
            const double u = magnitude(rng);
            b[j] = zero ? 0.0 : (neg ? -u : u) / std::ldexp(1.0, i + j);
        }
        blocks.push_back(std::move(b));
    }
    return ArCoefficients(std::move(blocks));
}

}  // namespace gsoid
