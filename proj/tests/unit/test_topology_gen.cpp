#include "gsoid/errors.hpp"
#include "gsoid/topology_gen.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

using namespace gsoid;

namespace {

double dense_rho(const Matrix& m) {
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double nonzero_fraction(const Matrix& m) {
    return static_cast<double>((m.array() != 0.0).count()) / static_cast<double>(m.size());
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("topology_gen") {

TEST_CASE("gen_gso is reproducible bit for bit") {
    for (const auto& spec : {TopologySpec::random(), TopologySpec::power_law(), TopologySpec::sbm()}) {
        const GsoMatrix a = gen_gso(spec, RngSeed{99});
        const GsoMatrix b = gen_gso(spec, RngSeed{99});
        CHECK(a.entries == b.entries);
        CHECK(a.kind == spec.kind());
        const GsoMatrix c = gen_gso(spec, RngSeed{100});
        CHECK(a.entries != c.entries);
    }
}

TEST_CASE("every topology is normalized to spectral radius 1/1.5") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (const auto& spec : {TopologySpec::random(), TopologySpec::power_law(), TopologySpec::sbm()}) {
            CHECK(dense_rho(gen_gso(spec, RngSeed{seed}).entries) == doctest::Approx(1.0 / 1.5).epsilon(1e-8));
        }
    }
}

TEST_CASE("random topology keeps exactly the in-band entries of the dense draw") {
    const TopologySpec spec = TopologySpec::random();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng = make_rng(RngSeed{seed});
        const Matrix raw = gen_gso_raw(spec, rng);

        // Oracle: replay the dense normal draw.
        Rng replay = make_rng(RngSeed{seed});
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix dense(spec.n, spec.n);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) dense(i, j) = normal(replay);
        dense.diagonal().setZero();
        const double peak = dense.cwiseAbs().maxCoeff();

        CHECK(raw.diagonal().cwiseAbs().maxCoeff() == 0.0);
        for (int i = 0; i < spec.n; ++i) {
            for (int j = 0; j < spec.n; ++j) {
                const double a = std::abs(dense(i, j));
                const bool in_band = a >= 0.3 * peak && a <= 0.7 * peak;
                CHECK(raw(i, j) == (in_band ? dense(i, j) : 0.0));
            }
        }
    }
}

TEST_CASE("sparsity of the random topology") {
    // Mean non-zero fraction over seeds. Expected near 0.31 for the
    // standard normal draw with a [0.3, 0.7] band at N = 12.
    double total = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) total += nonzero_fraction(gen_gso(TopologySpec::random(), RngSeed{1000u + s}).entries);
    const double mean = total / seeds;
    CHECK(mean >= 0.10);
    CHECK(mean <= 0.35);
}

TEST_CASE("sbm weights are positive before normalization and respect the cluster bookkeeping") {
    const TopologySpec spec = TopologySpec::sbm();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const SbmDraw d = gen_sbm_detailed(spec, RngSeed{seed});
        CHECK(d.raw_weights.minCoeff() >= 0.0);
        CHECK((d.probabilities - d.probabilities.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.cluster_of.size() == 12u);
        for (int i = 0; i < spec.n; ++i) {
            CHECK(d.connected(i, i) == 0);
            for (int j = 0; j < spec.n; ++j) {
                if (d.connected(i, j) == 0) {
                    CHECK(d.gso.entries(i, j) == 0.0);
                    CHECK(d.raw_weights(i, j) == 0.0);
                } else {
                    CHECK(d.raw_weights(i, j) > 0.0);
                }
            }
        }
        CHECK(gen_gso(spec, RngSeed{seed}).entries == d.gso.entries);
    }
}

TEST_CASE("sbm rejects cluster sizes that do not sum to n") {
    TopologySpec spec = TopologySpec::sbm();
    spec.n = 13;
    CHECK_THROWS_AS(gen_gso(spec, RngSeed{1}), InvalidArgument);
}

TEST_CASE("power-law: earlier nodes end up with more weight") {
    const TopologySpec spec = TopologySpec::power_law();
    double corr_sum = 0.0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const Matrix w = gen_gso(spec, RngSeed{static_cast<std::uint64_t>(5000 + s)}).entries;
        std::vector<double> degree, order;
        for (int i = 0; i < spec.n; ++i) {
            degree.push_back(w.row(i).cwiseAbs().sum() + w.col(i).cwiseAbs().sum());
            order.push_back(i);
        }
        corr_sum += pearson(degree, order);
    }
    CHECK(corr_sum / seeds < 0.0);
}

TEST_CASE("topology validation errors") {
    TopologySpec bad = TopologySpec::random();
    bad.norm_factor = 0.0;
    CHECK_THROWS_AS(gen_gso(bad, RngSeed{1}), InvalidArgument);
    bad = TopologySpec::random();
    bad.params = RandomParams{0.8, 0.2};
    CHECK_THROWS_AS(gen_gso(bad, RngSeed{1}), InvalidArgument);
}

TEST_CASE("gen_ar_coeffs examples") {
    CHECK(gen_ar_coeffs(3, RngSeed{1}).total_size() == 9);
    CHECK(gen_ar_coeffs(3, RngSeed{1}).flatten().size() == coefficient_count(3));
    for (int p = 1; p <= 4; ++p) CHECK(gen_ar_coeffs(p, RngSeed{3}, 1.0).flatten().cwiseAbs().maxCoeff() == 0.0);

    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const ArCoefficients c = gen_ar_coeffs(1, RngSeed{seed}, 0.0);
        REQUIRE(c.p_order() == 1);
        REQUIRE(c.blocks[0].size() == 2);
        CHECK(std::abs(c.blocks[0][0]) >= 0.225);
        CHECK(std::abs(c.blocks[0][0]) <= 0.5);
        CHECK(std::abs(c.blocks[0][1]) >= 0.1125);
        CHECK(std::abs(c.blocks[0][1]) <= 0.25);
    }
}

TEST_CASE("gen_ar_coeffs magnitudes follow the 2^-(i+j) scaling") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const ArCoefficients c = gen_ar_coeffs(3, RngSeed{seed}, 0.25);
        for (int i = 1; i <= 3; ++i) {
            const Vector& b = c.blocks[static_cast<std::size_t>(i - 1)];
            REQUIRE(b.size() == i + 1);
            for (int j = 0; j <= i; ++j) {
                if (b[j] == 0.0) continue;
                const double scaled = std::abs(b[j]) * std::ldexp(1.0, i + j);
                CHECK(scaled >= 0.45);
                CHECK(scaled <= 1.0);
            }
        }
    }
    CHECK(gen_ar_coeffs(2, RngSeed{8}).flatten() == gen_ar_coeffs(2, RngSeed{8}).flatten());
    CHECK_THROWS_AS(gen_ar_coeffs(0, RngSeed{1}), InvalidArgument);
    CHECK_THROWS_AS(gen_ar_coeffs(2, RngSeed{1}, 1.5), InvalidArgument);
}

}  // TEST_SUITE
