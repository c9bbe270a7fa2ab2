#include "gsoid/config.hpp"
#include "gsoid/errors.hpp"
#include "gsoid/harness.hpp"
#include "gsoid/identifier.hpp"
#include "gsoid/var_sim.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace gsoid;
using test::max_abs;

namespace {

SignalStream random_stream(Eigen::Index n, long len, Rng& rng) {
    SignalStream s;
    s.n = n;
    for (long t = 0; t < len; ++t) {
        s.samples.push_back(test::random_vector(n, rng));
        s.noise.push_back(Vector::Zero(n));
    }
    return s;
}

IdentifierState scalar_state(double psi_plus, double r, double p_corr) {
    IdentifierState s = IdentifierState::zeros(1, 1);
    s.psi_plus(0, 0) = psi_plus;
    s.r(0, 0) = r;
    s.p_corr(0, 0) = p_corr;
    return s;
}

HyperParams zero_hyper(int p_order, Path path = Path::Path1) {
    HyperParams hp;
    hp.mu.assign(static_cast<std::size_t>(p_order), 0.0);
    hp.path = path;
    return hp;
}

// 1/4 of the sum over ordered pairs i != j of |[Psi_i, Psi_j]|^2.
double quarter_penalty(const Matrix& psi, int p_order) {
    const Eigen::Index n = psi.rows();
    double f = 0.0;
    for (int i = 0; i < p_order; ++i)
        for (int j = 0; j < p_order; ++j) {
            if (i == j) continue;
            const Matrix a = psi.middleCols(i * n, n), b = psi.middleCols(j * n, n);
            f += (a * b - b * a).squaredNorm();
        }
    return 0.25 * f;
}

IdentifierState random_state(Eigen::Index n, int p_order, Rng& rng) {
    IdentifierState s = IdentifierState::zeros(n, p_order);
    s.psi_plus = test::random_matrix(n, n * p_order, rng).cwiseAbs();
    s.psi_minus = test::random_matrix(n, n * p_order, rng).cwiseAbs();
    for (int k = 0; k < 3 * static_cast<int>(n * p_order); ++k) update_correlations(s, test::random_vector(n, rng), 0.95);
    return s;
}

}  // namespace

TEST_SUITE("identifier") {

TEST_CASE("update_correlations examples") {
    Rng rng(1);
    IdentifierState s = IdentifierState::zeros(3, 2);
    update_correlations(s, test::random_vector(3, rng), 0.9);
    CHECK(max_abs(s.r) == 0.0);
    CHECK(max_abs(s.p_corr) == 0.0);
    CHECK(s.t == 1);

    for (int k = 0; k < 5; ++k) update_correlations(s, test::random_vector(3, rng), 0.9);
    const Vector x = test::random_vector(3, rng);
    const Vector lag = (Vector(6) << s.history[0], s.history[1]).finished();
    update_correlations(s, x, 0.0);
    CHECK(max_abs(s.r - lag * lag.transpose()) == 0.0);
    CHECK(max_abs(s.p_corr - x * lag.transpose()) == 0.0);
}

TEST_CASE("recursive correlations equal the weighted sums") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 4;
        const int p_order = 1 + trial % 3;
        const double lambda = trial % 2 ? 1.0 : 0.93;
        const SignalStream s = random_stream(n, 50, rng);
        IdentifierState st = IdentifierState::zeros(n, p_order);
        for (long t = 1; t <= 50; ++t) update_correlations(st, s.at(t), lambda);

        Matrix r = Matrix::Zero(n * p_order, n * p_order), p = Matrix::Zero(n, n * p_order);
        for (long t = 1; t <= 50; ++t) {
            const double wgt = std::pow(lambda, 50 - t);
            const Vector lag = lag_stack(s, t, p_order);
            r += wgt * lag * lag.transpose();
            p += wgt * s.at(t) * lag.transpose();
        }
        CHECK(max_abs(st.r - r) <= 1e-10 * max_abs(r));
        CHECK(max_abs(st.p_corr - p) <= 1e-10 * max_abs(p));
    }
}

TEST_CASE("commutator gradient examples") {
    Rng rng(3);
    const Matrix a = test::random_matrix(3, 3, rng);
    Matrix equal(3, 9);
    equal << a, a, a;
    CHECK(max_abs(commutator_gradient(equal, 3)) < 1e-14);
    CHECK(max_abs(commutator_gradient(Matrix::Zero(3, 9), 3)) == 0.0);

    IdentifierState s = IdentifierState::zeros(2, 2);
    // Psi_1 = [[0,1],[0,0]], Psi_2 = [[0,0],[1,0]].
    s.psi_plus << 0, 1, 0, 0, 0, 0, 1, 0;
    HyperParams hp = zero_hyper(2, Path::Path2);
    hp.gamma = 1.0;
    const Matrix q = compute_commutator_grad_q(s, hp);
    const Matrix psi = s.psi();

    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            Matrix up = psi, down = psi;
            up(i, j) += h;
            down(i, j) -= h;
            const double fd = (quarter_penalty(up, 2) - quarter_penalty(down, 2)) / (2 * h);
            CHECK(q(i, j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    }
    CHECK(max_abs(q.leftCols(2)) > 0.0);
}

TEST_CASE("psi_gradient matches finite differences of an independent objective") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const int p_order = 1 + trial % 3;
        IdentifierState s = random_state(n, p_order, rng);
        HyperParams hp = zero_hyper(p_order, Path::Path2);
        hp.gamma = 0.5;
        compute_commutator_grad_q(s, hp);
        const Matrix g = psi_gradient(s, hp);

        auto f = [&](const Matrix& psi) {
            return 0.5 * (psi * s.r).cwiseProduct(psi).sum() - psi.cwiseProduct(s.p_corr).sum() +
                   hp.gamma * quarter_penalty(psi, p_order);
        };
        const Matrix psi = s.psi();
        Matrix fd(g.rows(), g.cols());
        const double h = 1e-6;
        for (Eigen::Index k = 0; k < psi.size(); ++k) {
            Matrix up = psi, down = psi;
            up.data()[k] += h;
            down.data()[k] -= h;
            fd.data()[k] = (f(up) - f(down)) / (2 * h);
        }
        CHECK(max_abs(g - fd) <= 1e-5 * max_abs(fd));

        // psi_objective carries the same smooth part plus the data energy.
        const Vector mu0 = Vector::Zero(p_order);
        CHECK(psi_objective(s, hp, mu0, s.psi_plus, s.psi_minus) ==
              doctest::Approx(0.5 * s.data_energy + f(psi)).epsilon(1e-12));
    }
}

TEST_CASE("step_psi examples") {
    const HyperParams hp = zero_hyper(1);
    StepsizeController fixed;
    fixed.fixed_step = 0.1;

    SUBCASE("scalar hand arithmetic") {
        IdentifierState s = scalar_state(0.5, 2.0, 1.6);
        step_psi(s, hp, fixed);
        CHECK(s.psi_plus(0, 0) == doctest::Approx(0.56).epsilon(1e-15));
        CHECK(s.psi_minus(0, 0) == 0.0);
        CHECK(s.psi()(0, 0) == doctest::Approx(0.56).epsilon(1e-15));
    }
    SUBCASE("zero gradient and zero threshold leave psi unchanged") {
        IdentifierState s = scalar_state(0.8, 2.0, 1.6);
        step_psi(s, hp, StepsizeController{});
        CHECK(s.psi()(0, 0) == 0.8);
    }
    SUBCASE("projection keeps zero splits at zero") {
        // mu_t = 1 * |P| = 1 and G = -P = -1 at psi = 0: M + G = 0, M - G = 2.
        IdentifierState s = IdentifierState::zeros(2, 1);
        s.r = Matrix::Identity(2, 2);
        s.p_corr = Matrix::Constant(2, 2, 1.0);
        HyperParams thr = zero_hyper(1);
        thr.mu = {1.0};
        step_psi(s, thr, StepsizeController{});
        CHECK(max_abs(s.psi_plus) == 0.0);
        CHECK(max_abs(s.psi_minus) == 0.0);
    }
}

TEST_CASE("step_w examples") {
    StepsizeController fixed;
    fixed.fixed_step = 0.5;

    SUBCASE("path 2 copies the first block") {
        Rng rng(6);
        IdentifierState s = random_state(3, 2, rng);
        HyperParams hp = zero_hyper(2, Path::Path2);
        step_w(s, hp, fixed);
        CHECK(s.w_hat() == s.psi().leftCols(3));
    }
    SUBCASE("path 1 fixed point") {
        Rng rng(7);
        IdentifierState s = random_state(3, 2, rng);
        s.w_plus = s.psi_plus.leftCols(3);
        s.w_minus = s.psi_minus.leftCols(3);
        const Matrix before = s.w_hat();
        step_w(s, zero_hyper(2), StepsizeController{});
        CHECK(max_abs(s.w_hat() - before) < 1e-15);
    }
    SUBCASE("scalar hand arithmetic, literal threshold") {
        IdentifierState s = scalar_state(0.5, 0.0, 0.0);
        s.w_plus(0, 0) = 0.3;
        s.mu_t = Vector::Constant(1, 0.01);
        HyperParams hp = zero_hyper(1);
        hp.w_threshold = WThreshold::Literal;
        step_w(s, hp, fixed);
        CHECK(s.w_plus(0, 0) == doctest::Approx(0.395).epsilon(1e-14));
        CHECK(s.w_minus(0, 0) == 0.0);
    }
    SUBCASE("scalar hand arithmetic, adaptive threshold") {
        // mu_W = mu_1 * max|Psi_1| = 0.02 * 0.5 = 0.01.
        IdentifierState s = scalar_state(0.5, 0.0, 0.0);
        s.w_plus(0, 0) = 0.3;
        HyperParams hp = zero_hyper(1);
        hp.mu = {0.02};
        step_w(s, hp, fixed);
        CHECK(s.mu_w == doctest::Approx(0.01).epsilon(1e-15));
        CHECK(s.w_hat()(0, 0) == doctest::Approx(0.395).epsilon(1e-14));
    }
}

TEST_CASE("adaptive_mu examples") {
    IdentifierState s = IdentifierState::zeros(2, 2);
    HyperParams hp = zero_hyper(2);
    hp.mu = {2.0, 1.0};
    CHECK(adaptive_mu(hp, s).cwiseAbs().maxCoeff() == 0.0);

    s.p_corr << 1, -3, 5, 7, 0, 2, 1, 1;
    CHECK(adaptive_mu(hp, s)[0] == 6.0);
    CHECK(adaptive_mu(hp, s)[1] == 7.0);
    hp.mu = {0.0, 0.0};
    CHECK(adaptive_mu(hp, s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero signal gives an empty estimate") {
    SignalStream s;
    s.n = 4;
    s.samples.assign(30, Vector::Zero(4));
    s.noise = s.samples;
    HyperParams hp;
    hp.mu = {0.1, 0.1};
    const auto res = run_algorithm1(s, hp, StepsizeController{}, 30);
    CHECK(max_abs(res.w_star) == 0.0);
    CHECK(res.steps == 30);
}

TEST_CASE("reference protocol identification returns a full-size estimate") {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    const TrialData d = prepare_trial(cfg, trial_seed(cfg.seed, 0));
    const auto res = run_algorithm1(d.stream, cfg.hyper, cfg.stepsize, cfg.t_star, {d.w.entries, {}, {}});
    CHECK(res.w_star.rows() == 12);
    CHECK(res.w_star.cols() == 12);
    CHECK(res.sigma.size() == 400u);
    CHECK(res.zeta.size() == 400u);
    CHECK(res.nnz.size() == 400u);
    CHECK(res.w_star.allFinite());
}

TEST_CASE("online run replays batch projected descent") {
    Rng rng(8);
    const SignalStream s = random_stream(2, 20, rng);
    HyperParams hp = zero_hyper(1);
    const auto res = run_algorithm1(s, hp, StepsizeController{}, 20);
    REQUIRE(res.alphas.size() == 20u);

    Matrix plus = Matrix::Zero(2, 2), minus = Matrix::Zero(2, 2);
    for (long t = 1; t <= 20; ++t) {
        Matrix r = Matrix::Zero(2, 2), p = Matrix::Zero(2, 2);
        for (long tau = 1; tau <= t; ++tau) {
            const Vector lag = lag_stack(s, tau, 1);
            r += lag * lag.transpose();
            p += s.at(tau) * lag.transpose();
        }
        const Matrix g = (plus - minus) * r - p;
        const double a = res.alphas[static_cast<std::size_t>(t - 1)][0];
        plus = (plus - a * g).cwiseMax(0.0);
        minus = (minus + a * g).cwiseMax(0.0);
    }
    CHECK(max_abs(res.state.psi() - (plus - minus)) <= 1e-8);
}

TEST_CASE("splits stay non-negative and every step decreases the objective") {
    for (int trial = 0; trial < 6; ++trial) {
        const auto cfg = ExperimentConfig::reference_protocol(trial % 2 ? TopologyKind::Sbm : TopologyKind::Random);
        const TrialData d = prepare_trial(cfg, trial_seed(RngSeed{31}, static_cast<std::uint64_t>(trial)));
        HyperParams hp = cfg.hyper;
        hp.path = trial % 3 == 0 ? Path::Path2 : Path::Path1;
        IdentifierState st = IdentifierState::zeros(d.stream.n, cfg.p_order);
        for (long t = 1; t <= 150; ++t) {
            update_correlations(st, d.stream.at(t), hp.lambda);
            const IdentifierState before = st;
            step_psi(st, hp, cfg.stepsize);
            const double f_new = psi_objective(st, hp, st.mu_t, st.psi_plus, st.psi_minus);
            // Same correlations and thresholds, old iterate.
            const double f_old = psi_objective(st, hp, st.mu_t, before.psi_plus, before.psi_minus);
            CHECK(f_new <= f_old + 1e-12 * std::abs(f_old));

            step_w(st, hp, cfg.stepsize);
            CHECK(st.psi_plus.minCoeff() >= 0.0);
            CHECK(st.psi_minus.minCoeff() >= 0.0);
            CHECK(st.w_plus.minCoeff() >= 0.0);
            CHECK(st.w_minus.minCoeff() >= 0.0);
            if (hp.path == Path::Path2) CHECK(st.w_hat() == st.psi().leftCols(st.n));
        }
    }
}

TEST_CASE("scaling the stream leaves the batch minimizer unchanged") {
    Rng rng(10);
    const SignalStream s = random_stream(3, 40, rng);
    for (double c : {-2.5, 0.01, 7.0}) {
        IdentifierState a = IdentifierState::zeros(3, 2), b = IdentifierState::zeros(3, 2);
        for (long t = 1; t <= 40; ++t) {
            update_correlations(a, s.at(t), 1.0);
            update_correlations(b, c * s.at(t), 1.0);
        }
        const Matrix psi_a = a.r.transpose().ldlt().solve(a.p_corr.transpose()).transpose();
        const Matrix psi_b = b.r.transpose().ldlt().solve(b.p_corr.transpose()).transpose();
        CHECK(max_abs(psi_a - psi_b) <= 1e-8 * (1.0 + max_abs(psi_a)));
    }
}

TEST_CASE("adjacency-only runs keep the negative splits at zero") {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Sbm);
    const TrialData d = prepare_trial(cfg, trial_seed(cfg.seed, 1));
    HyperParams hp = cfg.hyper;
    hp.adjacency_only = true;
    const auto res = run_algorithm1(d.stream, hp, cfg.stepsize, 100);
    CHECK(max_abs(res.state.psi_minus) == 0.0);
    CHECK(max_abs(res.state.w_minus) == 0.0);
}

TEST_CASE("plateau rule stops early on a stationary stream") {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    const TrialData d = prepare_trial(cfg, trial_seed(cfg.seed, 0));
    Algorithm1Options opts;
    opts.plateau = PlateauRule{50, 0.5};
    const auto res = run_algorithm1(d.stream, cfg.hyper, cfg.stepsize, 400, opts);
    CHECK(res.steps < 400);
    CHECK(res.steps >= 100);
}

TEST_CASE("hyperparameter validation") {
    HyperParams hp;
    hp.mu = {0.1, 0.2};
    CHECK_THROWS_AS(hp.validate(2), InvalidArgument);
    hp.mu = {0.2, 0.1};
    CHECK_NOTHROW(hp.validate(2));
    CHECK_THROWS_AS(hp.validate(3), InvalidArgument);
    hp.lambda = 0.0;
    CHECK_THROWS_AS(hp.validate(2), InvalidArgument);
    hp.lambda = 1.0;
    hp.gamma = -1.0;
    CHECK_THROWS_AS(hp.validate(2), InvalidArgument);

    StepsizeController sc;
    sc.shrink = 1.0;
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
    sc = StepsizeController{};
    sc.fixed_step = 0.0;
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
}

}  // TEST_SUITE
