#include "gsoid/errors.hpp"
#include "gsoid/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace gsoid;

namespace {

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

Matrix sparse_random(Eigen::Index n, Rng& rng) {
    Matrix m = test::random_matrix(n, n, rng);
    return (m.array().abs() > 0.8).select(m, 0.0);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("signal NMSE examples") {
    const Vector x = vec2(1.0, -2.0);
    CHECK(*nmse_signal(Vector::Zero(2), x) == 0.0);
    CHECK(*nmse_signal(x, x) == 1.0);
    CHECK(*nmse_signal(vec2(3, 4), vec2(0, 5)) == 1.0);
    CHECK_FALSE(nmse_signal(x, Vector::Zero(2)).has_value());
    CHECK_THROWS_AS(nmse_signal(Vector::Zero(3), x), InvalidArgument);
}

TEST_CASE("GSO NMSE examples") {
    Rng rng(1);
    const Matrix w = test::random_matrix(4, 4, rng);
    CHECK(nmse_gso(w, w) == 0.0);
    CHECK(nmse_gso(w, Matrix::Zero(4, 4)) == 1.0);
    Matrix hat(2, 2);
    hat << 1, 1, 0, 1;
    CHECK(nmse_gso(Matrix::Identity(2, 2), hat) == 0.5);
    CHECK_THROWS_AS(nmse_gso(w, Matrix::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("GSO NMSE of a scaled estimate") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix w = test::random_matrix(5, 5, rng);
        const double c = -2.0 + 0.1 * trial;
        CHECK(nmse_gso(w, c * w) == doctest::Approx((1 - c) * (1 - c)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("support error examples") {
    Rng rng(3);
    const Matrix w = sparse_random(6, rng);
    const auto same = support_errors(w, 2.0 * w);
    CHECK(*same.p_fa == 0.0);
    CHECK(*same.p_m == 0.0);
    CHECK(same.support_accuracy == 1.0);

    const auto k = static_cast<double>((w.array() != 0.0).count());
    const auto none = support_errors(w, Matrix::Zero(6, 6));
    CHECK(*none.p_fa == 0.0);
    CHECK(*none.p_m == 1.0);
    CHECK(none.support_accuracy == doctest::Approx((36.0 - k) / 36.0));

    Matrix t = Matrix::Zero(2, 2), h = Matrix::Zero(2, 2);
    t(0, 1) = 1.0;
    h(1, 0) = 1.0;
    const auto cross = support_errors(t, h);
    CHECK(*cross.p_fa == doctest::Approx(1.0 / 3.0));
    CHECK(*cross.p_m == 1.0);
    CHECK(cross.support_accuracy == 0.5);

    const auto empty = support_errors(Matrix::Zero(3, 3), Matrix::Zero(3, 3));
    CHECK_FALSE(empty.p_m.has_value());
    CHECK(*empty.p_fa == 0.0);
    CHECK_FALSE(support_errors(Matrix::Ones(3, 3), Matrix::Ones(3, 3)).p_fa.has_value());
    CHECK_THROWS_AS(support_errors(Matrix::Ones(3, 3), Matrix::Ones(2, 2)), InvalidArgument);
}

TEST_CASE("support errors with the diagonal excluded") {
    Matrix t = Matrix::Identity(3, 3), h = Matrix::Zero(3, 3);
    t(0, 1) = 1.0;
    h(0, 1) = 1.0;
    SupportOptions opts;
    opts.exclude_diagonal = true;
    const auto e = support_errors(t, h, opts);
    CHECK(*e.p_m == 0.0);
    CHECK(*e.p_fa == 0.0);
    CHECK(e.support_accuracy == 1.0);
}

TEST_CASE("support errors are invariant to positive rescaling") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix a = sparse_random(5, rng), b = sparse_random(5, rng);
        const double ca = std::exp(0.2 * (trial % 13) - 1.0), cb = std::exp(1.5 - 0.3 * (trial % 7));
        const auto base = support_errors(a, b), scaled = support_errors(ca * a, cb * b);
        CHECK(base.p_fa == scaled.p_fa);
        CHECK(base.p_m == scaled.p_m);
        CHECK(base.support_accuracy == scaled.support_accuracy);
    }
}

TEST_CASE("error rates complement the per-class correct rates") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix a = sparse_random(6, rng), b = sparse_random(6, rng);
        const auto e = support_errors(a, b);
        long zeros = 0, true_neg = 0, nonzeros = 0, true_pos = 0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const bool t = a.data()[i] != 0.0, h = b.data()[i] != 0.0;
            if (t) {
                ++nonzeros;
                true_pos += h;
            } else {
                ++zeros;
                true_neg += !h;
            }
        }
        if (zeros) CHECK(*e.p_fa + static_cast<double>(true_neg) / zeros == doctest::Approx(1.0));
        if (nonzeros) CHECK(*e.p_m + static_cast<double>(true_pos) / nonzeros == doctest::Approx(1.0));
    }
}

TEST_CASE("relative support threshold") {
    Matrix m(1, 3);
    m << 1.0, 1e-7, 1e-5;
    const auto s = support_of(m, 1e-6);
    CHECK(s(0, 0));
    CHECK_FALSE(s(0, 1));
    CHECK(s(0, 2));
    CHECK_FALSE(support_of(Matrix::Zero(2, 2), 1e-6).any());
}

TEST_CASE("nan_mean skips undefined values") {
    const double nan = std::nan("");
    CHECK(nan_mean({0.1, 0.3}) == doctest::Approx(0.2));
    CHECK(nan_mean({nan, 1.0, 3.0}) == 2.0);
    CHECK(std::isnan(nan_mean({nan})));
    CHECK(std::isnan(nan_mean({})));
}

}  // TEST_SUITE
