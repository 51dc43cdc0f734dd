#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qew/field.hpp"

using namespace qew;

TEST_CASE("deterministic strengths are the constant") {
    const ObstacleLattice lattice{42, make_deterministic(2.0)};
    CHECK(lattice.strength_at(0, 0) == 2.0);
    CHECK(lattice.strength_at(-17, 923) == 2.0);
}

TEST_CASE("strengths are pure functions of (seed, i, j)") {
    const ObstacleLattice lattice{7, make_exponential(1.0, 0.5)};
    const double a = lattice.strength_at(3, -5);
    CHECK(lattice.strength_at(3, -5) == a);
    const ObstacleLattice same{7, make_exponential(1.0, 0.5)};
    CHECK(same.strength_at(3, -5) == a);
    const ObstacleLattice other{8, make_exponential(1.0, 0.5)};
    CHECK(other.strength_at(3, -5) != a);
}

TEST_CASE("law of large numbers: exponential(1) sample mean") {
    const ObstacleLattice lattice{2024, make_exponential(1.0, 0.5)};
    double sum = 0.0;
    const int n = 1'000'000;
    for (int k = 0; k < n; ++k) sum += lattice.strength_at(k % 1000, k / 1000);
    const double mean = sum / n;
    CHECK(std::fabs(mean - 1.0) < 3e-3); // 3 sigma with sigma = 1e-3
}

TEST_CASE("exp_moment closed forms") {
    CHECK(make_deterministic(2.0).exp_moment(0.5) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(make_exponential(1.0, 0.5).exp_moment(0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(make_deterministic(0.0).exp_moment(3.7) == 1.0);
    const double la = 0.5 * 3.0;
    CHECK(make_uniform(3.0).exp_moment(0.5) ==
          doctest::Approx(std::expm1(la) / la).epsilon(1e-14));
    CHECK_THROWS_AS((void)make_exponential(1.0, 0.5).exp_moment(1.0), std::domain_error);
    CHECK_THROWS_AS((void)make_exponential(1.0, 0.5).exp_moment(2.0), std::domain_error);
}

TEST_CASE("empirical exponential moment matches the closed form") {
    const StrengthDistribution dist = make_exponential(2.0, 1.0);
    const ObstacleLattice lattice{99, dist};
    const double lam = 1.0;
    double sum = 0.0, sumsq = 0.0;
    const int n = 100'000;
    for (int k = 0; k < n; ++k) {
        const double x = std::exp(lam * lattice.strength_at(k, 0));
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean - dist.exp_moment(lam)) < 5.0 * se);
}

TEST_CASE("bump profile: normalization, range, support, C1 boundary") {
    const BumpProfile phi = BumpProfile::cosine(0.25);
    CHECK(phi.value(0.0, 0.0) == 1.0);
    CHECK(phi.value(0.25, 0.0) == 0.0);
    CHECK(phi.value(0.0, -0.25) == 0.0);
    CHECK(phi.value(0.3, 0.1) == 0.0);
    for (double x = -0.24; x <= 0.24; x += 0.03)
        for (double y = -0.24; y <= 0.24; y += 0.03) {
            const double v = phi.value(x, y);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    // gradient vanishes at the support boundary: one-sided quotient -> 0
    const double h = 1e-6;
    CHECK(std::fabs(phi.value(0.25 - h, 0.0) - phi.value(0.25, 0.0)) / h < 1e-4);
    CHECK(std::fabs(phi.value(0.0, 0.25 - h) - phi.value(0.0, 0.25)) / h < 1e-4);
    CHECK_THROWS_AS(BumpProfile::cosine(0.6), std::domain_error);
}

TEST_CASE("field_eval: zero law, centers, support") {
    const BumpProfile phi = BumpProfile::cosine(0.25);
    const ObstacleLattice zero{1, make_deterministic(0.0)};
    CHECK(field_eval(zero, phi, 0.37, 2.91) == 0.0);

    const ObstacleLattice lattice{11, make_exponential(1.0, 0.5)};
    // at an obstacle center the shape is 1, so the raw strength comes back
    CHECK(field_eval(lattice, phi, 3.0, 7.5) ==
          doctest::Approx(lattice.strength_at(3, 7)).epsilon(1e-14));
    // farther than delta from every center in either coordinate
    CHECK(field_eval(lattice, phi, 3.5, 7.5) == 0.0);
    CHECK(field_eval(lattice, phi, 3.0, 7.0) == 0.0);
    for (int k = 0; k < 200; ++k) {
        const double x = uniform01(cell_hash(5, k, 0)) * 20.0 - 10.0;
        const double y = uniform01(cell_hash(5, k, 1)) * 20.0 - 10.0;
        const double f = field_eval(lattice, phi, x, y);
        CHECK(f >= 0.0);
        const double dist_x = std::fabs(x - std::round(x));
        const double dist_y = std::fabs(y - 0.5 - std::round(y - 0.5));
        if (dist_x > 0.25 || dist_y > 0.25) CHECK(f == 0.0);
    }
}

TEST_CASE("g_strength: zero field, single obstacle, monotone in m_max") {
    const GEnvelopeParams params{64};
    const StrengthFn zero = [](std::int64_t, std::int64_t) { return 0.0; };
    CHECK(g_strength(zero, 0.25, 0, 0, params).value == 1.0);

    // single obstacle of strength s at the queried cell, delta = 1/4:
    // the M = 1 window already contains it and 36 delta / M = 9
    const double s = 2.5;
    const StrengthFn single = [s](std::int64_t i, std::int64_t j) {
        return (i == 0 && j == 5) ? s : 0.0;
    };
    const GValue g = g_strength(single, 0.25, 0, 5, params);
    CHECK(g.value == doctest::Approx(1.0 + 1.5 * 9.0 * s).epsilon(1e-14));
    CHECK(g.arg_m == 1);
    CHECK(g.maximizer_interior);

    const ObstacleLattice lattice{3, make_exponential(1.0, 0.5)};
    const StrengthFn field = strength_fn(lattice);
    double prev = 0.0;
    for (int m = 1; m <= 128; m *= 2) {
        const double v = g_strength(field, 0.25, 2, -1, GEnvelopeParams{m}).value;
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(g_strength(field, 0.25, 0, 0, GEnvelopeParams{0}), std::domain_error);
}

TEST_CASE("g is dominated by the 180 window-average envelope") {
    const GEnvelopeParams params{64};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ObstacleLattice lattice{seed, make_exponential(1.0, 0.5)};
        const StrengthFn field = strength_fn(lattice);
        const double delta = 0.05 + 0.4 * uniform01(cell_hash(seed, 1, 2));
        const int n_max = static_cast<int>(std::ceil(4.0 * delta * params.m_max)) + 1;
        for (std::int64_t j = -2; j <= 2; ++j) {
            const double g = g_strength(field, delta, 0, j, params).value;
            const double env = g_envelope_upper(field, 0, j, n_max);
            CHECK(g <= env + 1e-12);
        }
    }
}

TEST_CASE("ftilde rounding convention and zero field") {
    CHECK(row_of(0.5) == 0);
    CHECK(row_of(0.4999) == 0);
    CHECK(row_of(1.5) == 1);
    CHECK(row_of(-0.5) == -1);
    CHECK(row_of(2.0) == 2);

    const GEnvelopeParams params{16};
    const BumpProfile phi = BumpProfile::cosine(0.25);
    const ObstacleLattice zero{1, make_deterministic(0.0)};
    CHECK(ftilde(zero, phi, 0, 123.456, params) == 1.0);
}

TEST_CASE("fbar equals g_strength and dominates ftilde on the row") {
    const GEnvelopeParams params{32};
    const BumpProfile phi = BumpProfile::cosine(0.25);
    const ObstacleLattice lattice{17, make_exponential(1.0, 0.5)};
    for (std::int64_t j = -3; j <= 3; ++j) {
        const double fb = fbar(lattice, phi, 1, j, params);
        CHECK(fb == g_strength(lattice, phi, 1, j, params).value);
        for (int k = 0; k < 10; ++k) {
            const double y = j - 0.5 + (k + 1) * 0.1; // samples of (j-1/2, j+1/2]
            CHECK(fb >= ftilde(lattice, phi, 1, y, params));
        }
    }
    const ObstacleLattice zero{1, make_deterministic(0.0)};
    CHECK(fbar(zero, phi, 0, 0, params) == 1.0);
}
