#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qew/bounds.hpp"
#include "qew/discrete.hpp"

using namespace qew;

namespace {

DiscreteSimConfig zero_config(double F, double t_end, double dt) {
    DiscreteSimConfig cfg;
    cfg.L = 16;
    cfg.F = F;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.seed = 1;
    cfg.source = ObstacleSource::none;
    cfg.dist = make_deterministic(0.0);
    return cfg;
}

} // namespace

TEST_CASE("rhs: flat zero field, clamps, periodic Laplacian") {
    const RowField zero = RowField::zero();
    DiscreteState flat{std::vector<double>(8, 0.0), 0.0};
    for (const double r : rhs(flat, zero, 3.0)) CHECK(r == 3.0);

    // a site blocked by an obstacle stronger than the drive clamps to zero
    const double F = 3.0;
    const RowField blocking = RowField::constant(F + 1.0);
    const auto blocked = rhs(flat, blocking, F);
    for (const double r : blocked) CHECK(r == 0.0);

    // periodic Laplacian of (0,1,0) on L = 3: the outer sites see neighbors
    // 0 and 1, the middle clamps (0 + 0 - 2 = -2 -> 0)
    DiscreteState bump{{0.0, 1.0, 0.0}, 0.0};
    const auto r = rhs(bump, zero, 0.0);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 0.0);
    CHECK(r[2] == 1.0);
}

TEST_CASE("step: flat growth is exact, hand Euler step, stability guard") {
    const RowField zero = RowField::zero();
    // dyadic dt and integer F keep the flat update exact in floating point
    const double dt = 0x1.0p-8;
    DiscreteState s{std::vector<double>(5, 0.0), 0.0};
    for (int k = 1; k <= 64; ++k) {
        s = step(s, zero, 2.0, dt);
        for (const double u : s.u) CHECK(u == k * dt * 2.0);
    }

    DiscreteState bump{{0.0, 1.0, 0.0}, 0.0};
    const DiscreteState next = step(bump, zero, 0.0, 0.05);
    CHECK(next.u[0] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(next.u[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(next.u[2] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(next.t == doctest::Approx(0.05));

    CHECK_THROWS_AS((void)step(bump, zero, 10.0, 0.1), std::invalid_argument);
    const RowField strong = RowField::constant(50.0);
    (void)rhs(bump, strong, 1.0); // observe the strength
    CHECK_THROWS_AS((void)step(bump, strong, 1.0, 0.01), std::invalid_argument);
}

TEST_CASE("run: free propagation is exact") {
    const DiscreteSimConfig cfg = zero_config(3.0, 10.0, 0x1.0p-10);
    const RunResult r = run(cfg);
    CHECK(std::fabs(r.velocity - 3.0) < 1e-12);
    for (const double u : r.final_state.u)
        CHECK(std::fabs(u - 3.0 * r.final_state.t) / (3.0 * r.final_state.t) < 1e-12);
}

TEST_CASE("run: constant obstacles give velocity F - c, strong ones freeze") {
    DiscreteSimConfig cfg = zero_config(5.0, 4.0, 0x1.0p-10);
    cfg.source = ObstacleSource::rounded;
    cfg.dist = make_deterministic(2.0); // f~ == 2 on every row
    const RunResult r = run(cfg);
    CHECK(r.velocity == doctest::Approx(3.0).epsilon(1e-12));

    cfg.dist = make_deterministic(7.0); // stronger than the drive
    const RunResult frozen = run(cfg);
    CHECK(frozen.velocity == 0.0);
    for (const double u : frozen.final_state.u) CHECK(u == 0.0);
}

TEST_CASE("a strong observed obstacle tightens the stability bound mid-run") {
    DiscreteSimConfig cfg;
    cfg.L = 8;
    cfg.F = 1.0;
    cfg.dt = 0.03; // fine for F = 1 alone, too big once a strength-60 cell is seen
    cfg.t_end = 1.0;
    cfg.seed = 1;
    cfg.source = ObstacleSource::rounded;
    cfg.dist = make_deterministic(60.0);
    CHECK_THROWS_WITH_AS((void)run(cfg), doctest::Contains("stability"),
                         std::invalid_argument);
}

TEST_CASE("g-envelope obstacles: exact pinned and moving velocities") {
    // deterministic(1) strengths make g identical at every cell:
    // sup_M (9/M)(2M+1) = 27 at M = 1, so g = 1 + 1.5 * 27 = 41.5
    DiscreteSimConfig cfg;
    cfg.L = 8;
    cfg.dt = 1e-3;
    cfg.t_end = 0.5;
    cfg.seed = 2;
    cfg.source = ObstacleSource::envelope;
    cfg.dist = make_deterministic(1.0);
    cfg.delta = 0.25;

    cfg.F = 5.0; // below the envelope: frozen forever
    const RunResult frozen = run(cfg);
    CHECK(frozen.velocity == 0.0);

    cfg.F = 50.0; // flat profile moves at exactly F - g
    const RunResult moving = run(cfg);
    CHECK(moving.velocity == doctest::Approx(50.0 - 41.5).epsilon(1e-12));
}

TEST_CASE("run invariants on a random field") {
    DiscreteSimConfig cfg;
    cfg.L = 64;
    cfg.F = 6.0;
    cfg.dt = 1e-3;
    cfg.t_end = 4.0;
    cfg.seed = 31;
    cfg.source = ObstacleSource::rounded;
    cfg.dist = make_exponential(1.0, 0.5);
    const RunResult r = run(cfg);

    // comparison upper bound and velocity box
    const double eps = 10.0 * cfg.dt * cfg.F;
    for (const double u : r.final_state.u) {
        CHECK(u >= 0.0);
        CHECK(u <= cfg.F * r.final_state.t + eps);
    }
    CHECK(r.velocity >= 0.0);
    CHECK(r.velocity <= cfg.F);
    CHECK(r.late_min_ratio >= 0.0);
    CHECK(r.late_max_ratio <= cfg.F);

    // H_i = u_{i-1} + u_{i+1} - 2 u_i + F stays nonnegative at sampled times
    for (const TraceRow& row : r.trace) CHECK(row.min_H >= -1e-12);

    // monotonicity: u0/t trace implies nondecreasing u0; check final vs half-time
    double prev_u0 = 0.0;
    for (const TraceRow& row : r.trace) {
        CHECK(row.u0_over_t * row.t >= prev_u0 - 1e-12);
        prev_u0 = row.u0_over_t * row.t;
    }

    // bitwise seed determinism
    const RunResult again = run(cfg);
    REQUIRE(again.final_state.u.size() == r.final_state.u.size());
    for (std::size_t i = 0; i < r.final_state.u.size(); ++i)
        CHECK(again.final_state.u[i] == r.final_state.u[i]);
}

TEST_CASE("dt self-convergence on a fixed field") {
    DiscreteSimConfig cfg;
    cfg.L = 32;
    cfg.F = 5.0;
    cfg.t_end = 2.0;
    cfg.seed = 8;
    cfg.source = ObstacleSource::rounded;
    cfg.dist = make_exponential(1.0, 0.5);

    auto final_u = [&cfg](double dt) {
        DiscreteSimConfig c = cfg;
        c.dt = dt;
        return run(c).final_state.u;
    };
    const auto u1 = final_u(4e-3);
    const auto u2 = final_u(2e-3);
    const auto u4 = final_u(1e-3);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < u1.size(); ++i) {
        d1 = std::max(d1, std::fabs(u1[i] - u2[i]));
        d2 = std::max(d2, std::fabs(u2[i] - u4[i]));
    }
    CHECK(d1 <= 0.2);            // small to begin with
    CHECK(d2 <= 0.75 * d1 + 1e-9); // and shrinking roughly linearly in dt
}

TEST_CASE("flatness check: precondition and zero-field pass") {
    DiscreteState flat{std::vector<double>(8, 2.0), 10.0};
    const FlatnessResult ok = flatness_check(flat, 10.0, 5.0);
    CHECK(ok.pass);
    CHECK(ok.max_grad_over_t == 0.0);

    // F = 10, Gamma = 5: valid only for t > 2 F^2 / Gamma^2 = 8
    DiscreteState early{std::vector<double>(8, 2.0), 8.0};
    CHECK_THROWS_AS((void)flatness_check(early, 10.0, 5.0), std::invalid_argument);
    DiscreteState late{std::vector<double>(8, 2.0), 8.01};
    CHECK(flatness_check(late, 10.0, 5.0).pass);
}

TEST_CASE("flatness on a driven random field") {
    DiscreteSimConfig cfg;
    cfg.L = 32;
    cfg.F = 8.0;
    cfg.dt = 1e-3;
    cfg.t_end = 2.0;
    cfg.seed = 5;
    cfg.source = ObstacleSource::rounded;
    cfg.dist = make_exponential(1.0, 0.5);
    const RunResult r = run(cfg);
    // Gamma = 10 makes the check valid from t > 2*64/100 = 1.28
    CHECK(flatness_check(r.final_state, cfg.F, 10.0).pass);
}

TEST_CASE("velocity bound check") {
    DiscreteSimConfig cfg = zero_config(3.0, 2.0, 1e-3);
    const VelocityStats stats = collect_velocity_stats(run_replicas(cfg, 4));
    CHECK(stats.mean == doctest::Approx(3.0).epsilon(1e-12));

    // free propagation at F = 3 dominates Wbar(3; 1, 1)
    const double W = wbar(3.0, 1.0, 1.0).value;
    CHECK(W <= 3.0);
    CHECK(bound_check(stats, W).pass);
    CHECK(bound_check(stats, 0.0).pass); // nonnegative velocities
    VelocityStats two;
    two.per_replica = {0.0, 0.0};
    two.mean = 0.0;
    two.std_error = 0.0;
    CHECK(bound_check(two, 0.0).pass); // F = 0 edge case
    VelocityStats one;
    one.per_replica = {1.0};
    CHECK_THROWS_AS((void)bound_check(one, 0.0), std::invalid_argument);
}
