#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qew/field.hpp"

namespace qew {

struct Grid1D {
    int n_cells = 32; // nodes per unit length, dx = 1/n_cells
    int L_int = 32;   // integer domain length, periodic on [0, L_int)

    double dx() const { return 1.0 / n_cells; }
    int size() const { return n_cells * L_int; }
};

// Obstacle field over the periodic domain; column indices wrap modulo L_int.
struct ContinuumField {
    ObstacleLattice lattice;
    BumpProfile profile;
    int L_int = 32;

    double strength_col(std::int64_t i, std::int64_t j) const {
        const std::int64_t m = ((i % L_int) + L_int) % L_int;
        return lattice.strength_at(m, j);
    }
    // f(x, y) with obstacle centers at (i, j + 1/2).
    double operator()(double x, double y) const;
};

struct ContinuumState {
    std::vector<double> u;
    double t = 0.0;
};

struct ContinuumConfig {
    double F = 0.0;
    double dt = 0.0;      // 0 = pick 0.4 dx^2
    double t_end = 1.0;
    bool modified = false; // mask the force off the obstacle columns
    Grid1D grid;
    ContinuumField field;
    int snapshots = 20;

    double effective_dt() const { return dt > 0.0 ? dt : 0.4 * grid.dx() * grid.dx(); }
    void validate() const;
};

// chi_A(x) = 0 iff dist(x, Z) < delta.
inline double chi_mask(double x, double delta) {
    const double nearest = std::abs(x - std::round(x));
    return nearest < delta ? 0.0 : 1.0;
}

// Central-difference right-hand side u_xx - f(x,u) + F (or F chi_A).
std::vector<double> pde_rhs(const ContinuumState& state, const ContinuumConfig& cfg);

// One forward-time centered-space step; throws when dt violates the CFL bound.
ContinuumState step_ftcs(const ContinuumState& state, const ContinuumConfig& cfg);

// Trapezoidal integral of u over [0,1].
double averaged_height(const ContinuumState& state, const Grid1D& grid);

struct ContinuumTraceRow {
    double t = 0.0;
    double U = 0.0;           // averaged height
    double min_ut = 0.0;      // min nodal du/dt since the previous snapshot
    double spread_over_t = 0.0; // (max u - min u)/t, the flatness diagnostic
};

struct ContinuumRun {
    std::vector<ContinuumState> snapshots;
    std::vector<ContinuumTraceRow> trace;
    double min_ut = 0.0; // global min of the stepper increments / dt
    ContinuumState final_state;
};

ContinuumRun run_continuum(const ContinuumConfig& cfg);

// Hat discretization u^_i = u(i-delta) + 2 delta u_x(i-delta) together with
// the slopes and window integrals entering the per-site estimates. Slopes at
// the mask edges i +- delta use one-sided cubic stencils from the smooth
// region between columns (u_xx jumps there); the u_t window integrals are
// evaluated in flux form using the equation itself,
//   int u_t = [u_x] - int f(x,u) + F |A cap window|.
struct HatDiscretization {
    double t = 0.0;
    double delta = 0.25;
    std::vector<double> u_hat;
    std::vector<double> slope_left;  // u_x(i - delta)
    std::vector<double> slope_right; // u_x(i + delta)
    std::vector<double> col_f;       // int_{i-delta}^{i+delta} f(xi, u(xi)) dxi
    std::vector<double> col_ut;      // int of u_t over the obstacle column
    std::vector<double> win_ut;      // int of u_t over (i-1-delta, i+1-delta)
};

// Valid for snapshots of the modified problem (the flux form assumes the
// masked force).
HatDiscretization hat_discretize(const ContinuumState& state, const ContinuumConfig& cfg);

struct MarginReport {
    double worst_margin = 0.0; // min over sites of (required RHS - LHS)
    int worst_site = -1;
    int checked = 0;
    int skipped = 0;
};

// Discrete Laplacian estimate: u^ Laplacian <= (1+2d)[slope difference - col int]
// - (1-2d) F + 2(1+d) window int.
MarginReport check_laplacian_estimate(const HatDiscretization& hat, double F);

// Obstacle estimate: k(i) = u_x(i-d) - u_x(i+d) <= (18 d / M) sum of strengths
// in the passed rows + col int. Sites with M <= m_floor are skipped.
MarginReport check_obstacle_estimate(const HatDiscretization& hat,
                                     const ContinuumField& field, double m_floor = 1e-6);

// Integrated-velocity corollary: 2(1+d) window int >= (discrete expression)^+.
MarginReport check_corollary_velocity(const HatDiscretization& hat, double F);

struct UtReport {
    double min_ut = 0.0;
    bool pass = false;
};

// min du/dt over nodes and steps of a modified-problem run, against -eps.
UtReport check_ut_nonneg(const ContinuumRun& run, double eps);

struct ComparisonReport {
    double min_gap = 0.0; // min over snapshots/nodes of (u - u~)
    bool pass = false;
};

// Comparison principle: the unmodified solution dominates the modified one.
ComparisonReport comparison_check(const ContinuumRun& unmodified,
                                  const ContinuumRun& modified, double eps);

} // namespace qew
