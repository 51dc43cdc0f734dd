#include "qew/continuum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qew {

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

// Lagrange cubic through nodes k0..k0+3 (node spacing dx, periodic values);
// returns {value, derivative} at x.
std::pair<double, double> cubic_at(const std::vector<double>& u, std::int64_t k0,
                                   double x, double dx) {
    const auto N = static_cast<std::int64_t>(u.size());
    const double s = x / dx - static_cast<double>(k0);
    std::array<double, 4> y{};
    for (int m = 0; m < 4; ++m) y[m] = u[static_cast<std::size_t>((((k0 + m) % N) + N) % N)];
    double value = 0.0, deriv = 0.0;
    for (int m = 0; m < 4; ++m) {
        double denom = 1.0, num = 1.0;
        for (int q = 0; q < 4; ++q) {
            if (q == m) continue;
            denom *= static_cast<double>(m - q);
            num *= s - q;
        }
        value += y[m] * num / denom;
        double dnum = 0.0;
        for (int r = 0; r < 4; ++r) {
            if (r == m) continue;
            double prod = 1.0;
            for (int q = 0; q < 4; ++q)
                if (q != m && q != r) prod *= s - q;
            dnum += prod;
        }
        deriv += y[m] * dnum / denom;
    }
    return {value, deriv / dx};
}

} // namespace

double ContinuumField::operator()(double x, double y) const {
    const double d = profile.delta;
    const auto i = static_cast<std::int64_t>(std::llround(x));
    const double ox = x - static_cast<double>(i);
    if (std::fabs(ox) >= d) return 0.0;
    const auto jlo = static_cast<std::int64_t>(std::ceil(y - 0.5 - d));
    const auto jhi = static_cast<std::int64_t>(std::floor(y - 0.5 + d));
    double total = 0.0;
    for (std::int64_t j = jlo; j <= jhi; ++j)
        total += strength_col(i, j) * profile.value(ox, y - static_cast<double>(j) - 0.5);
    return total;
}

void ContinuumConfig::validate() const {
    std::ostringstream msg;
    if (grid.n_cells < 8) msg << "n_cells must be >= 8; ";
    if (grid.L_int < 1) msg << "L_int must be >= 1; ";
    const double d = field.profile.delta;
    if (!(d > 0.0 && d < 0.5)) msg << "delta must lie in (0, 1/2); ";
    if (2.0 * d * grid.n_cells < 4.0)
        msg << "obstacle boxes must span >= 4 grid cells (2*delta*n_cells >= 4); ";
    if (field.L_int != grid.L_int) msg << "field and grid disagree on L_int; ";
    if ((1.0 - 2.0 * d) * grid.n_cells < 3.0)
        msg << "gap between columns must span >= 3 grid cells for the check stencils; ";
    const double dx = grid.dx();
    const double cfl = 0.5 * dx * dx;
    if (effective_dt() > cfl)
        msg << "dt = " << effective_dt() << " violates the CFL bound dx^2/2 = " << cfl << "; ";
    if (!(t_end > 0.0)) msg << "t_end must be > 0; ";
    if (snapshots < 1) msg << "snapshots must be >= 1; ";
    const std::string text = msg.str();
    if (!text.empty()) throw std::invalid_argument("continuum config: " + text);
}

std::vector<double> pde_rhs(const ContinuumState& state, const ContinuumConfig& cfg) {
    const auto N = static_cast<std::int64_t>(state.u.size());
    const double dx = cfg.grid.dx();
    const double inv_dx2 = 1.0 / (dx * dx);
    const double d = cfg.field.profile.delta;
    std::vector<double> out(state.u.size());
    for (std::int64_t k = 0; k < N; ++k) {
        const double x = static_cast<double>(k) * dx;
        const double lap =
            (state.u[(k + N - 1) % N] + state.u[(k + 1) % N] - 2.0 * state.u[k]) * inv_dx2;
        const double force = cfg.modified ? cfg.F * chi_mask(x, d) : cfg.F;
        out[k] = lap - cfg.field(x, state.u[k]) + force;
    }
    return out;
}

ContinuumState step_ftcs(const ContinuumState& state, const ContinuumConfig& cfg) {
    const double dx = cfg.grid.dx();
    const double dt = cfg.effective_dt();
    if (dt > 0.5 * dx * dx)
        throw std::invalid_argument("step_ftcs: dt violates the CFL bound dx^2/2 = " +
                                    std::to_string(0.5 * dx * dx));
    std::vector<double> r = pde_rhs(state, cfg);
    ContinuumState next = state;
    for (std::size_t k = 0; k < r.size(); ++k) next.u[k] += dt * r[k];
    next.t = state.t + dt;
    return next;
}

double averaged_height(const ContinuumState& state, const Grid1D& grid) {
    const auto N = static_cast<std::int64_t>(state.u.size());
    const double dx = grid.dx();
    double sum = 0.5 * (state.u[0] + state.u[grid.n_cells % N]);
    for (int k = 1; k < grid.n_cells; ++k) sum += state.u[static_cast<std::size_t>(k)];
    return sum * dx;
}

ContinuumRun run_continuum(const ContinuumConfig& cfg) {
    cfg.validate();
    const auto N = static_cast<std::int64_t>(cfg.grid.size());
    const double dx = cfg.grid.dx();
    const double inv_dx2 = 1.0 / (dx * dx);
    const double dt = cfg.effective_dt();
    const double d = cfg.field.profile.delta;
    const auto n_steps = static_cast<std::int64_t>(std::llround(cfg.t_end / dt));

    // Per-node constants: offset to the owning column and mask value.
    std::vector<double> offset(cfg.grid.size()), mask(cfg.grid.size());
    std::vector<std::int64_t> column(cfg.grid.size());
    std::vector<char> active(cfg.grid.size());
    for (std::int64_t k = 0; k < N; ++k) {
        const double x = static_cast<double>(k) * dx;
        const auto i = static_cast<std::int64_t>(std::llround(x));
        column[k] = i;
        offset[k] = x - static_cast<double>(i);
        active[k] = std::fabs(offset[k]) < d ? 1 : 0;
        mask[k] = cfg.modified ? chi_mask(x, d) : 1.0;
    }

    std::vector<std::int64_t> snap_steps;
    for (int s = 1; s <= cfg.snapshots; ++s)
        snap_steps.push_back(std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::llround(static_cast<double>(s) * n_steps /
                                                      cfg.snapshots))));
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

    ContinuumRun out;
    out.min_ut = 1e300;
    std::vector<double> u(cfg.grid.size(), 0.0), unew(cfg.grid.size(), 0.0);
    double interval_min_ut = 1e300;
    std::size_t next_snap = 0;

    for (std::int64_t s = 1; s <= n_steps; ++s) {
        for (std::int64_t k = 0; k < N; ++k) {
            double fv = 0.0;
            if (active[k]) {
                const double y = u[k];
                const auto jlo = static_cast<std::int64_t>(std::ceil(y - 0.5 - d));
                const auto jhi = static_cast<std::int64_t>(std::floor(y - 0.5 + d));
                for (std::int64_t j = jlo; j <= jhi; ++j)
                    fv += cfg.field.strength_col(column[k], j) *
                          cfg.field.profile.value(offset[k], y - static_cast<double>(j) - 0.5);
            }
            const double lap = (u[(k + N - 1) % N] + u[(k + 1) % N] - 2.0 * u[k]) * inv_dx2;
            const double r = lap - fv + cfg.F * mask[k];
            interval_min_ut = std::min(interval_min_ut, r);
            unew[k] = u[k] + dt * r;
        }
        u.swap(unew);
        if (next_snap < snap_steps.size() && s == snap_steps[next_snap]) {
            const double t = static_cast<double>(s) * dt;
            if (!std::isfinite(u[0]))
                throw std::runtime_error("run_continuum: non-finite height at t = " +
                                         std::to_string(t));
            ContinuumState snap;
            snap.u = u;
            snap.t = t;
            ContinuumTraceRow row;
            row.t = t;
            row.U = averaged_height(snap, cfg.grid);
            row.min_ut = interval_min_ut;
            const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
            row.spread_over_t = (*mx - *mn) / t;
            out.min_ut = std::min(out.min_ut, interval_min_ut);
            interval_min_ut = 1e300;
            out.trace.push_back(row);
            out.snapshots.push_back(std::move(snap));
            ++next_snap;
        }
    }
    out.min_ut = std::min(out.min_ut, interval_min_ut);
    out.final_state.u = std::move(u);
    out.final_state.t = static_cast<double>(n_steps) * dt;
    return out;
}

HatDiscretization hat_discretize(const ContinuumState& state, const ContinuumConfig& cfg) {
    const double dx = cfg.grid.dx();
    const double d = cfg.field.profile.delta;
    const int L = cfg.grid.L_int;
    HatDiscretization hat;
    hat.t = state.t;
    hat.delta = d;
    hat.u_hat.resize(L);
    hat.slope_left.resize(L);
    hat.slope_right.resize(L);
    hat.col_f.resize(L);
    hat.col_ut.resize(L);
    hat.win_ut.resize(L);

    const double tiny = 1e-9 * dx;
    for (int i = 0; i < L; ++i) {
        // u_x(i - delta): cubic through the last four nodes of the gap region
        // left of the column (u_xx jumps at the mask edge, the gap side is smooth).
        const double xl = static_cast<double>(i) - d;
        const auto ke = static_cast<std::int64_t>(std::floor((xl + tiny) / dx));
        const auto [val_l, slope_l] = cubic_at(state.u, ke - 3, xl, dx);
        hat.slope_left[i] = slope_l;
        hat.u_hat[i] = val_l + 2.0 * d * slope_l;

        // u_x(i + delta): first four nodes of the gap region right of the column.
        const double xr = static_cast<double>(i) + d;
        const auto ks = static_cast<std::int64_t>(std::ceil((xr - tiny) / dx));
        hat.slope_right[i] = cubic_at(state.u, ks, xr, dx).second;

        // int_{i-d}^{i+d} f(xi, u(xi)) dxi with sub-cell Gauss quadrature on a
        // cubic interpolant of u; stencils stay inside the column.
        const auto kc0 = static_cast<std::int64_t>(std::ceil((xl - tiny) / dx));
        const auto kc1 = static_cast<std::int64_t>(std::floor((xr + tiny) / dx));
        double integral = 0.0;
        const auto cell_lo = static_cast<std::int64_t>(std::floor((xl + tiny) / dx));
        for (std::int64_t k = cell_lo; static_cast<double>(k) * dx < xr - tiny; ++k) {
            const double a = std::max(xl, static_cast<double>(k) * dx);
            const double b = std::min(xr, static_cast<double>(k + 1) * dx);
            if (b <= a) continue;
            const std::int64_t sel = std::clamp(k - 1, kc0, kc1 - 3);
            for (int q = 0; q < 5; ++q) {
                const double xq = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[q];
                const double uq = cubic_at(state.u, sel, xq, dx).first;
                integral += 0.5 * (b - a) * kGaussW[q] * cfg.field(xq, uq);
            }
        }
        hat.col_f[i] = integral;
    }
    for (int i = 0; i < L; ++i) {
        const int prev = (i + L - 1) % L;
        const int next = (i + 1) % L;
        // Flux form of the masked equation: the force vanishes on the column,
        // contributes F(2 - 4 delta) on the two-cell window.
        hat.col_ut[i] = hat.slope_right[i] - hat.slope_left[i] - hat.col_f[i];
        hat.win_ut[i] = hat.slope_left[next] - hat.slope_left[prev] - hat.col_f[prev] -
                        hat.col_f[i] + cfg.F * (2.0 - 4.0 * d);
    }
    return hat;
}

MarginReport check_laplacian_estimate(const HatDiscretization& hat, double F) {
    const auto L = static_cast<int>(hat.u_hat.size());
    const double d = hat.delta;
    MarginReport report;
    report.worst_margin = 1e300;
    for (int i = 0; i < L; ++i) {
        const int prev = (i + L - 1) % L;
        const int next = (i + 1) % L;
        const double lhs = hat.u_hat[prev] - 2.0 * hat.u_hat[i] + hat.u_hat[next];
        const double rhs = (1.0 + 2.0 * d) *
                               (hat.slope_right[i] - hat.slope_left[i] - hat.col_ut[i]) -
                           (1.0 - 2.0 * d) * F + 2.0 * (1.0 + d) * hat.win_ut[i];
        const double margin = rhs - lhs;
        ++report.checked;
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_site = i;
        }
    }
    return report;
}

MarginReport check_obstacle_estimate(const HatDiscretization& hat,
                                     const ContinuumField& field, double m_floor) {
    const auto L = static_cast<int>(hat.u_hat.size());
    const double d = hat.delta;
    MarginReport report;
    report.worst_margin = 1e300;
    for (int i = 0; i < L; ++i) {
        const double M = std::max(std::fabs(hat.slope_left[i]), std::fabs(hat.slope_right[i]));
        if (M <= m_floor) {
            ++report.skipped; // k(i) ~ 0 there
            continue;
        }
        const double k_i = hat.slope_left[i] - hat.slope_right[i];
        const auto jlo = static_cast<std::int64_t>(std::ceil(hat.u_hat[i] - 4.0 * d * M));
        const auto jhi = static_cast<std::int64_t>(std::floor(hat.u_hat[i] + 4.0 * d * M));
        double strengths = 0.0;
        for (std::int64_t j = jlo; j <= jhi; ++j) strengths += field.strength_col(i, j);
        const double margin = (18.0 * d / M) * strengths + hat.col_ut[i] - k_i;
        ++report.checked;
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_site = i;
        }
    }
    if (report.checked == 0) report.worst_margin = 0.0;
    return report;
}

MarginReport check_corollary_velocity(const HatDiscretization& hat, double F) {
    const auto L = static_cast<int>(hat.u_hat.size());
    const double d = hat.delta;
    MarginReport report;
    report.worst_margin = 1e300;
    for (int i = 0; i < L; ++i) {
        const int prev = (i + L - 1) % L;
        const int next = (i + 1) % L;
        const double lap = hat.u_hat[prev] - 2.0 * hat.u_hat[i] + hat.u_hat[next];
        const double bracket = lap -
                               (1.0 + 2.0 * d) * (hat.slope_right[i] - hat.slope_left[i] -
                                                  hat.col_ut[i]) +
                               (1.0 - 2.0 * d) * F;
        const double margin = 2.0 * (1.0 + d) * hat.win_ut[i] - pos(bracket);
        ++report.checked;
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_site = i;
        }
    }
    return report;
}

UtReport check_ut_nonneg(const ContinuumRun& run, double eps) {
    UtReport report;
    report.min_ut = run.min_ut;
    report.pass = run.min_ut >= -eps;
    return report;
}

ComparisonReport comparison_check(const ContinuumRun& unmodified,
                                  const ContinuumRun& modified, double eps) {
    if (unmodified.snapshots.size() != modified.snapshots.size())
        throw std::invalid_argument("comparison_check: snapshot counts differ");
    ComparisonReport report;
    report.min_gap = 1e300;
    for (std::size_t s = 0; s < modified.snapshots.size(); ++s) {
        const auto& a = unmodified.snapshots[s].u;
        const auto& b = modified.snapshots[s].u;
        if (a.size() != b.size())
            throw std::invalid_argument("comparison_check: grids differ");
        for (std::size_t k = 0; k < a.size(); ++k)
            report.min_gap = std::min(report.min_gap, a[k] - b[k]);
    }
    report.pass = report.min_gap >= -eps;
    return report;
}

} // namespace qew
