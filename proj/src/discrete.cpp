#include "qew/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qew {

namespace {

constexpr std::uint64_t kReplicaStream = 0x52455053; // replica seed derivation

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

} // namespace

RowField RowField::zero() {
    return RowField([](std::int64_t, std::int64_t) { return 0.0; });
}

RowField RowField::constant(double c) {
    return RowField([c](std::int64_t, std::int64_t) { return c; });
}

RowField RowField::rounded(const ObstacleLattice& lattice) {
    return RowField(strength_fn(lattice));
}

RowField RowField::envelope(const ObstacleLattice& lattice, double delta,
                            const GEnvelopeParams& params) {
    const StrengthFn strengths = strength_fn(lattice);
    return RowField([strengths, delta, params](std::int64_t i, std::int64_t row) {
        return g_strength(strengths, delta, i, row, params).value;
    });
}

void DiscreteSimConfig::validate() const {
    std::ostringstream msg;
    if (L < 3) msg << "L must be >= 3; ";
    if (!(F >= 0.0)) msg << "F must be >= 0; ";
    if (!(dt > 0.0)) msg << "dt must be > 0; ";
    if (!(t_end > 0.0)) msg << "t_end must be > 0; ";
    if (dt > dt_max(0.0, F))
        msg << "dt exceeds the stability bound 0.2/(4 + F) = " << dt_max(0.0, F) << "; ";
    if (source == ObstacleSource::envelope && !(delta > 0.0 && delta < 0.5))
        msg << "delta must lie in (0, 1/2); ";
    const std::string text = msg.str();
    if (!text.empty()) throw std::invalid_argument("discrete config: " + text);
}

RowField DiscreteSimConfig::make_field() const {
    switch (source) {
        case ObstacleSource::none:
            return RowField::zero();
        case ObstacleSource::rounded:
            return RowField::rounded(ObstacleLattice{seed, dist});
        case ObstacleSource::envelope:
            return RowField::envelope(ObstacleLattice{seed, dist}, delta, g_params);
    }
    throw std::logic_error("unknown obstacle source");
}

std::vector<double> rhs(const DiscreteState& state, const RowField& field, double F) {
    const auto L = static_cast<std::int64_t>(state.u.size());
    std::vector<double> out(state.u.size());
    for (std::int64_t i = 0; i < L; ++i) {
        const double lap = state.u[(i + L - 1) % L] + state.u[(i + 1) % L] - 2.0 * state.u[i];
        const double fv = field(i, state.u[i]);
        field.note(fv);
        out[i] = pos(lap - fv + F);
    }
    return out;
}

DiscreteState step(const DiscreteState& state, const RowField& field, double F, double dt) {
    std::vector<double> r = rhs(state, field, F);
    const double limit = dt_max(field.max_seen(), F);
    if (dt > limit) {
        std::ostringstream msg;
        msg << "step: dt = " << dt << " exceeds the stability bound " << limit
            << " for max obstacle strength " << field.max_seen() << " and F = " << F;
        throw std::invalid_argument(msg.str());
    }
    DiscreteState next = state;
    for (std::size_t i = 0; i < r.size(); ++i) next.u[i] += dt * r[i];
    next.t = state.t + dt;
    return next;
}

RunResult run(const DiscreteSimConfig& config) {
    config.validate();
    const RowField field = config.make_field();
    const std::int64_t L = config.L;
    const auto n_steps = static_cast<std::int64_t>(std::llround(config.t_end / config.dt));

    // Geometric sample times t_end/2^k (down to ~16 steps) plus t_end.
    std::vector<std::int64_t> sample_steps;
    for (std::int64_t s = n_steps; s >= 16; s /= 2) sample_steps.push_back(s);
    if (sample_steps.empty()) sample_steps.push_back(n_steps);
    std::sort(sample_steps.begin(), sample_steps.end());
    sample_steps.erase(std::unique(sample_steps.begin(), sample_steps.end()),
                       sample_steps.end());

    std::vector<double> u(config.L, 0.0), unew(config.L, 0.0);
    // Memoized obstacle value per site for its current row; u is monotone, so
    // a row only needs refreshing when the height crosses the row top.
    std::vector<std::int64_t> rows(config.L);
    std::vector<double> vals(config.L);
    for (std::int64_t i = 0; i < L; ++i) {
        rows[i] = row_of(0.0);
        vals[i] = field.row_value(i, rows[i]);
        field.note(vals[i]);
    }

    RunResult result;
    std::size_t next_sample = 0;
    double late_min = 1e300, late_max = -1e300;
    const double late_start = 0.5 * config.t_end;

    for (std::int64_t s = 1; s <= n_steps; ++s) {
        if (config.dt > dt_max(field.max_seen(), config.F))
            throw std::invalid_argument("run: dt violates the stability bound after observing "
                                        "an obstacle of strength " +
                                        std::to_string(field.max_seen()));
        for (std::int64_t i = 0; i < L; ++i) {
            const double lap = u[(i + L - 1) % L] + u[(i + 1) % L] - 2.0 * u[i];
            unew[i] = u[i] + config.dt * pos(lap - vals[i] + config.F);
        }
        u.swap(unew);
        for (std::int64_t i = 0; i < L; ++i) {
            if (u[i] > static_cast<double>(rows[i]) + 0.5) {
                rows[i] = row_of(u[i]);
                vals[i] = field.row_value(i, rows[i]);
                field.note(vals[i]);
            }
        }
        if (next_sample < sample_steps.size() && s == sample_steps[next_sample]) {
            const double t = static_cast<double>(s) * config.dt;
            if (!std::isfinite(u[0]))
                throw std::runtime_error("run: non-finite height at t = " + std::to_string(t));
            TraceRow row;
            row.t = t;
            row.u0_over_t = u[0] / t;
            double sum = 0.0, max_grad = 0.0, min_H = 1e300;
            for (std::int64_t i = 0; i < L; ++i) {
                sum += u[i];
                max_grad = std::max(max_grad, std::fabs(u[(i + 1) % L] - u[i]));
                min_H = std::min(min_H,
                                 u[(i + L - 1) % L] + u[(i + 1) % L] - 2.0 * u[i] + config.F);
                if (t >= late_start) {
                    late_min = std::min(late_min, u[i] / t);
                    late_max = std::max(late_max, u[i] / t);
                }
            }
            row.mean_u_over_t = sum / (static_cast<double>(L) * t);
            row.max_grad_over_t = max_grad / t;
            row.min_H = min_H;
            result.trace.push_back(row);
            ++next_sample;
        }
    }
    result.final_state.u = std::move(u);
    result.final_state.t = static_cast<double>(n_steps) * config.dt;
    result.velocity = result.final_state.u[0] / result.final_state.t;
    result.late_min_ratio = late_min;
    result.late_max_ratio = late_max;
    return result;
}

VelocityStats collect_velocity_stats(const std::vector<RunResult>& runs) {
    VelocityStats stats;
    if (runs.empty()) return stats;
    stats.late_min_ratio = 1e300;
    stats.late_max_ratio = -1e300;
    double sum = 0.0;
    for (const auto& r : runs) {
        stats.per_replica.push_back(r.velocity);
        sum += r.velocity;
        stats.late_min_ratio = std::min(stats.late_min_ratio, r.late_min_ratio);
        stats.late_max_ratio = std::max(stats.late_max_ratio, r.late_max_ratio);
    }
    const auto R = static_cast<double>(runs.size());
    stats.mean = sum / R;
    double ss = 0.0;
    for (const double v : stats.per_replica) ss += (v - stats.mean) * (v - stats.mean);
    stats.std_error = R > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    return stats;
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t rep) {
    return derive_seed(master, rep, kReplicaStream);
}

std::vector<RunResult> run_replicas(const DiscreteSimConfig& config, int replicas) {
    std::vector<RunResult> results;
    results.reserve(static_cast<std::size_t>(replicas));
    for (int rep = 0; rep < replicas; ++rep) {
        DiscreteSimConfig c = config;
        c.seed = replica_seed(config.seed, static_cast<std::uint64_t>(rep));
        results.push_back(run(c));
    }
    return results;
}

FlatnessResult flatness_check(const DiscreteState& state, double F, double Gamma) {
    if (!(Gamma > 0.0)) throw std::invalid_argument("flatness_check: need Gamma > 0");
    if (!(state.t > 2.0 * F * F / (Gamma * Gamma)))
        throw std::invalid_argument("flatness_check: requires t > 2 F^2 / Gamma^2 = " +
                                    std::to_string(2.0 * F * F / (Gamma * Gamma)));
    const auto L = static_cast<std::int64_t>(state.u.size());
    double max_grad = 0.0;
    for (std::int64_t i = 0; i < L; ++i)
        max_grad = std::max(max_grad, std::fabs(state.u[(i + 1) % L] - state.u[i]));
    FlatnessResult out;
    out.max_grad_over_t = max_grad / state.t;
    out.pass = out.max_grad_over_t <= Gamma;
    return out;
}

BoundCheckResult bound_check(const VelocityStats& stats, double W_value) {
    if (stats.per_replica.size() < 2)
        throw std::invalid_argument("bound_check: need at least 2 replicas");
    BoundCheckResult out;
    out.mean = stats.mean;
    out.std_error = stats.std_error;
    out.margin = stats.mean - 2.0 * stats.std_error - W_value;
    out.pass = out.margin >= 0.0;
    return out;
}

} // namespace qew
