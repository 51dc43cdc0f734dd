#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qew/field.hpp"

namespace qew {

// Obstacle function f~_i(y) of the discrete model, piecewise constant on
// unit rows (j-1/2, j+1/2].
class RowField {
public:
    static RowField zero();
    static RowField constant(double c);
    // raw lattice strengths placed on rows
    static RowField rounded(const ObstacleLattice& lattice);
    // the dominating envelope g evaluated per row
    static RowField envelope(const ObstacleLattice& lattice, double delta,
                             const GEnvelopeParams& params);

    double row_value(std::int64_t i, std::int64_t row) const { return fn_(i, row); }
    double operator()(std::int64_t i, double y) const { return fn_(i, row_of(y)); }

    // Largest obstacle value served so far; feeds the dt stability bound.
    double max_seen() const { return *max_seen_; }
    void note(double v) const { if (v > *max_seen_) *max_seen_ = v; }

private:
    explicit RowField(StrengthFn fn) : fn_(std::move(fn)), max_seen_(new double(0.0)) {}
    StrengthFn fn_;
    std::shared_ptr<double> max_seen_;
};

struct DiscreteState {
    std::vector<double> u; // heights, periodic index arithmetic
    double t = 0.0;
};

enum class ObstacleSource { none, rounded, envelope };

struct DiscreteSimConfig {
    int L = 256;
    double F = 0.0;
    double dt = 1e-3;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    ObstacleSource source = ObstacleSource::none;
    StrengthDistribution dist;
    double delta = 0.25;          // only for the g-envelope source
    GEnvelopeParams g_params;

    void validate() const; // throws std::invalid_argument listing the violation
    RowField make_field() const;
};

// Explicit stability bound for forward Euler on the clamped lattice equation.
inline double dt_max(double max_strength, double F) {
    return 0.2 / (4.0 + max_strength + F);
}

// rhs_i = (u_{i-1} + u_{i+1} - 2 u_i - f~_i(u_i) + F)^+, periodic.
std::vector<double> rhs(const DiscreteState& state, const RowField& field, double F);

// One forward-Euler step; throws std::invalid_argument when dt violates the
// stability bound for the obstacle values observed so far.
DiscreteState step(const DiscreteState& state, const RowField& field, double F, double dt);

struct TraceRow {
    double t = 0.0;
    double u0_over_t = 0.0;
    double mean_u_over_t = 0.0;
    double max_grad_over_t = 0.0;
    double min_H = 0.0; // min_i (u_{i-1} + u_{i+1} - 2u_i + F)
};

struct RunResult {
    DiscreteState final_state;
    std::vector<TraceRow> trace; // at geometric sample times t_end/2^k and t_end
    double velocity = 0.0;       // u_0(t_end)/t_end
    double late_min_ratio = 0.0; // min over sites/late sample times of u_i(t)/t
    double late_max_ratio = 0.0;
};

RunResult run(const DiscreteSimConfig& config);

// Replica statistics for the velocity bound.
struct VelocityStats {
    std::vector<double> per_replica; // u_0(t_end)/t_end
    double mean = 0.0;
    double std_error = 0.0;
    double late_min_ratio = 0.0; // empirical c_1 diagnostic
    double late_max_ratio = 0.0; // empirical c_2 diagnostic
};

VelocityStats collect_velocity_stats(const std::vector<RunResult>& runs);

// Seed of replica `rep`, derived from the master seed.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t rep);

// Runs `replicas` independent copies with seeds derived from config.seed.
std::vector<RunResult> run_replicas(const DiscreteSimConfig& config, int replicas);

struct FlatnessResult {
    bool pass = false;
    double max_grad_over_t = 0.0;
};

// Flatness check: valid only for t > 2 F^2 / Gamma^2 (throws otherwise);
// passes iff max_i |u_{i+1} - u_i| / t <= Gamma.
FlatnessResult flatness_check(const DiscreteState& state, double F, double Gamma);

struct BoundCheckResult {
    bool pass = false;
    double margin = 0.0; // mean - 2 SE - W
    double mean = 0.0;
    double std_error = 0.0;
};

// One-sided test of the velocity lower bound: mean - 2 SE >= W_value.
BoundCheckResult bound_check(const VelocityStats& stats, double W_value);

} // namespace qew
