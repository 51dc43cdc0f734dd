#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qew/field.hpp"

namespace qew {

// Weighted ensemble of integer paths w_{-1}, w_0, ..., w_n with
// the first two values prescribed, weighted by exp(lam v_n - mu s_n).
struct EnsembleConfig {
    int n = 4;
    std::int64_t w_prev = 0;  // w_{-1}
    std::int64_t w_start = 0; // w_0
    double lam = 1.0;         // lambda-bar
    double mu = 2.0;          // mu > lam
    double F = 4.0;
    std::int64_t w_min = -16; // position window
    std::int64_t w_max = 16;
    std::int64_t max_increment = 0; // cap on |w_{i+1} - w_i|; 0 = window-limited
    double eps_tail = 1e-8;   // acceptable tail relative to Y_n
    std::int64_t band_pad = 5; // extra cells realized for the tail bound
    bool enforce_tail = true; // throw when the tail budget is exceeded

    void validate() const;
};

// DP table over states (w_{i-1}, w_i) confined to the position window.
struct PathWeights {
    std::int64_t lo = 0;       // window lower edge
    std::int64_t span = 0;     // w_max - w_min + 1
    std::vector<double> table; // weight sum per state, indexed (prev-lo)*span + (cur-lo)
    double Y = 0.0;            // sum of all entries
    double tail_bound = 0.0;   // upper bound on weight escaped past the window

    double at(std::int64_t prev, std::int64_t cur) const {
        return table[static_cast<std::size_t>((prev - lo) * span + (cur - lo))];
    }
};

// (v_n, s_n) of an explicit path; w holds w_{-1}..w_n, so w.size() = n + 2.
std::pair<double, double> path_functionals(const std::vector<std::int64_t>& w,
                                           const StrengthFn& fbar_field, double F);

// Field seed used for realization `replica` of the ensemble checks.
std::uint64_t realization_seed(std::uint64_t master, std::uint64_t replica);

// Exact full-row sum  sum_{j in Z} exp(lam j - mu (j + F - fb)^+),
// via the geometric split at the integer ceiling. By translation invariance
// this also equals the conditional one-step factor of any DP state.
double exact_row_sum(double lam, double mu, double F, double fb);

// Per-state conditional factor exp(-lam v) sum_j exp(lam j - mu (j - v - fb + F)^+);
// equals exact_row_sum for every integer v (kept separate so tests can verify
// the translation identity against brute-force series).
double conditional_step_factor(double lam, double mu, double F, std::int64_t v, double fb);

// Truncated partition sum Y_n by dynamic programming; matches brute-force
// path enumeration over the same window. The tail bound accounts for paths
// escaping the position window.
PathWeights y_n_exact(const EnsembleConfig& cfg, const StrengthFn& fbar_field);

// Independent oracle: enumerate every path in the window and sum
// exp(lam v_n - mu s_n) straight from path_functionals. Exponential cost,
// guarded to small n and windows.
double brute_force_y(const EnsembleConfig& cfg, const StrengthFn& fbar_field);

struct SupermartingaleReport {
    double gamma = 0.0;
    bool exact = false; // true for deterministic strengths
    std::vector<double> ratios; // E(Y_{n+1}|F_n)/Y_n per realization
    std::vector<double> inner_se; // Monte Carlo error of each ratio (0 when exact)
    double mean = 0.0;
    double sd = 0.0;
    double ucb95 = 0.0;   // mean + 1.645 sd/sqrt(R)
    double max_ratio = 0.0;
    // realizations with ratio > gamma + 2.326 * inner_se; the inequality is
    // a.s., so exceedances beyond 99%-confidence Monte Carlo error flag it
    int exceedances = 0;
};

// Verifies E(Y_{n+1}|F_n) <= gamma Y_n over sampled field realizations.
// Deterministic strengths use the exact closed form; otherwise the closed
// form is averaged over `inner_samples` strength draws.
SupermartingaleReport supermartingale_check(const EnsembleConfig& cfg,
                                            const StrengthDistribution& dist,
                                            int replicas, std::uint64_t seed,
                                            int inner_samples = 200);

struct GrowthRow {
    int replica = 0;
    int n = 0;
    double rate = 0.0;  // (1/n) log Y_n
    double bound = 0.0; // log gamma + 5/n
    bool flagged = false;
};

struct GrowthReport {
    double log_gamma = 0.0;
    std::vector<GrowthRow> rows;
    int flagged_count = 0;
};

GrowthReport growth_rate_check(const EnsembleConfig& cfg, const StrengthDistribution& dist,
                               const std::vector<int>& n_list, int replicas,
                               std::uint64_t seed);

struct MomentReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0; // beta_tilde_generic
    bool pass = false;  // estimate + 3 SE <= bound
};

// Monte Carlo check of E exp(lam_tilde sup_{N<=N_max} average) <= beta-tilde.
MomentReport sup_avg_moment_check(const StrengthDistribution& dist, double lam,
                                  double lam_tilde, int N_max, int samples,
                                  std::uint64_t seed);

} // namespace qew
