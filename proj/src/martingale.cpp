#include "qew/martingale.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qew/bounds.hpp"

namespace qew {

namespace {

constexpr std::uint64_t kRealizationStream = 0x4d415254; // field per realization
constexpr std::uint64_t kInnerStream = 0x494e4e52;       // inner MC strengths
constexpr std::uint64_t kMomentStream = 0x4d4f4d54;      // running-average samples

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

} // namespace

std::uint64_t realization_seed(std::uint64_t master, std::uint64_t replica) {
    return derive_seed(master, replica, kRealizationStream);
}

void EnsembleConfig::validate() const {
    if (!(lam > 0.0)) throw std::invalid_argument("ensemble: need lam > 0");
    if (!(mu > lam)) throw std::invalid_argument("ensemble: need mu > lam");
    if (n < 0) throw std::invalid_argument("ensemble: need n >= 0");
    if (w_min > std::min(w_prev, w_start) || w_max < std::max(w_prev, w_start))
        throw std::invalid_argument("ensemble: window must contain w_{-1} and w_0");
    if (!(eps_tail > 0.0)) throw std::invalid_argument("ensemble: need eps_tail > 0");
}

std::pair<double, double> path_functionals(const std::vector<std::int64_t>& w,
                                           const StrengthFn& fbar_field, double F) {
    if (w.size() < 2) throw std::invalid_argument("path needs entries at indices -1 and 0");
    const int n = static_cast<int>(w.size()) - 2;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        // term i reads w_{i-1}, w_i, w_{i+1} = w[i], w[i+1], w[i+2]
        const double lap = static_cast<double>(w[i] + w[i + 2] - 2 * w[i + 1]);
        s += pos(lap - fbar_field(i, w[i + 1]) + F);
    }
    const double v = static_cast<double>(w[n + 1] - w[n]);
    return {v, s};
}

double exact_row_sum(double lam, double mu, double F, double fb) {
    // sum_{j >= c} e^{lam j - mu (j - a)} + sum_{j < c} e^{lam j},  a = fb - F,
    // c = ceil(a). Geometric sums; both ratios < 1 since mu > lam > 0.
    const double a = fb - F;
    const double c = std::ceil(a);
    const double theta = a - c; // in (-1, 0]
    const double right = std::exp(lam * c + mu * theta) / (-std::expm1(lam - mu));
    const double left = std::exp(lam * (c - 1.0)) / (-std::expm1(-lam));
    return right + left;
}

double conditional_step_factor(double lam, double mu, double F, std::int64_t v, double fb) {
    const double a = static_cast<double>(v) + fb - F;
    const double c = std::ceil(a);
    const double theta = a - c;
    const double right = std::exp(lam * (c - v) + mu * theta) / (-std::expm1(lam - mu));
    const double left = std::exp(lam * (c - 1.0 - v)) / (-std::expm1(-lam));
    return right + left;
}

PathWeights y_n_exact(const EnsembleConfig& cfg, const StrengthFn& fbar_field) {
    cfg.validate();
    const std::int64_t lo = cfg.w_min;
    const std::int64_t span = cfg.w_max - cfg.w_min + 1;
    PathWeights dp;
    dp.lo = lo;
    dp.span = span;
    dp.table.assign(static_cast<std::size_t>(span * span), 0.0);
    auto idx = [lo, span](std::int64_t prev, std::int64_t cur) {
        return static_cast<std::size_t>((prev - lo) * span + (cur - lo));
    };
    dp.table[idx(cfg.w_prev, cfg.w_start)] =
        std::exp(cfg.lam * static_cast<double>(cfg.w_start - cfg.w_prev));

    // Worst-case one-step growth inside the padded band, per row; escaped
    // paths gain at most the product of the remaining row factors.
    std::vector<double> row_factor(static_cast<std::size_t>(cfg.n), 0.0);
    for (int i = 0; i < cfg.n; ++i)
        for (std::int64_t w = cfg.w_min - cfg.band_pad; w <= cfg.w_max + cfg.band_pad; ++w)
            row_factor[static_cast<std::size_t>(i)] =
                std::max(row_factor[static_cast<std::size_t>(i)],
                         exact_row_sum(cfg.lam, cfg.mu, cfg.F, fbar_field(i, w)));
    std::vector<double> suffix_growth(static_cast<std::size_t>(cfg.n) + 1, 1.0);
    for (int i = cfg.n - 1; i >= 0; --i)
        suffix_growth[static_cast<std::size_t>(i)] =
            suffix_growth[static_cast<std::size_t>(i) + 1] *
            row_factor[static_cast<std::size_t>(i)];

    double tail = 0.0;
    std::vector<double> next(dp.table.size());
    for (int step = 0; step < cfg.n; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        double exit_mass = 0.0;
        for (std::int64_t prev = lo; prev < lo + span; ++prev) {
            for (std::int64_t cur = lo; cur < lo + span; ++cur) {
                const double weight = dp.table[idx(prev, cur)];
                if (weight == 0.0) continue;
                const double fb = fbar_field(step, cur);
                const double v_old = static_cast<double>(cur - prev);
                std::int64_t nxt_lo = lo, nxt_hi = lo + span - 1;
                if (cfg.max_increment > 0) {
                    nxt_lo = std::max(nxt_lo, cur - cfg.max_increment);
                    nxt_hi = std::min(nxt_hi, cur + cfg.max_increment);
                }
                double in_window = 0.0;
                for (std::int64_t nxt = nxt_lo; nxt <= nxt_hi; ++nxt) {
                    const double lap = static_cast<double>(prev + nxt - 2 * cur);
                    const double factor =
                        std::exp(cfg.lam * (static_cast<double>(nxt - cur) - v_old) -
                                 cfg.mu * pos(lap - fb + cfg.F));
                    next[idx(cur, nxt)] += weight * factor;
                    in_window += factor;
                }
                // Exact mass of paths stepping outside the window now; the
                // full row sum has a closed form and is state independent.
                const double full = exact_row_sum(cfg.lam, cfg.mu, cfg.F, fb);
                exit_mass += weight * pos(full - in_window);
            }
        }
        tail += exit_mass * suffix_growth[static_cast<std::size_t>(step) + 1];
        dp.table.swap(next);
    }
    double y = 0.0;
    for (const double w : dp.table) y += w;
    dp.Y = y;
    dp.tail_bound = tail;
    if (cfg.enforce_tail && tail > cfg.eps_tail * std::max(y, 1e-300)) {
        const double decay = std::min(cfg.lam, cfg.mu - cfg.lam);
        const auto extra = static_cast<std::int64_t>(
            std::ceil(std::log(tail / (cfg.eps_tail * std::max(y, 1e-300))) / decay)) + 1;
        std::ostringstream msg;
        msg << "y_n_exact: tail bound " << tail << " exceeds eps_tail * Y_n = "
            << cfg.eps_tail * y << "; widen the window to about ["
            << cfg.w_min - extra << ", " << cfg.w_max + extra << "]";
        throw std::runtime_error(msg.str());
    }
    return dp;
}

double brute_force_y(const EnsembleConfig& cfg, const StrengthFn& fbar_field) {
    cfg.validate();
    const double span = static_cast<double>(cfg.w_max - cfg.w_min + 1);
    if (cfg.n > 6 || std::pow(span, cfg.n) > 2e7)
        throw std::invalid_argument("brute_force_y: instance too large to enumerate");
    std::vector<std::int64_t> w(static_cast<std::size_t>(cfg.n) + 2);
    w[0] = cfg.w_prev;
    w[1] = cfg.w_start;
    double total = 0.0;
    // odometer over the free values w_1..w_n
    std::vector<std::int64_t> digits(static_cast<std::size_t>(cfg.n), cfg.w_min);
    while (true) {
        for (int k = 0; k < cfg.n; ++k) w[static_cast<std::size_t>(k) + 2] = digits[k];
        const auto [v, s] = path_functionals(w, fbar_field, cfg.F);
        total += std::exp(cfg.lam * v - cfg.mu * s);
        int pos_digit = 0;
        while (pos_digit < cfg.n && digits[pos_digit] == cfg.w_max) {
            digits[pos_digit] = cfg.w_min;
            ++pos_digit;
        }
        if (pos_digit == cfg.n) break;
        ++digits[pos_digit];
    }
    return total;
}

SupermartingaleReport supermartingale_check(const EnsembleConfig& cfg,
                                            const StrengthDistribution& dist,
                                            int replicas, std::uint64_t seed,
                                            int inner_samples) {
    cfg.validate();
    if (replicas < 1) throw std::invalid_argument("supermartingale_check: need replicas >= 1");
    SupermartingaleReport report;
    const double beta = dist.exp_moment(cfg.lam);
    report.gamma = contraction_gamma(cfg.lam, cfg.mu, beta, cfg.F);
    report.exact = dist.family == StrengthFamily::deterministic;

    // The conditional bound holds state by state, so it is valid on any
    // truncated path set; no tail budget applies here.
    EnsembleConfig truncated = cfg;
    truncated.enforce_tail = false;
    for (int rep = 0; rep < replicas; ++rep) {
        const ObstacleLattice lattice{realization_seed(seed, static_cast<std::uint64_t>(rep)),
                                      dist};
        const PathWeights dp = y_n_exact(truncated, strength_fn(lattice));
        if (dp.Y <= 0.0) throw std::runtime_error("supermartingale_check: empty ensemble");

        // Conditional expectation over the unrealized row n, state by state.
        std::map<std::int64_t, double> factor_by_v;
        const std::uint64_t inner_seed =
            derive_seed(seed, static_cast<std::uint64_t>(rep), kInnerStream);
        auto conditional_factor = [&](std::int64_t v) {
            auto it = factor_by_v.find(v);
            if (it != factor_by_v.end()) return it->second;
            double value = 0.0;
            if (report.exact) {
                value = conditional_step_factor(cfg.lam, cfg.mu, cfg.F, v, dist.param);
            } else {
                for (int k = 0; k < inner_samples; ++k) {
                    const double x = dist.quantile(uniform01(cell_hash(inner_seed, k, 0)));
                    value += conditional_step_factor(cfg.lam, cfg.mu, cfg.F, v, x);
                }
                value /= inner_samples;
            }
            factor_by_v.emplace(v, value);
            return value;
        };

        double numerator = 0.0;
        for (std::int64_t prev = dp.lo; prev < dp.lo + dp.span; ++prev)
            for (std::int64_t cur = dp.lo; cur < dp.lo + dp.span; ++cur) {
                const double w = dp.at(prev, cur);
                if (w != 0.0) numerator += w * conditional_factor(cur - prev);
            }
        report.ratios.push_back(numerator / dp.Y);

        // Monte Carlo error of the inner average (the row sum is translation
        // invariant, so the ratio is a plain mean over the inner samples).
        double se = 0.0;
        if (!report.exact) {
            double mean_k = 0.0, m2_k = 0.0;
            for (int k = 0; k < inner_samples; ++k) {
                const double x = dist.quantile(uniform01(cell_hash(inner_seed, k, 0)));
                const double r = conditional_step_factor(cfg.lam, cfg.mu, cfg.F, 0, x);
                const double delta = r - mean_k;
                mean_k += delta / (k + 1);
                m2_k += delta * (r - mean_k);
            }
            if (inner_samples > 1)
                se = std::sqrt(m2_k / (inner_samples - 1.0) / inner_samples);
        }
        report.inner_se.push_back(se);
    }

    double sum = 0.0;
    for (const double r : report.ratios) sum += r;
    report.mean = sum / static_cast<double>(report.ratios.size());
    double ss = 0.0;
    report.max_ratio = report.ratios.front();
    for (std::size_t r = 0; r < report.ratios.size(); ++r) {
        ss += (report.ratios[r] - report.mean) * (report.ratios[r] - report.mean);
        report.max_ratio = std::max(report.max_ratio, report.ratios[r]);
        if (report.ratios[r] > report.gamma + 2.326 * report.inner_se[r])
            ++report.exceedances;
    }
    const auto R = static_cast<double>(report.ratios.size());
    report.sd = R > 1 ? std::sqrt(ss / (R - 1)) : 0.0;
    report.ucb95 = report.mean + 1.645 * report.sd / std::sqrt(R);
    return report;
}

GrowthReport growth_rate_check(const EnsembleConfig& cfg, const StrengthDistribution& dist,
                               const std::vector<int>& n_list, int replicas,
                               std::uint64_t seed) {
    GrowthReport report;
    const double beta = dist.exp_moment(cfg.lam);
    report.log_gamma = std::log(contraction_gamma(cfg.lam, cfg.mu, beta, cfg.F));
    for (int rep = 0; rep < replicas; ++rep) {
        const ObstacleLattice lattice{realization_seed(seed, static_cast<std::uint64_t>(rep)),
                                      dist};
        for (const int n : n_list) {
            if (n < 1) throw std::invalid_argument("growth_rate_check: need n >= 1");
            EnsembleConfig local = cfg;
            local.n = n;
            const PathWeights dp = y_n_exact(local, strength_fn(lattice));
            GrowthRow row;
            row.replica = rep;
            row.n = n;
            row.rate = std::log(dp.Y) / n;
            row.bound = report.log_gamma + 5.0 / n;
            row.flagged = row.rate > row.bound;
            if (row.flagged) ++report.flagged_count;
            report.rows.push_back(row);
        }
    }
    return report;
}

MomentReport sup_avg_moment_check(const StrengthDistribution& dist, double lam,
                                  double lam_tilde, int N_max, int samples,
                                  std::uint64_t seed) {
    if (N_max < 1) throw std::invalid_argument("sup_avg_moment_check: need N_max >= 1");
    if (samples < 2) throw std::invalid_argument("sup_avg_moment_check: need samples >= 2");
    if (!(lam_tilde < lam)) throw std::invalid_argument("sup_avg_moment_check: need lam_tilde < lam");
    MomentReport report;
    report.bound = beta_tilde_generic(lam, dist.exp_moment(lam), lam_tilde);

    double mean = 0.0, m2 = 0.0;
    for (int s = 0; s < samples; ++s) {
        const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(s),
                                                      kMomentStream);
        double running = 0.0, sup_avg = -1e300;
        for (int k = 1; k <= N_max; ++k) {
            running += dist.quantile(uniform01(cell_hash(sample_seed, k, 0)));
            sup_avg = std::max(sup_avg, running / k);
        }
        const double x = std::exp(lam_tilde * sup_avg);
        const double d = x - mean;
        mean += d / (s + 1);
        m2 += d * (x - mean);
    }
    report.estimate = mean;
    report.std_error = std::sqrt(m2 / (samples - 1.0) / samples);
    report.pass = report.estimate + 3.0 * report.std_error <= report.bound;
    return report;
}

} // namespace qew
