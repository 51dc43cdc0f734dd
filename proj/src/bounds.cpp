#include "qew/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace qew {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949; // (sqrt(5)-1)/2

// Golden-section search for the maximum of fn on [a,b]; assumes the grid scan
// already isolated a bracket around the maximizer.
std::pair<double, double> golden_max(const std::function<double(double)>& fn,
                                     double a, double b, double rel_tol) {
    double x1 = b - kGoldenRatio * (b - a);
    double x2 = a + kGoldenRatio * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > rel_tol * std::max(1.0, std::fabs(b))) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kGoldenRatio * (b - a);
            f2 = fn(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kGoldenRatio * (b - a);
            f1 = fn(x1);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, fn(x)};
}

std::pair<double, double> golden_min(const std::function<double(double)>& fn,
                                     double a, double b, double rel_tol) {
    auto neg = [&fn](double x) { return -fn(x); };
    auto [x, v] = golden_max(neg, a, b, rel_tol);
    return {x, -v};
}

// Grid-first maximization: the objectives look unimodal but that is unproven,
// so a coarse scan picks the basin before golden-section refines it.
SupResult maximize_over_mu(const std::function<double(double)>& objective, double lam,
                           const OptimizerConfig& opt) {
    const int n = opt.mu_grid_points;
    if (n < 3) throw std::domain_error("optimizer: need at least 3 mu grid points");
    const double ratio = std::log(opt.mu_offset_hi / opt.mu_offset_lo);
    std::vector<double> mu(n);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        mu[k] = lam + opt.mu_offset_lo * std::exp(ratio * k / (n - 1));
        const double v = objective(mu[k]);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    const double lo = mu[best > 0 ? best - 1 : 0];
    const double hi = mu[best < n - 1 ? best + 1 : n - 1];
    auto [mu_star, refined] = golden_max(objective, lo, hi, opt.golden_rel_tol);
    SupResult out;
    out.mu_star = mu_star;
    const double sup = std::max(best_val, refined);
    out.positive = sup > 0.0;
    out.value = std::max(sup, 0.0);
    out.interior = best > 0 && best < n - 1;
    return out;
}

// Adaptive Simpson on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// c + int_c^inf beta x^{-a}/(1 - beta x^{-a}) dx, integral split at x_cut
// where beta x^{-a} < 1/2; beyond that the tail is bounded by
// 2 beta x_cut^{1-a}/(a-1) and added in full.
double tilde_objective(double c, double a, double beta, double tol) {
    double x_cut = std::pow(2.0 * beta, 1.0 / a);                          // beta x^{-a} = 1/2
    const double tail_cut = std::pow(4.0 * beta / ((a - 1.0) * tol), 1.0 / (a - 1.0));
    x_cut = std::max(x_cut, tail_cut);                                     // tail bound <= tol/2
    const double tail = 2.0 * beta * std::pow(x_cut, 1.0 - a) / (a - 1.0);
    if (x_cut <= c) {
        // Entire integral lies in the tail regime.
        return c + 2.0 * beta * std::pow(c, 1.0 - a) / (a - 1.0);
    }
    auto integrand = [a, beta](double x) {
        const double t = beta * std::pow(x, -a);
        return t / (1.0 - t);
    };
    return c + integrate(integrand, c, x_cut, 0.5 * tol) + tail;
}

double tilde_infimum(double a, double beta, const OptimizerConfig& opt) {
    const double threshold = std::pow(beta, 1.0 / a);
    const double c_lo = threshold * (1.0 + 1e-6);
    const double c_hi = threshold * opt.c_span;
    auto objective = [a, beta, &opt](double c) {
        return tilde_objective(c, a, beta, opt.quad_tol);
    };
    const int n = std::max(opt.c_grid_points, 3);
    const double ratio = std::log(c_hi / c_lo);
    std::vector<double> grid(n);
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        grid[k] = c_lo * std::exp(ratio * k / (n - 1));
        const double v = objective(grid[k]);
        if (v < best_val) {
            best_val = v;
            best = k;
        }
    }
    const double lo = grid[best > 0 ? best - 1 : 0];
    const double hi = grid[best < n - 1 ? best + 1 : n - 1];
    auto [c_star, refined] = golden_min(objective, lo, hi, opt.golden_rel_tol);
    (void)c_star;
    return std::min(best_val, refined);
}

} // namespace

double p_factor(double l, double m) {
    if (!(l > 0.0)) throw std::domain_error("p_factor: need l > 0");
    if (!(m > l)) throw std::domain_error("p_factor: need m > l");
    return 1.0 / (-std::expm1(-l)) + 1.0 / (-std::expm1(l - m));
}

double contraction_gamma(double lam, double mu, double beta, double F) {
    if (!(beta >= 1.0)) throw std::domain_error("contraction_gamma: need beta >= 1");
    return beta * std::exp(-lam * F) * p_factor(lam, mu);
}

SupResult wbar(double F, double lam, double beta, const OptimizerConfig& opt) {
    if (!(lam > 0.0)) throw std::domain_error("wbar: need lam > 0");
    if (!(beta >= 1.0)) throw std::domain_error("wbar: need beta >= 1");
    const double log_beta = std::log(beta);
    auto objective = [F, lam, log_beta](double mu) {
        return (lam * F - std::log(p_factor(lam, mu)) - log_beta) / mu;
    };
    return maximize_over_mu(objective, lam, opt);
}

SupResult w_discrete(double F, double lam, double beta, const OptimizerConfig& opt) {
    return wbar(F - 2.0, lam, beta, opt);
}

SupResult v_continuum(double F, double lam_tilde, double beta_tilde, double delta,
                      const OptimizerConfig& opt) {
    if (!(delta > 0.0 && delta < 0.5)) throw std::domain_error("v_continuum: need delta in (0,1/2)");
    if (!(lam_tilde > 0.0)) throw std::domain_error("v_continuum: need lam_tilde > 0");
    if (!(beta_tilde >= 1.0)) throw std::domain_error("v_continuum: need beta_tilde >= 1");
    const double arg = (1.0 - 2.0 * delta) * F - 2.0;
    const double log_beta = std::log(beta_tilde);
    auto objective = [arg, lam_tilde, log_beta](double mu) {
        return (lam_tilde * arg - std::log(p_factor(lam_tilde, mu)) - log_beta) / mu;
    };
    SupResult out = maximize_over_mu(objective, lam_tilde, opt);
    out.value /= 4.0 * (1.0 + delta);
    return out;
}

double positivity_threshold(double lam, double beta) {
    if (!(lam > 0.0)) throw std::domain_error("positivity_threshold: need lam > 0");
    if (!(beta >= 1.0)) throw std::domain_error("positivity_threshold: need beta >= 1");
    return (std::log(beta) + std::log(1.0 + 1.0 / (-std::expm1(-lam)))) / lam;
}

double beta_tilde_integral(double c, double a, double beta, double quad_tol) {
    return tilde_objective(c, a, beta, quad_tol) - c;
}

double beta_tilde_generic(double lam, double beta, double lam_tilde,
                          const OptimizerConfig& opt) {
    if (!(lam_tilde > 0.0 && lam_tilde < lam))
        throw std::domain_error("beta_tilde_generic: need 0 < lam_tilde < lam");
    if (!(beta >= 1.0)) throw std::domain_error("beta_tilde_generic: need beta >= 1");
    const double a = lam / lam_tilde;
    if (!(a > 1.0)) throw std::domain_error("beta_tilde_generic: integral diverges (a <= 1)");
    return tilde_infimum(a, beta, opt);
}

double beta_tilde_180(double lam, double beta, double lam_tilde,
                      const OptimizerConfig& opt) {
    if (!(lam_tilde > 0.0)) throw std::domain_error("beta_tilde_180: need lam_tilde > 0");
    if (!(beta >= 1.0)) throw std::domain_error("beta_tilde_180: need beta >= 1");
    const double a = lam / (180.0 * lam_tilde);
    if (!(a > 1.0))
        throw std::domain_error(
            "beta_tilde_180: divergent integral, the guard lam_tilde < lam/180 is violated");
    return std::exp(lam_tilde) * tilde_infimum(a, beta, opt);
}

GapTable asymptotic_gap_table(double lam, double beta, const std::vector<double>& F_list,
                              const OptimizerConfig& opt) {
    GapTable table;
    const double log_beta = std::log(beta);
    for (const double F : F_list) {
        GapRow row;
        row.F = F;
        row.wbar_value = wbar(F, lam, beta, opt).value;
        const double mu_ref = lam + 1.0 / F;
        row.wbar_at_mu_ref = (lam * F - std::log(p_factor(lam, mu_ref)) - log_beta) / mu_ref;
        row.gap = F - row.wbar_value;
        row.log_term = std::log(F) / lam;
        row.ratio = row.gap / row.log_term;
        table.rows.push_back(row);
    }
    if (!table.rows.empty() && table.rows.back().ratio > 5.0) table.flagged = true;
    return table;
}

} // namespace qew
