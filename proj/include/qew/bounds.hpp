#pragma once

#include <vector>

namespace qew {

// Rate parameters feeding the closed-form velocity bounds. `lam` plays the
// role of lambda-bar (discrete chain) or lambda-tilde (continuum chain),
// `beta` the matching moment bound.
struct RateParams {
    double lam = 1.0;
    double beta = 1.0;
    double delta = 0.25; // only used by the continuum bound V
    double F = 0.0;
};

struct OptimizerConfig {
    // mu search: logarithmic grid of offsets above lam, then golden-section.
    double mu_offset_lo = 1e-6;
    double mu_offset_hi = 1e3;
    int mu_grid_points = 200;
    double golden_rel_tol = 1e-8;
    // c search for the beta-tilde infimum.
    double c_span = 1e3;
    int c_grid_points = 64;
    // absolute tolerance of the tail integral (split 50/50 between the
    // quadrature and the analytic tail bound).
    double quad_tol = 1e-8;
};

// p(l,m) = 1/(1-e^{-l}) + 1/(1-e^{l-m}); requires m > l > 0, always > 2.
double p_factor(double l, double m);

// gamma = beta e^{-lam F} p(lam, mu); contraction rate of the path ensemble.
double contraction_gamma(double lam, double mu, double beta, double F);

struct SupResult {
    double value = 0.0;    // clamped at 0
    double mu_star = 0.0;  // maximizer (meaningful when positive)
    bool positive = false;
    bool interior = true;  // false when the grid edge attained the maximum
};

// Wbar(F) = sup_{mu > lam} (1/mu)(lam F - log p(lam,mu) - log beta), clamped at 0.
SupResult wbar(double F, double lam, double beta, const OptimizerConfig& opt = {});

// W(F) = Wbar(F - 2); the discrete-model bound.
SupResult w_discrete(double F, double lam, double beta, const OptimizerConfig& opt = {});

// V(F) = 1/(4(1+delta)) sup_{mu > lam_t} (1/mu)(lam_t ((1-2delta)F - 2)
//        - log p(lam_t,mu) - log beta_t); the continuum bound.
SupResult v_continuum(double F, double lam_tilde, double beta_tilde, double delta,
                      const OptimizerConfig& opt = {});

// Exact positivity threshold: Wbar(F) > 0 iff F > positivity_threshold(lam, beta).
double positivity_threshold(double lam, double beta);

// beta-tilde of the running-average supremum bound:
//   inf_{c > beta^{1/a}} ( c + int_c^inf beta x^{-a} / (1 - beta x^{-a}) dx ),
// with a = lam/lam_tilde. Requires 0 < lam_tilde < lam.
double beta_tilde_generic(double lam, double beta, double lam_tilde,
                          const OptimizerConfig& opt = {});

// The 180-window variant: e^{lam_tilde} times the same infimum with
// a = lam/(180 lam_tilde). Throws std::domain_error unless lam_tilde < lam/180
// (otherwise the integral diverges).
double beta_tilde_180(double lam, double beta, double lam_tilde,
                      const OptimizerConfig& opt = {});

// int_c^inf beta x^{-a}/(1 - beta x^{-a}) dx by adaptive quadrature plus the
// analytic power-law tail bound (exposed for quadrature verification).
double beta_tilde_integral(double c, double a, double beta, double quad_tol);

struct GapRow {
    double F = 0.0;
    double wbar_value = 0.0;
    double wbar_at_mu_ref = 0.0; // value at mu = lam + 1/F (must not exceed wbar)
    double gap = 0.0;            // F - Wbar(F)
    double log_term = 0.0;       // (1/lam) log F
    double ratio = 0.0;          // gap / log_term
};

struct GapTable {
    std::vector<GapRow> rows;
    bool flagged = false; // ratio at the largest F exceeds the fixed constant 5
};

GapTable asymptotic_gap_table(double lam, double beta, const std::vector<double>& F_list,
                              const OptimizerConfig& opt = {});

} // namespace qew
