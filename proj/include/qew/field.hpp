#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "qew/hash.hpp"

namespace qew {

enum class StrengthFamily { deterministic, exponential, uniform };

// Law of a single obstacle strength f_00 >= 0 together with the rate lambda
// at which its exponential moment is taken.
struct StrengthDistribution {
    StrengthFamily family = StrengthFamily::deterministic;
    double param = 0.0;   // value a / rate r / upper end a
    double lambda = 1.0;  // exponential-moment rate, must keep exp_moment finite

    // E exp(lam * f_00), closed form. Throws std::domain_error when the
    // moment is infinite (exponential family with lam >= rate).
    double exp_moment(double lam) const;

    // Inverse CDF; u must lie in (0,1).
    double quantile(double u) const;

    double mean() const;
    std::string name() const;
};

StrengthDistribution make_deterministic(double a, double lambda = 1.0);
StrengthDistribution make_exponential(double rate, double lambda);
StrengthDistribution make_uniform(double a, double lambda = 1.0);

// Obstacle shape phi(x,y) = shape(x/delta, y/delta), supported on
// [-delta,delta]^2. The shape lives on the unit square, takes values in
// [0,1], equals 1 at the origin, and vanishes with its gradient on the
// boundary. Default: product of squared-cosine half bumps (C^1).
struct BumpProfile {
    double delta = 0.25;
    double (*shape)(double sx, double sy) = nullptr; // nullptr = cosine default

    // phi evaluated at offsets from the obstacle center.
    double value(double ox, double oy) const;

    static BumpProfile cosine(double delta);
};

// Quenched iid strength field addressed by integer cell. Pure function of
// (seed, i, j); safe for unrestricted concurrent use.
struct ObstacleLattice {
    std::uint64_t seed = 0;
    StrengthDistribution dist;

    double strength_at(std::int64_t i, std::int64_t j) const {
        return dist.quantile(uniform01(cell_hash(seed, i, j)));
    }
};

// Generic access to per-cell strengths; lets tests substitute single-obstacle
// or constant fields for the quenched lattice.
using StrengthFn = std::function<double(std::int64_t, std::int64_t)>;

inline StrengthFn strength_fn(const ObstacleLattice& lattice) {
    return [lattice](std::int64_t i, std::int64_t j) { return lattice.strength_at(i, j); };
}

// Row index of a height y: rows are the half-open bands (j-1/2, j+1/2].
std::int64_t row_of(double y);

// Continuum field f(x,y) = sum f_ij phi(x-i, y-j-1/2). At most four cells
// can overlap (generically one, since delta < 1/2).
double field_eval(const ObstacleLattice& lattice, const BumpProfile& profile,
                  double x, double y);

struct GEnvelopeParams {
    int m_max = 64; // truncation of the supremum over window sizes M
};

struct GValue {
    double value = 1.0;
    int arg_m = 1;                 // maximizing M within 1..m_max
    bool maximizer_interior = true; // false when truncation may bind
};

// Dominating per-cell envelope
//   g_ij = 1 + (1+2delta) * sup_{M>=1} (36 delta / M) * sum_{|l-j| <= 4 delta M} f_il,
// truncated at m_max.
GValue g_strength(const StrengthFn& strengths, double delta,
                  std::int64_t i, std::int64_t j, const GEnvelopeParams& params);

inline GValue g_strength(const ObstacleLattice& lattice, const BumpProfile& profile,
                         std::int64_t i, std::int64_t j, const GEnvelopeParams& params) {
    return g_strength(strength_fn(lattice), profile.delta, i, j, params);
}

// Counting bound dominating g: 1 + 180 * sup_{0<=N<=n_max} centered window average.
double g_envelope_upper(const StrengthFn& strengths, std::int64_t i, std::int64_t j,
                        int n_max);

// f~_i(y) = g_{i, row_of(y)}.
double ftilde(const ObstacleLattice& lattice, const BumpProfile& profile,
              std::int64_t i, double y, const GEnvelopeParams& params);

// f-bar_ij = sup over the row (j-1/2, j+1/2] of f~_i; the g-based f~ is
// constant on rows, so this equals g_strength(i, j).
double fbar(const ObstacleLattice& lattice, const BumpProfile& profile,
            std::int64_t i, std::int64_t j, const GEnvelopeParams& params);

} // namespace qew
