#include "qew/field.hpp"

#include <cmath>
#include <stdexcept>

namespace qew {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

} // namespace

double StrengthDistribution::exp_moment(double lam) const {
    require(lam >= 0.0, "exp_moment: lam must be >= 0");
    switch (family) {
        case StrengthFamily::deterministic:
            return std::exp(lam * param);
        case StrengthFamily::exponential:
            require(lam < param, "exp_moment: infinite for exponential law unless lam < rate");
            return param / (param - lam);
        case StrengthFamily::uniform: {
            const double la = lam * param;
            if (la == 0.0) return 1.0;
            return std::expm1(la) / la;
        }
    }
    throw std::logic_error("exp_moment: unknown family");
}

double StrengthDistribution::quantile(double u) const {
    switch (family) {
        case StrengthFamily::deterministic:
            return param;
        case StrengthFamily::exponential:
            return -std::log1p(-u) / param;
        case StrengthFamily::uniform:
            return u * param;
    }
    throw std::logic_error("quantile: unknown family");
}

double StrengthDistribution::mean() const {
    switch (family) {
        case StrengthFamily::deterministic: return param;
        case StrengthFamily::exponential:   return 1.0 / param;
        case StrengthFamily::uniform:       return 0.5 * param;
    }
    throw std::logic_error("mean: unknown family");
}

std::string StrengthDistribution::name() const {
    switch (family) {
        case StrengthFamily::deterministic: return "deterministic";
        case StrengthFamily::exponential:   return "exponential";
        case StrengthFamily::uniform:       return "uniform";
    }
    return "?";
}

StrengthDistribution make_deterministic(double a, double lambda) {
    require(a >= 0.0, "deterministic strength must be >= 0");
    require(lambda > 0.0, "lambda must be > 0");
    return {StrengthFamily::deterministic, a, lambda};
}

StrengthDistribution make_exponential(double rate, double lambda) {
    require(rate > 0.0, "exponential rate must be > 0");
    require(lambda > 0.0 && lambda < rate, "need 0 < lambda < rate for a finite exponential moment");
    return {StrengthFamily::exponential, rate, lambda};
}

StrengthDistribution make_uniform(double a, double lambda) {
    require(a >= 0.0, "uniform upper end must be >= 0");
    require(lambda > 0.0, "lambda must be > 0");
    return {StrengthFamily::uniform, a, lambda};
}

// psi(s) = cos^2(pi s / 2) on |s| <= 1; vanishes with its derivative at +-1.
static double half_bump(double s) {
    if (std::fabs(s) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * kPi * s);
    return c * c;
}

static double cosine_shape(double sx, double sy) {
    return half_bump(sx) * half_bump(sy);
}

double BumpProfile::value(double ox, double oy) const {
    const double sx = ox / delta, sy = oy / delta;
    if (std::fabs(sx) >= 1.0 || std::fabs(sy) >= 1.0) return 0.0;
    return (shape ? shape : &cosine_shape)(sx, sy);
}

BumpProfile BumpProfile::cosine(double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::domain_error("bump profile requires delta in (0, 1/2)");
    return BumpProfile{delta, nullptr};
}

std::int64_t row_of(double y) {
    return static_cast<std::int64_t>(std::ceil(y - 0.5));
}

double field_eval(const ObstacleLattice& lattice, const BumpProfile& profile,
                  double x, double y) {
    const double d = profile.delta;
    const auto ilo = static_cast<std::int64_t>(std::ceil(x - d));
    const auto ihi = static_cast<std::int64_t>(std::floor(x + d));
    const auto jlo = static_cast<std::int64_t>(std::ceil(y - 0.5 - d));
    const auto jhi = static_cast<std::int64_t>(std::floor(y - 0.5 + d));
    double total = 0.0;
    for (std::int64_t i = ilo; i <= ihi; ++i)
        for (std::int64_t j = jlo; j <= jhi; ++j)
            total += lattice.strength_at(i, j) * profile.value(x - i, y - j - 0.5);
    return total;
}

GValue g_strength(const StrengthFn& strengths, double delta,
                  std::int64_t i, std::int64_t j, const GEnvelopeParams& params) {
    if (params.m_max < 1) throw std::domain_error("g_strength: m_max must be >= 1");
    GValue out;
    double best = 0.0;
    int best_m = 1;
    double window_sum = 0.0;
    std::int64_t half = -1; // current window half-width, grown incrementally
    for (int m = 1; m <= params.m_max; ++m) {
        const auto new_half = static_cast<std::int64_t>(std::floor(4.0 * delta * m));
        while (half < new_half) {
            ++half;
            if (half == 0) {
                window_sum += strengths(i, j);
            } else {
                window_sum += strengths(i, j - half) + strengths(i, j + half);
            }
        }
        const double term = (36.0 * delta / m) * window_sum;
        if (term > best) {
            best = term;
            best_m = m;
        }
    }
    out.value = 1.0 + (1.0 + 2.0 * delta) * best;
    out.arg_m = best_m;
    out.maximizer_interior = best_m < params.m_max;
    return out;
}

double g_envelope_upper(const StrengthFn& strengths, std::int64_t i, std::int64_t j,
                        int n_max) {
    double best = strengths(i, j); // N = 0
    double window_sum = best;
    for (int n = 1; n <= n_max; ++n) {
        window_sum += strengths(i, j - n) + strengths(i, j + n);
        best = std::max(best, window_sum / (2.0 * n + 1.0));
    }
    return 1.0 + 180.0 * best;
}

double ftilde(const ObstacleLattice& lattice, const BumpProfile& profile,
              std::int64_t i, double y, const GEnvelopeParams& params) {
    return g_strength(lattice, profile, i, row_of(y), params).value;
}

double fbar(const ObstacleLattice& lattice, const BumpProfile& profile,
            std::int64_t i, std::int64_t j, const GEnvelopeParams& params) {
    return g_strength(lattice, profile, i, j, params).value;
}

} // namespace qew
