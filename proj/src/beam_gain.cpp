// SPDX-License-Identifier: Apache-2.0
#include "thbt/beam_gain.hpp"

#include "thbt/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace thbt {

using std::numbers::pi;

namespace {

constexpr double kDegenerateGap = 1e-15;

// End of the monotone branch of the normalized coherence as a function of
// t = k_step * N^2: |int_0^1 exp(j pi t u^2) du| has its first local minimum
// at t ~ 1.82687.
constexpr double kCoherenceMonotoneEnd = 1.8268;

} // namespace

BeamGainSample hfbg_exact(const ArrayConfig& cfg, CodewordParams codeword, SurrogateCoords target)
{
    // Terms n and -n share the quadratic phase; pairing them gives
    // 2 cos(pi d n) exp(j pi c n^2) and keeps |G| exactly even in d.
    const double d = codeword.theta - target.omega;
    const double c = target.b - codeword.k;
    cplx acc{1.0, 0.0};
    for (int n = 1; n <= cfg.n_half(); ++n) {
        const double nn = n;
        acc += 2.0 * std::cos(pi * d * nn) * std::polar(1.0, pi * c * nn * nn);
    }
    return {acc, std::abs(acc), std::nullopt};
}

double stationary_point(CodewordParams codeword, SurrogateCoords target)
{
    const double gap = target.b - codeword.k;
    if (std::abs(gap) < kDegenerateGap)
        throw Error(Errc::degenerate_quadratic, "b == k: no stationary point (far-field limit)");
    return (target.omega - codeword.theta) / (2.0 * gap);
}

BeamGainSample hfbg_psp(const ArrayConfig& cfg, CodewordParams codeword, SurrogateCoords target)
{
    const double z0 = stationary_point(codeword, target);
    const double half = 0.5 * cfg.n_t();
    if (z0 < -half || z0 > half)
        return {cplx{0.0, 0.0}, 0.0, 0.0};

    const double k_minus_b = codeword.k - target.b;
    const double dw = target.omega - codeword.theta;
    const double magnitude = 1.0 / std::sqrt(std::abs(k_minus_b));
    const double sign = k_minus_b > 0.0 ? 1.0 : -1.0;
    const double phase = pi * dw * dw / (4.0 * k_minus_b) - sign * pi / 4.0;
    return {std::polar(magnitude, phase), magnitude, phase};
}

bool coverage_contains(const CoverageRegion& region, SurrogateCoords target)
{
    return std::abs(target.omega - region.theta) <= region.slope_bound * std::abs(target.b - region.k);
}

double acw(const CoverageRegion& region, double b)
{
    return 2.0 * region.slope_bound * std::abs(b - region.k);
}

namespace {

// Power series, accurate for |x| below ~1.5.
FresnelCS fresnel_series(double x)
{
    const double t = 0.5 * pi * x * x;
    // term_k = t^k / k! * x / (2k + 1); C collects even k, S odd k, with
    // alternating signs within each.
    double c = 0.0;
    double s = 0.0;
    double power = x; // x * t^k / k!
    for (int k = 0; k < 100; ++k) {
        const double term = power / (2.0 * k + 1.0);
        switch (k % 4) {
        case 0: c += term; break;
        case 1: s += term; break;
        case 2: c -= term; break;
        default: s -= term; break;
        }
        if (std::abs(term) < 1e-17 * (std::abs(c) + std::abs(s)))
            break;
        power *= t / (k + 1.0);
    }
    return {c, s};
}

// C + jS = (1 + j)/2 * erf(sqrt(pi)/2 (1 - j) x), with the complementary error
// function evaluated by a continued fraction (modified Lentz).
FresnelCS fresnel_continued_fraction(double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double pix2 = pi * x * x;
    cplx b{1.0, -pix2};
    cplx cc{1.0 / tiny, 0.0};
    cplx d = 1.0 / b;
    cplx h = d;
    double n = -1.0;
    for (int k = 2; k < 1000; ++k) {
        n += 2.0;
        const double a = -n * (n + 1.0);
        b += 4.0;
        d = 1.0 / (a * d + b);
        cc = b + a / cc;
        const cplx del = cc * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
            break;
    }
    h *= cplx{x, -x};
    const cplx cs = cplx{0.5, 0.5} * (1.0 - std::polar(1.0, 0.5 * pix2) * h);
    return {cs.real(), cs.imag()};
}

} // namespace

FresnelCS fresnel(double x)
{
    const double ax = std::abs(x);
    FresnelCS r = ax < 1.5 ? fresnel_series(ax) : fresnel_continued_fraction(ax);
    if (x < 0.0) {
        r.c = -r.c;
        r.s = -r.s;
    }
    return r;
}

double distance_coherence(const ArrayConfig& cfg, double k_step)
{
    if (!(k_step > 0.0))
        throw Error(Errc::invalid_config, "k_step must be positive");
    const double x = std::sqrt(2.0 * k_step) * cfg.n_half();
    const FresnelCS f = fresnel(x);
    return std::sqrt((2.0 * f.c * f.c + 2.0 * f.s * f.s) / k_step) / cfg.n_t();
}

double invert_coherence(const ArrayConfig& cfg, double rho_target)
{
    if (!(rho_target > 0.0 && rho_target < 1.0))
        throw Error(Errc::no_bracket, "target coherence must lie in (0, 1)");
    const double n2 = static_cast<double>(cfg.n_half()) * cfg.n_half();
    double lo = 1e-9 / n2;
    double hi = kCoherenceMonotoneEnd / n2;
    const double rho_lo = distance_coherence(cfg, lo);
    const double rho_hi = distance_coherence(cfg, hi);
    if (rho_target > rho_lo || rho_target < rho_hi)
        throw Error(Errc::no_bracket, "target coherence not attained on the monotone branch");
    for (int it = 0; it < 200 && hi - lo > 1e-18; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (distance_coherence(cfg, mid) > rho_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace thbt
