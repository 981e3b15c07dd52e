// SPDX-License-Identifier: Apache-2.0
//
// Hybrid-field beam gain (HFBG) of a codeword gamma(Theta, k) toward a target
// (Omega, b):
//
//   G = sum_{n=-N}^{N} exp(j pi ((Theta - Omega) n + (b - k) n^2))
//     = N_t * gamma(Omega, b)^H gamma(Theta, k)
//
// together with its stationary-phase approximation, the trapezoidal beam
// coverage it implies, and the Fresnel-integral coherence between codewords
// that differ only in surrogate distance.
#pragma once

#include "thbt/channel_model.hpp"

#include <optional>

namespace thbt {

/// Parameters (Theta, k) of a codeword gamma(Theta, k).
struct CodewordParams {
    double theta = 0.0;
    double k = 0.0;
};

struct BeamGainSample {
    cplx value{0.0, 0.0};
    double magnitude = 0.0;
    std::optional<double> unwrapped_phase;
};

BeamGainSample hfbg_exact(const ArrayConfig& cfg, CodewordParams codeword, SurrogateCoords target);

/// z0 = (Omega - Theta) / (2 (b - k)). Throws Error(degenerate_quadratic) when
/// |b - k| < 1e-15.
double stationary_point(CodewordParams codeword, SurrogateCoords target);

/// Stationary-phase approximation: magnitude 1/sqrt|b - k| inside the
/// coverage and 0 outside; phase pi (Omega - Theta)^2 / (4 (k - b)) minus
/// sign(k - b) pi/4. The phase is also reported in unwrapped_phase.
BeamGainSample hfbg_psp(const ArrayConfig& cfg, CodewordParams codeword, SurrogateCoords target);

/// Closed trapezoid |Omega - Theta| <= slope_bound * |b - k|.
struct CoverageRegion {
    double theta = 0.0;
    double k = 0.0;
    double slope_bound = 0.0; ///< N_t

    static CoverageRegion of(const ArrayConfig& cfg, CodewordParams codeword)
    {
        return {codeword.theta, codeword.k, static_cast<double>(cfg.n_t())};
    }
};

bool coverage_contains(const CoverageRegion& region, SurrogateCoords target);

/// Angle coverage width 2 N_t |b - k| at a fixed b.
double acw(const CoverageRegion& region, double b);

struct FresnelCS {
    double c = 0.0;
    double s = 0.0;
};

/// C(x) = int_0^x cos(pi z^2/2) dz and S(x) = int_0^x sin(pi z^2/2) dz.
/// Odd in x. Absolute error below 1e-10.
FresnelCS fresnel(double x);

/// Coherence between gamma(Theta, k) and gamma(Theta, k + k_step) under the
/// integral approximation of the HFBG.
double distance_coherence(const ArrayConfig& cfg, double k_step);

/// Inverts distance_coherence by bisection over k_step in (0, kmax], where
/// kmax is the end of the monotone branch. Throws Error(no_bracket) when
/// rho_target is not attained on it.
double invert_coherence(const ArrayConfig& cfg, double rho_target);

} // namespace thbt
