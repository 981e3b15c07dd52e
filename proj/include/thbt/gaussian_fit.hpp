// SPDX-License-Identifier: Apache-2.0
//
// Separable 2-D Gaussian model of the HFBG main lobe,
//
//   f(Omega, b) = a exp(-(Omega - Theta)^2 / (2 s1^2) - (b - k)^2 / (2 s2^2)),
//
// fitted once to |G| of the reference codeword gamma(0, 0) and reused for
// every other codeword by translation.
#pragma once

#include "thbt/beam_gain.hpp"

#include <span>
#include <vector>

namespace thbt {

/// Half-extents of the fit rectangle around the codeword.
struct FitDomain {
    double theta3 = 0.0;
    double k3 = 0.0;
};

struct GaussianFit {
    double amplitude = 0.0;
    double sigma_angle = 0.0;
    double sigma_k = 0.0;
    FitDomain domain;
    double peak_gain = 0.0;     ///< |G| of the codeword toward itself (N_t)
    double max_residual = 0.0;  ///< max |f - |G|| on the fit grid, relative to peak_gain
    double mean_residual = 0.0; ///< mean |f - |G|| on the fit grid, relative to peak_gain

    /// Model gain of codeword `codeword` toward `target`.
    double evaluate(CodewordParams codeword, SurrogateCoords target) const;
};

struct FitOptions {
    int grid = 64;              ///< samples per axis over the fit rectangle
    int starts = 4;
    double max_residual_tol = 0.05;
    double mean_residual_tol = 0.01;
};

/// Throws Error(fit_diverged) if no start meets the residual tolerances.
GaussianFit fit_gaussian(const ArrayConfig& cfg, FitDomain domain, FitOptions options = {});

struct GaussianParams {
    double amplitude = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
};

struct GaussianFitResult {
    GaussianParams params;
    double cost = 0.0; ///< 0.5 * sum of squared residuals
    int iterations = 0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of a centered separable
/// Gaussian to samples (x_i, y_i, v_i).
GaussianFitResult fit_centered_gaussian(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> values, GaussianParams start);

} // namespace thbt
