// SPDX-License-Identifier: Apache-2.0
//
// Second refinement. A sweep of 2*M2+1 codewords gamma(m_bar*Theta1 + m*Theta2, k2)
// whose coverages all contain the extended first-stage region, followed by
// either a grid maximum-likelihood search or a closed-form fit of the
// stationary-phase model to the unwrapped measurement phases.
#pragma once

#include "thbt/refine1.hpp"

#include <span>
#include <vector>

namespace thbt {

struct Refine2Config {
    int m2 = 8;
    double theta_bar2 = 0.0; ///< angle step between codewords, > 0
};

void validate(const Refine2Config& r2);

/// Phase-unwrap safety margin
/// B = Theta2 (1/N_t + (b_bar - k_tilde1) N_t + M2 Theta2) / 2.
double unwrap_margin(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2);

/// Surrogate distance shared by all second-stage codewords. Even m_bar:
/// min(-B, k1 - M2 Theta2/N_t - 1/N_t^2); odd m_bar: max(b_bar + B, k1 + M2 Theta2/N_t + 1/N_t^2).
double choose_k2(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2, int m_bar);

struct Codebook2 {
    int m_bar = 0;
    int m2 = 0;
    double center_theta = 0.0; ///< m_bar * Theta1
    double theta_bar2 = 0.0;
    double k_bar2 = 0.0;
    std::vector<CodewordParams> codewords; ///< ascending m, index m + m2

    std::vector<double> angles() const;
    std::size_t size() const noexcept { return codewords.size(); }
};

/// Throws Error(coverage_violation) if some codeword's coverage fails to
/// contain the extended region.
Codebook2 build_codebook2(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2,
                          const Codebook1& codebook1, int m_bar);

/// Smallest slack N_t |b - k2| - (N_t |b - k1| + 1/N_t + |m| Theta2) over
/// b in [0, b_bar] and all codewords; non-negative iff every coverage
/// contains the extended region.
double coverage_slack(const ArrayConfig& cfg, const Refine1Config& r1, const Codebook2& codebook);

std::vector<cplx> train_stage2(BeamTrainer& trainer, const Codebook2& codebook);

struct MlGrid {
    int n_omega = 101;
    int n_b = 101;
};

struct MlEstimate {
    SurrogateCoords coords;
    cplx gain{0.0, 0.0};     ///< optimal complex gain at the maximizer
    double objective = 0.0;  ///< |y^H Gamma^H gamma| / ||Gamma^H gamma||
    std::size_t evaluated = 0; ///< number of grid points searched (V)
    double omega_step = 0.0;
    double b_step = 0.0;
};

/// Grid maximum likelihood over the points of `region` on a uniform grid of
/// its bounding box. Direct evaluation. Throws Error(empty_grid) if no grid
/// point falls in the region.
MlEstimate estimate_ml(const ArrayConfig& cfg, const Codebook2& codebook, std::span<const cplx> samples,
                       const PotentialRegion& region, MlGrid grid = {});

/// Same search as estimate_ml, but with the codeword/grid inner products
/// tabulated once. The table depends on m_bar only through its parity, so one
/// instance per parity serves every trial.
class MlSearchTable {
public:
    MlSearchTable(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2, int parity,
                  MlGrid grid = {});

    MlEstimate estimate(const Codebook2& codebook, std::span<const cplx> samples) const;

    int parity() const noexcept { return parity_; }
    std::size_t points() const noexcept { return omega_off_.size(); }

private:
    int parity_;
    int n_codewords_;
    double k_bar2_;
    double omega_step_;
    double b_step_;
    std::vector<double> omega_off_; ///< in-region grid points, offset from m_bar*Theta1
    std::vector<double> b_;
    std::vector<cplx> proj_;        ///< [point][codeword], gamma_m^H gamma(Omega, b)
    std::vector<double> proj_norm_;
};

struct PhaseSeries {
    std::vector<double> wrapped;
    std::vector<double> unwrapped;
};

/// Sequential unwrap: u[0] = anchor, u[i+1] = u[i] + mod(w[i+1] - w[i] + pi, 2 pi) - pi.
PhaseSeries unwrap(std::span<const double> wrapped, double anchor);
/// Anchors at the first wrapped value.
PhaseSeries unwrap(std::span<const double> wrapped);

/// Phases of the conjugated samples, unwrapped with the first value anchored at 0.
PhaseSeries unwrap_phases(std::span<const cplx> samples);

struct PspEstimate {
    SurrogateCoords coords;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Least-squares fit of U_m = pi (Omega - Theta_m)^2 / (4 (b - k2)) + phi.
/// Throws Error(singular_system) when the angles do not determine a quadratic
/// and Error(zero_curvature) when |alpha| < 1e-12.
PspEstimate estimate_psp(const PhaseSeries& series, std::span<const double> angles, double k_bar2);

} // namespace thbt
