// SPDX-License-Identifier: Apache-2.0
//
// First refinement: a codebook of 2*M1+1 codewords gamma(m*Theta1, k1(m))
// whose trapezoidal coverages tile the initial region
// { |Omega| <= Omega_bar, 0 <= b <= b_bar }, one sweep over it, and the
// resulting potential region.
#pragma once

#include "thbt/beam_gain.hpp"
#include "thbt/training.hpp"

#include <vector>

namespace thbt {

struct Refine1Config {
    double omega_bar = 0.8660254037844386; ///< angle half-extent of the initial region
    double b_bar = 1.22e-4;                ///< surrogate-distance upper bound
    double k_tilde1 = -6.09e-5;            ///< coverage control, < 0
};

/// Throws Error(invalid_config) unless k_tilde1 < 0, b_bar > 0 and
/// omega_bar in (0, 1].
void validate(const Refine1Config& r1);

/// Angle spacing (b_bar - 2 k_tilde1) * N_t between adjacent codewords.
double theta_bar1(const ArrayConfig& cfg, const Refine1Config& r1);

/// Real-valued lower bound (Omega_bar + N_t k_tilde1) / Theta1 on M1.
double m1_bound(const ArrayConfig& cfg, const Refine1Config& r1);

/// Smallest integer strictly above m1_bound.
int design_m1(const ArrayConfig& cfg, const Refine1Config& r1);

/// k_tilde1 for even m, b_bar - k_tilde1 for odd m.
double k_bar1(const Refine1Config& r1, int m);

struct Codebook1 {
    int m1 = 0;
    double theta_bar1 = 0.0;
    std::vector<CodewordParams> codewords; ///< ascending m, index m + m1

    const CodewordParams& at(int m) const { return codewords[static_cast<std::size_t>(m + m1)]; }
    std::size_t size() const noexcept { return codewords.size(); }
};

Codebook1 build_codebook1(const ArrayConfig& cfg, const Refine1Config& r1);
Codebook1 build_codebook1(const ArrayConfig& cfg, const Refine1Config& r1, int m1);

struct Stage1Result {
    int m_bar = 0;
    std::vector<cplx> samples; ///< ascending m
};

/// Probes every codeword once; argmax |y_m|, ties to the smallest m.
Stage1Result train_stage1(BeamTrainer& trainer, const Codebook1& codebook);

/// { 0 <= b <= b_max, |Omega - center_theta| <= slope (|b - pivot_k| + widening) }.
struct PotentialRegion {
    double center_theta = 0.0;
    double pivot_k = 0.0;
    double slope = 0.0;
    double b_max = 0.0;
    double widening = 0.0;

    bool contains(SurrogateCoords p) const;
    /// Angle half-width at surrogate distance b.
    double half_width(double b) const;
    /// Largest half-width over b in [0, b_max].
    double max_half_width() const;
};

PotentialRegion region_update1(const ArrayConfig& cfg, const Refine1Config& r1, const Codebook1& codebook,
                               int m_bar);

/// Inflates the region by a transition zone of width 1/N_t, i.e. adds 1/N_t^2
/// to |b - pivot_k|.
PotentialRegion extend_region(const ArrayConfig& cfg, const PotentialRegion& region);

} // namespace thbt
