// SPDX-License-Identifier: Apache-2.0
//
// Third refinement: a five-codeword cross search around the second-stage
// estimate, then a log-amplitude least-squares fit of the Gaussian main-lobe
// model to an M3 x M3 grid of probes inside the selected quadrant.
#pragma once

#include "thbt/gaussian_fit.hpp"
#include "thbt/training.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

namespace thbt {

struct NeighborSearchConfig {
    double step_angle = 0.0; ///< angle step between cross codewords
    double step_k = 0.0;     ///< surrogate-distance step between cross codewords
    int max_groups = 3;      ///< M_n
};

/// Cross positions in probe order: angle -, angle +, k -, k +, center.
inline constexpr std::array<std::pair<int, int>, 5> kCrossOffsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}}};

struct NeighborSearchState {
    CodewordParams start;
    double step_angle = 0.0;
    double step_k = 0.0;
    int groups_run = 0;
    int last_winner = 0;                       ///< 1..5 in cross order
    bool success = false;                      ///< last group won by its center
    std::pair<int, int> center_cell{0, 0};     ///< lattice cell of the current center
    std::pair<int, int> last_group_cell{0, 0}; ///< lattice cell the last group was centered on
    std::map<std::pair<int, int>, cplx> cache; ///< every probe, keyed by lattice cell
    std::array<std::optional<cplx>, 5> last_group;

    CodewordParams cell(std::pair<int, int> c) const
    {
        return {start.theta + c.first * step_angle, start.k + c.second * step_k};
    }
    /// (Omega_n, b_n): parameters of the current center codeword.
    CodewordParams center() const { return cell(center_cell); }
};

/// Probes each cross around the current center, re-centers on the strongest
/// (ties to the earliest in cross order) and stops when the center wins or
/// after max_groups groups. Probes already made are reused, so at most
/// 3*M_n + 2 new probes are spent.
NeighborSearchState neighbor_search(BeamTrainer& trainer, CodewordParams start, const NeighborSearchConfig& config);

struct NarrowedRegion {
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    double b_lo = 0.0;
    double b_hi = 0.0;
};

/// Picks the half of each axis whose outer neighbor was stronger (>= goes to
/// the upper half). Throws Error(missing_measurements) unless the search
/// converged with a complete final cross.
NarrowedRegion narrow_regions(const NeighborSearchState& state, double theta3, double k3);

struct GaEstimate {
    SurrogateCoords coords;
    double chi = 0.0;
    std::size_t new_probes = 0;
};

/// Log-amplitude weighted least squares on an M3 x M3 grid of samples.
/// `magnitudes` is row-major over (angle m, distance t). Amplitudes are
/// floored at 1e-6 of the largest before the logarithm. Throws
/// Error(singular_normal_matrix) for degenerate sampling.
GaEstimate ga_solve(std::span<const double> angles, std::span<const double> ks, std::span<const double> magnitudes,
                    const GaussianFit& fit);

/// Samples M3 points per axis across the narrowed intervals, probes the grid
/// (reusing the converged center probe) and solves the least-squares system.
GaEstimate ga_estimate(BeamTrainer& trainer, const NeighborSearchState& state, const NarrowedRegion& region, int m3,
                       const GaussianFit& fit);

enum class StageTag {
    ga,                ///< full pipeline
    neighbor_fallback, ///< cross search did not converge; its center is the result
    ga_singular,       ///< cross search converged but the least-squares system was singular
    sweep,             ///< exhaustive sweep baseline
    oracle,            ///< upper bound using the true strongest path
};

std::string_view to_string(StageTag tag) noexcept;

struct FinalEstimate {
    double omega = 0.0;
    double b = 0.0;
    double range_m = 0.0; ///< +infinity when b <= 0
    StageTag stage = StageTag::ga;
};

FinalEstimate finalize(SurrogateCoords estimate, double wavelength, StageTag stage);

} // namespace thbt
