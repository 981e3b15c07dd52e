// SPDX-License-Identifier: Apache-2.0
#include "thbt/refine3.hpp"

#include "thbt/error.hpp"
#include "thbt/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace thbt {

NeighborSearchState neighbor_search(BeamTrainer& trainer, CodewordParams start, const NeighborSearchConfig& config)
{
    if (config.max_groups < 1 || !(config.step_angle > 0.0) || !(config.step_k > 0.0))
        throw Error(Errc::invalid_config, "neighbor search needs M_n >= 1 and positive steps");

    NeighborSearchState st;
    st.start = start;
    st.step_angle = config.step_angle;
    st.step_k = config.step_k;

    for (int group = 1; group <= config.max_groups; ++group) {
        st.groups_run = group;
        st.last_group_cell = st.center_cell;
        int winner = 0;
        double best = -1.0;
        for (std::size_t s = 0; s < kCrossOffsets.size(); ++s) {
            const std::pair<int, int> cell{st.center_cell.first + kCrossOffsets[s].first,
                                           st.center_cell.second + kCrossOffsets[s].second};
            auto it = st.cache.find(cell);
            if (it == st.cache.end())
                it = st.cache.emplace(cell, trainer.probe(st.cell(cell))).first;
            st.last_group[s] = it->second;
            if (std::abs(it->second) > best) {
                best = std::abs(it->second);
                winner = static_cast<int>(s) + 1;
            }
        }
        st.last_winner = winner;
        const auto& off = kCrossOffsets[static_cast<std::size_t>(winner - 1)];
        st.center_cell = {st.center_cell.first + off.first, st.center_cell.second + off.second};
        if (winner == 5) {
            st.success = true;
            break;
        }
    }
    return st;
}

NarrowedRegion narrow_regions(const NeighborSearchState& state, double theta3, double k3)
{
    if (!state.success)
        throw Error(Errc::missing_measurements, "neighbor search did not converge");
    for (const auto& y : state.last_group)
        if (!y)
            throw Error(Errc::missing_measurements, "final cross is incomplete");
    const CodewordParams c = state.center();
    NarrowedRegion out;
    if (std::abs(*state.last_group[1]) >= std::abs(*state.last_group[0])) {
        out.omega_lo = c.theta;
        out.omega_hi = c.theta + theta3;
    } else {
        out.omega_lo = c.theta - theta3;
        out.omega_hi = c.theta;
    }
    if (std::abs(*state.last_group[3]) >= std::abs(*state.last_group[2])) {
        out.b_lo = c.k;
        out.b_hi = c.k + k3;
    } else {
        out.b_lo = c.k - k3;
        out.b_hi = c.k;
    }
    return out;
}

GaEstimate ga_solve(std::span<const double> angles, std::span<const double> ks, std::span<const double> magnitudes,
                    const GaussianFit& fit)
{
    const std::size_t m3 = angles.size();
    if (m3 < 2 || ks.size() != m3 || magnitudes.size() != m3 * m3)
        throw Error(Errc::invalid_config, "GA estimation needs an M3 x M3 grid with M3 >= 2");
    if (!(fit.sigma_angle > 0.0) || !(fit.sigma_k > 0.0))
        throw Error(Errc::invalid_config, "Gaussian fit widths must be positive");

    const double peak = *std::max_element(magnitudes.begin(), magnitudes.end());
    if (!(peak > 0.0))
        throw Error(Errc::singular_normal_matrix, "all GA samples vanish");
    const double floor = 1e-6 * peak;

    double c1 = 0.0;
    double c2 = 0.0;
    for (std::size_t i = 0; i < m3; ++i) {
        c1 += angles[i];
        c2 += ks[i];
    }
    c1 /= static_cast<double>(m3);
    c2 /= static_cast<double>(m3);

    // Unknowns in normalized offsets P = (Omega - c1)/s1, Q = (b - c2)/s2 plus
    // the intercept. Amplitudes are rescaled by the peak; a common scale only
    // moves the intercept.
    NormalEquations3 ne;
    for (std::size_t m = 0; m < m3; ++m) {
        const double u = (angles[m] - c1) / fit.sigma_angle;
        for (std::size_t t = 0; t < m3; ++t) {
            const double v = (ks[t] - c2) / fit.sigma_k;
            const double y = std::max(magnitudes[m * m3 + t], floor) / peak;
            const double target = y * std::log(y) + y * u * u / 2.0 + y * v * v / 2.0;
            ne.add_row({y * u, y * v, y}, target);
        }
    }
    const auto sol = ne.solve(1e-12);
    if (!sol)
        throw Error(Errc::singular_normal_matrix, "GA normal matrix is singular");
    GaEstimate out;
    out.coords.omega = c1 + fit.sigma_angle * (*sol)[0];
    out.coords.b = c2 + fit.sigma_k * (*sol)[1];
    out.chi = (*sol)[2];
    return out;
}

GaEstimate ga_estimate(BeamTrainer& trainer, const NeighborSearchState& state, const NarrowedRegion& region, int m3,
                       const GaussianFit& fit)
{
    if (m3 < 2)
        throw Error(Errc::invalid_config, "M3 must be >= 2");
    if (!state.success || !state.last_group[4])
        throw Error(Errc::missing_measurements, "GA estimation needs a converged neighbor search");

    const CodewordParams center = state.center();
    std::vector<double> angles(static_cast<std::size_t>(m3));
    std::vector<double> ks(static_cast<std::size_t>(m3));
    for (int i = 0; i < m3; ++i) {
        angles[static_cast<std::size_t>(i)] = region.omega_lo + i * (region.omega_hi - region.omega_lo) / (m3 - 1);
        ks[static_cast<std::size_t>(i)] = region.b_lo + i * (region.b_hi - region.b_lo) / (m3 - 1);
    }
    // The converged center is always an end point of both sample axes.
    const std::size_t ci = (region.omega_lo == center.theta) ? 0 : static_cast<std::size_t>(m3 - 1);
    const std::size_t cj = (region.b_lo == center.k) ? 0 : static_cast<std::size_t>(m3 - 1);
    angles[ci] = center.theta;
    ks[cj] = center.k;

    const std::size_t before = trainer.probes();
    std::vector<double> mags(static_cast<std::size_t>(m3 * m3));
    for (std::size_t m = 0; m < angles.size(); ++m) {
        for (std::size_t t = 0; t < ks.size(); ++t) {
            const cplx y = (m == ci && t == cj) ? *state.last_group[4] : trainer.probe({angles[m], ks[t]});
            mags[m * ks.size() + t] = std::abs(y);
        }
    }
    GaEstimate out = ga_solve(angles, ks, mags, fit);
    out.new_probes = trainer.probes() - before;
    return out;
}

std::string_view to_string(StageTag tag) noexcept
{
    switch (tag) {
    case StageTag::ga: return "ga";
    case StageTag::neighbor_fallback: return "neighbor-fallback";
    case StageTag::ga_singular: return "ga-singular";
    case StageTag::sweep: return "sweep";
    case StageTag::oracle: return "oracle";
    }
    return "unknown";
}

FinalEstimate finalize(SurrogateCoords estimate, double wavelength, StageTag stage)
{
    FinalEstimate out;
    out.omega = estimate.omega;
    out.b = estimate.b;
    out.range_m = surrogate_to_range(std::clamp(estimate.omega, -1.0, 1.0), estimate.b, wavelength);
    out.stage = stage;
    return out;
}

} // namespace thbt
