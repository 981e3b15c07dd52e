// SPDX-License-Identifier: Apache-2.0
#include "thbt/channel_model.hpp"

#include "thbt/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace thbt {

using std::numbers::pi;

ArrayConfig::ArrayConfig(int n_half, double wavelength) : n_half_(n_half), wavelength_(wavelength)
{
    if (n_half < 1)
        throw Error(Errc::invalid_config, "array half-size N must be >= 1");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw Error(Errc::invalid_config, "wavelength must be positive");
}

double ArrayConfig::fresnel_bound() const noexcept
{
    const double n = n_half_;
    return 0.5 * std::sqrt(n * n * n) * wavelength_;
}

ArrayVector::ArrayVector(int n_half, std::vector<cplx> entries)
    : n_half_(n_half), entries_(std::move(entries))
{
    if (entries_.size() != static_cast<std::size_t>(2 * n_half + 1))
        throw Error(Errc::invalid_config, "array vector length does not match 2N+1");
}

double ArrayVector::norm() const
{
    double acc = 0.0;
    for (const cplx& v : entries_)
        acc += std::norm(v);
    return std::sqrt(acc);
}

cplx inner(const ArrayVector& a, const ArrayVector& b)
{
    const auto x = a.entries();
    const auto y = b.entries();
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        acc += std::conj(x[i]) * y[i];
    return acc;
}

double exact_distance(const ArrayConfig& cfg, const PathParams& path, int n)
{
    const double lambda = cfg.wavelength();
    const double r = path.range;
    return std::sqrt(r * r + n * n * lambda * lambda / 4.0 - n * r * path.omega * lambda);
}

double approx_distance(const ArrayConfig& cfg, const PathParams& path, int n)
{
    if (path.range < cfg.fresnel_bound())
        throw Error(Errc::fresnel_bound_violation, "range below 0.5*sqrt(N^3 lambda^2)");
    const double lambda = cfg.wavelength();
    const double r = path.range;
    const double w = path.omega;
    return r - n * w * lambda / 2.0 + n * n * lambda * lambda * (1.0 - w * w) / (8.0 * r);
}

SurrogateCoords to_surrogate(const PathParams& path, double wavelength)
{
    if (!(path.range > 0.0))
        throw Error(Errc::invalid_config, "range must be positive");
    return {path.omega, wavelength * (1.0 - path.omega * path.omega) / (4.0 * path.range)};
}

double surrogate_to_range(double omega, double b, double wavelength)
{
    if (!(b > 0.0))
        return std::numeric_limits<double>::infinity();
    return wavelength * (1.0 - omega * omega) / (4.0 * b);
}

SteeringVector steering_exact(const ArrayConfig& cfg, double omega, double range)
{
    const int big_n = cfg.n_half();
    const double lambda = cfg.wavelength();
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.n_t()));
    std::vector<cplx> out(static_cast<std::size_t>(cfg.n_t()));
    for (int n = -big_n; n <= big_n; ++n) {
        double delta;
        if (std::isinf(range)) {
            delta = -n * omega * lambda / 2.0;
        } else {
            // r^(n) - r without cancellation.
            const double num = n * n * lambda * lambda / 4.0 - n * range * omega * lambda;
            const double rn = std::sqrt(range * range + num);
            delta = num / (rn + range);
        }
        out[static_cast<std::size_t>(n + big_n)] = std::polar(amp, -2.0 * pi / lambda * delta);
    }
    return SteeringVector(big_n, std::move(out));
}

SteeringVector steering_exact(const ArrayConfig& cfg, const PathParams& path)
{
    return steering_exact(cfg, path.omega, path.range);
}

SteeringVector steering_surrogate(const ArrayConfig& cfg, SurrogateCoords coords)
{
    const int big_n = cfg.n_half();
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.n_t()));
    std::vector<cplx> out(static_cast<std::size_t>(cfg.n_t()));
    for (int n = -big_n; n <= big_n; ++n) {
        const double nn = n;
        out[static_cast<std::size_t>(n + big_n)] =
            std::polar(amp, pi * (coords.omega * nn - coords.b * nn * nn));
    }
    return SteeringVector(big_n, std::move(out));
}

Channel assemble_channel(const ArrayConfig& cfg, std::span<const PathParams> paths)
{
    if (paths.empty())
        throw Error(Errc::empty_path_list, "channel needs at least one path");
    std::vector<cplx> h(static_cast<std::size_t>(cfg.n_t()), cplx{0.0, 0.0});
    for (const PathParams& p : paths) {
        const SteeringVector a = steering_exact(cfg, p);
        const auto e = a.entries();
        for (std::size_t i = 0; i < h.size(); ++i)
            h[i] += p.gain * e[i];
    }
    return Channel(cfg.n_half(), std::move(h));
}

void validate_scenario(const ArrayConfig& cfg, const Scenario& scenario)
{
    if (scenario.gain_std.empty())
        throw Error(Errc::invalid_scenario, "at least one path (L >= 1) is required");
    for (double d : scenario.gain_std)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw Error(Errc::invalid_scenario, "gain standard deviations must be finite and >= 0");
    const auto [a_lo, a_hi] = scenario.angle_range;
    if (!(a_lo <= a_hi) || a_lo < -1.0 || a_hi > 1.0)
        throw Error(Errc::invalid_scenario, "angle range must satisfy -1 <= lo <= hi <= 1");
    const auto [r_lo, r_hi] = scenario.distance_range;
    if (!(r_lo <= r_hi) || !(r_lo > 0.0) || !std::isfinite(r_hi))
        throw Error(Errc::invalid_scenario, "distance range must satisfy 0 < lo <= hi");
    if (r_hi <= cfg.fresnel_bound())
        throw Error(Errc::invalid_scenario, "distance range lies entirely below the Fresnel bound");
}

ChannelDraw sample_channel(const ArrayConfig& cfg, Rng& rng, const Scenario& scenario)
{
    validate_scenario(cfg, scenario);
    const double bound = cfg.fresnel_bound();
    const auto [a_lo, a_hi] = scenario.angle_range;
    const auto [r_lo, r_hi] = scenario.distance_range;

    ChannelDraw draw;
    draw.paths.reserve(scenario.gain_std.size());
    for (double delta : scenario.gain_std) {
        PathParams p;
        p.omega = rng.uniform(a_lo, a_hi);
        do {
            p.range = rng.uniform(r_lo, r_hi);
        } while (p.range < bound);
        p.gain = rng.complex_normal(delta * delta);
        draw.paths.push_back(p);
    }
    draw.channel = assemble_channel(cfg, draw.paths);
    return draw;
}

ChannelDraw sample_channel(const ArrayConfig& cfg, std::uint64_t seed, const Scenario& scenario)
{
    Rng rng(seed);
    return sample_channel(cfg, rng, scenario);
}

} // namespace thbt
