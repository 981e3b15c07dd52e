// SPDX-License-Identifier: Apache-2.0
#include "thbt/gaussian_fit.hpp"

#include "thbt/error.hpp"
#include "thbt/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace thbt {

double GaussianFit::evaluate(CodewordParams codeword, SurrogateCoords target) const
{
    const double dx = target.omega - codeword.theta;
    const double dy = target.b - codeword.k;
    return amplitude *
           std::exp(-dx * dx / (2.0 * sigma_angle * sigma_angle) - dy * dy / (2.0 * sigma_k * sigma_k));
}

namespace {

double half_cost(std::span<const double> x, std::span<const double> y, std::span<const double> v,
                 const GaussianParams& p)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double e = std::exp(-x[i] * x[i] / (2.0 * p.sigma_x * p.sigma_x) -
                                  y[i] * y[i] / (2.0 * p.sigma_y * p.sigma_y));
        const double r = p.amplitude * e - v[i];
        acc += r * r;
    }
    return 0.5 * acc;
}

} // namespace

GaussianFitResult fit_centered_gaussian(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> values, GaussianParams start)
{
    if (x.size() != values.size() || y.size() != values.size() || values.size() < 3)
        throw Error(Errc::invalid_config, "Gaussian fit needs at least three matched samples");

    GaussianParams p = start;
    double cost = half_cost(x, y, values, p);
    double mu = 1e-3;
    int it = 0;
    for (; it < 500; ++it) {
        Mat3 jtj{};
        Vec3 jtr{};
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double sx2 = p.sigma_x * p.sigma_x;
            const double sy2 = p.sigma_y * p.sigma_y;
            const double e = std::exp(-x[i] * x[i] / (2.0 * sx2) - y[i] * y[i] / (2.0 * sy2));
            const double r = p.amplitude * e - values[i];
            const Vec3 j{e, p.amplitude * e * x[i] * x[i] / (sx2 * p.sigma_x),
                         p.amplitude * e * y[i] * y[i] / (sy2 * p.sigma_y)};
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b)
                    jtj[a][b] += j[a] * j[b];
                jtr[a] += j[a] * r;
            }
        }

        bool improved = false;
        for (int attempt = 0; attempt < 40 && !improved; ++attempt) {
            Mat3 damped = jtj;
            for (int a = 0; a < 3; ++a)
                damped[a][a] += mu * std::max(jtj[a][a], 1e-300);
            const auto step = solve3(damped, {-jtr[0], -jtr[1], -jtr[2]}, 1e-300);
            if (!step) {
                mu *= 10.0;
                continue;
            }
            GaussianParams trial{p.amplitude + (*step)[0], p.sigma_x + (*step)[1], p.sigma_y + (*step)[2]};
            if (!(trial.sigma_x > 0.0) || !(trial.sigma_y > 0.0)) {
                mu *= 10.0;
                continue;
            }
            const double trial_cost = half_cost(x, y, values, trial);
            if (trial_cost < cost) {
                const double rel = std::abs((*step)[0]) / (std::abs(p.amplitude) + 1e-300) +
                                   std::abs((*step)[1]) / p.sigma_x + std::abs((*step)[2]) / p.sigma_y;
                const double drop = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                mu = std::max(mu / 3.0, 1e-12);
                improved = true;
                if (rel < 1e-13 || drop <= 1e-15 * cost)
                    return {p, cost, it + 1};
            } else {
                mu *= 4.0;
            }
        }
        if (!improved)
            break;
    }
    return {p, cost, it};
}

GaussianFit fit_gaussian(const ArrayConfig& cfg, FitDomain domain, FitOptions options)
{
    if (!(domain.theta3 > 0.0) || !(domain.k3 > 0.0))
        throw Error(Errc::invalid_config, "fit rectangle must have positive extents");
    if (options.grid < 2 || options.starts < 1)
        throw Error(Errc::invalid_config, "fit grid needs >= 2 points per axis and >= 1 start");

    // Work in units of the rectangle half-extents and of the peak gain so the
    // three parameters are O(1).
    const CodewordParams reference{0.0, 0.0};
    const double peak = hfbg_exact(cfg, reference, {0.0, 0.0}).magnitude;
    const int n = options.grid;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> vs;
    xs.reserve(static_cast<std::size_t>(n * n));
    ys.reserve(xs.capacity());
    vs.reserve(xs.capacity());
    for (int i = 0; i < n; ++i) {
        const double u = -1.0 + 2.0 * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double w = -1.0 + 2.0 * j / (n - 1);
            xs.push_back(u);
            ys.push_back(w);
            vs.push_back(hfbg_exact(cfg, reference, {u * domain.theta3, w * domain.k3}).magnitude / peak);
        }
    }

    // Initial guess: peak sample and the second moments of the surface.
    double a0 = 0.0;
    double wsum = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        a0 = std::max(a0, vs[i]);
        wsum += vs[i];
        mx += vs[i] * xs[i] * xs[i];
        my += vs[i] * ys[i] * ys[i];
    }
    const double sx0 = std::sqrt(std::max(mx / wsum, 1e-6));
    const double sy0 = std::sqrt(std::max(my / wsum, 1e-6));

    static constexpr std::array<std::array<double, 2>, 4> perturb{{{1.0, 1.0}, {2.0, 2.0}, {0.5, 2.0}, {2.0, 0.5}}};
    GaussianFit best;
    bool found = false;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int s = 0; s < options.starts; ++s) {
        const auto& f = perturb[static_cast<std::size_t>(s) % perturb.size()];
        const double scale = 1.0 + 0.25 * static_cast<double>(s / static_cast<int>(perturb.size()));
        const GaussianFitResult r = fit_centered_gaussian(xs, ys, vs, {a0, sx0 * f[0] * scale, sy0 * f[1] * scale});
        double max_dev = 0.0;
        double sum_dev = 0.0;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const double model = r.params.amplitude * std::exp(-xs[i] * xs[i] / (2.0 * r.params.sigma_x * r.params.sigma_x) -
                                                               ys[i] * ys[i] / (2.0 * r.params.sigma_y * r.params.sigma_y));
            const double dev = std::abs(model - vs[i]);
            max_dev = std::max(max_dev, dev);
            sum_dev += dev;
        }
        const double mean_dev = sum_dev / static_cast<double>(vs.size());
        if (max_dev > options.max_residual_tol || mean_dev > options.mean_residual_tol)
            continue;
        if (r.cost < best_cost) {
            best_cost = r.cost;
            found = true;
            best.amplitude = r.params.amplitude * peak;
            best.sigma_angle = std::abs(r.params.sigma_x) * domain.theta3;
            best.sigma_k = std::abs(r.params.sigma_y) * domain.k3;
            best.max_residual = max_dev;
            best.mean_residual = mean_dev;
        }
    }
    if (!found)
        throw Error(Errc::fit_diverged, "Gaussian main-lobe fit missed the residual tolerances at every start");
    best.domain = domain;
    best.peak_gain = peak;
    return best;
}

} // namespace thbt
