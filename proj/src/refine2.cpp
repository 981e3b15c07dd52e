// SPDX-License-Identifier: Apache-2.0
#include "thbt/refine2.hpp"

#include "thbt/error.hpp"
#include "thbt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace thbt {

using std::numbers::pi;

void validate(const Refine2Config& r2)
{
    if (r2.m2 < 1)
        throw Error(Errc::invalid_config, "M2 must be >= 1");
    if (!(r2.theta_bar2 > 0.0))
        throw Error(Errc::invalid_config, "Theta2 must be positive");
}

double unwrap_margin(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2)
{
    const double nt = cfg.n_t();
    return r2.theta_bar2 * (1.0 / nt + (r1.b_bar - r1.k_tilde1) * nt + r2.m2 * r2.theta_bar2) / 2.0;
}

double choose_k2(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2, int m_bar)
{
    validate(r2);
    const double nt = cfg.n_t();
    const double margin = unwrap_margin(cfg, r1, r2);
    const double k1 = k_bar1(r1, m_bar);
    const double shift = r2.m2 * r2.theta_bar2 / nt + 1.0 / (nt * nt);
    if (std::abs(m_bar) % 2 == 0)
        return std::min(-margin, k1 - shift);
    return std::max(r1.b_bar + margin, k1 + shift);
}

std::vector<double> Codebook2::angles() const
{
    std::vector<double> out;
    out.reserve(codewords.size());
    for (const auto& c : codewords)
        out.push_back(c.theta);
    return out;
}

double coverage_slack(const ArrayConfig& cfg, const Refine1Config& r1, const Codebook2& codebook)
{
    const double nt = cfg.n_t();
    const double k1 = k_bar1(r1, codebook.m_bar);
    // Both sides are piecewise linear in b; the extremes sit at the interval
    // ends or at a kink.
    std::vector<double> probes{0.0, r1.b_bar};
    for (double kink : {k1, codebook.k_bar2})
        if (kink > 0.0 && kink < r1.b_bar)
            probes.push_back(kink);
    double slack = std::numeric_limits<double>::infinity();
    for (double b : probes) {
        const double need = nt * std::abs(b - k1) + 1.0 / nt + codebook.m2 * codebook.theta_bar2;
        slack = std::min(slack, nt * std::abs(b - codebook.k_bar2) - need);
    }
    return slack;
}

Codebook2 build_codebook2(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2,
                          const Codebook1& codebook1, int m_bar)
{
    validate(r2);
    if (m_bar < -codebook1.m1 || m_bar > codebook1.m1)
        throw Error(Errc::invalid_config, "m_bar outside [-M1, M1]");
    Codebook2 book;
    book.m_bar = m_bar;
    book.m2 = r2.m2;
    book.center_theta = m_bar * codebook1.theta_bar1;
    book.theta_bar2 = r2.theta_bar2;
    book.k_bar2 = choose_k2(cfg, r1, r2, m_bar);
    book.codewords.reserve(static_cast<std::size_t>(2 * r2.m2 + 1));
    for (int m = -r2.m2; m <= r2.m2; ++m)
        book.codewords.push_back({book.center_theta + m * r2.theta_bar2, book.k_bar2});
    if (coverage_slack(cfg, r1, book) < -1e-12)
        throw Error(Errc::coverage_violation, "second-stage coverage does not contain the extended region");
    return book;
}

std::vector<cplx> train_stage2(BeamTrainer& trainer, const Codebook2& codebook)
{
    std::vector<cplx> out;
    out.reserve(codebook.size());
    for (const auto& c : codebook.codewords)
        out.push_back(trainer.probe(c));
    return out;
}

namespace {

// gamma(Theta, k)^H gamma(Omega, b).
cplx codeword_projection(const ArrayConfig& cfg, CodewordParams codeword, SurrogateCoords target)
{
    return std::conj(hfbg_exact(cfg, codeword, target).value) / static_cast<double>(cfg.n_t());
}

struct GridAxes {
    std::vector<double> omega;
    std::vector<double> b;
    double omega_step = 0.0;
    double b_step = 0.0;
};

GridAxes make_axes(const PotentialRegion& region, MlGrid grid, double center)
{
    if (grid.n_omega < 1 || grid.n_b < 1)
        throw Error(Errc::empty_grid, "ML grid needs at least one point per axis");
    GridAxes axes;
    const double w = region.max_half_width();
    axes.omega_step = grid.n_omega > 1 ? 2.0 * w / (grid.n_omega - 1) : 0.0;
    axes.b_step = grid.n_b > 1 ? region.b_max / (grid.n_b - 1) : 0.0;
    for (int i = 0; i < grid.n_omega; ++i)
        axes.omega.push_back(grid.n_omega > 1 ? center - w + i * axes.omega_step : center);
    for (int j = 0; j < grid.n_b; ++j)
        axes.b.push_back(grid.n_b > 1 ? j * axes.b_step : 0.5 * region.b_max);
    return axes;
}

} // namespace

MlEstimate estimate_ml(const ArrayConfig& cfg, const Codebook2& codebook, std::span<const cplx> samples,
                       const PotentialRegion& region, MlGrid grid)
{
    if (samples.size() != codebook.size())
        throw Error(Errc::invalid_config, "sample count does not match the codebook");
    const GridAxes axes = make_axes(region, grid, region.center_theta);

    MlEstimate best;
    best.objective = -1.0;
    best.omega_step = axes.omega_step;
    best.b_step = axes.b_step;
    std::vector<cplx> proj(codebook.size());
    for (double b : axes.b) {
        for (double omega : axes.omega) {
            const SurrogateCoords p{omega, b};
            if (!region.contains(p))
                continue;
            ++best.evaluated;
            cplx corr{0.0, 0.0};
            double energy = 0.0;
            for (std::size_t m = 0; m < codebook.size(); ++m) {
                proj[m] = codeword_projection(cfg, codebook.codewords[m], p);
                corr += samples[m] * proj[m];
                energy += std::norm(proj[m]);
            }
            if (!(energy > 0.0))
                continue;
            const double objective = std::abs(corr) / std::sqrt(energy);
            if (objective > best.objective) {
                best.objective = objective;
                best.coords = p;
                best.gain = std::conj(corr) / energy;
            }
        }
    }
    if (best.evaluated == 0)
        throw Error(Errc::empty_grid, "no grid point inside the search region");
    return best;
}

MlSearchTable::MlSearchTable(const ArrayConfig& cfg, const Refine1Config& r1, const Refine2Config& r2,
                             int parity, MlGrid grid)
    : parity_(parity & 1), n_codewords_(2 * r2.m2 + 1), k_bar2_(choose_k2(cfg, r1, r2, parity & 1))
{
    // Relative geometry: region centered at angle 0; codeword m sits at m*Theta2.
    const double nt = cfg.n_t();
    const PotentialRegion region{0.0, k_bar1(r1, parity_), nt, r1.b_bar, 1.0 / (nt * nt)};
    const GridAxes axes = make_axes(region, grid, 0.0);
    omega_step_ = axes.omega_step;
    b_step_ = axes.b_step;

    for (double b : axes.b) {
        for (double omega : axes.omega) {
            const SurrogateCoords p{omega, b};
            if (!region.contains(p))
                continue;
            omega_off_.push_back(omega);
            b_.push_back(b);
            double energy = 0.0;
            for (int m = -r2.m2; m <= r2.m2; ++m) {
                const cplx v = codeword_projection(cfg, {m * r2.theta_bar2, k_bar2_}, p);
                proj_.push_back(v);
                energy += std::norm(v);
            }
            proj_norm_.push_back(std::sqrt(energy));
        }
    }
    if (omega_off_.empty())
        throw Error(Errc::empty_grid, "no grid point inside the search region");
}

MlEstimate MlSearchTable::estimate(const Codebook2& codebook, std::span<const cplx> samples) const
{
    if ((std::abs(codebook.m_bar) & 1) != parity_)
        throw Error(Errc::invalid_config, "codebook parity does not match the search table");
    if (samples.size() != static_cast<std::size_t>(n_codewords_))
        throw Error(Errc::invalid_config, "sample count does not match the codebook");

    MlEstimate best;
    best.objective = -1.0;
    best.evaluated = omega_off_.size();
    best.omega_step = omega_step_;
    best.b_step = b_step_;
    std::size_t arg = 0;
    cplx arg_corr{0.0, 0.0};
    for (std::size_t p = 0; p < omega_off_.size(); ++p) {
        const cplx* row = &proj_[p * static_cast<std::size_t>(n_codewords_)];
        cplx corr{0.0, 0.0};
        for (int m = 0; m < n_codewords_; ++m)
            corr += samples[static_cast<std::size_t>(m)] * row[m];
        if (!(proj_norm_[p] > 0.0))
            continue;
        const double objective = std::abs(corr) / proj_norm_[p];
        if (objective > best.objective) {
            best.objective = objective;
            arg = p;
            arg_corr = corr;
        }
    }
    best.coords = {codebook.center_theta + omega_off_[arg], b_[arg]};
    best.gain = std::conj(arg_corr) / (proj_norm_[arg] * proj_norm_[arg]);
    return best;
}

PhaseSeries unwrap(std::span<const double> wrapped, double anchor)
{
    PhaseSeries out;
    out.wrapped.assign(wrapped.begin(), wrapped.end());
    out.unwrapped.reserve(wrapped.size());
    if (wrapped.empty())
        return out;
    out.unwrapped.push_back(anchor);
    const double two_pi = 2.0 * pi;
    for (std::size_t i = 1; i < wrapped.size(); ++i) {
        const double x = wrapped[i] - wrapped[i - 1] + pi;
        const double step = x - two_pi * std::floor(x / two_pi) - pi;
        out.unwrapped.push_back(out.unwrapped.back() + step);
    }
    return out;
}

PhaseSeries unwrap(std::span<const double> wrapped)
{
    return unwrap(wrapped, wrapped.empty() ? 0.0 : wrapped.front());
}

PhaseSeries unwrap_phases(std::span<const cplx> samples)
{
    std::vector<double> wrapped;
    wrapped.reserve(samples.size());
    for (const cplx& y : samples)
        wrapped.push_back(std::arg(std::conj(y)));
    return unwrap(wrapped, 0.0);
}

PspEstimate estimate_psp(const PhaseSeries& series, std::span<const double> angles, double k_bar2)
{
    if (series.unwrapped.size() != angles.size())
        throw Error(Errc::invalid_config, "phase series and angle list differ in length");
    if (angles.size() < 3)
        throw Error(Errc::singular_system, "at least three codewords are needed");

    // Solve in centered, scaled angles t = (Theta - c) / s; the quadratic
    // least-squares fit is invariant to this change of basis.
    double c = 0.0;
    for (double a : angles)
        c += a;
    c /= static_cast<double>(angles.size());
    double s = 0.0;
    for (double a : angles)
        s = std::max(s, std::abs(a - c));
    if (!(s > 0.0))
        throw Error(Errc::singular_system, "all codeword angles coincide");

    NormalEquations3 ne;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double t = (angles[i] - c) / s;
        ne.add_row({t * t, t, 1.0}, series.unwrapped[i]);
    }
    const auto sol = ne.solve(1e-12);
    if (!sol)
        throw Error(Errc::singular_system, "moment matrix is rank deficient");
    const auto [p2, p1, p0] = *sol;

    // U = -(alpha Theta^2 + beta Theta + gamma).
    PspEstimate out;
    out.alpha = -p2 / (s * s);
    out.beta = 2.0 * c * p2 / (s * s) - p1 / s;
    out.gamma = -(p2 * c * c / (s * s) - p1 * c / s + p0);
    const double scale = std::abs(p0) + std::abs(p1) + std::abs(p2);
    if (std::abs(out.alpha) < 1e-12 || std::abs(p2) <= 1e-12 * scale)
        throw Error(Errc::zero_curvature, "fitted phase has no curvature");
    out.coords.b = -pi / (4.0 * out.alpha) + k_bar2;
    out.coords.omega = c - s * p1 / (2.0 * p2);
    return out;
}

} // namespace thbt
