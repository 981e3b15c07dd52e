// SPDX-License-Identifier: Apache-2.0
#include "thbt/refine1.hpp"

#include "thbt/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace thbt {

void validate(const Refine1Config& r1)
{
    if (!(r1.k_tilde1 < 0.0))
        throw Error(Errc::invalid_config, "k_tilde1 must be negative");
    if (!(r1.b_bar > 0.0))
        throw Error(Errc::invalid_config, "b_bar must be positive");
    if (!(r1.omega_bar > 0.0 && r1.omega_bar <= 1.0))
        throw Error(Errc::invalid_config, "omega_bar must lie in (0, 1]");
}

double theta_bar1(const ArrayConfig& cfg, const Refine1Config& r1)
{
    return (r1.b_bar - 2.0 * r1.k_tilde1) * cfg.n_t();
}

double m1_bound(const ArrayConfig& cfg, const Refine1Config& r1)
{
    const double step = theta_bar1(cfg, r1);
    if (!(step > 0.0))
        throw Error(Errc::invalid_config, "Theta1 must be positive");
    return (r1.omega_bar + cfg.n_t() * r1.k_tilde1) / step;
}

int design_m1(const ArrayConfig& cfg, const Refine1Config& r1)
{
    const double bound = m1_bound(cfg, r1);
    const int m1 = static_cast<int>(std::floor(bound)) + 1;
    return std::max(m1, 1);
}

double k_bar1(const Refine1Config& r1, int m)
{
    return (std::abs(m) % 2 == 0) ? r1.k_tilde1 : r1.b_bar - r1.k_tilde1;
}

Codebook1 build_codebook1(const ArrayConfig& cfg, const Refine1Config& r1, int m1)
{
    validate(r1);
    if (m1 < 1)
        throw Error(Errc::invalid_config, "M1 must be >= 1");
    Codebook1 book;
    book.m1 = m1;
    book.theta_bar1 = theta_bar1(cfg, r1);
    book.codewords.reserve(static_cast<std::size_t>(2 * m1 + 1));
    for (int m = -m1; m <= m1; ++m)
        book.codewords.push_back({m * book.theta_bar1, k_bar1(r1, m)});
    return book;
}

Codebook1 build_codebook1(const ArrayConfig& cfg, const Refine1Config& r1)
{
    validate(r1);
    return build_codebook1(cfg, r1, design_m1(cfg, r1));
}

Stage1Result train_stage1(BeamTrainer& trainer, const Codebook1& codebook)
{
    Stage1Result out;
    out.samples.reserve(codebook.size());
    double best = -1.0;
    for (int m = -codebook.m1; m <= codebook.m1; ++m) {
        const cplx y = trainer.probe(codebook.at(m));
        out.samples.push_back(y);
        if (std::abs(y) > best) {
            best = std::abs(y);
            out.m_bar = m;
        }
    }
    return out;
}

double PotentialRegion::half_width(double b) const
{
    return slope * (std::abs(b - pivot_k) + widening);
}

double PotentialRegion::max_half_width() const
{
    return std::max(half_width(0.0), half_width(b_max));
}

bool PotentialRegion::contains(SurrogateCoords p) const
{
    if (p.b < 0.0 || p.b > b_max)
        return false;
    return std::abs(p.omega - center_theta) <= half_width(p.b);
}

PotentialRegion region_update1(const ArrayConfig& cfg, const Refine1Config& r1, const Codebook1& codebook,
                               int m_bar)
{
    if (m_bar < -codebook.m1 || m_bar > codebook.m1)
        throw Error(Errc::invalid_config, "m_bar outside [-M1, M1]");
    return {m_bar * codebook.theta_bar1, k_bar1(r1, m_bar), static_cast<double>(cfg.n_t()), r1.b_bar, 0.0};
}

PotentialRegion extend_region(const ArrayConfig& cfg, const PotentialRegion& region)
{
    PotentialRegion out = region;
    const double nt = cfg.n_t();
    out.widening = region.widening + 1.0 / (nt * nt);
    return out;
}

} // namespace thbt
