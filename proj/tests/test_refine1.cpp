// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "thbt/error.hpp"
#include "thbt/refine1.hpp"

#include <doctest.h>

using namespace thbt;

namespace {

const ArrayConfig kCfg(256, 0.005);
const Refine1Config kR1{0.8660254037844386, 1.22e-4, -6.09e-5};

// Codeword m of the first stage, written out from its definition.
double cell_theta(int m, double step) { return m * step; }
double cell_k(int m) { return (std::abs(m) % 2 == 0) ? kR1.k_tilde1 : kR1.b_bar - kR1.k_tilde1; }

bool in_cell(int m, double step, double omega, double b)
{
    return std::abs(omega - cell_theta(m, step)) <= 513.0 * std::abs(b - cell_k(m));
}

} // namespace

TEST_SUITE("refine1")
{
    TEST_CASE("first-stage size")
    {
        CHECK(m1_bound(kCfg, kR1) == doctest::Approx(6.68).epsilon(0.02 / 6.68));
        CHECK(design_m1(kCfg, kR1) == 7);
        CHECK(theta_bar1(kCfg, kR1) == doctest::Approx((1.22e-4 + 2 * 6.09e-5) * 513.0));

        Refine1Config shrunk = kR1;
        shrunk.omega_bar = theta_bar1(kCfg, kR1) * 1.5 - 513.0 * kR1.k_tilde1;
        CHECK(design_m1(kCfg, shrunk) == 2);

        // Dyadic numbers make the bound exactly 1.
        const ArrayConfig tiny(2, 0.005);
        const Refine1Config exact{0.78125, 0.0625, -0.03125};
        REQUIRE(m1_bound(tiny, exact) == 1.0);
        CHECK(design_m1(tiny, exact) == 2);

        Refine1Config bad = kR1;
        bad.k_tilde1 = 1e-5;
        CHECK_THROWS_AS(validate(bad), Error);
        bad = kR1;
        bad.b_bar = 0.0;
        CHECK_THROWS_AS(validate(bad), Error);
        bad = kR1;
        bad.omega_bar = 1.2;
        CHECK_THROWS_AS(validate(bad), Error);
    }

    TEST_CASE("codebook")
    {
        const Codebook1 cb = build_codebook1(kCfg, kR1);
        CHECK(cb.size() == 15);
        CHECK(cb.at(0).theta == 0.0);
        CHECK(cb.at(0).k == kR1.k_tilde1);
        CHECK(cb.at(1).theta == doctest::Approx(0.12507).epsilon(1e-4));
        CHECK(cb.at(1).k == doctest::Approx(1.829e-4).epsilon(1e-4));
        CHECK(cb.at(-3).k == cb.at(3).k);
        CHECK(cb.at(-2).theta == -cb.at(2).theta);
        CHECK_THROWS_AS(build_codebook1(kCfg, kR1, 0), Error);
    }

    TEST_CASE("coverages tile the initial region")
    {
        const double step = theta_bar1(kCfg, kR1);
        const int grid = 200;
        int uncovered = 0;
        int doubled = 0;
        int doubled_off_boundary = 0;
        for (int i = 0; i < grid; ++i) {
            const double omega = -kR1.omega_bar + 2.0 * kR1.omega_bar * (i + 0.5) / grid;
            for (int j = 0; j < grid; ++j) {
                const double b = kR1.b_bar * (j + 0.5) / grid;
                int count = 0;
                for (int m = -7; m <= 7; ++m) {
                    if (!in_cell(m, step, omega, b))
                        continue;
                    ++count;
                    const double slack = 513.0 * std::abs(b - cell_k(m)) - std::abs(omega - cell_theta(m, step));
                    if (count > 1 && slack > 1e-9)
                        ++doubled_off_boundary;
                }
                uncovered += count == 0;
                doubled += count > 1;
            }
        }
        CHECK(uncovered == 0);
        CHECK(doubled_off_boundary == 0);
        MESSAGE("grid points on shared boundaries: " << doubled);

        // Adjacent boundaries coincide at every b.
        for (int m = -7; m < 7; ++m)
            for (double b = 0.0; b <= kR1.b_bar; b += kR1.b_bar / 50) {
                const double right = cell_theta(m, step) + 513.0 * std::abs(b - cell_k(m));
                const double left = cell_theta(m + 1, step) - 513.0 * std::abs(b - cell_k(m + 1));
                CHECK(std::abs(right - left) < 1e-12);
            }
    }

    TEST_CASE("training picks the cell holding the path")
    {
        const Codebook1 cb = build_codebook1(kCfg, kR1);
        const double step = cb.theta_bar1;

        // Center of cell 3 at b = b_bar / 2.
        {
            const PathParams p{{1, 0}, 3 * step, kCfg.wavelength() * (1 - 9 * step * step) / (4 * kR1.b_bar / 2)};
            const Channel h = assemble_channel(kCfg, std::vector<PathParams>{p});
            BeamTrainer trainer(kCfg, h, 0.0, nullptr);
            const Stage1Result r = train_stage1(trainer, cb);
            CHECK(r.m_bar == 3);
            CHECK(trainer.probes() == 15);
            CHECK(r.samples.size() == 15);
        }

        Rng rng(31);
        Scenario los;
        los.gain_std = {1.0};
        int hits = 0, extended = 0;
        const int draws = 1000;
        for (int t = 0; t < draws; ++t) {
            const ChannelDraw d = sample_channel(kCfg, rng, los);
            BeamTrainer trainer(kCfg, d.channel, 0.0, nullptr);
            const int m = train_stage1(trainer, cb).m_bar;
            const SurrogateCoords s = to_surrogate(d.paths[0], kCfg.wavelength());
            hits += in_cell(m, step, s.omega, s.b);
            extended += extend_region(kCfg, region_update1(kCfg, kR1, cb, m)).contains(s);
        }
        MESSAGE("exact cell " << hits << ", extended region " << extended);
        CHECK(hits >= 970);
        CHECK(extended >= 985);
    }

    TEST_CASE("ties go to the smallest index")
    {
        const Codebook1 cb = build_codebook1(kCfg, kR1);
        const Channel zero(256, std::vector<cplx>(513, cplx(0.0, 0.0)));
        BeamTrainer trainer(kCfg, zero, 0.0, nullptr);
        CHECK(train_stage1(trainer, cb).m_bar == -7);
    }

    TEST_CASE("noise statistics of the trainer")
    {
        const Channel zero(256, std::vector<cplx>(513, cplx(0.0, 0.0)));
        Rng rng(32);
        BeamTrainer trainer(kCfg, zero, 0.25, &rng);
        double power = 0.0;
        cplx mean{0.0, 0.0};
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const cplx y = trainer.probe({0.0, 0.0});
            power += std::norm(y);
            mean += y;
        }
        CHECK(power / n == doctest::Approx(0.25).epsilon(0.03));
        CHECK(std::abs(mean / static_cast<double>(n)) < 0.02);
        CHECK(trainer.probes() == static_cast<std::size_t>(n));
        CHECK(trainer.log().back().index == static_cast<std::size_t>(n - 1));
    }

    TEST_CASE("potential region")
    {
        const Codebook1 cb = build_codebook1(kCfg, kR1);
        const PotentialRegion base = region_update1(kCfg, kR1, cb, 0);
        const PotentialRegion ext = extend_region(kCfg, base);
        CHECK(base.contains({0.05, 4.9782e-5}));
        CHECK(ext.widening == doctest::Approx(1.0 / (513.0 * 513.0)));
        CHECK_THROWS_AS(region_update1(kCfg, kR1, cb, 8), Error);

        int extra = 0;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 50; ++j) {
                const SurrogateCoords p{-0.15 + 0.3 * i / 200.0, kR1.b_bar * j / 50.0};
                if (base.contains(p))
                    CHECK(ext.contains(p));
                extra += ext.contains(p) && !base.contains(p);
            }
        CHECK(extra > 0);
        CHECK_FALSE(base.contains({0.0, -1e-6}));
        CHECK_FALSE(base.contains({0.0, kR1.b_bar * 1.01}));
    }
}
