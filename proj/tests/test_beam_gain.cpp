// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "thbt/beam_gain.hpp"
#include "thbt/error.hpp"
#include "thbt/refine2.hpp"

#include <doctest.h>

#include <algorithm>

using namespace thbt;

TEST_SUITE("beam-gain")
{
    const ArrayConfig kCfg(256, 0.005);

    TEST_CASE("exact gain against direct sum")
    {
        const BeamGainSample self = hfbg_exact(kCfg, {0.2, 3e-5}, {0.2, 3e-5});
        CHECK(self.value.real() == doctest::Approx(513.0).epsilon(1e-12));
        CHECK(std::abs(self.value.imag()) < 1e-9);

        Rng rng(21);
        for (int t = 0; t < 50; ++t) {
            const CodewordParams cw{rng.uniform(-0.8, 0.8), rng.uniform(-2e-4, 2e-4)};
            const SurrogateCoords tg{cw.theta + rng.uniform(-0.05, 0.05), rng.uniform(0.0, 1.3e-4)};
            const BeamGainSample s = hfbg_exact(kCfg, cw, tg);
            const cplx ref = oracle::gain_sum(256, cw.theta - tg.omega, tg.b - cw.k);
            CHECK(std::abs(s.value - ref) < 1e-9 * 513.0);
            CHECK(std::abs(s.magnitude - std::abs(s.value)) < 1e-12);
            // N_t gamma(target)^H gamma(codeword)
            const auto u = steering_surrogate(kCfg, {cw.theta, cw.k});
            const auto g = steering_surrogate(kCfg, tg);
            CHECK(std::abs(513.0 * inner(g, u) - s.value) < 1e-8);
            // swapping roles conjugates
            const BeamGainSample sw = hfbg_exact(kCfg, {tg.omega, tg.b}, {cw.theta, cw.k});
            CHECK(std::abs(sw.value - std::conj(s.value)) < 1e-9);
        }
    }

    TEST_CASE("magnitude symmetric about the codeword angle")
    {
        const CodewordParams cw{0.0, -6.09e-5};
        for (double b : {0.0, 3e-5, 1.2e-4})
            for (double d = 0.0; d <= 0.2; d += 0.0037)
                CHECK(std::abs(hfbg_exact(kCfg, cw, {d, b}).magnitude - hfbg_exact(kCfg, cw, {-d, b}).magnitude) <
                      1e-9);
    }

    TEST_CASE("translation property")
    {
        const CodewordParams base{0.1, -2e-5};
        const CodewordParams moved{0.35, 4e-5};
        Rng rng(22);
        for (int t = 0; t < 20; ++t) {
            const SurrogateCoords tg{rng.uniform(-0.5, 0.5), rng.uniform(0.0, 1.2e-4)};
            const cplx a = hfbg_exact(kCfg, moved, tg).value;
            const cplx b =
                hfbg_exact(kCfg, base, {tg.omega + (base.theta - moved.theta), tg.b + (base.k - moved.k)}).value;
            CHECK(std::abs(a - b) < 1e-9);
        }
    }

    TEST_CASE("stationary point")
    {
        CHECK(stationary_point({0.3, 1e-5}, {0.3, 5e-5}) == 0.0);
        CHECK(stationary_point({0.0, 0.0}, {0.01, 1e-4}) == doctest::Approx(50.0));
        CHECK_THROWS_AS(stationary_point({0.0, 1e-5}, {0.1, 1e-5}), Error);

        Rng rng(23);
        for (int t = 0; t < 500; ++t) {
            const CodewordParams cw{rng.uniform(-0.5, 0.5), rng.uniform(-1e-4, 1e-4)};
            const SurrogateCoords tg{cw.theta + rng.uniform(-0.2, 0.2), rng.uniform(0.0, 1.2e-4)};
            const double z0 = stationary_point(cw, tg);
            CHECK((std::abs(z0) <= 513.0 / 2.0) == coverage_contains(CoverageRegion::of(kCfg, cw), tg));
        }
    }

    TEST_CASE("PSP gain")
    {
        const CodewordParams cw{0.0, -6.09e-5};
        const BeamGainSample in = hfbg_psp(kCfg, cw, {0.01, 0.0});
        CHECK(in.magnitude == doctest::Approx(1.0 / std::sqrt(6.09e-5)).epsilon(1e-12));
        CHECK(in.magnitude == doctest::Approx(128.2).epsilon(1e-3));
        CHECK(hfbg_psp(kCfg, cw, {0.2, 0.0}).magnitude == 0.0);
        REQUIRE(in.unwrapped_phase.has_value());
        CHECK(*in.unwrapped_phase ==
              doctest::Approx(oracle::pi * 0.01 * 0.01 / (4.0 * -6.09e-5) + oracle::pi / 4.0).epsilon(1e-12));
        CHECK(std::abs(std::arg(in.value) - std::remainder(*in.unwrapped_phase, 2.0 * oracle::pi)) < 1e-9);

        // Interior points at least ACW/8 from the boundary: magnitude within 20%.
        // Sampled along b with the codeword of the paper's coverage figure.
        double worst = 0.0;
        for (double b = 0.0; b <= 1.22e-4; b += 1.22e-4 / 20) {
            const CoverageRegion region = CoverageRegion::of(kCfg, cw);
            const double half = acw(region, b) / 2.0;
            for (double f = -0.75; f <= 0.75; f += 0.05) {
                const SurrogateCoords tg{f * half, b};
                const double e = hfbg_exact(kCfg, cw, tg).magnitude;
                const double p = hfbg_psp(kCfg, cw, tg).magnitude;
                worst = std::max(worst, std::abs(e - p) / p);
            }
        }
        CHECK(worst <= 0.2);
    }

    TEST_CASE("PSP phase tracks the exact phase along the second-stage sweep")
    {
        // Codewords (m * 2/N_t, k2) toward the path (0.05, 4.9782e-5).
        const double k2 = -2.475675864950374e-4;
        const SurrogateCoords tg{0.05, 4.9782e-5};
        std::vector<double> exact, approx;
        for (int m = -8; m <= 8; ++m) {
            const CodewordParams cw{m * 2.0 / 513.0, k2};
            exact.push_back(std::arg(std::conj(hfbg_exact(kCfg, cw, tg).value)));
            approx.push_back(-*hfbg_psp(kCfg, cw, tg).unwrapped_phase);
        }
        const PhaseSeries u = unwrap(exact, approx.front());
        double mean = 0.0;
        for (std::size_t i = 0; i < approx.size(); ++i)
            mean += std::abs(u.unwrapped[i] - approx[i]);
        mean /= static_cast<double>(approx.size());
        CHECK(mean <= 0.3);
    }

    TEST_CASE("coverage region")
    {
        const CoverageRegion r = CoverageRegion::of(kCfg, {0.1, -6.09e-5});
        CHECK(acw(r, -6.09e-5) == 0.0);
        CHECK(acw(r, 0.0) == doctest::Approx(0.0625).epsilon(1e-3));
        const double edge = 513.0 * 6.09e-5;
        CHECK(coverage_contains(r, {0.1 + edge * (1 - 1e-12), 0.0}));
        CHECK(coverage_contains(r, {0.1 - edge * (1 - 1e-12), 0.0}));
        CHECK_FALSE(coverage_contains(r, {0.1 + edge * 1.0001, 0.0}));
        CHECK(coverage_contains(r, {0.1, -6.09e-5}));
    }

    TEST_CASE("Fresnel integrals against quadrature")
    {
        const FresnelCS zero = fresnel(0.0);
        CHECK(zero.c == 0.0);
        CHECK(zero.s == 0.0);
        for (double x : {0.1, 0.5, 1.0, 1.4, 1.5, 1.6, 2.0, 3.3, 5.0, 8.0}) {
            const int panels = 2 * static_cast<int>(std::ceil(x * x * 400.0)) + 200;
            const double c = oracle::simpson([](double z) { return std::cos(oracle::pi * z * z / 2.0); }, 0.0, x, panels);
            const double s = oracle::simpson([](double z) { return std::sin(oracle::pi * z * z / 2.0); }, 0.0, x, panels);
            const FresnelCS f = fresnel(x);
            CHECK(std::abs(f.c - c) < 1e-8);
            CHECK(std::abs(f.s - s) < 1e-8);
            const FresnelCS g = fresnel(-x);
            CHECK(g.c == -f.c);
            CHECK(g.s == -f.s);
        }
        const FresnelCS big = fresnel(50.0);
        CHECK(std::abs(big.c - 0.5) < 0.01);
        CHECK(std::abs(big.s - 0.5) < 0.01);
    }

    TEST_CASE("distance coherence")
    {
        CHECK(distance_coherence(kCfg, 2.28e-5) == doctest::Approx(0.35).epsilon(0.02 / 0.35));
        // Integral form against a direct sum of the normalized gain.
        for (double k : {1e-6, 5e-6, 2.28e-5, 5e-5}) {
            const double direct = std::abs(oracle::gain_sum(256, 0.0, k)) / 513.0;
            CHECK(distance_coherence(kCfg, k) == doctest::Approx(direct).epsilon(0.02));
        }
        CHECK(distance_coherence(kCfg, 1e-12) == doctest::Approx(1.0).epsilon(0.01));
        double prev = 2.0;
        for (double k = 1e-6; k <= 2.78e-5; k += 2.5e-7) {
            const double rho = distance_coherence(kCfg, k);
            CHECK(rho < prev);
            prev = rho;
        }
    }

    TEST_CASE("invert coherence")
    {
        CHECK(invert_coherence(kCfg, 0.35) == doctest::Approx(6.0 / (513.0 * 513.0)).epsilon(0.03));
        for (double k : {2e-6, 1e-5, 2.28e-5}) {
            const double back = invert_coherence(kCfg, distance_coherence(kCfg, k));
            CHECK(std::abs(back - k) < 1e-8);
        }
        const double small = invert_coherence(kCfg, 0.99);
        CHECK(distance_coherence(kCfg, small) >= 0.99 - 1e-9);
        CHECK_THROWS_AS(invert_coherence(kCfg, 0.1), Error);
        CHECK_THROWS_AS(invert_coherence(kCfg, 1.5), Error);
    }
}
