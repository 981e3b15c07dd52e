// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "thbt/error.hpp"
#include "thbt/harness.hpp"
#include "thbt/refine3.hpp"

#include <doctest.h>

#include <algorithm>

using namespace thbt;

namespace {

const ArrayConfig kCfg(256, 0.005);
const double kNt = 513.0;
const double kThetaN = 2.0 / kNt;
const double kKn = 6.0 / (kNt * kNt);

Channel surrogate_channel(SurrogateCoords p)
{
    const SteeringVector g = steering_surrogate(kCfg, p);
    return Channel(kCfg.n_half(), std::vector<cplx>(g.entries().begin(), g.entries().end()));
}

const GaussianFit& reference_fit()
{
    static const GaussianFit fit = fit_gaussian(kCfg, {1.0 / kNt, 3.0 / (kNt * kNt)});
    return fit;
}

NeighborSearchState converged_state(std::array<double, 5> mags)
{
    NeighborSearchState st;
    st.start = {0.2, 3e-5};
    st.step_angle = kThetaN;
    st.step_k = kKn;
    st.groups_run = 1;
    st.last_winner = 5;
    st.success = true;
    for (std::size_t i = 0; i < 5; ++i)
        st.last_group[i] = cplx(mags[i], 0.0);
    return st;
}

} // namespace

TEST_SUITE("refine3")
{
    TEST_CASE("neighbor search converges next to the path")
    {
        const SurrogateCoords truth{0.31, 4e-5};
        BeamTrainer trainer(kCfg, surrogate_channel(truth), 0.0, nullptr);
        const NeighborSearchState st =
            neighbor_search(trainer, {truth.omega + 0.8 * kThetaN, truth.b - 0.7 * kKn}, {kThetaN, kKn, 3});
        CHECK(st.success);
        CHECK(st.last_winner == 5);
        CHECK(std::abs(st.center().theta - truth.omega) <= kThetaN / 2);
        CHECK(std::abs(st.center().k - truth.b) <= kKn / 2);
        CHECK(trainer.probes() <= 11);
        // Converged center is no weaker than its four neighbors.
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(*st.last_group[4]) >= std::abs(*st.last_group[i]));
    }

    TEST_CASE("neighbor search budget")
    {
        // Small steps, path four steps away in angle: every group moves, the search gives up.
        const SurrogateCoords truth{0.1, 5e-5};
        const double fine = kThetaN / 8;
        BeamTrainer trainer(kCfg, surrogate_channel(truth), 0.0, nullptr);
        const NeighborSearchState st = neighbor_search(trainer, {truth.omega - 4 * fine, truth.b}, {fine, kKn, 3});
        CHECK_FALSE(st.success);
        CHECK(st.groups_run == 3);
        CHECK(trainer.probes() == 11);
        CHECK(st.last_winner == 2);
        CHECK(st.cache.size() == 11);

        Rng rng(51);
        for (int t = 0; t < 50; ++t) {
            const SurrogateCoords p{rng.uniform(-0.8, 0.8), rng.uniform(0.0, 1.2e-4)};
            Rng noise(600 + t);
            BeamTrainer tr(kCfg, surrogate_channel(p), 0.05, &noise);
            const auto s = neighbor_search(
                tr, {p.omega + rng.uniform(-3, 3) * kThetaN, p.b + rng.uniform(-3, 3) * kKn}, {kThetaN, kKn, 3});
            CHECK(tr.probes() <= 11);
            CHECK(tr.probes() == s.cache.size());
        }
        CHECK_THROWS_AS(neighbor_search(trainer, {0, 0}, {kThetaN, kKn, 0}), Error);
    }

    TEST_CASE("narrowing picks the stronger halves")
    {
        const NeighborSearchState a = converged_state({1.0, 2.0, 3.0, 1.5, 4.0});
        const NarrowedRegion ra = narrow_regions(a, kThetaN / 2, kKn / 2);
        CHECK(ra.omega_lo == a.center().theta);
        CHECK(ra.omega_hi == doctest::Approx(a.center().theta + kThetaN / 2));
        CHECK(ra.b_lo == doctest::Approx(a.center().k - kKn / 2));
        CHECK(ra.b_hi == a.center().k);

        const NeighborSearchState tie = converged_state({2.0, 2.0, 1.0, 1.0, 4.0});
        const NarrowedRegion rt = narrow_regions(tie, kThetaN / 2, kKn / 2);
        CHECK(rt.omega_lo == tie.center().theta);
        CHECK(rt.b_lo == tie.center().k);

        const NeighborSearchState low = converged_state({3.0, 2.0, 3.0, 1.0, 4.0});
        const NarrowedRegion rl = narrow_regions(low, kThetaN / 2, kKn / 2);
        CHECK(rl.omega_hi == low.center().theta);
        CHECK(rl.b_hi == low.center().k);

        NeighborSearchState failed = a;
        failed.success = false;
        CHECK_THROWS_AS(narrow_regions(failed, 1e-3, 1e-6), Error);
        NeighborSearchState partial = a;
        partial.last_group[2].reset();
        try {
            narrow_regions(partial, 1e-3, 1e-6);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::missing_measurements);
        }
    }

    TEST_CASE("searches started within one step converge")
    {
        Rng rng(52);
        int converged = 0;
        for (int t = 0; t < 400; ++t) {
            const SurrogateCoords p{rng.uniform(-0.8, 0.8), rng.uniform(0.0, 1.2e-4)};
            BeamTrainer tr(kCfg, surrogate_channel(p), 0.0, nullptr);
            const auto s = neighbor_search(
                tr, {p.omega + rng.uniform(-1, 1) * kThetaN, p.b + rng.uniform(-1, 1) * kKn}, {kThetaN, kKn, 3});
            converged += s.success && s.last_winner == 5;
        }
        CHECK(converged == 400);
    }

    TEST_CASE("noiseless path lies in the selected quadrant")
    {
        // Started from the second-stage estimate. Truth sitting on a split
        // line may fall a hair outside, hence the 5% margin.
        ExperimentConfig ec;
        ec.scenario.gain_std = {1.0};
        ec.thbt = default_thbt(ec.array, ec.scenario);
        const ExperimentContext ctx(ec);
        const double ma = 0.05 * kThetaN / 2, mk = 0.05 * kKn / 2;
        for (bool ml : {true, false}) {
            int inside = 0, narrowed = 0;
            for (int t = 0; t < 300; ++t) {
                const ChannelDraw d = sample_channel(kCfg, 4000 + t, ec.scenario);
                const SurrogateCoords p = to_surrogate(d.paths[0], kCfg.wavelength());
                BeamTrainer trainer(kCfg, d.channel, 0.0, nullptr);
                const ThbtOutcome o = run_thbt(ctx, ml, trainer);
                if (!o.narrowed)
                    continue;
                ++narrowed;
                const NarrowedRegion& r = *o.narrowed;
                inside += p.omega >= r.omega_lo - ma && p.omega <= r.omega_hi + ma && p.b >= r.b_lo - mk &&
                          p.b <= r.b_hi + mk;
            }
            CHECK(narrowed >= 297);
            CHECK(inside >= 0.99 * narrowed);
        }
    }

    TEST_CASE("least squares recovers a model-matched path")
    {
        GaussianFit fit = reference_fit();
        const SurrogateCoords truth{0.2031, 3.3e-5};
        for (int m3 : {2, 3, 5}) {
            std::vector<double> angles, ks, mags;
            for (int i = 0; i < m3; ++i) {
                angles.push_back(0.2025 + i * 0.001 / (m3 - 1));
                ks.push_back(3.25e-5 + i * 1.1e-5 / (m3 - 1));
            }
            for (double a : angles)
                for (double k : ks)
                    mags.push_back(0.37 * fit.evaluate({a, k}, truth));
            const GaEstimate e = ga_solve(angles, ks, mags, fit);
            CHECK(std::abs(e.coords.omega - truth.omega) < 1e-9);
            CHECK(std::abs(e.coords.b - truth.b) < 1e-9);

            std::vector<double> scaled(mags);
            for (double& v : scaled)
                v *= 41.0;
            const GaEstimate es = ga_solve(angles, ks, scaled, fit);
            CHECK(std::abs(es.coords.omega - e.coords.omega) < 1e-12);
            CHECK(std::abs(es.coords.b - e.coords.b) < 1e-15);
        }

        const std::vector<double> same{0.1, 0.1};
        const std::vector<double> ks{1e-5, 2e-5};
        const std::vector<double> mags{1.0, 0.5, 1.0, 0.5};
        try {
            ga_solve(same, ks, mags, fit);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::singular_normal_matrix);
        }
        const std::vector<double> zeros(4, 0.0);
        CHECK_THROWS_AS(ga_solve(std::vector<double>{0.1, 0.2}, ks, zeros, fit), Error);
    }

    TEST_CASE("grid probing reuses the center")
    {
        const SurrogateCoords truth{-0.42, 7e-5};
        BeamTrainer trainer(kCfg, surrogate_channel(truth), 0.0, nullptr);
        const auto st = neighbor_search(trainer, {truth.omega + 0.4 * kThetaN, truth.b + 0.3 * kKn}, {kThetaN, kKn, 3});
        REQUIRE(st.success);
        const std::size_t before = trainer.probes();
        const NarrowedRegion r = narrow_regions(st, kThetaN / 2, kKn / 2);
        const GaEstimate e = ga_estimate(trainer, st, r, 2, reference_fit());
        CHECK(e.new_probes == 3);
        CHECK(trainer.probes() - before == 3);
        CHECK(trainer.probes() <= 3 * 3 + 2 + 3);
        CHECK(std::abs(e.coords.omega - truth.omega) < 2e-4);
        CHECK(std::abs(e.coords.b - truth.b) < 5e-7);

        BeamTrainer t3(kCfg, surrogate_channel(truth), 0.0, nullptr);
        const auto s3 = neighbor_search(t3, {truth.omega + 0.4 * kThetaN, truth.b + 0.3 * kKn}, {kThetaN, kKn, 3});
        const std::size_t b3 = t3.probes();
        CHECK(ga_estimate(t3, s3, narrow_regions(s3, kThetaN / 2, kKn / 2), 3, reference_fit()).new_probes == 8);
        CHECK(t3.probes() - b3 == 8);
        CHECK_THROWS_AS(ga_estimate(t3, s3, r, 1, reference_fit()), Error);
    }

    TEST_CASE("main-lobe Gaussian fit")
    {
        const GaussianFit& fit = reference_fit();
        MESSAGE("amplitude " << fit.amplitude << " sigma_angle*Nt " << fit.sigma_angle * kNt << " sigma_k*Nt^2 "
                             << fit.sigma_k * kNt * kNt << " max " << fit.max_residual << " mean "
                             << fit.mean_residual);
        CHECK(fit.max_residual <= 0.05);
        CHECK(fit.mean_residual <= 0.01);
        CHECK(fit.peak_gain == doctest::Approx(513.0).epsilon(1e-12));
        CHECK(fit.amplitude == doctest::Approx(513.0).epsilon(0.02));
        CHECK(fit.evaluate({0.0, 0.0}, {0.0, 0.0}) == fit.amplitude);

        // Translation: any codeword equals the reference at shifted coordinates.
        const CodewordParams cw{0.37, -2.5e-5};
        for (double d : {-1e-3, 0.0, 2e-3})
            for (double e : {-1e-5, 3e-6}) {
                const SurrogateCoords tg{cw.theta + d, cw.k + e};
                CHECK(std::abs(fit.evaluate(cw, tg) - fit.evaluate({0.0, 0.0}, {d, e})) < 1e-12 * fit.amplitude);
            }

        FitOptions strict;
        strict.max_residual_tol = 1e-6;
        CHECK_THROWS_AS(fit_gaussian(kCfg, {1.0 / kNt, 3.0 / (kNt * kNt)}, strict), Error);
        CHECK_THROWS_AS(fit_gaussian(kCfg, {0.0, 1e-6}), Error);
    }

    TEST_CASE("synthetic Gaussian recovery")
    {
        std::vector<double> x, y, v;
        for (int i = 0; i < 30; ++i)
            for (int j = 0; j < 30; ++j) {
                x.push_back(-1.0 + 2.0 * i / 29);
                y.push_back(-1.0 + 2.0 * j / 29);
                v.push_back(2.5 * std::exp(-x.back() * x.back() / (2 * 0.6 * 0.6) - y.back() * y.back() / (2 * 0.9 * 0.9)));
            }
        const GaussianFitResult r = fit_centered_gaussian(x, y, v, {1.0, 1.5, 0.4});
        CHECK(std::abs(r.params.amplitude - 2.5) < 1e-6);
        CHECK(std::abs(r.params.sigma_x - 0.6) < 1e-6);
        CHECK(std::abs(r.params.sigma_y - 0.9) < 1e-6);
    }

    TEST_CASE("distance recovery")
    {
        const FinalEstimate f = finalize({0.0, 1.22e-4}, 0.005, StageTag::ga);
        CHECK(f.range_m == doctest::Approx(10.25).epsilon(1e-3));
        CHECK(f.stage == StageTag::ga);
        const FinalEstimate g = finalize({0.3, 0.0}, 0.005, StageTag::neighbor_fallback);
        CHECK(std::isinf(g.range_m));
        const FinalEstimate h = finalize({0.3, -2e-6}, 0.005, StageTag::ga);
        CHECK(std::isinf(h.range_m));
        const PathParams p{{1, 0}, 0.41, 23.0};
        const SurrogateCoords s = to_surrogate(p, 0.005);
        const FinalEstimate exact = finalize(s, 0.005, StageTag::ga);
        CHECK(exact.range_m == doctest::Approx(23.0).epsilon(1e-12));
        CHECK(metric_position(p, exact.omega, exact.range_m) < 1e-9);
        CHECK(to_string(StageTag::neighbor_fallback) == "neighbor-fallback");
        CHECK(to_string(StageTag::ga) == "ga");
    }

    TEST_CASE("design example pipeline")
    {
        ExperimentConfig ec;
        ec.thbt = default_thbt(ec.array, ec.scenario);
        ec.methods = {Method::thbt_ml, Method::thbt_psp};
        const ExperimentContext ctx(ec);
        for (bool ml : {true, false}) {
            BeamTrainer trainer(kCfg, surrogate_channel({0.05, 4.9782e-5}), 0.0, nullptr);
            const ThbtOutcome o = run_thbt(ctx, ml, trainer);
            CHECK(o.final_estimate.stage == StageTag::ga);
            CHECK(std::abs(o.final_estimate.omega - 0.05) <= 2e-4);
            CHECK(std::abs(o.final_estimate.b - 4.9782e-5) <= 5e-7);
            CHECK(std::abs(o.final_estimate.range_m - 25.05) <= 0.2);
            CHECK(o.overhead <= 46);
        }
    }

    TEST_CASE("third stage refines the second")
    {
        ExperimentConfig ec;
        ec.scenario.gain_std = {1.0};
        ec.thbt = default_thbt(ec.array, ec.scenario);
        const ExperimentContext ctx(ec);
        for (bool ml : {true, false}) {
            int better = 0, strict = 0;
            const int trials = 200;
            for (int t = 0; t < trials; ++t) {
                const ChannelDraw d = sample_channel(kCfg, 7000 + t, ec.scenario);
                const SurrogateCoords s = to_surrogate(d.paths[0], kCfg.wavelength());
                BeamTrainer trainer(kCfg, d.channel, 0.0, nullptr);
                const ThbtOutcome o = run_thbt(ctx, ml, trainer);
                // Second-stage estimates already inside the Gaussian model's
                // bias floor (5% of a step) count as refined.
                const double ea = std::abs(o.final_estimate.omega - s.omega);
                const double eb = std::abs(o.final_estimate.b - s.b);
                strict += ea <= std::abs(o.stage2_estimate.omega - s.omega) && eb <= std::abs(o.stage2_estimate.b - s.b);
                better += (ea <= std::abs(o.stage2_estimate.omega - s.omega) || ea <= 0.05 * kThetaN) &&
                          (eb <= std::abs(o.stage2_estimate.b - s.b) || eb <= 0.05 * kKn);
            }
            MESSAGE(std::string(ml ? "ML" : "PSP") << " refined in " << better << " of " << trials << ", strictly in " << strict);
            CHECK(better >= 0.95 * trials);
        }
    }
}
