// SPDX-License-Identifier: Apache-2.0
#include "thbt/harness.hpp"

#include "thbt/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace thbt {

using std::numbers::pi;

std::string_view to_string(Method method) noexcept
{
    switch (method) {
    case Method::thbt_ml: return "thbt-ml";
    case Method::thbt_psp: return "thbt-psp";
    case Method::hfbs: return "hfbs";
    case Method::upper_bound: return "upper-bound";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    for (Method m : kAllMethods)
        if (to_string(m) == name)
            return m;
    throw Error(Errc::invalid_config, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(SnrReference ref) noexcept
{
    return ref == SnrReference::per_antenna ? "per-antenna" : "unit";
}

SnrReference parse_snr_reference(std::string_view name)
{
    if (name == "per-antenna")
        return SnrReference::per_antenna;
    if (name == "unit")
        return SnrReference::unit;
    throw Error(Errc::invalid_config, "unknown snr reference '" + std::string(name) + "'");
}

double scenario_b_bar(const ArrayConfig& cfg, const Scenario& scenario)
{
    const double r_min = std::max(scenario.distance_range.first, cfg.fresnel_bound());
    return cfg.wavelength() / (4.0 * r_min);
}

ThbtParams default_thbt(const ArrayConfig& cfg, const Scenario& scenario)
{
    const double nt = cfg.n_t();
    ThbtParams p;
    p.r1.omega_bar = std::max(std::abs(scenario.angle_range.first), std::abs(scenario.angle_range.second));
    p.r1.b_bar = scenario_b_bar(cfg, scenario);
    p.r1.k_tilde1 = -6.09e-5;
    p.r2.m2 = 8;
    p.r2.theta_bar2 = 2.0 / nt;
    p.mn = 3;
    p.m3 = 2;
    p.theta_n = 2.0 / nt;
    p.k_n = 6.0 / (nt * nt);
    return p;
}

void validate(const ExperimentConfig& config)
{
    validate_scenario(config.array, config.scenario);
    validate(config.thbt.r1);
    validate(config.thbt.r2);
    const auto& t = config.thbt;
    if (t.m1 < 0)
        throw Error(Errc::invalid_config, "M1 must be >= 0 (0 selects the design value)");
    if (t.mn < 1)
        throw Error(Errc::invalid_config, "M_n must be >= 1");
    if (t.m3 < 2)
        throw Error(Errc::invalid_config, "M3 must be >= 2");
    if (!(t.theta_n > 0.0) || !(t.k_n > 0.0))
        throw Error(Errc::invalid_config, "neighbor steps must be positive");
    if (t.ml_grid.n_omega < 2 || t.ml_grid.n_b < 2)
        throw Error(Errc::invalid_config, "ML grid needs at least 2 points per axis");
    if (config.hfbs.p < 2 || config.hfbs.q < 2)
        throw Error(Errc::invalid_config, "HFBS grid needs P >= 2 and Q >= 2");
    if (config.snr_db.empty())
        throw Error(Errc::invalid_config, "snr list is empty");
    for (double s : config.snr_db)
        if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
            throw Error(Errc::invalid_config, "SNR values must be finite or +inf");
    if (config.trials < 1)
        throw Error(Errc::invalid_config, "trials must be >= 1");
    if (config.methods.empty())
        throw Error(Errc::invalid_config, "no methods selected");
    if (config.threads < 1)
        throw Error(Errc::invalid_config, "threads must be >= 1");
    for (double e : config.cdf_grid)
        if (!(e >= 0.0) || !std::isfinite(e))
            throw Error(Errc::invalid_config, "CDF grid values must be finite and >= 0");
    if (!std::is_sorted(config.cdf_grid.begin(), config.cdf_grid.end()))
        throw Error(Errc::invalid_config, "CDF grid must be ascending");
}

double noise_variance(double snr_db)
{
    if (snr_db == std::numeric_limits<double>::infinity())
        return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

double noise_variance(const ExperimentConfig& config, double snr_db)
{
    const double v = noise_variance(snr_db);
    return config.snr_reference == SnrReference::per_antenna ? v / config.array.n_t() : v;
}

FitDomain fit_domain(const ThbtParams& params) { return {params.theta_n / 2.0, params.k_n / 2.0}; }

ExperimentContext::ExperimentContext(const ExperimentConfig& config, std::optional<GaussianFit> fit)
    : config_(config)
{
    validate(config_);
    const auto& t = config_.thbt;
    codebook1_ = t.m1 > 0 ? build_codebook1(config_.array, t.r1, t.m1) : build_codebook1(config_.array, t.r1);
    fit_ = fit ? *fit : fit_gaussian(config_.array, fit_domain(t), t.fit);

    const auto& hp = config_.hfbs;
    const auto [lo, hi] = config_.scenario.angle_range;
    for (int p = 0; p < hp.p; ++p)
        hfbs_omega_.push_back(lo + (hi - lo) * p / (hp.p - 1));
    for (int q = 0; q < hp.q; ++q)
        hfbs_b_.push_back(t.r1.b_bar * q / (hp.q - 1));
}

const MlSearchTable& ExperimentContext::ml_table(int parity) const
{
    const std::size_t i = static_cast<std::size_t>(parity & 1);
    std::call_once(ml_once_[i], [&] {
        ml_[i] = std::make_unique<MlSearchTable>(config_.array, config_.thbt.r1, config_.thbt.r2, parity & 1,
                                                 config_.thbt.ml_grid);
    });
    return *ml_[i];
}

ThbtOutcome run_thbt(const ExperimentContext& ctx, bool use_ml, BeamTrainer& trainer)
{
    const ArrayConfig& cfg = ctx.array();
    const ThbtParams& t = ctx.config().thbt;
    const std::size_t start_probes = trainer.probes();

    ThbtOutcome out;
    out.stage1 = train_stage1(trainer, ctx.codebook1());
    const int m_bar = out.stage1.m_bar;
    const PotentialRegion region = region_update1(cfg, t.r1, ctx.codebook1(), m_bar);

    out.codebook2 = build_codebook2(cfg, t.r1, t.r2, ctx.codebook1(), m_bar);
    out.stage2_samples = train_stage2(trainer, out.codebook2);

    out.phases = unwrap_phases(out.stage2_samples);
    if (use_ml) {
        out.stage2_estimate = ctx.ml_table(std::abs(m_bar) & 1).estimate(out.codebook2, out.stage2_samples).coords;
    } else {
        try {
            out.stage2_estimate = estimate_psp(*out.phases, out.codebook2.angles(), out.codebook2.k_bar2).coords;
        } catch (const Error&) {
            out.stage2_fallback = true;
            out.stage2_estimate = {region.center_theta, t.r1.b_bar / 2.0};
        }
    }

    const NeighborSearchConfig ns{t.theta_n, t.k_n, t.mn};
    out.neighbor = neighbor_search(trainer, {out.stage2_estimate.omega, out.stage2_estimate.b}, ns);
    const CodewordParams center = out.neighbor.center();

    if (!out.neighbor.success) {
        out.final_estimate = finalize({center.theta, center.k}, cfg.wavelength(), StageTag::neighbor_fallback);
    } else {
        out.narrowed = narrow_regions(out.neighbor, t.theta_n / 2.0, t.k_n / 2.0);
        try {
            out.ga = ga_estimate(trainer, out.neighbor, *out.narrowed, t.m3, ctx.fit());
            out.final_estimate = finalize(out.ga->coords, cfg.wavelength(), StageTag::ga);
        } catch (const Error& e) {
            if (e.code() != Errc::singular_normal_matrix)
                throw;
            out.final_estimate = finalize({center.theta, center.k}, cfg.wavelength(), StageTag::ga_singular);
        }
    }
    out.overhead = trainer.probes() - start_probes;
    return out;
}

SweepSelection run_hfbs(const ExperimentContext& ctx, const Channel& channel, double noise_var, Rng& rng)
{
    const ArrayConfig& cfg = ctx.array();
    const int big_n = cfg.n_half();
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.n_t()));
    const auto& omegas = ctx.hfbs_omega();
    const auto& bs = ctx.hfbs_b();

    // h^H gamma(Omega, b) = sum_n d_n z^n with d_n = conj(h_n) e^{-j pi b n^2} / sqrt(N_t)
    // and z = e^{j pi Omega}; evaluated by Horner's rule in z.
    std::vector<cplx> d(static_cast<std::size_t>(cfg.n_t()));
    SweepSelection best;
    best.power = -1.0;
    for (double b : bs) {
        for (int n = -big_n; n <= big_n; ++n) {
            const double nn = static_cast<double>(n) * n;
            d[static_cast<std::size_t>(n + big_n)] =
                std::conj(channel.at(n)) * std::polar(scale, -pi * std::fmod(b * nn, 2.0));
        }
        for (double omega : omegas) {
            const cplx z = std::polar(1.0, pi * omega);
            cplx acc{0.0, 0.0};
            for (auto it = d.rbegin(); it != d.rend(); ++it)
                acc = acc * z + *it;
            cplx y = acc * std::polar(1.0, -pi * omega * big_n);
            if (noise_var > 0.0)
                y += rng.complex_normal(noise_var);
            ++best.overhead;
            const double power = std::norm(y);
            if (power > best.power) {
                best.power = power;
                best.coords = {omega, b};
            }
        }
    }
    return best;
}

double metric_gain(const ArrayConfig& cfg, const std::vector<PathParams>& paths, double omega_f, double range_f)
{
    if (paths.empty())
        throw Error(Errc::empty_path_list, "no paths");
    double g_max = 0.0;
    for (const auto& p : paths)
        g_max = std::max(g_max, std::abs(p.gain));
    if (!(g_max > 0.0))
        return 0.0;
    const SteeringVector est = steering_exact(cfg, std::clamp(omega_f, -1.0, 1.0), range_f);
    double xi = 0.0;
    for (const auto& p : paths) {
        const double w = std::abs(p.gain) / g_max;
        if (w * 1.0 <= xi)
            continue;
        xi = std::max(xi, w * std::abs(inner(steering_exact(cfg, p), est)));
    }
    return xi;
}

double metric_se(const Channel& channel, const SteeringVector& beam, double noise_var)
{
    const double s = std::norm(inner(channel, beam));
    if (noise_var <= 0.0)
        return s > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::log2(1.0 + s / noise_var);
}

double metric_position(const PathParams& truth, double omega_f, double range_f)
{
    if (!std::isfinite(range_f))
        return std::numeric_limits<double>::infinity();
    const double wt = std::asin(std::clamp(truth.omega, -1.0, 1.0));
    const double we = std::asin(std::clamp(omega_f, -1.0, 1.0));
    return std::hypot(truth.range * std::cos(wt) - range_f * std::cos(we),
                      truth.range * std::sin(wt) - range_f * std::sin(we));
}

std::optional<bool> metric_success(StageTag stage) noexcept
{
    switch (stage) {
    case StageTag::ga:
    case StageTag::ga_singular: return true;
    case StageTag::neighbor_fallback: return false;
    case StageTag::sweep:
    case StageTag::oracle: return std::nullopt;
    }
    return std::nullopt;
}

TrialResult run_trial(const ExperimentContext& ctx, Method method, const ChannelDraw& draw, double snr_db,
                      std::size_t trial, Rng& noise_rng)
{
    const ArrayConfig& cfg = ctx.array();
    const double noise_var = noise_variance(ctx.config(), snr_db);
    TrialResult r;
    r.method = method;
    r.snr_db = snr_db;
    r.trial = trial;

    SteeringVector beam;
    switch (method) {
    case Method::thbt_ml:
    case Method::thbt_psp: {
        BeamTrainer trainer(cfg, draw.channel, noise_var, &noise_rng);
        const ThbtOutcome o = run_thbt(ctx, method == Method::thbt_ml, trainer);
        r.overhead = o.overhead;
        r.stage = o.final_estimate.stage;
        r.omega = o.final_estimate.omega;
        r.b = o.final_estimate.b;
        r.range_m = o.final_estimate.range_m;
        beam = steering_surrogate(cfg, {r.omega, r.b});
        break;
    }
    case Method::hfbs: {
        const SweepSelection s = run_hfbs(ctx, draw.channel, noise_var, noise_rng);
        r.overhead = s.overhead;
        r.stage = StageTag::sweep;
        r.omega = s.coords.omega;
        r.b = s.coords.b;
        r.range_m = surrogate_to_range(r.omega, r.b, cfg.wavelength());
        beam = steering_surrogate(cfg, s.coords);
        break;
    }
    case Method::upper_bound: {
        const auto strongest = std::max_element(draw.paths.begin(), draw.paths.end(), [](const auto& a, const auto& b) {
            return std::abs(a.gain) < std::abs(b.gain);
        });
        r.overhead = 0;
        r.stage = StageTag::oracle;
        r.omega = strongest->omega;
        r.b = to_surrogate(*strongest, cfg.wavelength()).b;
        r.range_m = strongest->range;
        beam = steering_exact(cfg, *strongest);
        break;
    }
    }
    r.gain_xi = metric_gain(cfg, draw.paths, r.omega, r.range_m);
    r.se_bpshz = metric_se(draw.channel, beam, noise_var);
    r.pos_error_m = metric_position(draw.paths.front(), r.omega, r.range_m);
    return r;
}

std::uint64_t channel_seed(std::uint64_t master, std::size_t trial) noexcept
{
    return derive_seed(master, 1, trial);
}

std::uint64_t noise_seed(std::uint64_t master, std::size_t trial, std::size_t snr_index, Method method) noexcept
{
    return derive_seed(derive_seed(master, 2, trial), snr_index, static_cast<std::uint64_t>(method));
}

SummaryRow aggregate(std::span<const TrialResult> results, const std::vector<double>& cdf_grid)
{
    SummaryRow row;
    row.cdf.assign(cdf_grid.size(), 0.0);
    if (results.empty())
        return row;
    row.method = results.front().method;
    row.snr_db = results.front().snr_db;
    row.trials = results.size();
    std::size_t succ = 0;
    std::size_t succ_known = 0;
    std::vector<double> errors;
    errors.reserve(results.size());
    for (const auto& r : results) {
        row.mean_gain += r.gain_xi;
        row.mean_se += r.se_bpshz;
        row.mean_overhead += static_cast<double>(r.overhead);
        row.max_overhead = std::max(row.max_overhead, r.overhead);
        if (const auto s = metric_success(r.stage)) {
            ++succ_known;
            succ += *s ? 1 : 0;
        }
        errors.push_back(r.pos_error_m);
        for (std::size_t i = 0; i < cdf_grid.size(); ++i)
            if (r.pos_error_m <= cdf_grid[i])
                row.cdf[i] += 1.0;
    }
    const double n = static_cast<double>(results.size());
    row.mean_gain /= n;
    row.mean_se /= n;
    row.mean_overhead /= n;
    for (double& c : row.cdf)
        c /= n;
    if (succ_known > 0)
        row.success_rate = static_cast<double>(succ) / static_cast<double>(succ_known);
    std::sort(errors.begin(), errors.end());
    const std::size_t mid = errors.size() / 2;
    row.median_pos_error = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
    return row;
}

SweepResult run_sweep(const ExperimentContext& ctx)
{
    const ExperimentConfig& config = ctx.config();
    const std::size_t n_trials = static_cast<std::size_t>(config.trials);
    const std::size_t n_snr = config.snr_db.size();
    const std::size_t n_method = config.methods.size();
    const std::size_t per_trial = n_snr * n_method;

    for (Method m : config.methods)
        if (m == Method::thbt_ml) {
            ctx.ml_table(0);
            ctx.ml_table(1);
        }

    // Laid out [trial][method][snr]; regrouped after the join.
    std::vector<TrialResult> slots(n_trials * per_trial);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (;;) {
            const std::size_t trial = next.fetch_add(1);
            if (trial >= n_trials)
                return;
            try {
                const ChannelDraw draw =
                    sample_channel(config.array, channel_seed(config.seed, trial), config.scenario);
                for (std::size_t mi = 0; mi < n_method; ++mi) {
                    for (std::size_t si = 0; si < n_snr; ++si) {
                        Rng noise(noise_seed(config.seed, trial, si, config.methods[mi]));
                        slots[trial * per_trial + mi * n_snr + si] =
                            run_trial(ctx, config.methods[mi], draw, config.snr_db[si], trial, noise);
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure)
                    failure = std::current_exception();
                next.store(n_trials);
                return;
            }
        }
    };

    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n_trials);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    SweepResult out;
    out.trials.reserve(slots.size());
    for (std::size_t mi = 0; mi < n_method; ++mi) {
        for (std::size_t si = 0; si < n_snr; ++si) {
            const std::size_t first = out.trials.size();
            for (std::size_t trial = 0; trial < n_trials; ++trial)
                out.trials.push_back(slots[trial * per_trial + mi * n_snr + si]);
            out.rows.push_back(aggregate(std::span<const TrialResult>(out.trials).subspan(first, n_trials),
                                         config.cdf_grid));
        }
    }
    return out;
}

} // namespace thbt
