// SPDX-License-Identifier: Apache-2.0
//
// thbt: command-line front end.
//
//   thbt sweep -c run.json [--threads N] [--trials N] [--seed S] [--summary-csv F] [--trials-csv F] [--summary-json F]
//   thbt trace -c run.json [--trial I] [--snr DB] [--method thbt-ml|thbt-psp] [--omega W --b B] [--phases F]
//   thbt codebook dump -c run.json [--m-bar M] [--gain-grid F --grid N]
//   thbt fit-gaussian -c run.json [--cache F] [--residuals F]
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include "thbt/config.hpp"
#include "thbt/error.hpp"
#include "thbt/harness.hpp"
#include "thbt/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

using namespace thbt;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open output file " + path);
    return out;
}

RunConfig load(const std::string& path)
{
    try {
        return load_config(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

std::optional<GaussianFit> cached_fit(const RunConfig& rc)
{
    if (rc.fit_cache.empty())
        return std::nullopt;
    std::ifstream in(rc.fit_cache);
    if (!in)
        return std::nullopt;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed fit cache " + rc.fit_cache + ": " + e.what());
    }
    return fit_from_json(doc, rc.experiment.array, fit_domain(rc.experiment.thbt));
}

int cmd_sweep(RunConfig rc, std::optional<int> threads, std::optional<int> trials, std::optional<std::uint64_t> seed)
{
    ExperimentConfig& ec = rc.experiment;
    if (threads)
        ec.threads = *threads;
    if (trials)
        ec.trials = *trials;
    if (seed)
        ec.seed = *seed;
    try {
        validate(ec);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const ExperimentContext ctx(ec, cached_fit(rc));
    const SweepResult res = run_sweep(ctx);

    if (rc.output.summary_csv.empty()) {
        write_summary_csv(std::cout, res.rows, ec.cdf_grid);
    } else {
        auto out = open_out(rc.output.summary_csv);
        write_summary_csv(out, res.rows, ec.cdf_grid);
    }
    if (!rc.output.trials_csv.empty()) {
        auto out = open_out(rc.output.trials_csv);
        write_trials_csv(out, res.trials);
    }
    if (!rc.output.summary_json.empty()) {
        auto out = open_out(rc.output.summary_json);
        out << summary_json(ec, ctx.fit(), res.rows).dump(2) << '\n';
    }
    return 0;
}

int cmd_trace(const RunConfig& rc, std::size_t trial, double snr_db, const std::string& method_name,
              std::optional<double> omega, std::optional<double> b, const std::string& phases_path)
{
    const ExperimentConfig& ec = rc.experiment;
    const Method method = parse_method(method_name);
    if (method != Method::thbt_ml && method != Method::thbt_psp)
        throw ConfigError("trace supports thbt-ml and thbt-psp");
    if (omega.has_value() != b.has_value())
        throw ConfigError("--omega and --b must be given together");

    const ExperimentContext ctx(ec, cached_fit(rc));
    const ArrayConfig& cfg = ec.array;
    ChannelDraw draw;
    if (omega) {
        const double range = surrogate_to_range(*omega, *b, cfg.wavelength());
        draw.paths = {PathParams{{1.0, 0.0}, *omega, range}};
        const SteeringVector sv = steering_surrogate(cfg, {*omega, *b});
        draw.channel = Channel(cfg.n_half(), std::vector<cplx>(sv.entries().begin(), sv.entries().end()));
    } else {
        draw = sample_channel(cfg, channel_seed(ec.seed, trial), ec.scenario);
    }

    const double noise_var = noise_variance(ec, snr_db);
    Rng noise(noise_seed(ec.seed, trial, 0, method));
    BeamTrainer trainer(cfg, draw.channel, noise_var, &noise);
    const ThbtOutcome o = run_thbt(ctx, method == Method::thbt_ml, trainer);

    std::ostream& os = std::cout;
    fmt::print(os, "# trial {} method {} snr_db {}\n", trial, to_string(method), format_number(snr_db));
    for (std::size_t l = 0; l < draw.paths.size(); ++l) {
        const auto& p = draw.paths[l];
        fmt::print(os, "path {} |g|={} omega={} range_m={} b={}\n", l, format_number(std::abs(p.gain)),
                   format_number(p.omega), format_number(p.range),
                   format_number(to_surrogate(p, cfg.wavelength()).b));
    }
    fmt::print(os, "stage1 m_bar={} theta={} k={}\n", o.stage1.m_bar, ctx.codebook1().at(o.stage1.m_bar).theta,
               ctx.codebook1().at(o.stage1.m_bar).k);
    fmt::print(os, "stage2 k_bar2={} omega={} b={}{}\n", format_number(o.codebook2.k_bar2),
               format_number(o.stage2_estimate.omega), format_number(o.stage2_estimate.b),
               o.stage2_fallback ? " (closed form failed, region center)" : "");
    fmt::print(os, "neighbor groups={} winner={} success={} omega={} b={}\n", o.neighbor.groups_run,
               o.neighbor.last_winner, o.neighbor.success, format_number(o.neighbor.center().theta),
               format_number(o.neighbor.center().k));
    if (o.narrowed)
        fmt::print(os, "narrowed omega=[{}, {}] b=[{}, {}]\n", format_number(o.narrowed->omega_lo),
                   format_number(o.narrowed->omega_hi), format_number(o.narrowed->b_lo),
                   format_number(o.narrowed->b_hi));
    const auto& f = o.final_estimate;
    fmt::print(os, "final stage={} omega={} b={} range_m={} overhead={}\n", to_string(f.stage), format_number(f.omega),
               format_number(f.b), format_number(f.range_m), o.overhead);
    fmt::print(os, "gain_xi={} pos_error_m={}\n", format_number(metric_gain(cfg, draw.paths, f.omega, f.range_m)),
               format_number(metric_position(draw.paths.front(), f.omega, f.range_m)));

    // Per-codeword phase data of the second stage.
    const auto angles = o.codebook2.angles();
    std::optional<PspEstimate> psp;
    try {
        psp = estimate_psp(*o.phases, angles, o.codebook2.k_bar2);
    } catch (const Error&) {
    }
    auto write_phases = [&](std::ostream& out) {
        out << "m,theta,magnitude,wrapped,unwrapped,psp_model\n";
        for (std::size_t i = 0; i < angles.size(); ++i) {
            const double t = angles[i];
            const double model = psp ? -(psp->alpha * t * t + psp->beta * t + psp->gamma)
                                     : std::numeric_limits<double>::quiet_NaN();
            out << static_cast<int>(i) - o.codebook2.m2 << ',' << format_number(t) << ','
                << format_number(std::abs(o.stage2_samples[i])) << ',' << format_number(o.phases->wrapped[i]) << ','
                << format_number(o.phases->unwrapped[i]) << ',' << format_number(model) << '\n';
        }
    };
    if (phases_path.empty()) {
        write_phases(os);
    } else {
        auto out = open_out(phases_path);
        write_phases(out);
    }
    return 0;
}

int cmd_codebook(const RunConfig& rc, int m_bar, const std::string& grid_path, int grid)
{
    const ExperimentConfig& ec = rc.experiment;
    const ArrayConfig& cfg = ec.array;
    const ThbtParams& t = ec.thbt;
    const Codebook1 cb1 = t.m1 > 0 ? build_codebook1(cfg, t.r1, t.m1) : build_codebook1(cfg, t.r1);
    if (m_bar < -cb1.m1 || m_bar > cb1.m1)
        throw ConfigError(fmt::format("--m-bar must lie in [{}, {}]", -cb1.m1, cb1.m1));
    const Codebook2 cb2 = build_codebook2(cfg, t.r1, t.r2, cb1, m_bar);

    fmt::print("# M1={} M1_bound={} Theta1={} b_bar={} k_tilde1={}\n", cb1.m1, format_number(m1_bound(cfg, t.r1)),
               format_number(cb1.theta_bar1), format_number(t.r1.b_bar), format_number(t.r1.k_tilde1));
    fmt::print("# m_bar={} M2={} Theta2={} B={} k_bar2={} coverage_slack={}\n", m_bar, cb2.m2,
               format_number(cb2.theta_bar2), format_number(unwrap_margin(cfg, t.r1, t.r2)),
               format_number(cb2.k_bar2), format_number(coverage_slack(cfg, t.r1, cb2)));
    std::cout << "stage,m,theta,k\n";
    for (int m = -cb1.m1; m <= cb1.m1; ++m)
        std::cout << "1," << m << ',' << format_number(cb1.at(m).theta) << ',' << format_number(cb1.at(m).k) << '\n';
    for (std::size_t i = 0; i < cb2.size(); ++i)
        std::cout << "2," << static_cast<int>(i) - cb2.m2 << ',' << format_number(cb2.codewords[i].theta) << ','
                  << format_number(cb2.codewords[i].k) << '\n';

    if (!grid_path.empty()) {
        if (grid < 2)
            throw ConfigError("--grid must be >= 2");
        auto out = open_out(grid_path);
        out << "omega,b,best_m,best_gain\n";
        for (int i = 0; i < grid; ++i) {
            const double omega = -t.r1.omega_bar + 2.0 * t.r1.omega_bar * i / (grid - 1);
            for (int j = 0; j < grid; ++j) {
                const double b = t.r1.b_bar * j / (grid - 1);
                int best_m = 0;
                double best = -1.0;
                for (int m = -cb1.m1; m <= cb1.m1; ++m) {
                    const double g = hfbg_exact(cfg, cb1.at(m), {omega, b}).magnitude;
                    if (g > best) {
                        best = g;
                        best_m = m;
                    }
                }
                out << format_number(omega) << ',' << format_number(b) << ',' << best_m << ','
                    << format_number(best) << '\n';
            }
        }
    }
    return 0;
}

int cmd_fit(const RunConfig& rc, const std::string& cache_path, const std::string& residual_path)
{
    const ExperimentConfig& ec = rc.experiment;
    const ArrayConfig& cfg = ec.array;
    const FitDomain domain = fit_domain(ec.thbt);
    const GaussianFit fit = fit_gaussian(cfg, domain, ec.thbt.fit);

    fmt::print("amplitude,sigma_angle,sigma_k,peak_gain,max_residual,mean_residual\n");
    fmt::print("{},{},{},{},{},{}\n", format_number(fit.amplitude), format_number(fit.sigma_angle),
               format_number(fit.sigma_k), format_number(fit.peak_gain), format_number(fit.max_residual),
               format_number(fit.mean_residual));

    const std::string cache = cache_path.empty() ? rc.fit_cache : cache_path;
    if (!cache.empty()) {
        auto out = open_out(cache);
        out << fit_to_json(cfg, fit).dump(2) << '\n';
    }
    if (!residual_path.empty()) {
        auto out = open_out(residual_path);
        out << "omega,b,gain,model,residual\n";
        const int n = ec.thbt.fit.grid;
        for (int i = 0; i < n; ++i) {
            const double omega = -domain.theta3 + 2.0 * domain.theta3 * i / (n - 1);
            for (int j = 0; j < n; ++j) {
                const double b = -domain.k3 + 2.0 * domain.k3 * j / (n - 1);
                const double g = hfbg_exact(cfg, {0.0, 0.0}, {omega, b}).magnitude;
                const double f = fit.evaluate({0.0, 0.0}, {omega, b});
                out << format_number(omega) << ',' << format_number(b) << ',' << format_number(g) << ','
                    << format_number(f) << ',' << format_number(f - g) << '\n';
            }
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Three-stage near-field beam training simulator"};
    app.require_subcommand(1);

    std::string config_path;

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the configured SNR list");
    sweep->add_option("-c,--config", config_path, "JSON run configuration")->required();
    std::optional<int> threads;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string summary_csv, trials_csv, summary_json_path;
    sweep->add_option("--threads", threads, "worker threads (overrides config)");
    sweep->add_option("--trials", trials, "trial count (overrides config)");
    sweep->add_option("--seed", seed, "master seed (overrides config)");
    sweep->add_option("--summary-csv", summary_csv, "summary CSV path (default: config, else stdout)");
    sweep->add_option("--trials-csv", trials_csv, "per-trial CSV path");
    sweep->add_option("--summary-json", summary_json_path, "JSON summary path");

    auto* trace = app.add_subcommand("trace", "Run one trial and print every stage");
    trace->add_option("-c,--config", config_path, "JSON run configuration")->required();
    std::size_t trace_trial = 0;
    double trace_snr = std::numeric_limits<double>::infinity();
    std::string trace_method = "thbt-psp";
    std::optional<double> trace_omega, trace_b;
    std::string phases_path;
    trace->add_option("--trial", trace_trial, "trial index (selects the channel draw)");
    trace->add_option("--snr", trace_snr, "SNR in dB (default: noiseless)");
    trace->add_option("--method", trace_method, "thbt-ml or thbt-psp");
    trace->add_option("--omega", trace_omega, "single path angle sine (replaces the random draw)");
    trace->add_option("--b", trace_b, "single path surrogate distance");
    trace->add_option("--phases", phases_path, "write the phase table here instead of stdout");

    auto* codebook = app.add_subcommand("codebook", "Codebook inspection");
    codebook->require_subcommand(1);
    auto* dump = codebook->add_subcommand("dump", "Print first- and second-stage codewords");
    dump->add_option("-c,--config", config_path, "JSON run configuration")->required();
    int m_bar = 0;
    std::string gain_grid_path;
    int gain_grid = 200;
    dump->add_option("--m-bar", m_bar, "first-stage index selecting the second-stage codebook");
    dump->add_option("--gain-grid", gain_grid_path, "write the first-stage best-gain map here");
    dump->add_option("--grid", gain_grid, "gain map samples per axis");

    auto* fit = app.add_subcommand("fit-gaussian", "Fit the main-lobe Gaussian and refresh the cache");
    fit->add_option("-c,--config", config_path, "JSON run configuration")->required();
    std::string cache_path, residual_path;
    fit->add_option("--cache", cache_path, "fit cache path (default: thbt.fit_cache)");
    fit->add_option("--residuals", residual_path, "write the residual grid here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig rc = load(config_path);
        if (*sweep) {
            if (!summary_csv.empty())
                rc.output.summary_csv = summary_csv;
            if (!trials_csv.empty())
                rc.output.trials_csv = trials_csv;
            if (!summary_json_path.empty())
                rc.output.summary_json = summary_json_path;
            return cmd_sweep(std::move(rc), threads, trials, seed);
        }
        if (*trace)
            return cmd_trace(rc, trace_trial, trace_snr, trace_method, trace_omega, trace_b, phases_path);
        if (*dump)
            return cmd_codebook(rc, m_bar, gain_grid_path, gain_grid);
        if (*fit)
            return cmd_fit(rc, cache_path, residual_path);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 1;
    } catch (const Error& e) {
        const bool config = e.code() == Errc::invalid_config || e.code() == Errc::invalid_scenario;
        fmt::print(stderr, "{}: {}\n", config ? "config error" : "error", e.what());
        return config ? 1 : 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
