// SPDX-License-Identifier: Apache-2.0
#include "thbt/report.hpp"

#include "thbt/config.hpp"

#include <fmt/format.h>

#include <cmath>

namespace thbt {

std::string csv_field(std::string_view text)
{
    if (text.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return fmt::format("{}", x);
}

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out << ',';
        out << csv_field(fields[i]);
    }
    out << '\n';
}

} // namespace

std::vector<std::string> summary_header(const std::vector<double>& cdf_grid)
{
    std::vector<std::string> h{"method",        "snr_db",        "trials",       "mean_gain",
                               "mean_se_bpshz", "success_rate",  "mean_overhead", "max_overhead",
                               "median_pos_error_m"};
    for (double e : cdf_grid)
        h.push_back("cdf_le_" + format_number(e) + "m");
    return h;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, const std::vector<double>& cdf_grid)
{
    write_row(out, summary_header(cdf_grid));
    for (const auto& r : rows) {
        std::vector<std::string> f{std::string(to_string(r.method)),
                                   format_number(r.snr_db),
                                   std::to_string(r.trials),
                                   format_number(r.mean_gain),
                                   format_number(r.mean_se),
                                   r.success_rate ? format_number(*r.success_rate) : std::string(),
                                   format_number(r.mean_overhead),
                                   std::to_string(r.max_overhead),
                                   format_number(r.median_pos_error)};
        for (double c : r.cdf)
            f.push_back(format_number(c));
        write_row(out, f);
    }
}

std::vector<std::string> trials_header()
{
    return {"method", "snr_db", "trial",   "gain_xi", "se_bpshz", "pos_error_m",
            "overhead", "stage", "omega", "b",       "range_m"};
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials)
{
    write_row(out, trials_header());
    for (const auto& t : trials) {
        write_row(out, {std::string(to_string(t.method)), format_number(t.snr_db), std::to_string(t.trial),
                        format_number(t.gain_xi), format_number(t.se_bpshz), format_number(t.pos_error_m),
                        std::to_string(t.overhead), std::string(to_string(t.stage)), format_number(t.omega),
                        format_number(t.b), format_number(t.range_m)});
    }
}

nlohmann::json summary_json(const ExperimentConfig& config, const GaussianFit& fit,
                            const std::vector<SummaryRow>& rows)
{
    using nlohmann::json;
    auto num = [](double x) -> json {
        if (!std::isfinite(x))
            return format_number(x);
        return x;
    };
    json out_rows = json::array();
    for (const auto& r : rows) {
        json cdf = json::object();
        for (std::size_t i = 0; i < r.cdf.size(); ++i)
            cdf[format_number(config.cdf_grid[i])] = r.cdf[i];
        out_rows.push_back({{"method", std::string(to_string(r.method))},
                            {"snr_db", num(r.snr_db)},
                            {"trials", r.trials},
                            {"mean_gain", num(r.mean_gain)},
                            {"mean_se_bpshz", num(r.mean_se)},
                            {"success_rate", r.success_rate ? json(*r.success_rate) : json(nullptr)},
                            {"mean_overhead", r.mean_overhead},
                            {"max_overhead", r.max_overhead},
                            {"median_pos_error_m", num(r.median_pos_error)},
                            {"cdf_pos_error", cdf}});
    }
    return json{
        {"config", to_json(config)},
        {"conventions",
         {{"noise_variance", config.snr_reference == SnrReference::per_antenna
                                  ? "10^(-snr_db/10) / N_t, unit pilot, unit-norm steering vectors"
                                  : "10^(-snr_db/10), unit pilot, unit-norm steering vectors"},
          {"spectral_efficiency", "log2(1 + |h^H f|^2 / noise_variance), f = final codeword"},
          {"hfbs_grid", "P angles uniform over the scenario angle range, Q surrogate distances uniform over [0, b_bar]"},
          {"far_field_estimate", "b <= 0 gives range = inf and positioning error = inf"},
          {"position_truth", "first (line-of-sight) path"},
          {"upper_bound", "exact steering vector of the strongest path"}}},
        {"gaussian_fit",
         {{"amplitude", fit.amplitude},
          {"sigma_angle", fit.sigma_angle},
          {"sigma_k", fit.sigma_k},
          {"max_residual", fit.max_residual},
          {"mean_residual", fit.mean_residual}}},
        {"rows", out_rows},
    };
}

} // namespace thbt
