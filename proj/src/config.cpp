// SPDX-License-Identifier: Apache-2.0
#include "thbt/config.hpp"

#include "thbt/error.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace thbt {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_config, what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        bad(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key))
            bad("unknown key '" + where + "." + key + "'");
}

double get_number(const json& v, const std::string& name)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
    }
    bad(name + " must be a number");
}

long long get_int(const json& v, const std::string& name)
{
    if (!v.is_number_integer())
        bad(name + " must be an integer");
    return v.get<long long>();
}

std::pair<double, double> get_pair(const json& v, const std::string& name)
{
    if (!v.is_array() || v.size() != 2)
        bad(name + " must be a two-element array");
    return {get_number(v[0], name), get_number(v[1], name)};
}

std::vector<double> get_numbers(const json& v, const std::string& name)
{
    if (!v.is_array())
        bad(name + " must be an array");
    std::vector<double> out;
    for (const auto& e : v)
        out.push_back(get_number(e, name));
    return out;
}

std::string get_string(const json& v, const std::string& name)
{
    if (!v.is_string())
        bad(name + " must be a string");
    return v.get<std::string>();
}

json number_json(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

} // namespace

RunConfig parse_config(const json& doc)
{
    check_keys(doc, "config",
               {"version", "array", "scenario", "snr_db", "snr_reference", "trials", "seed", "methods", "threads", "thbt", "hfbs",
                "cdf_grid", "output"});
    if (!doc.contains("version") || get_int(doc["version"], "version") != kConfigVersion)
        bad("config.version must be " + std::to_string(kConfigVersion));

    RunConfig rc;
    ExperimentConfig& ec = rc.experiment;

    if (doc.contains("array")) {
        const json& a = doc["array"];
        check_keys(a, "array", {"n_half", "wavelength"});
        int n_half = ec.array.n_half();
        double wavelength = ec.array.wavelength();
        if (a.contains("n_half"))
            n_half = static_cast<int>(get_int(a["n_half"], "array.n_half"));
        if (a.contains("wavelength"))
            wavelength = get_number(a["wavelength"], "array.wavelength");
        ec.array = ArrayConfig(n_half, wavelength);
    }

    if (doc.contains("scenario")) {
        const json& s = doc["scenario"];
        check_keys(s, "scenario", {"gain_std", "nlos_paths", "gamma_db", "angle_range", "distance_range"});
        if (s.contains("gain_std") && (s.contains("gamma_db") || s.contains("nlos_paths")))
            bad("scenario.gain_std excludes scenario.gamma_db / scenario.nlos_paths");
        if (s.contains("gain_std"))
            ec.scenario.gain_std = get_numbers(s["gain_std"], "scenario.gain_std");
        if (s.contains("gamma_db") || s.contains("nlos_paths")) {
            const long long nlos = s.contains("nlos_paths") ? get_int(s["nlos_paths"], "scenario.nlos_paths") : 2;
            const double gamma = s.contains("gamma_db") ? get_number(s["gamma_db"], "scenario.gamma_db") : 20.0;
            if (nlos < 0)
                bad("scenario.nlos_paths must be >= 0");
            ec.scenario.gain_std.assign(1, 1.0);
            for (long long l = 0; l < nlos; ++l)
                ec.scenario.gain_std.push_back(std::pow(10.0, -gamma / 20.0));
        }
        if (s.contains("angle_range"))
            ec.scenario.angle_range = get_pair(s["angle_range"], "scenario.angle_range");
        if (s.contains("distance_range"))
            ec.scenario.distance_range = get_pair(s["distance_range"], "scenario.distance_range");
    }
    validate_scenario(ec.array, ec.scenario);

    if (doc.contains("snr_db"))
        ec.snr_db = get_numbers(doc["snr_db"], "snr_db");
    if (doc.contains("snr_reference"))
        ec.snr_reference = parse_snr_reference(get_string(doc["snr_reference"], "snr_reference"));
    if (doc.contains("trials"))
        ec.trials = static_cast<int>(get_int(doc["trials"], "trials"));
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
            bad("seed must be a non-negative integer");
        ec.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("methods")) {
        if (!doc["methods"].is_array())
            bad("methods must be an array");
        ec.methods.clear();
        for (const auto& m : doc["methods"])
            ec.methods.push_back(parse_method(get_string(m, "methods[]")));
    }
    if (doc.contains("threads"))
        ec.threads = static_cast<int>(get_int(doc["threads"], "threads"));

    ec.thbt = default_thbt(ec.array, ec.scenario);
    if (doc.contains("thbt")) {
        const json& t = doc["thbt"];
        check_keys(t, "thbt",
                   {"omega_bar", "b_bar", "k_tilde1", "m1", "theta_bar2", "m2", "mn", "m3", "theta_n", "k_n", "rho",
                    "ml_grid", "fit_grid", "fit_starts", "fit_cache"});
        ThbtParams& p = ec.thbt;
        if (t.contains("omega_bar"))
            p.r1.omega_bar = get_number(t["omega_bar"], "thbt.omega_bar");
        if (t.contains("b_bar"))
            p.r1.b_bar = get_number(t["b_bar"], "thbt.b_bar");
        if (t.contains("k_tilde1"))
            p.r1.k_tilde1 = get_number(t["k_tilde1"], "thbt.k_tilde1");
        if (t.contains("m1"))
            p.m1 = static_cast<int>(get_int(t["m1"], "thbt.m1"));
        if (t.contains("theta_bar2"))
            p.r2.theta_bar2 = get_number(t["theta_bar2"], "thbt.theta_bar2");
        if (t.contains("m2"))
            p.r2.m2 = static_cast<int>(get_int(t["m2"], "thbt.m2"));
        if (t.contains("mn"))
            p.mn = static_cast<int>(get_int(t["mn"], "thbt.mn"));
        if (t.contains("m3"))
            p.m3 = static_cast<int>(get_int(t["m3"], "thbt.m3"));
        if (t.contains("theta_n"))
            p.theta_n = get_number(t["theta_n"], "thbt.theta_n");
        if (t.contains("k_n") && t.contains("rho"))
            bad("thbt.k_n and thbt.rho are mutually exclusive");
        if (t.contains("k_n"))
            p.k_n = get_number(t["k_n"], "thbt.k_n");
        if (t.contains("rho")) {
            const double rho = get_number(t["rho"], "thbt.rho");
            try {
                p.k_n = invert_coherence(ec.array, rho);
            } catch (const Error& e) {
                bad(std::string("thbt.rho: ") + e.what());
            }
        }
        if (t.contains("ml_grid")) {
            const auto g = get_pair(t["ml_grid"], "thbt.ml_grid");
            p.ml_grid = {static_cast<int>(g.first), static_cast<int>(g.second)};
        }
        if (t.contains("fit_grid"))
            p.fit.grid = static_cast<int>(get_int(t["fit_grid"], "thbt.fit_grid"));
        if (t.contains("fit_starts"))
            p.fit.starts = static_cast<int>(get_int(t["fit_starts"], "thbt.fit_starts"));
        if (t.contains("fit_cache"))
            rc.fit_cache = get_string(t["fit_cache"], "thbt.fit_cache");
    }

    if (doc.contains("hfbs")) {
        const json& h = doc["hfbs"];
        check_keys(h, "hfbs", {"p", "q"});
        if (h.contains("p"))
            ec.hfbs.p = static_cast<int>(get_int(h["p"], "hfbs.p"));
        if (h.contains("q"))
            ec.hfbs.q = static_cast<int>(get_int(h["q"], "hfbs.q"));
    }
    if (doc.contains("cdf_grid"))
        ec.cdf_grid = get_numbers(doc["cdf_grid"], "cdf_grid");

    if (doc.contains("output")) {
        const json& o = doc["output"];
        check_keys(o, "output", {"summary_csv", "trials_csv", "summary_json"});
        if (o.contains("summary_csv"))
            rc.output.summary_csv = get_string(o["summary_csv"], "output.summary_csv");
        if (o.contains("trials_csv"))
            rc.output.trials_csv = get_string(o["trials_csv"], "output.trials_csv");
        if (o.contains("summary_json"))
            rc.output.summary_json = get_string(o["summary_json"], "output.summary_json");
    }

    validate(ec);
    return rc;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        bad("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        bad("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c)
{
    json snr = json::array();
    for (double s : c.snr_db)
        snr.push_back(number_json(s));
    json methods = json::array();
    for (Method m : c.methods)
        methods.push_back(std::string(to_string(m)));
    const ThbtParams& t = c.thbt;
    return json{
        {"version", kConfigVersion},
        {"array", {{"n_half", c.array.n_half()}, {"wavelength", c.array.wavelength()}}},
        {"scenario",
         {{"gain_std", c.scenario.gain_std},
          {"angle_range", {c.scenario.angle_range.first, c.scenario.angle_range.second}},
          {"distance_range", {c.scenario.distance_range.first, c.scenario.distance_range.second}}}},
        {"snr_db", snr},
        {"snr_reference", std::string(to_string(c.snr_reference))},
        {"trials", c.trials},
        {"seed", c.seed},
        {"methods", methods},
        {"threads", c.threads},
        {"thbt",
         {{"omega_bar", t.r1.omega_bar},
          {"b_bar", t.r1.b_bar},
          {"k_tilde1", t.r1.k_tilde1},
          {"m1", t.m1},
          {"theta_bar2", t.r2.theta_bar2},
          {"m2", t.r2.m2},
          {"mn", t.mn},
          {"m3", t.m3},
          {"theta_n", t.theta_n},
          {"k_n", t.k_n},
          {"ml_grid", {t.ml_grid.n_omega, t.ml_grid.n_b}},
          {"fit_grid", t.fit.grid},
          {"fit_starts", t.fit.starts}}},
        {"hfbs", {{"p", c.hfbs.p}, {"q", c.hfbs.q}}},
        {"cdf_grid", c.cdf_grid},
    };
}

json fit_to_json(const ArrayConfig& cfg, const GaussianFit& fit)
{
    return json{
        {"n_half", cfg.n_half()},
        {"wavelength", cfg.wavelength()},
        {"theta3", fit.domain.theta3},
        {"k3", fit.domain.k3},
        {"amplitude", fit.amplitude},
        {"sigma_angle", fit.sigma_angle},
        {"sigma_k", fit.sigma_k},
        {"peak_gain", fit.peak_gain},
        {"max_residual", fit.max_residual},
        {"mean_residual", fit.mean_residual},
    };
}

std::optional<GaussianFit> fit_from_json(const json& doc, const ArrayConfig& cfg, FitDomain domain)
{
    try {
        if (doc.at("n_half").get<int>() != cfg.n_half())
            return std::nullopt;
        auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
        if (!same(doc.at("theta3").get<double>(), domain.theta3) || !same(doc.at("k3").get<double>(), domain.k3))
            return std::nullopt;
        GaussianFit fit;
        fit.domain = domain;
        fit.amplitude = doc.at("amplitude").get<double>();
        fit.sigma_angle = doc.at("sigma_angle").get<double>();
        fit.sigma_k = doc.at("sigma_k").get<double>();
        fit.peak_gain = doc.at("peak_gain").get<double>();
        fit.max_residual = doc.at("max_residual").get<double>();
        fit.mean_residual = doc.at("mean_residual").get<double>();
        if (!(fit.amplitude > 0.0) || !(fit.sigma_angle > 0.0) || !(fit.sigma_k > 0.0))
            bad("fit cache holds non-positive parameters");
        return fit;
    } catch (const json::exception& e) {
        bad(std::string("malformed fit cache: ") + e.what());
    }
}

} // namespace thbt
