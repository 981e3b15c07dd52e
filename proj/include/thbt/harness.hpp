// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo engine: the three-stage training pipeline, the exhaustive
// hybrid-field sweep baseline, an oracle upper bound, per-trial metrics and a
// deterministic, thread-count independent sweep over SNR values.
#pragma once

#include "thbt/refine2.hpp"
#include "thbt/refine3.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thbt {

enum class Method { thbt_ml, thbt_psp, hfbs, upper_bound };

inline constexpr std::array<Method, 4> kAllMethods{Method::thbt_ml, Method::thbt_psp, Method::hfbs,
                                                   Method::upper_bound};

std::string_view to_string(Method method) noexcept;
/// Throws Error(invalid_config) for an unknown name.
Method parse_method(std::string_view name);

struct ThbtParams {
    Refine1Config r1;
    Refine2Config r2;
    int m1 = 0;            ///< 0 selects design_m1
    int mn = 3;            ///< neighbor-search groups
    int m3 = 2;            ///< GA samples per axis
    double theta_n = 0.0;  ///< neighbor angle step
    double k_n = 0.0;      ///< neighbor distance step
    MlGrid ml_grid;
    FitOptions fit;
};

/// Training parameters used throughout the evaluation for an N-element array:
/// k_tilde1 = -6.09e-5, Theta2 = Theta_n = 2/N_t, k_n = 6/N_t^2, M2 = 8,
/// M_n = 3, M3 = 2, and b_bar / Omega_bar taken from the scenario.
ThbtParams default_thbt(const ArrayConfig& cfg, const Scenario& scenario);

/// Largest surrogate distance of any admissible path,
/// lambda / (4 max(r_min, Fresnel bound)).
double scenario_b_bar(const ArrayConfig& cfg, const Scenario& scenario);

struct HfbsParams {
    int p = 513; ///< angle samples over the scenario angle range
    int q = 9;   ///< surrogate-distance samples over [0, b_bar]
};

/// How the configured SNR maps to the noise variance.
enum class SnrReference {
    per_antenna, ///< noise variance 10^(-SNR/10) / N_t: SNR before the array gain
    unit,        ///< noise variance 10^(-SNR/10)
};

std::string_view to_string(SnrReference ref) noexcept;
SnrReference parse_snr_reference(std::string_view name);

struct ExperimentConfig {
    ArrayConfig array{256, 0.005};
    Scenario scenario;
    std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
    SnrReference snr_reference = SnrReference::per_antenna;
    int trials = 1000;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::thbt_ml, Method::thbt_psp, Method::hfbs, Method::upper_bound};
    ThbtParams thbt;
    HfbsParams hfbs;
    std::vector<double> cdf_grid{0.1, 0.5, 1.0, 2.0, 5.0};
    int threads = 1;
};

/// Throws Error(invalid_config) / Error(invalid_scenario).
void validate(const ExperimentConfig& config);

/// Noise variance 10^(-SNR/10); zero for SNR = +infinity.
double noise_variance(double snr_db);
double noise_variance(const ExperimentConfig& config, double snr_db);

/// Immutable per-experiment state shared by all trials: the first-stage
/// codebook, the main-lobe fit, the ML search tables and the sweep grid.
class ExperimentContext {
public:
    /// `fit` overrides the computed main-lobe fit (e.g. loaded from a cache).
    explicit ExperimentContext(const ExperimentConfig& config, std::optional<GaussianFit> fit = std::nullopt);

    const ExperimentConfig& config() const noexcept { return config_; }
    const ArrayConfig& array() const noexcept { return config_.array; }
    const Codebook1& codebook1() const noexcept { return codebook1_; }
    const GaussianFit& fit() const noexcept { return fit_; }
    /// Built on first use; thread-safe.
    const MlSearchTable& ml_table(int parity) const;
    const std::vector<double>& hfbs_omega() const noexcept { return hfbs_omega_; }
    const std::vector<double>& hfbs_b() const noexcept { return hfbs_b_; }

private:
    ExperimentConfig config_;
    Codebook1 codebook1_;
    GaussianFit fit_;
    mutable std::array<std::unique_ptr<MlSearchTable>, 2> ml_;
    mutable std::array<std::once_flag, 2> ml_once_;
    std::vector<double> hfbs_omega_;
    std::vector<double> hfbs_b_;
};

/// Main-lobe fit domain (Theta_n / 2, k_n / 2).
FitDomain fit_domain(const ThbtParams& params);

/// Everything the three-stage pipeline produced for one trial.
struct ThbtOutcome {
    Stage1Result stage1;
    Codebook2 codebook2;
    std::vector<cplx> stage2_samples;
    SurrogateCoords stage2_estimate;
    bool stage2_fallback = false; ///< closed-form estimator failed; search started at the region center
    std::optional<PhaseSeries> phases;
    NeighborSearchState neighbor;
    std::optional<NarrowedRegion> narrowed;
    std::optional<GaEstimate> ga;
    FinalEstimate final_estimate;
    std::size_t overhead = 0;
};

ThbtOutcome run_thbt(const ExperimentContext& ctx, bool use_ml, BeamTrainer& trainer);

struct SweepSelection {
    SurrogateCoords coords;
    double power = 0.0;
    std::size_t overhead = 0;
};

/// Probes every (Omega_p, b_q) codeword of the sweep grid and keeps the strongest.
SweepSelection run_hfbs(const ExperimentContext& ctx, const Channel& channel, double noise_var, Rng& rng);

struct TrialResult {
    Method method = Method::thbt_ml;
    double snr_db = 0.0;
    std::size_t trial = 0;
    double gain_xi = 0.0;
    double se_bpshz = 0.0;
    double pos_error_m = 0.0;
    std::size_t overhead = 0;
    StageTag stage = StageTag::ga;
    double omega = 0.0;
    double b = 0.0;
    double range_m = 0.0;
};

/// max_l |g_l| / max|g| * |alpha(Omega_l, r_l)^H alpha(Omega_f, r_f)|.
double metric_gain(const ArrayConfig& cfg, const std::vector<PathParams>& paths, double omega_f, double range_f);
/// log2(1 + |h^H f|^2 / noise_var).
double metric_se(const Channel& channel, const SteeringVector& beam, double noise_var);
/// Distance between the estimated position and the first (line-of-sight)
/// path's position; +infinity for a far-field estimate.
double metric_position(const PathParams& truth, double omega_f, double range_f);
/// Whether the neighbor search converged; nullopt for methods without one.
std::optional<bool> metric_success(StageTag stage) noexcept;

/// Runs one method on one channel draw.
TrialResult run_trial(const ExperimentContext& ctx, Method method, const ChannelDraw& draw, double snr_db,
                      std::size_t trial, Rng& noise_rng);

std::uint64_t channel_seed(std::uint64_t master, std::size_t trial) noexcept;
std::uint64_t noise_seed(std::uint64_t master, std::size_t trial, std::size_t snr_index, Method method) noexcept;

struct SummaryRow {
    Method method = Method::thbt_ml;
    double snr_db = 0.0;
    std::size_t trials = 0;
    double mean_gain = 0.0;
    double mean_se = 0.0;
    std::optional<double> success_rate;
    double mean_overhead = 0.0;
    std::size_t max_overhead = 0;
    double median_pos_error = 0.0;
    std::vector<double> cdf; ///< fraction with error <= cdf_grid[i]
};

SummaryRow aggregate(std::span<const TrialResult> results, const std::vector<double>& cdf_grid);

struct SweepResult {
    std::vector<SummaryRow> rows;     ///< method-major, then SNR order of the config
    std::vector<TrialResult> trials;  ///< same order, trial index innermost
};

/// Runs every (method, SNR, trial) combination. Trials are distributed over
/// config.threads workers; results do not depend on the thread count.
SweepResult run_sweep(const ExperimentContext& ctx);

} // namespace thbt
