#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rydline/evolve.hpp"
#include "rydline/spectrum.hpp"

namespace rydline {

enum class Experiment { Ramp, ScaleSweep, Quench, ThermoSweep };
enum class SweepAxis { None, T3, NoiseScale, Kappa, Omega };
enum class ScheduleKind { FinalStep, ThreeStep, Constant };
enum class BetaMode { PerRealization, MeanEnergy };

const char* to_string(Experiment e);
const char* to_string(SweepAxis a);
const char* to_string(ScheduleKind k);
const char* to_string(BetaMode m);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::FinalStep;
    double t1_us = 50.0;        // three-step only
    double t2_us = 50.0;        // three-step only
    double t3_us = 90.0;        // final and three-step; swept by SweepAxis::T3
    double duration_us = 400.0; // constant only
    double omega_over_vdd = 1.0; // constant only; swept by SweepAxis::Omega
    double delta_over_vdd = PreparationPoints::delta_target;  // constant only
};

struct SpectrumSource {
    std::optional<std::filesystem::path> file;  // surrogate when empty
    SpectrumKind file_kind = SpectrumKind::Phase;
    SurrogateSpectrumParams surrogate;
};

struct CampaignConfig {
    Experiment experiment = Experiment::Ramp;
    std::vector<int> n_sites{11};
    double v_dd = 1.0;  // rad/us
    ScheduleSpec schedule;
    SweepAxis axis = SweepAxis::None;
    std::vector<double> axis_values;
    int realizations = 100;
    int fast_realizations = 20;
    std::uint64_t master_seed = 1;
    SpectrumSource spectrum;
    bool noise_enabled = true;
    double noise_scale = 1.0;           // m; swept by SweepAxis::NoiseScale
    std::vector<double> kappas{1.0};    // each sweep point is repeated per kappa
    Frame frame = Frame::LabPhase;
    std::optional<double> time_step_us; // default_time_step when empty
    bool noiseless_control = false;
    std::vector<std::string> observables{"H_int", "O_Z2"};
    BetaMode beta_mode = BetaMode::PerRealization;
    double histogram_bin_vdd = 0.1;
    std::filesystem::path output_dir = "campaign-output";
    bool write_realizations = true;
    int threads = 0;  // 0: hardware concurrency

    // Throws ConfigError.
    void validate() const;
};

// JSON with explicit units in the key names; unknown keys are rejected.
// Throws ConfigError.
CampaignConfig parse_campaign_config(std::string_view text);
CampaignConfig load_campaign_config(const std::filesystem::path& path);
std::string campaign_config_to_json(const CampaignConfig& cfg);

struct Statistic {
    double mean = 0.0;
    double standard_error = 0.0;
    int count = 0;
    bool se_defined = false;  // false when count < 2
};

// Sample mean and standard error (sample standard deviation / sqrt(M)).
Statistic aggregate(std::span<const double> values);

struct SweepPoint {
    std::size_t index = 0;
    int n_sites = 0;
    double t3_us = 0.0;
    double noise_scale = 1.0;
    double kappa = 1.0;
    double omega_over_vdd = 0.0;
};

std::vector<SweepPoint> sweep_points(const CampaignConfig& cfg);

struct NamedStatistic {
    std::string name;
    Statistic value;
};

struct PointResult {
    SweepPoint point;
    std::vector<NamedStatistic> stats;
    std::vector<Statistic> histogram;  // quench only; bin b is centered on b * bin width
    std::optional<double> noiseless_fidelity;
};

struct RealizationRow {
    std::size_t point = 0;
    int realization = 0;
    std::uint64_t seed = 0;
    std::vector<double> values;  // in CampaignResult::columns order
};

struct Optimum {
    int n_sites = 0;
    double kappa = 1.0;
    double t3_us = 0.0;
    double fidelity = 0.0;
};

struct CampaignResult {
    CampaignConfig config;
    int realizations = 0;
    std::vector<std::string> columns;
    std::vector<PointResult> points;
    std::vector<RealizationRow> rows;
    std::vector<Optimum> optima;  // argmax of mean fidelity over T3, per (N, kappa)
    double wall_seconds = 0.0;
};

struct RunOptions {
    bool fast = false;
    std::optional<int> threads;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Each realization r at sweep point p draws its noise with
// derive_seed(master_seed, p, r). Results do not depend on the number of
// worker threads. Throws CapacityError for chains beyond exact simulation.
CampaignResult ramp_fidelity_campaign(const CampaignConfig& cfg, const RunOptions& opts = {});
CampaignResult noise_scaling_campaign(const CampaignConfig& cfg, const RunOptions& opts = {});
CampaignResult quench_campaign(const CampaignConfig& cfg, const RunOptions& opts = {});
CampaignResult thermalization_campaign(const CampaignConfig& cfg, const RunOptions& opts = {});
CampaignResult run_campaign(const CampaignConfig& cfg, const RunOptions& opts = {});

// results.csv, realizations.csv (when enabled), histogram.csv (quench) and
// manifest.json.
void write_campaign_outputs(const CampaignResult& result, const std::filesystem::path& dir);

inline constexpr int kMaxCampaignSites = 13;

}  // namespace rydline
