#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occu/baselines.hpp"
#include "occu/disaggregator.hpp"
#include "occu/error.hpp"
#include "occu/evaluation.hpp"
#include "occu/generator.hpp"
#include "occu/synth.hpp"
#include "occu/trainer.hpp"

namespace occu {

// An error annotated with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct RunConfig {
    Scenario scenario = Scenario::separate;
    std::uint64_t seed = 7;
    std::filesystem::path output_dir = "out";

    // Measured input. When series is empty the synthetic generator is used.
    std::filesystem::path series;
    std::filesystem::path schedules; // empty: bundled defaults
    std::filesystem::path holidays;
    std::filesystem::path params;    // trained parameters for infer / whatif
    BuildingMetadata metadata;
    std::size_t train_days = 0;      // measured input only; 0 trains and evaluates on everything

    SimConfig simulation = SimConfig::make_default();
    int building = 0;                // synthetic building index

    PoolSizes pool;
    double tau_min = kDefaultTauMin;
    TrainConfig train;

    bool run_baselines = true;
    int baseline_clusters = 5;
    int hmm_states = 5;
    std::filesystem::path hmm_prior; // empty: built-in prior

    int whatif_start_hour = 20;
    int whatif_end_hour = 24;

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
};

// Reads OCCU_LOG_LEVEL (trace, debug, info, warn, error, off); default warn.
void init_logging();

struct MetricRow {
    std::string method;
    std::string metric;
    double value = 0.0;
};

struct BuildingData {
    std::string name;
    BuildingSeries train;
    BuildingSeries test; // equal to train when no split is configured
    BuildingMetadata metadata;
    std::optional<SimulatedBuilding> truth;
};

// Simulated or loaded data for the configured building, split into periods.
BuildingData prepare_data(const RunConfig& config, int building,
                          const std::optional<ForcedHvac>& forced = std::nullopt);

CandidatePool make_pool(const RunConfig& config);

struct BaselineResult {
    std::string method;
    std::vector<int> levels;     // mapped 3-level labels on the evaluation period
    std::vector<double> ratio;   // ratio estimate (level center for clusterings)
    F1Report f1;
    RmseReport rmse;
};

// Fits every baseline on the training period and scores it on the test period.
std::vector<BaselineResult> run_baselines(const RunConfig& config, const BuildingData& data,
                                          const Discretization& truth);

struct EsComparison {
    std::vector<double> grid_occupied;
    std::vector<double> grid_unoccupied;
    std::vector<double> fitted_occupied;
    std::vector<double> fitted_unoccupied;
    std::vector<double> true_occupied;
    std::vector<double> true_unoccupied;
    double r2_occupied = 0.0;
    double r2_unoccupied = 0.0;
};

// Gate splines against the generator's noiseless HVAC curves. Each gate is
// scored on a grid over the central 95% of the training temperatures seen in
// that HVAC mode, cut to the spline domain (the fit is flat outside it). The spline offset is not identifiable
// from one meter (it trades against the base loads), so each fitted curve is
// shifted to the truth's grid mean before R^2.
EsComparison compare_energy_signature(const DisaggregatorParams& params, const SimBuilding& building,
                                      std::span<const double> occupied_temps,
                                      std::span<const double> unoccupied_temps, std::size_t points = 41);

struct BuildingReport {
    std::string name;
    std::vector<MetricRow> metrics;
};

// simulate/load -> pool -> train -> infer -> evaluate, writing under dir:
// occupancy.csv, system_loads.csv, params.json, metrics.csv, es_curves.csv,
// training_log.csv (plus baselines.csv and summary.txt).
BuildingReport run_building(const RunConfig& config, int building, const std::filesystem::path& dir);

// Single building into output_dir.
BuildingReport run_pipeline(const RunConfig& config);

// Every configured synthetic building in parallel; merged metrics table.
std::vector<BuildingReport> run_portfolio(const RunConfig& config);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<BuildingReport>& reports);
std::string summary_table(const std::vector<BuildingReport>& reports);

struct WhatIfDay {
    HourStamp day_start = 0;
    double kwh_before = 0.0;
    double kwh_after = 0.0;
    int flagged_steps = 0;
};

struct WhatIfReport {
    double kwh_before = 0.0;
    double kwh_after = 0.0;
    double saving_kwh() const { return kwh_before - kwh_after; }
    std::vector<WhatIfDay> days;
    std::vector<double> adjusted_load;
};

// Steps in [start_hour, end_hour) that look occupied-mode (load closer to the
// occupied-spline prediction) but are inferred vacant (P(level 0) >= 0.5) have
// their load replaced by load - B1(T) + B0(T), clamped at zero.
WhatIfReport whatif_setback(const DisaggregatorParams& params, const BuildingSeries& series,
                            const PosteriorSeries& posterior, int start_hour, int end_hour,
                            const LevelSet& levels = LevelSet::quartiles());

struct WhatIfRun {
    WhatIfReport report;
    double injected_kwh = 0.0;
    double relative_error = 0.0;
};

// Synthetic check: train on the clean training period of a lumped building,
// inject always-on HVAC into the test period, and estimate the saving.
WhatIfRun run_whatif_synthetic(const RunConfig& config, const std::filesystem::path& dir);

} // namespace occu
