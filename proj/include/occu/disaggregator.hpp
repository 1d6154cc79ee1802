#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occu/bspline.hpp"
#include "occu/gm.hpp"

namespace occu {

enum class Scenario { separate, lumped };
enum class System { plug, lighting };

const char* to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& text);

// Load-model parameters in kW. The four capacity fields are unconstrained and
// act through max(0, x); obs_variance is the metering noise added to every
// total component.
struct DisaggregatorParams {
    double plug_dynamic = 0.0;
    double plug_base = 0.0;
    double light_dynamic = 0.0;
    double light_base = 0.0;
    std::vector<double> spline_occupied;
    std::vector<double> spline_unoccupied;
    double temp_mean = 0.0;
    double temp_std = 1.0;
    double obs_variance = 1e-4;
    SplineConfig spline;
    int epochs_trained = 0;

    double plug_dynamic_kw() const { return plug_dynamic > 0.0 ? plug_dynamic : 0.0; }
    double plug_base_kw() const { return plug_base > 0.0 ? plug_base : 0.0; }
    double light_dynamic_kw() const { return light_dynamic > 0.0 ? light_dynamic : 0.0; }
    double light_base_kw() const { return light_base > 0.0 ? light_base : 0.0; }

    void validate() const;
    bool operator==(const DisaggregatorParams&) const = default;
};

// Gate used by component k of an occupancy mixture: the zero level runs the
// unoccupied spline, every other level the occupied one.
inline bool occupied_gate(std::size_t component) { return component != 0; }

// z-score against the training statistics, clipped to the spline domain.
double normalize_temperature(double temp, const DisaggregatorParams& params);

// Unoccupied (gate 0) or occupied (gate 1) spline value at a temperature.
double gate_spline(double temp, const DisaggregatorParams& params, bool occupied);

GaussianMixture1D occupant_forward(const GaussianMixture1D& occupancy, const DisaggregatorParams& params,
                                   System system, const LevelSet& levels);

GaussianMixture1D weather_forward(const GaussianMixture1D& occupancy, double temp,
                                  const DisaggregatorParams& params);

struct ForwardResult {
    GaussianMixture1D plug;
    GaussianMixture1D lighting;
    std::optional<GaussianMixture1D> weather;
    GaussianMixture1D total; // component-aligned sum of the systems above
};

ForwardResult total_forward(const GaussianMixture1D& occupancy, double temp,
                            const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels);

// Distribution of the metered value: total plus observation noise.
GaussianMixture1D observation_mixture(const GaussianMixture1D& total, const DisaggregatorParams& params);

struct BuildingMetadata {
    double floor_area = 1000.0;    // m2
    double light_intensity = 8.0;  // W/m2
    double plug_intensity = 8.0;   // W/m2
};

// Capacities from metadata, bases at 10% of dynamic, zero splines, and a
// noise variance of (1% of peak load)^2.
DisaggregatorParams init_params(const BuildingMetadata& meta, double temp_mean, double temp_std,
                                double peak_load, const SplineConfig& spline = {});

nlohmann::json params_to_json(const DisaggregatorParams& params);
DisaggregatorParams params_from_json(const nlohmann::json& j);
void save_params_json(const std::filesystem::path& path, const DisaggregatorParams& params,
                      const nlohmann::json& config_echo = nlohmann::json::object());
DisaggregatorParams load_params_json(const std::filesystem::path& path);

} // namespace occu
