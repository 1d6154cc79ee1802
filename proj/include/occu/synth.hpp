#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occu/disaggregator.hpp"
#include "occu/series.hpp"

namespace occu {

enum class Climate { mild, hot, cold };

const char* to_string(Climate climate);
Climate climate_from_string(const std::string& text);

struct ClimatePreset {
    double annual_mean = 14.0;      // degC
    double annual_amplitude = 4.0;  // coldest around 20 January
    double diurnal_amplitude = 5.0; // daily maximum at 15h
    double ar_rho = 0.9;            // lag-1 autocorrelation of the hourly noise
    double noise_std = 1.0;         // stationary std of the noise, degC

    static ClimatePreset of(Climate climate);
};

// Hourly outdoor temperature for `days` days starting at day index start_day.
std::vector<double> simulate_weather(std::int64_t start_day, std::size_t days, const ClimatePreset& preset,
                                     std::uint64_t seed);

// timestamp,temperature CSV for users with measured weather.
std::vector<double> load_weather_csv(const std::filesystem::path& path);

struct HvacModel {
    double base_kw = 2.0;
    double breakpoint_c = 18.0;
    double cooling_slope = 4.0;  // kW/degC above the breakpoint
    double heating_slope = 2.0;  // kW/degC below the breakpoint
    double setback = 0.3;        // slope multiplier in unoccupied mode
    double occupied_ratio = 0.15; // occupied mode while at least this share is present

    // Noiseless HVAC load at a temperature for a given occupied-mode fraction.
    double curve(double temp, double occupied_fraction) const;
};

struct SimBuilding {
    std::string name = "bldg";
    Climate climate = Climate::mild;
    double floor_area = 3000.0; // m2
    int zone_count = 8;
    int occupant_count = 167;
    double regular_fraction = 0.6;
    double light_intensity = 8.0; // W/m2
    double plug_intensity = 8.0;
    double light_base_kw = 1.0;
    double plug_base_kw = 3.0;
    HvacModel hvac;
    double light_noise_kw = 0.2;
    double plug_noise_kw = 0.2;
    double hvac_noise_kw = 0.3;

    double light_capacity_kw() const { return light_intensity * floor_area / 1000.0; }
    double plug_capacity_kw() const { return plug_intensity * floor_area / 1000.0; }
    void validate() const;
    BuildingMetadata metadata() const; // area with the nominal 8 W/m2 intensities
};

// Draws a building of the given climate from the generator's priors.
SimBuilding sample_building(int index, Climate climate, std::uint64_t seed);

struct OccupancySim {
    std::vector<double> quarter_ratio; // present / total, 15-min grid
    std::vector<double> ratio;         // hourly means of quarter_ratio
    std::vector<double> lit_fraction;  // hourly mean share of lit zones
    std::vector<DayType> day_type;     // per hour
};

struct OccupancyOptions {
    double attendance = 0.97;        // chance a regular occupant comes in on a working day
    double lunch_share = 0.5;        // share of attendees leaving for lunch
    double non_working_share = 0.05; // occupants present on non-working days
};

OccupancySim simulate_occupancy(const SimBuilding& building, std::int64_t start_day, std::size_t days,
                                std::uint64_t seed, const HolidaySet& holidays = {},
                                const OccupancyOptions& opt = {});

// HVAC kept in occupied mode during [start_hour, end_hour) of working days
// from first_day on, whatever the occupancy.
struct ForcedHvac {
    int start_hour = 20;
    int end_hour = 24;
    std::size_t first_day = 0;
};

struct LoadSim {
    BuildingSeries series;          // load = lighting + plug + hvac
    std::vector<double> hvac_waste; // kW per hour added by the forced interval
};

LoadSim simulate_loads(const SimBuilding& building, const OccupancySim& occupancy,
                       std::span<const double> temperature, std::int64_t start_day, std::uint64_t seed,
                       const std::optional<ForcedHvac>& forced = std::nullopt);

// Occupants and systems: the series metered in the given scenario.
// separate: load = lighting + plug; lumped: load = lighting + plug + hvac.
BuildingSeries scenario_view(const BuildingSeries& full, Scenario scenario);

struct SimConfig {
    std::int64_t start_day = 0; // days since epoch; defaults to 2023-02-01 in make_default
    std::size_t train_days = 180;
    std::size_t test_days = 60;
    std::uint64_t seed = 7;
    std::vector<Climate> climates{Climate::mild, Climate::hot, Climate::cold};

    static SimConfig make_default();
    std::size_t days() const { return train_days + test_days; }
};

struct SimulatedBuilding {
    SimBuilding building;
    LoadSim sim;
    double truth_cut1 = 0.0; // thresholds from the whole-period truth
    double truth_cut2 = 0.0;
};

SimulatedBuilding simulate_building(const SimConfig& config, int index,
                                    const std::optional<ForcedHvac>& forced = std::nullopt);

nlohmann::json building_to_json(const SimBuilding& building);
SimBuilding building_from_json(const nlohmann::json& j);
// Ground-truth sidecar: building parameters, capacities, ES curves, thresholds.
nlohmann::json truth_sidecar(const SimulatedBuilding& sim, const SimConfig& config);

} // namespace occu
