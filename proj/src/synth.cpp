#include "occu/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "occu/csv.hpp"
#include "occu/error.hpp"
#include "occu/evaluation.hpp"
#include "occu/random.hpp"

namespace occu {

namespace {

constexpr double kLightingZoneArea = 232.0; // m2 per lighting control zone (2500 ft2)

constexpr int kQuarters = 96;

double day_of_year(std::int64_t day) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{day}}};
    const sys_days jan1{ymd.year() / January / 1};
    return static_cast<double>(day - jan1.time_since_epoch().count());
}

double clamp_minutes(double m, double lo, double hi) { return std::clamp(m, lo, hi); }

} // namespace

const char* to_string(Climate climate) {
    switch (climate) {
    case Climate::mild:
        return "mild";
    case Climate::hot:
        return "hot";
    case Climate::cold:
        return "cold";
    }
    return "mild";
}

Climate climate_from_string(const std::string& text) {
    if (text == "mild") return Climate::mild;
    if (text == "hot") return Climate::hot;
    if (text == "cold") return Climate::cold;
    throw DomainError("unknown climate '" + text + "' (expected mild, hot or cold)");
}

ClimatePreset ClimatePreset::of(Climate climate) {
    switch (climate) {
    case Climate::hot:
        return {24.0, 9.0, 7.0, 0.9, 1.2};
    case Climate::cold:
        return {10.0, 14.0, 5.0, 0.9, 1.5};
    case Climate::mild:
        break;
    }
    return {14.0, 4.0, 5.0, 0.9, 1.0};
}

std::vector<double> simulate_weather(std::int64_t start_day, std::size_t days, const ClimatePreset& preset,
                                     std::uint64_t seed) {
    if (days < 1) {
        throw DomainError("weather needs at least one day");
    }
    if (!(std::abs(preset.ar_rho) < 1.0) || preset.noise_std < 0.0) {
        throw DomainError("AR(1) noise needs |rho| < 1 and a non-negative std");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innovation = preset.noise_std * std::sqrt(1.0 - preset.ar_rho * preset.ar_rho);
    double e = preset.noise_std * normal(rng);
    std::vector<double> temps;
    temps.reserve(days * 24);
    for (std::size_t d = 0; d < days; ++d) {
        const double doy = day_of_year(start_day + static_cast<std::int64_t>(d));
        for (int h = 0; h < 24; ++h) {
            const double frac = doy + h / 24.0;
            const double annual = preset.annual_mean -
                                  preset.annual_amplitude * std::cos(2.0 * std::numbers::pi * (frac - 20.0) / 365.25);
            const double diurnal = preset.diurnal_amplitude * std::cos(2.0 * std::numbers::pi * (h - 15) / 24.0);
            if (d > 0 || h > 0) {
                e = preset.ar_rho * e + innovation * normal(rng);
            }
            temps.push_back(annual + diurnal + e);
        }
    }
    return temps;
}

std::vector<double> load_weather_csv(const std::filesystem::path& path) {
    const CsvTable table = CsvTable::read(path);
    const auto c_time = table.require_column("timestamp");
    const auto c_temp = table.require_column("temperature");
    std::vector<double> out;
    HourStamp prev = 0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const HourStamp stamp = parse_timestamp(table.cell(r, c_time));
        if (r > 0 && stamp != prev + 1) {
            throw DataError(path.string() + ":" + std::to_string(table.line_of(r)) +
                            ": weather rows must be consecutive hours");
        }
        prev = stamp;
        out.push_back(table.number(r, c_temp));
    }
    return out;
}

double HvacModel::curve(double temp, double occupied_fraction) const {
    const double f = occupied_fraction + (1.0 - occupied_fraction) * setback;
    return base_kw + f * (cooling_slope * std::max(0.0, temp - breakpoint_c) +
                          heating_slope * std::max(0.0, breakpoint_c - temp));
}

void SimBuilding::validate() const {
    if (!(floor_area > 0.0)) {
        throw DomainError("floor area must be positive");
    }
    if (zone_count < 1 || occupant_count < 1) {
        throw DomainError("a building needs at least one zone and one occupant");
    }
    if (light_intensity < 0.0 || plug_intensity < 0.0 || light_base_kw < 0.0 || plug_base_kw < 0.0 ||
        hvac.base_kw < 0.0 || hvac.cooling_slope < 0.0 || hvac.heating_slope < 0.0) {
        throw DomainError("building capacities must be non-negative");
    }
    if (!(hvac.setback >= 0.0 && hvac.setback <= 1.0)) {
        throw DomainError("setback factor must lie in [0, 1]");
    }
    if (!(regular_fraction >= 0.0 && regular_fraction <= 1.0)) {
        throw DomainError("regular occupant fraction must lie in [0, 1]");
    }
}

BuildingMetadata SimBuilding::metadata() const { return {floor_area, 8.0, 8.0}; }

SimBuilding sample_building(int index, Climate climate, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x6275696c64ULL, static_cast<std::uint64_t>(index)));
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    SimBuilding b;
    b.name = "bldg" + std::to_string(index);
    b.climate = climate;
    b.floor_area = std::round(u(2000.0, 6000.0));
    b.occupant_count = static_cast<int>(std::lround(b.floor_area / 18.0));
    b.zone_count = std::max(8, static_cast<int>(std::ceil(b.floor_area / kLightingZoneArea)));
    b.light_intensity = u(6.5, 10.5);
    b.plug_intensity = u(6.5, 10.5);
    b.light_base_kw = 0.05 * b.light_capacity_kw();
    b.plug_base_kw = 0.15 * b.plug_capacity_kw();
    b.hvac.base_kw = b.floor_area * u(0.5, 1.0) / 1000.0;
    b.hvac.breakpoint_c = u(16.0, 19.0);
    b.hvac.cooling_slope = b.floor_area * u(1.5, 2.5) / 1000.0;
    b.hvac.heating_slope = b.floor_area * u(1.0, 2.0) / 1000.0;
    b.hvac.setback = u(0.2, 0.4);
    b.light_noise_kw = 0.01 * b.light_capacity_kw();
    b.plug_noise_kw = 0.01 * b.plug_capacity_kw();
    b.hvac_noise_kw = 0.2 * b.hvac.base_kw;
    return b;
}

OccupancySim simulate_occupancy(const SimBuilding& building, std::int64_t start_day, std::size_t days,
                                std::uint64_t seed, const HolidaySet& holidays, const OccupancyOptions& opt) {
    building.validate();
    if (days < 1) {
        throw DomainError("occupancy needs at least one day");
    }
    const int n = building.occupant_count;
    const int zones = building.zone_count;
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Fixed desk zones and group membership.
    std::vector<int> zone(n);
    std::vector<bool> regular(n);
    const int n_regular = static_cast<int>(std::lround(building.regular_fraction * n));
    std::uniform_int_distribution<int> pick_zone(0, zones - 1);
    for (int i = 0; i < n; ++i) {
        zone[i] = pick_zone(rng);
        regular[i] = i < n_regular;
    }
    const int crew = static_cast<int>(std::lround(opt.non_working_share * n));

    OccupancySim out;
    out.quarter_ratio.assign(days * kQuarters, 0.0);
    out.ratio.assign(days * 24, 0.0);
    out.lit_fraction.assign(days * 24, 0.0);
    out.day_type.assign(days * 24, DayType::working);

    std::vector<int> zone_count(static_cast<std::size_t>(kQuarters) * zones);
    std::vector<int> present(kQuarters);
    auto occupy = [&](int who, double arrive_min, double leave_min) {
        for (int q = 0; q < kQuarters; ++q) {
            const double t = q * 15.0;
            if (t >= arrive_min && t < leave_min) {
                ++present[q];
                ++zone_count[static_cast<std::size_t>(q) * zones + zone[who]];
            }
        }
    };
    auto unoccupy = [&](int who, double from_min, double to_min) {
        for (int q = 0; q < kQuarters; ++q) {
            const double t = q * 15.0;
            if (t >= from_min && t < to_min) {
                --present[q];
                --zone_count[static_cast<std::size_t>(q) * zones + zone[who]];
            }
        }
    };

    for (std::size_t d = 0; d < days; ++d) {
        const DayType type = classify_day(start_day + static_cast<std::int64_t>(d), holidays);
        std::fill(zone_count.begin(), zone_count.end(), 0);
        std::fill(present.begin(), present.end(), 0);
        if (type == DayType::working) {
            for (int i = 0; i < n; ++i) {
                if (unif(rng) >= opt.attendance) {
                    continue;
                }
                const double arr_mu = regular[i] ? 8.5 * 60 : 9.5 * 60;
                const double dep_mu = regular[i] ? 18.25 * 60 : 17.0 * 60;
                const double sigma = regular[i] ? 30.0 : 60.0;
                const double arrive = clamp_minutes(arr_mu + sigma * normal(rng), 5.0 * 60, 13.0 * 60);
                const double leave = clamp_minutes(dep_mu + sigma * normal(rng), arrive + 60.0, 23.0 * 60);
                occupy(i, arrive, leave);
                if (unif(rng) < opt.lunch_share) {
                    const double out_at = 12.0 * 60 + 15.0 * normal(rng);
                    const double back = out_at + 40.0;
                    if (out_at > arrive && back < leave) {
                        unoccupy(i, out_at, back);
                    }
                }
            }
        } else if (crew > 0) {
            // A skeleton crew drawn from one zone (topped up from others).
            const int duty_zone = pick_zone(rng);
            std::vector<int> members;
            std::vector<int> others;
            for (int i = 0; i < n; ++i) {
                (zone[i] == duty_zone ? members : others).push_back(i);
            }
            std::shuffle(members.begin(), members.end(), rng);
            std::shuffle(others.begin(), others.end(), rng);
            members.insert(members.end(), others.begin(), others.end());
            for (int c = 0; c < crew; ++c) {
                const double arrive = 10.0 * 60 + 30.0 * normal(rng);
                const double leave = std::max(arrive + 60.0, 15.0 * 60 + 30.0 * normal(rng));
                occupy(members[c], arrive, leave);
            }
        }

        std::vector<bool> lit_prev(zones, false);
        for (int q = 0; q < kQuarters; ++q) {
            const std::size_t qi = d * kQuarters + q;
            out.quarter_ratio[qi] = static_cast<double>(present[q]) / n;
            int lit = 0;
            for (int z = 0; z < zones; ++z) {
                const bool occ = zone_count[static_cast<std::size_t>(q) * zones + z] > 0;
                // 15-minute delay-off: a zone stays lit for the quarter after it empties.
                if (occ || lit_prev[z]) {
                    ++lit;
                }
                lit_prev[z] = occ;
            }
            const std::size_t hi = d * 24 + q / 4;
            out.ratio[hi] += out.quarter_ratio[qi] / 4.0;
            out.lit_fraction[hi] += static_cast<double>(lit) / zones / 4.0;
        }
        for (int h = 0; h < 24; ++h) {
            out.day_type[d * 24 + h] = type;
        }
    }
    return out;
}

LoadSim simulate_loads(const SimBuilding& building, const OccupancySim& occupancy,
                       std::span<const double> temperature, std::int64_t start_day, std::uint64_t seed,
                       const std::optional<ForcedHvac>& forced) {
    building.validate();
    const std::size_t hours = occupancy.ratio.size();
    if (temperature.size() != hours || occupancy.quarter_ratio.size() != hours * 4) {
        throw DimensionError("occupancy and weather are misaligned");
    }
    if (forced && !(0 <= forced->start_hour && forced->start_hour < forced->end_hour && forced->end_hour <= 24)) {
        throw DomainError("forced HVAC interval must lie within 0-24h");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    LoadSim out;
    BuildingSeries& s = out.series;
    s.timestamps.resize(hours);
    s.temperature.assign(temperature.begin(), temperature.end());
    s.occupancy = occupancy.ratio;
    s.day_type = occupancy.day_type;
    s.lighting.resize(hours);
    s.plug.resize(hours);
    s.hvac.resize(hours);
    s.load.resize(hours);
    out.hvac_waste.assign(hours, 0.0);

    const double light_cap = building.light_capacity_kw();
    const double plug_cap = building.plug_capacity_kw();
    for (std::size_t t = 0; t < hours; ++t) {
        s.timestamps[t] = start_day * 24 + static_cast<HourStamp>(t);
        const int hour = static_cast<int>(t % 24);
        const std::size_t day = t / 24;
        double mode = 0.0;
        for (int q = 0; q < 4; ++q) {
            if (occupancy.quarter_ratio[t * 4 + q] >= building.hvac.occupied_ratio) {
                mode += 0.25;
            }
        }
        double forced_mode = mode;
        if (forced && day >= forced->first_day && s.day_type[t] == DayType::working &&
            hour >= forced->start_hour && hour < forced->end_hour) {
            forced_mode = 1.0;
        }
        const double e_light = building.light_noise_kw * normal(rng);
        const double e_plug = building.plug_noise_kw * normal(rng);
        const double e_hvac = building.hvac_noise_kw * normal(rng);
        s.lighting[t] = std::max(0.0, light_cap * occupancy.lit_fraction[t] + building.light_base_kw + e_light);
        s.plug[t] = std::max(0.0, plug_cap * occupancy.ratio[t] + building.plug_base_kw + e_plug);
        const double clean = std::max(0.0, building.hvac.curve(temperature[t], mode) + e_hvac);
        s.hvac[t] = std::max(0.0, building.hvac.curve(temperature[t], forced_mode) + e_hvac);
        out.hvac_waste[t] = s.hvac[t] - clean;
        s.load[t] = s.lighting[t] + s.plug[t] + s.hvac[t];
    }
    s.validate();
    return out;
}

BuildingSeries scenario_view(const BuildingSeries& full, Scenario scenario) {
    if (!full.has_systems()) {
        throw DataError("scenario views need per-system loads");
    }
    BuildingSeries s = full;
    if (scenario == Scenario::separate) {
        for (std::size_t t = 0; t < s.size(); ++t) {
            s.load[t] = s.lighting[t] + s.plug[t];
        }
    } else {
        for (std::size_t t = 0; t < s.size(); ++t) {
            s.load[t] = s.lighting[t] + s.plug[t] + s.hvac[t];
        }
    }
    return s;
}

SimConfig SimConfig::make_default() {
    SimConfig c;
    c.start_day = parse_date("2023-02-01");
    return c;
}

SimulatedBuilding simulate_building(const SimConfig& config, int index, const std::optional<ForcedHvac>& forced) {
    if (index < 0 || static_cast<std::size_t>(index) >= config.climates.size()) {
        throw DomainError("building index outside the configured climates");
    }
    const auto idx = static_cast<std::uint64_t>(index);
    SimulatedBuilding out;
    out.building = sample_building(index, config.climates[idx], config.seed);
    const auto days = config.days();
    const auto weather = simulate_weather(config.start_day, days, ClimatePreset::of(out.building.climate),
                                          derive_seed(config.seed, 1, idx));
    const auto occ = simulate_occupancy(out.building, config.start_day, days, derive_seed(config.seed, 2, idx));
    out.sim = simulate_loads(out.building, occ, weather, config.start_day, derive_seed(config.seed, 3, idx), forced);
    const auto disc = discretize_truth(out.sim.series.occupancy, derive_seed(config.seed, 4, idx));
    out.truth_cut1 = disc.thresholds.cut1;
    out.truth_cut2 = disc.thresholds.cut2;
    return out;
}

nlohmann::json building_to_json(const SimBuilding& b) {
    return {{"name", b.name},
            {"climate", to_string(b.climate)},
            {"floor_area_m2", b.floor_area},
            {"zone_count", b.zone_count},
            {"occupant_count", b.occupant_count},
            {"regular_fraction", b.regular_fraction},
            {"light_intensity_w_m2", b.light_intensity},
            {"plug_intensity_w_m2", b.plug_intensity},
            {"light_base_kw", b.light_base_kw},
            {"plug_base_kw", b.plug_base_kw},
            {"hvac",
             {{"base_kw", b.hvac.base_kw},
              {"breakpoint_c", b.hvac.breakpoint_c},
              {"cooling_slope_kw_per_c", b.hvac.cooling_slope},
              {"heating_slope_kw_per_c", b.hvac.heating_slope},
              {"setback", b.hvac.setback},
              {"occupied_ratio", b.hvac.occupied_ratio}}},
            {"noise_std_kw", {{"lighting", b.light_noise_kw}, {"plug", b.plug_noise_kw}, {"hvac", b.hvac_noise_kw}}}};
}

SimBuilding building_from_json(const nlohmann::json& j) {
    SimBuilding b;
    b.name = j.value("name", b.name);
    b.climate = climate_from_string(j.value("climate", std::string("mild")));
    b.floor_area = j.at("floor_area_m2").get<double>();
    b.zone_count = j.value("zone_count", b.zone_count);
    b.occupant_count = j.value("occupant_count", b.occupant_count);
    b.regular_fraction = j.value("regular_fraction", b.regular_fraction);
    b.light_intensity = j.value("light_intensity_w_m2", b.light_intensity);
    b.plug_intensity = j.value("plug_intensity_w_m2", b.plug_intensity);
    b.light_base_kw = j.value("light_base_kw", b.light_base_kw);
    b.plug_base_kw = j.value("plug_base_kw", b.plug_base_kw);
    if (j.contains("hvac")) {
        const auto& h = j.at("hvac");
        b.hvac.base_kw = h.value("base_kw", b.hvac.base_kw);
        b.hvac.breakpoint_c = h.value("breakpoint_c", b.hvac.breakpoint_c);
        b.hvac.cooling_slope = h.value("cooling_slope_kw_per_c", b.hvac.cooling_slope);
        b.hvac.heating_slope = h.value("heating_slope_kw_per_c", b.hvac.heating_slope);
        b.hvac.setback = h.value("setback", b.hvac.setback);
        b.hvac.occupied_ratio = h.value("occupied_ratio", b.hvac.occupied_ratio);
    }
    if (j.contains("noise_std_kw")) {
        const auto& n = j.at("noise_std_kw");
        b.light_noise_kw = n.value("lighting", b.light_noise_kw);
        b.plug_noise_kw = n.value("plug", b.plug_noise_kw);
        b.hvac_noise_kw = n.value("hvac", b.hvac_noise_kw);
    }
    b.validate();
    return b;
}

nlohmann::json truth_sidecar(const SimulatedBuilding& sim, const SimConfig& config) {
    const auto& b = sim.building;
    double waste = 0.0;
    for (double w : sim.sim.hvac_waste) {
        waste += w;
    }
    return {{"building", building_to_json(b)},
            {"capacities_kw",
             {{"light_dynamic", b.light_capacity_kw()},
              {"light_base", b.light_base_kw},
              {"plug_dynamic", b.plug_capacity_kw()},
              {"plug_base", b.plug_base_kw}}},
            {"energy_signature",
             {{"form", "base + f * (cooling * max(0, T - bp) + heating * max(0, bp - T)); f = 1 occupied, "
                       "f = setback unoccupied"}}},
            {"truth_thresholds", {sim.truth_cut1, sim.truth_cut2}},
            {"injected_hvac_waste_kwh", waste},
            {"generator",
             {{"seed", config.seed},
              {"start", format_timestamp(config.start_day * 24)},
              {"train_days", config.train_days},
              {"test_days", config.test_days},
              {"placeholders", "60/40 regular/flexible split, 8 zones, area/18 occupants"}}}};
}

} // namespace occu
