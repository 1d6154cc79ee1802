#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occu/error.hpp"
#include "occu/synth.hpp"

using namespace occu;

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double lag1(std::span<const double> v) {
    const double m = mean_of(v);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - m) * (v[i] - m);
        if (i > 0) num += (v[i] - m) * (v[i - 1] - m);
    }
    return num / den;
}

struct OccupancyFixture {
    SimBuilding building;
    OccupancySim occ;
};

const OccupancyFixture& occupancy_fixture() {
    static const OccupancyFixture f = [] {
        OccupancyFixture x;
        x.building = sample_building(0, Climate::mild, 3);
        x.occ = simulate_occupancy(x.building, parse_date("2023-03-06"), 56, 21);
        return x;
    }();
    return f;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("occupancy follows the office day") {
    const auto& f = occupancy_fixture();
    const auto& occ = f.occ;
    REQUIRE(occ.ratio.size() == 56 * 24);
    REQUIRE(occ.quarter_ratio.size() == 56 * 96);
    double daytime = 0.0;
    std::size_t daytime_n = 0;
    double non_working_max = 0.0;
    for (std::size_t t = 0; t < occ.ratio.size(); ++t) {
        const auto hour = t % 24;
        CHECK(occ.ratio[t] >= 0.0);
        CHECK(occ.ratio[t] <= 1.0);
        if (occ.day_type[t] == DayType::working) {
            if (hour == 3) CHECK(occ.ratio[t] == 0.0);
            if (hour >= 10 && hour <= 16) {
                daytime += occ.ratio[t];
                ++daytime_n;
            }
        } else {
            non_working_max = std::max(non_working_max, occ.ratio[t]);
        }
    }
    CHECK(non_working_max <= 0.07);
    const double m = daytime / static_cast<double>(daytime_n);
    CHECK(m >= 0.6);
    CHECK(m <= 1.0);
}

TEST_CASE("hourly ratio is the mean of its quarters") {
    const auto& occ = occupancy_fixture().occ;
    for (std::size_t t = 0; t < occ.ratio.size(); t += 7) {
        const double q = (occ.quarter_ratio[4 * t] + occ.quarter_ratio[4 * t + 1] + occ.quarter_ratio[4 * t + 2] +
                          occ.quarter_ratio[4 * t + 3]) / 4.0;
        CHECK(occ.ratio[t] == doctest::Approx(q));
    }
}

TEST_CASE("lighting runs ahead of occupancy") {
    const auto& occ = occupancy_fixture().occ;
    double lit = 0.0, present = 0.0;
    for (std::size_t t = 0; t < occ.ratio.size(); ++t) {
        CHECK(occ.lit_fraction[t] >= 0.0);
        CHECK(occ.lit_fraction[t] <= 1.0);
        // Delay-off keeps a zone lit for one quarter after it empties.
        const bool dark_before = t == 0 || occ.quarter_ratio[4 * t - 1] == 0.0;
        if (occ.ratio[t] == 0.0 && dark_before) CHECK(occ.lit_fraction[t] == 0.0);
        if (occ.day_type[t] == DayType::working && t % 24 >= 8 && t % 24 <= 18) {
            lit += occ.lit_fraction[t];
            present += occ.ratio[t];
        }
    }
    CHECK(lit >= present);
}

TEST_CASE("lumped load is the exact sum of the systems") {
    SimConfig cfg = SimConfig::make_default();
    cfg.train_days = 14;
    cfg.test_days = 7;
    cfg.climates = {Climate::cold};
    const auto sim = simulate_building(cfg, 0);
    const auto& s = sim.sim.series;
    REQUIRE(s.size() == 21 * 24);
    const auto lumped = scenario_view(s, Scenario::lumped);
    const auto separate = scenario_view(s, Scenario::separate);
    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(lumped.load[t] == s.lighting[t] + s.plug[t] + s.hvac[t]);
        CHECK(separate.load[t] == s.lighting[t] + s.plug[t]);
        CHECK(s.hvac[t] >= 0.0);
    }
    BuildingSeries bare = s;
    bare.lighting.clear();
    bare.plug.clear();
    bare.hvac.clear();
    CHECK_THROWS_AS(scenario_view(bare, Scenario::lumped), DataError);
}

TEST_CASE("weather noise is AR(1) with the preset parameters") {
    ClimatePreset p = ClimatePreset::of(Climate::mild);
    p.annual_amplitude = 0.0;
    p.diurnal_amplitude = 0.0;
    const auto temps = simulate_weather(0, 365, p, 99);
    REQUIRE(temps.size() == 365 * 24);
    CHECK(std::abs(lag1(temps) - p.ar_rho) < 0.05);
    CHECK(mean_of(temps) == doctest::Approx(p.annual_mean).epsilon(0.02));
    double var = 0.0;
    const double m = mean_of(temps);
    for (double v : temps) var += (v - m) * (v - m);
    CHECK(std::sqrt(var / temps.size()) == doctest::Approx(p.noise_std).epsilon(0.1));
    p.ar_rho = 1.0;
    CHECK_THROWS_AS(simulate_weather(0, 10, p, 1), DomainError);
}

TEST_CASE("climate presets are ordered") {
    const auto hot = ClimatePreset::of(Climate::hot);
    const auto mild = ClimatePreset::of(Climate::mild);
    const auto cold = ClimatePreset::of(Climate::cold);
    CHECK(hot.annual_mean > mild.annual_mean);
    CHECK(mild.annual_mean > cold.annual_mean);
    const std::int64_t start = parse_date("2023-01-01");
    const double th = mean_of(simulate_weather(start, 365, hot, 1));
    const double tm = mean_of(simulate_weather(start, 365, mild, 1));
    const double tc = mean_of(simulate_weather(start, 365, cold, 1));
    CHECK(th > tm);
    CHECK(tm > tc);
    // Daily maximum near 15h, coldest month around January.
    ClimatePreset quiet = mild;
    quiet.noise_std = 0.0;
    const auto day = simulate_weather(start + 100, 1, quiet, 1);
    CHECK(std::max_element(day.begin(), day.end()) - day.begin() == 15);
    const auto jan = simulate_weather(start + 19, 1, quiet, 1);
    const auto jul = simulate_weather(start + 200, 1, quiet, 1);
    CHECK(mean_of(jan) < mean_of(jul));
    CHECK(climate_from_string("hot") == Climate::hot);
    CHECK_THROWS_AS(climate_from_string("tropical"), DomainError);
}

TEST_CASE("HVAC curve examples") {
    HvacModel h;
    CHECK(h.curve(18.0, 1.0) == doctest::Approx(2.0));
    CHECK(h.curve(23.0, 1.0) == doctest::Approx(2.0 + 4.0 * 5.0));
    CHECK(h.curve(8.0, 1.0) == doctest::Approx(2.0 + 2.0 * 10.0));
    CHECK(h.curve(23.0, 0.0) == doctest::Approx(2.0 + 0.3 * 20.0));
    CHECK(h.curve(23.0, 0.5) == doctest::Approx(2.0 + 0.65 * 20.0));
}

TEST_CASE("forced HVAC adds waste only inside its interval") {
    SimConfig cfg = SimConfig::make_default();
    cfg.train_days = 14;
    cfg.test_days = 14;
    cfg.climates = {Climate::hot};
    const ForcedHvac forced{20, 24, 14};
    const auto sim = simulate_building(cfg, 0, forced);
    const auto& s = sim.sim.series;
    double waste = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const auto hour = static_cast<int>(t % 24);
        const bool inside = t / 24 >= 14 && s.day_type[t] == DayType::working && hour >= 20;
        CHECK(sim.sim.hvac_waste[t] >= 0.0);
        if (!inside) CHECK(sim.sim.hvac_waste[t] == 0.0);
        waste += sim.sim.hvac_waste[t];
    }
    CHECK(waste > 0.0);
    const auto clean = simulate_building(cfg, 0);
    for (std::size_t t = 0; t < 14 * 24; ++t) CHECK(clean.sim.series.load[t] == s.load[t]);
}

TEST_CASE("simulation is deterministic under a seed") {
    SimConfig cfg = SimConfig::make_default();
    cfg.train_days = 14;
    cfg.test_days = 7;
    const auto a = simulate_building(cfg, 1);
    const auto b = simulate_building(cfg, 1);
    CHECK(a.sim.series == b.sim.series);
    CHECK(a.truth_cut1 == b.truth_cut1);
    cfg.seed = 8;
    const auto c = simulate_building(cfg, 1);
    CHECK_FALSE(a.sim.series == c.sim.series);
    CHECK_THROWS_AS(simulate_building(cfg, 5), DomainError);
}

TEST_CASE("sampled buildings and their JSON") {
    for (auto climate : {Climate::mild, Climate::hot, Climate::cold}) {
        const auto b = sample_building(2, climate, 17);
        b.validate();
        CHECK(b.climate == climate);
        CHECK(b.zone_count == std::max(8, static_cast<int>(std::ceil(b.floor_area / 232.0))));
        const auto back = building_from_json(building_to_json(b));
        CHECK(back.floor_area == b.floor_area);
        CHECK(back.zone_count == b.zone_count);
        CHECK(back.hvac.cooling_slope == b.hvac.cooling_slope);
        CHECK(back.metadata().floor_area == b.floor_area);
    }
    SimBuilding bad;
    bad.floor_area = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

}
