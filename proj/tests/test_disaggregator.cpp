#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "occu/bspline.hpp"
#include "occu/disaggregator.hpp"
#include "occu/error.hpp"

using namespace occu;

namespace {

DisaggregatorParams sample_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 20.0);
    std::normal_distribution<double> n(0.0, 5.0);
    DisaggregatorParams p;
    p.plug_dynamic = u(rng);
    p.plug_base = u(rng);
    p.light_dynamic = u(rng);
    p.light_base = u(rng);
    p.spline_occupied.resize(7);
    p.spline_unoccupied.resize(7);
    for (auto& c : p.spline_occupied) c = n(rng);
    for (auto& c : p.spline_unoccupied) c = n(rng);
    p.temp_mean = 15.0;
    p.temp_std = 6.0;
    p.obs_variance = 0.3;
    return p;
}

GaussianMixture1D occupancy(std::vector<double> probs) {
    return gm_from_categorical(probs, LevelSet::quartiles());
}

} // namespace

TEST_SUITE("disaggregator") {

TEST_CASE("occupant_forward examples") {
    const LevelSet levels = LevelSet::quartiles();
    DisaggregatorParams p = sample_params(1);
    p.plug_dynamic = 10.0;
    p.plug_base = 2.0;
    p.light_dynamic = 10.0;
    p.light_base = 2.0;
    const auto vacant = occupancy({1, 0, 0, 0});
    CHECK(occupant_forward(vacant, p, System::plug, levels).mean() == doctest::Approx(10.0 * 0.02 + 2.0));
    const auto full = occupancy({0, 0, 0, 1});
    CHECK(occupant_forward(full, p, System::lighting, levels).mean() == doctest::Approx(10.0 * 0.98 + 2.0));
    const auto half = occupancy({0.5, 0.5, 0, 0});
    const double plug = occupant_forward(half, p, System::plug, levels).mean();
    const double light = occupant_forward(half, p, System::lighting, levels).mean();
    CHECK(light > plug);
    CHECK(light == doctest::Approx(0.5 * (0.2 + 2.0) + 0.5 * (9.8 + 2.0)));
}

TEST_CASE("negative raw capacities clamp to zero") {
    const LevelSet levels = LevelSet::quartiles();
    DisaggregatorParams p = sample_params(2);
    p.plug_dynamic = -3.0;
    p.plug_base = -1.0;
    const auto g = occupant_forward(occupancy({0.1, 0.2, 0.3, 0.4}), p, System::plug, levels);
    for (double m : g.means()) CHECK(m == 0.0);
    CHECK(p.plug_dynamic_kw() == 0.0);
}

TEST_CASE("weather_forward examples") {
    DisaggregatorParams p = sample_params(3);
    const auto z = occupancy({0.3, 0.2, 0.1, 0.4});
    const double b0 = gate_spline(22.0, p, false);
    const double b1 = gate_spline(22.0, p, true);
    const auto w = weather_forward(z, 22.0, p);
    CHECK(w.means()[0] == doctest::Approx(b0));
    for (std::size_t k = 1; k < 4; ++k) CHECK(w.means()[k] == doctest::Approx(b1));
    CHECK(weather_forward(occupancy({1, 0, 0, 0}), 22.0, p).mean() == doctest::Approx(b0));

    p.spline_occupied = p.spline_unoccupied;
    const double m1 = weather_forward(occupancy({0.9, 0.1, 0, 0}), 8.0, p).mean();
    const double m2 = weather_forward(occupancy({0.0, 0.0, 0.2, 0.8}), 8.0, p).mean();
    CHECK(m1 == doctest::Approx(m2));
}

TEST_CASE("spline reproduces a piecewise-linear signature at basis-aligned points") {
    // Cooling signature, flat below 18 degC and 1.5 kW/degC above.
    SplineConfig cfg;
    DisaggregatorParams p = sample_params(4);
    const auto greville = [&](std::size_t j) {
        const auto t = cfg.knots();
        double s = 0.0;
        for (int i = 1; i <= cfg.order; ++i) s += t[j + i];
        return s / cfg.order;
    };
    Eigen::MatrixXd A(7, 7);
    Eigen::VectorXd y(7);
    std::vector<double> temps;
    for (std::size_t i = 0; i < 7; ++i) {
        const double z = greville(i);
        const double temp = p.temp_mean + z * p.temp_std;
        temps.push_back(temp);
        const auto b = bspline_basis(z, cfg);
        for (std::size_t j = 0; j < 7; ++j) A(i, j) = b[j];
        y(i) = 3.0 + 1.5 * std::max(0.0, temp - 18.0);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    p.spline_occupied.assign(c.data(), c.data() + 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(std::abs(gate_spline(temps[i], p, true) - y(i)) < 1e-6);
    }
}

TEST_CASE("total_forward sums the systems") {
    const LevelSet levels = LevelSet::quartiles();
    const DisaggregatorParams p = sample_params(5);
    const auto z = occupancy({0.1, 0.3, 0.2, 0.4});
    const auto lumped = total_forward(z, 27.0, p, Scenario::lumped, levels);
    REQUIRE(lumped.weather.has_value());
    CHECK(lumped.total.mean() ==
          doctest::Approx(lumped.plug.mean() + lumped.lighting.mean() + lumped.weather->mean()));
    const auto a = total_forward(z, -5.0, p, Scenario::separate, levels);
    const auto b = total_forward(z, 35.0, p, Scenario::separate, levels);
    CHECK_FALSE(a.weather.has_value());
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(a.total.means()[k] == b.total.means()[k]);
        CHECK(a.total.variances()[k] == b.total.variances()[k]);
    }
    const auto obs = observation_mixture(lumped.total, p);
    CHECK(obs.variances()[2] == doctest::Approx(lumped.total.variances()[2] + p.obs_variance));
}

TEST_CASE("component means are linear in the parameters") {
    const LevelSet levels = LevelSet::quartiles();
    const DisaggregatorParams p = sample_params(6);
    DisaggregatorParams q = p;
    q.plug_dynamic *= 2;
    q.plug_base *= 2;
    q.light_dynamic *= 2;
    q.light_base *= 2;
    for (auto& c : q.spline_occupied) c *= 2;
    for (auto& c : q.spline_unoccupied) c *= 2;
    const auto z = occupancy({0.25, 0.25, 0.25, 0.25});
    const auto a = total_forward(z, 12.0, p, Scenario::lumped, levels).total;
    const auto b = total_forward(z, 12.0, q, Scenario::lumped, levels).total;
    for (std::size_t k = 0; k < 4; ++k) CHECK(b.means()[k] == doctest::Approx(2.0 * a.means()[k]));
}

TEST_CASE("init_params from metadata") {
    BuildingMetadata meta{1000.0, 8.0, 8.0};
    const auto p = init_params(meta, 14.0, 5.0, 30.0);
    CHECK(p.light_dynamic == doctest::Approx(8.0));
    CHECK(p.plug_dynamic == doctest::Approx(8.0));
    CHECK(p.plug_base == doctest::Approx(0.8));
    CHECK(p.obs_variance == doctest::Approx(0.09));
    for (double c : p.spline_occupied) CHECK(c == 0.0);
    const auto w = weather_forward(occupancy({0.2, 0.2, 0.3, 0.3}), 30.0, p);
    for (double m : w.means()) CHECK(m == 0.0);
    meta.floor_area = 0.0;
    CHECK_THROWS_AS(init_params(meta, 14.0, 5.0, 30.0), DomainError);
}

TEST_CASE("parameter JSON round trip") {
    DisaggregatorParams p = sample_params(7);
    p.light_base = -0.5; // raw values survive even when clamped
    p.epochs_trained = 8;
    const auto path = std::filesystem::temp_directory_path() / "occu_params_roundtrip.json";
    save_params_json(path, p);
    const auto q = load_params_json(path);
    CHECK(q == p);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(params_from_json(nlohmann::json{{"raw", 1}}), DataError);
    CHECK_THROWS_AS(scenario_from_string("both"), DomainError);
}

}
