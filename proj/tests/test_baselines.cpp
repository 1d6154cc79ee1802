#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "occu/baselines.hpp"
#include "occu/error.hpp"
#include "occu/synth.hpp"

using namespace occu;

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * kPi * var);
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

HmmModel random_hmm(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    HmmModel m;
    m.n_states = n;
    for (int j = 0; j < n; ++j) {
        m.means.push_back(2.0 * j + u(rng));
        m.variances.push_back(0.3 + u(rng));
        m.initial.push_back(u(rng));
    }
    const double s0 = std::accumulate(m.initial.begin(), m.initial.end(), 0.0);
    for (double& v : m.initial) v /= s0;
    m.transitions.resize(kHmmSlots * n * n);
    for (std::size_t slot = 0; slot < kHmmSlots; ++slot) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += (m.a(slot, i, j) = u(rng));
            for (int j = 0; j < n; ++j) m.a(slot, i, j) /= s;
        }
    }
    return m;
}

// Sum over all n^T state paths.
void brute_force(const HmmModel& m, std::span<const double> x, std::span<const int> slots, double& loglik,
                 std::vector<double>& gamma) {
    const std::size_t n = static_cast<std::size_t>(m.n_states);
    const std::size_t T = x.size();
    std::vector<std::size_t> path(T, 0);
    double total = 0.0;
    gamma.assign(T * n, 0.0);
    std::size_t paths = 1;
    for (std::size_t t = 0; t < T; ++t) paths *= n;
    for (std::size_t code = 0; code < paths; ++code) {
        std::size_t c = code;
        for (std::size_t t = 0; t < T; ++t) {
            path[t] = c % n;
            c /= n;
        }
        double p = m.initial[path[0]] * normal_pdf(x[0], m.means[path[0]], m.variances[path[0]]);
        for (std::size_t t = 1; t < T; ++t) {
            p *= m.a(static_cast<std::size_t>(slots[t]), path[t - 1], path[t]) *
                 normal_pdf(x[t], m.means[path[t]], m.variances[path[t]]);
        }
        total += p;
        for (std::size_t t = 0; t < T; ++t) gamma[t * n + path[t]] += p;
    }
    for (double& g : gamma) g /= total;
    loglik = std::log(total);
}

// Optimal 1-D k-means with contiguous clusters of the sorted data.
double exhaustive_inertia(std::vector<double> x, int k) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    auto sse = [&](std::size_t a, std::size_t b) {
        double m = 0.0;
        for (std::size_t i = a; i < b; ++i) m += x[i];
        m /= static_cast<double>(b - a);
        double s = 0.0;
        for (std::size_t i = a; i < b; ++i) s += (x[i] - m) * (x[i] - m);
        return s;
    };
    double best = std::numeric_limits<double>::infinity();
    REQUIRE(k == 3);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            best = std::min(best, sse(0, i) + sse(i, j) + sse(j, n));
        }
    }
    return best;
}

} // namespace

TEST_SUITE("baselines") {

TEST_CASE("linear scaler examples") {
    const std::vector<double> load{2.0, 7.0, 12.0};
    const auto z = linear_scaler(load, 0.8);
    CHECK(z[0] == doctest::Approx(0.0));
    CHECK(z[1] == doctest::Approx(0.4));
    CHECK(z[2] == doctest::Approx(0.8));
    CHECK(linear_scaler(load, 1.0)[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(linear_scaler(std::vector<double>{3.0, 3.0}, 1.0), DegenerateError);
    CHECK_THROWS_AS(linear_scaler(std::vector<double>{}, 1.0), DegenerateError);
}

TEST_CASE("scaler sweep recovers the generating z_max") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1.0, 30.0);
    std::vector<double> load(500);
    for (auto& v : load) v = u(rng);
    const auto truth = linear_scaler(load, 0.85);
    const auto grid = default_zmax_grid();
    REQUIRE(grid.size() == 7);
    CHECK(grid.front() == doctest::Approx(0.70));
    CHECK(grid.back() == doctest::Approx(1.00));
    const auto sweep = scaler_sweep(load, truth, grid);
    CHECK(sweep.best_z_max == doctest::Approx(0.85));
    CHECK(sweep.best_rmse < 1e-12);
    CHECK(sweep.table.size() == 7);
    CHECK_THROWS_AS(scaler_sweep(load, std::vector<double>(3, 0.0), grid), DimensionError);
}

TEST_CASE("energy signature fit recovers a cooling kink") {
    std::vector<double> temps, loads;
    for (int i = 0; i <= 160; ++i) {
        const double t = -5.0 + 0.25 * i;
        temps.push_back(t);
        loads.push_back(20.0 + 2.0 * std::max(0.0, t - 18.0));
    }
    const auto es = fit_piecewise_es(loads, temps);
    REQUIRE(!es.breakpoints.empty());
    bool near = false;
    for (double b : es.breakpoints) near = near || std::abs(b - 18.0) <= 0.5;
    CHECK(near);
    for (double t : {-3.0, 10.0, 17.0, 25.0, 30.0}) {
        CHECK(es(t) == doctest::Approx(20.0 + 2.0 * std::max(0.0, t - 18.0)).epsilon(1e-6));
    }
    CHECK(es.minimum() == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(es.sse < 1e-6);
    const auto flat = remove_weather_trend(loads, temps, es);
    for (double v : flat) CHECK(v == doctest::Approx(20.0).epsilon(1e-6));
    CHECK_THROWS_AS(fit_piecewise_es(std::span<const double>(loads).first(20), std::span<const double>(temps).first(20)),
                    DataError);
}

TEST_CASE("energy signature of a heating and cooling curve") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<double> temps, loads;
    for (int i = 0; i <= 400; ++i) {
        const double t = -10.0 + 0.1 * i;
        temps.push_back(t);
        loads.push_back(10.0 + 1.5 * std::max(0.0, 8.0 - t) + 3.0 * std::max(0.0, t - 20.0) + noise(rng));
    }
    const auto es = fit_piecewise_es(loads, temps);
    CHECK(es.breakpoints.size() == 2);
    CHECK(es.slopes.front() == doctest::Approx(-1.5).epsilon(0.05));
    CHECK(es.slopes.back() == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("weather trend removal decorrelates lumped synthetic load") {
    SimConfig cfg = SimConfig::make_default();
    cfg.train_days = 90;
    cfg.test_days = 7;
    cfg.climates = {Climate::hot};
    const auto sim = simulate_building(cfg, 0);
    const auto lumped = scenario_view(sim.sim.series, Scenario::lumped).slice_days(0, 90);
    const auto es = fit_piecewise_es(lumped.load, lumped.temperature);
    const auto flat = remove_weather_trend(lumped.load, lumped.temperature, es);
    const double before = correlation(lumped.load, lumped.temperature);
    const double after = correlation(flat, lumped.temperature);
    MESSAGE("correlation with temperature " << before << " -> " << after);
    CHECK(std::abs(after) < 0.1);
    CHECK(std::abs(after) < std::abs(before));
}

TEST_CASE("k-means reaches the exhaustive optimum") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<double> x;
        for (int i = 0; i < 12; ++i) x.push_back(3.0 * (i % 3) + n(rng));
        const auto model = kmeans_fit(x, 3, seed);
        CHECK(model.inertia == doctest::Approx(exhaustive_inertia(x, 3)).epsilon(1e-9));
        CHECK(std::is_sorted(model.centers.begin(), model.centers.end()));
    }
}

TEST_CASE("k-means labels follow the centers and clustering errors") {
    const std::vector<double> x{0.0, 0.1, 0.2, 5.0, 5.1, 10.0, 10.2};
    const auto c = kmeans_levels(x, 3);
    CHECK(c.labels == std::vector<int>{0, 0, 0, 1, 1, 2, 2});
    CHECK(c.centers[1] == doctest::Approx(5.05));
    CHECK_THROWS_AS(kmeans_fit(std::vector<double>{1.0, 1.0}, 2, 0), DegenerateError);
    CHECK_THROWS_AS(kmeans_fit(x, 0, 0), DomainError);
}

TEST_CASE("GMM log-likelihood never decreases") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x;
    for (int i = 0; i < 600; ++i) x.push_back((i % 3 == 0 ? 0.0 : i % 3 == 1 ? 4.0 : 9.0) + n(rng));
    const auto m = gmm_fit(x, 3, 1);
    REQUIRE(m.loglik_trace.size() >= 2);
    for (std::size_t i = 1; i < m.loglik_trace.size(); ++i) {
        CHECK(m.loglik_trace[i] >= m.loglik_trace[i - 1] - 1e-8 * std::abs(m.loglik_trace[i - 1]));
    }
    CHECK(std::abs(m.means[0]) < 0.25); // about 3.5 standard errors at n = 200
    CHECK(m.means[2] == doctest::Approx(9.0).epsilon(0.05));
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(1.0));
    CHECK(m.loglik(x) == doctest::Approx(m.loglik_trace.back()).epsilon(1e-6));
}

TEST_CASE("HMM forward-backward matches brute-force enumeration") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(2.0, 2.0);
    for (int trial = 0; trial < 6; ++trial) {
        const int states = 2 + trial % 2;
        const auto m = random_hmm(rng, states);
        std::vector<double> x(7);
        std::vector<int> slots(7);
        for (std::size_t t = 0; t < 7; ++t) {
            x[t] = n(rng);
            slots[t] = static_cast<int>((t * 7 + trial) % kHmmSlots);
        }
        double loglik = 0.0;
        std::vector<double> gamma;
        brute_force(m, x, slots, loglik, gamma);
        const auto post = hmm_decode(m, x, slots);
        CHECK(std::abs(post.loglik - loglik) < 1e-10);
        for (std::size_t i = 0; i < gamma.size(); ++i) CHECK(std::abs(post.gamma[i] - gamma[i]) < 1e-10);
    }
}

TEST_CASE("HMM calendar slots and validation") {
    BuildingSeries s;
    for (int i = 0; i < 48; ++i) {
        s.timestamps.push_back(i);
        s.load.push_back(1.0);
        s.day_type.push_back(i < 24 ? DayType::working : DayType::non_working);
    }
    const auto slots = calendar_slots(s);
    CHECK(slots[0] == 0);
    CHECK(slots[13] == 26);
    CHECK(slots[24 + 5] == 11);
    std::mt19937_64 rng(1);
    auto m = random_hmm(rng, 2);
    m.a(3, 0, 0) += 0.5;
    CHECK_THROWS_AS(m.validate(), DomainError);
    const auto ok = random_hmm(rng, 2);
    CHECK_THROWS_AS(hmm_decode(ok, std::vector<double>{1.0, 2.0}, std::vector<int>{0}), DimensionError);
}

TEST_CASE("Baum-Welch improves the likelihood and orders states") {
    SimConfig cfg = SimConfig::make_default();
    cfg.train_days = 28;
    cfg.test_days = 7;
    cfg.climates = {Climate::mild};
    const auto sim = simulate_building(cfg, 0);
    const auto sep = scenario_view(sim.sim.series, Scenario::separate).slice_days(0, 28);
    const auto slots = calendar_slots(sep);
    const auto fit = hmm_fit(sep.load, slots, 3, {}, 30);
    REQUIRE(fit.loglik_trace.size() >= 2);
    CHECK(fit.loglik_trace.back() > fit.loglik_trace.front());
    CHECK(std::is_sorted(fit.model.means.begin(), fit.model.means.end()));
    fit.model.validate();
    const auto a = hmm_fit(sep.load, slots, 3, {}, 30);
    CHECK(a.model.means == fit.model.means);
}

TEST_CASE("HMM prior JSON round trip and the bundled file") {
    HmmPrior p;
    p.stay_self = 0.8;
    const auto path = std::filesystem::temp_directory_path() / "occu_hmm_prior.json";
    p.save_json(path);
    const auto q = HmmPrior::load_json(path);
    CHECK(q.stay_self == doctest::Approx(0.8));
    CHECK(q.working_modes == p.working_modes);
    std::filesystem::remove(path);
    const auto bundled = HmmPrior::load_json(std::filesystem::path(OCCU_DATA_DIR) / "hmm_prior.json");
    CHECK(bundled.working_modes == HmmPrior{}.working_modes);
    CHECK(bundled.low_self == doctest::Approx(HmmPrior{}.low_self));
}

}
