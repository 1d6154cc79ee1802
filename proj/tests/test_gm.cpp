#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "occu/error.hpp"
#include "occu/gm.hpp"

using namespace occu;

namespace {

double weight_sum(const GaussianMixture1D& gm) {
    return std::accumulate(gm.weights().begin(), gm.weights().end(), 0.0);
}

void check_invariants(const GaussianMixture1D& gm) {
    CHECK(std::abs(weight_sum(gm) - 1.0) < 1e-9);
    for (double v : gm.variances()) CHECK(v > 0.0);
    for (double w : gm.weights()) CHECK(w >= 0.0);
}

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> p(n);
    for (auto& v : p) v = std::exponential_distribution<double>(1.0)(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= s;
    return p;
}

// Analytic mixture moments against 1e5 draws, 3-standard-error band.
void check_moments_mc(const GaussianMixture1D& gm, std::uint64_t seed) {
    const auto m = testing::moments_of(testing::sample_mixture(gm, 100000, seed));
    CHECK(std::abs(m.mean - gm.mean()) < 3.0 * m.mean_se);
    CHECK(std::abs(m.variance - gm.variance()) < 3.0 * m.variance_se);
}

} // namespace

TEST_SUITE("gm") {

TEST_CASE("level set geometry") {
    const LevelSet levels = LevelSet::quartiles();
    REQUIRE(levels.size() == 4);
    const auto edges = levels.bin_edges();
    CHECK(edges[0] == 0.0);
    CHECK(edges[1] == doctest::Approx(1.0 / 6));
    CHECK(edges[2] == doctest::Approx(0.5));
    CHECK(edges[3] == doctest::Approx(5.0 / 6));
    CHECK(edges[4] == 1.0);
    CHECK(levels.component_mean(0) == doctest::Approx(0.02));
    CHECK(levels.component_mean(3) == doctest::Approx(0.98));
    CHECK(levels.component_variance(0) == doctest::Approx(0.0004));
    CHECK(levels.component_variance(1) == doctest::Approx(1.0 / 108.0));
    CHECK_THROWS_AS(LevelSet({0.1, 1.0}), DomainError);
    CHECK_THROWS_AS(LevelSet({0.0, 0.5, 0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(LevelSet({0.0}), DomainError);
}

TEST_CASE("mixture construction validates") {
    CHECK_THROWS_AS(GaussianMixture1D({0.5, 0.6}, {0, 1}, {1, 1}), DomainError);
    CHECK_THROWS_AS(GaussianMixture1D({1.0}, {0, 1}, {1, 1}), DimensionError);
    CHECK_THROWS_AS(GaussianMixture1D({-0.5, 1.5}, {0, 1}, {1, 1}), DomainError);
    GaussianMixture1D floored({1.0}, {0.0}, {0.0});
    CHECK(floored.variances()[0] == GaussianMixture1D::kVarianceFloor);
}

TEST_CASE("gm_from_categorical examples") {
    const LevelSet levels = LevelSet::quartiles();
    const auto a = gm_from_categorical(std::vector<double>{1, 0, 0, 0}, levels);
    CHECK(a.mean() == doctest::Approx(0.02));
    const auto b = gm_from_categorical(std::vector<double>{0, 1, 0, 0}, levels);
    CHECK(b.mean() == doctest::Approx(1.0 / 3));
    CHECK(b.variances()[1] == doctest::Approx(0.009259).epsilon(1e-4));
    const auto c = gm_from_categorical(std::vector<double>{0.25, 0.25, 0.25, 0.25}, levels);
    const double mean_of_means = (0.02 + 1.0 / 3 + 2.0 / 3 + 0.98) / 4.0;
    CHECK(c.mean() == doctest::Approx(mean_of_means));
    CHECK_THROWS_AS(gm_from_categorical(std::vector<double>{0.5, 0.5}, levels), DimensionError);
    CHECK_THROWS_AS(gm_from_categorical(std::vector<double>{0.5, 0.5, 0.5, 0}, levels), DomainError);
}

TEST_CASE("gm_affine examples and composition") {
    GaussianMixture1D g({1.0}, {0.5}, {0.01});
    const auto a = gm_affine(g, 10.0, 2.0);
    CHECK(a.means()[0] == doctest::Approx(7.0));
    CHECK(a.variances()[0] == doctest::Approx(1.0));
    const auto id = gm_affine(g, 1.0, 0.0);
    CHECK(id.means()[0] == g.means()[0]);
    CHECK(id.variances()[0] == g.variances()[0]);
    const auto z = gm_affine(g, 0.0, 3.0);
    CHECK(z.means()[0] == 3.0);
    CHECK(z.variances()[0] == GaussianMixture1D::kVarianceFloor);
    CHECK_THROWS_AS(gm_affine(g, -1.0, 0.0), DomainError);

    std::mt19937_64 rng(3);
    const auto gm = gm_from_categorical(random_probs(rng, 4), LevelSet::quartiles());
    const auto twice = gm_affine(gm_affine(gm, 2.5, 1.0), 4.0, -3.0);
    const auto once = gm_affine(gm, 10.0, 4.0 * 1.0 - 3.0);
    for (std::size_t k = 0; k < gm.size(); ++k) {
        CHECK(std::abs(twice.means()[k] - once.means()[k]) < 1e-12);
        CHECK(std::abs(twice.variances()[k] - once.variances()[k]) < 1e-12);
    }
}

TEST_CASE("gm_shift_components examples") {
    GaussianMixture1D g({0.4, 0.6}, {1.0, 2.0}, {0.1, 0.2});
    const auto zero = gm_shift_components(g, std::vector<double>{0, 0});
    CHECK(zero.means()[0] == 1.0);
    const auto s = gm_shift_components(g, std::vector<double>{3, -1});
    CHECK(s.means()[0] == 4.0);
    CHECK(s.means()[1] == 1.0);
    CHECK(s.variances()[1] == 0.2);
    CHECK_THROWS_AS(gm_shift_components(g, std::vector<double>{1}), DimensionError);
    check_moments_mc(s, 11);
}

TEST_CASE("gm_sum_aligned examples") {
    GaussianMixture1D a({0.5, 0.5}, {1.0, 0.0}, {0.5, 1.0});
    GaussianMixture1D b({0.5, 0.5}, {2.0, 1.0}, {0.5, 2.0});
    const std::vector<GaussianMixture1D> one{a};
    CHECK(gm_sum_aligned(one).means()[0] == 1.0);
    const std::vector<GaussianMixture1D> two{a, b};
    const auto s = gm_sum_aligned(two);
    CHECK(s.means()[0] == 3.0);
    CHECK(s.variances()[0] == 1.0);
    GaussianMixture1D c({0.3, 0.7}, {0, 0}, {1, 1});
    const std::vector<GaussianMixture1D> bad{a, c};
    CHECK_THROWS_AS(gm_sum_aligned(bad), AlignmentError);
}

TEST_CASE("aligned sum matches level-conditioned sampling") {
    // Draw the level from the shared weights, then each system's Gaussian.
    const LevelSet levels = LevelSet::quartiles();
    const std::vector<double> probs{0.2, 0.3, 0.1, 0.4};
    const auto z = gm_from_categorical(probs, levels);
    const auto plug = gm_affine(z, 40.0, 5.0);
    const auto light = gm_affine(gm_binary_collapse(z, levels), 30.0, 2.0);
    const std::vector<GaussianMixture1D> parts{plug, light};
    const auto total = gm_sum_aligned(parts);
    std::mt19937_64 rng(5);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    std::vector<double> draws(100000);
    for (auto& v : draws) {
        const std::size_t k = pick(rng);
        v = std::normal_distribution<double>(plug.means()[k], std::sqrt(plug.variances()[k]))(rng) +
            std::normal_distribution<double>(light.means()[k], std::sqrt(light.variances()[k]))(rng);
    }
    const auto m = testing::moments_of(draws);
    CHECK(std::abs(m.mean - total.mean()) < 3.0 * m.mean_se);
    CHECK(std::abs(m.variance - total.variance()) < 3.0 * m.variance_se);
    check_invariants(total);
}

TEST_CASE("gm_binary_collapse examples") {
    const LevelSet levels = LevelSet::quartiles();
    const auto g = gm_from_categorical(std::vector<double>{0.3, 0.2, 0.2, 0.3}, levels);
    const auto c = gm_binary_collapse(g, levels);
    CHECK(c.mean() == doctest::Approx(0.3 * 0.02 + 0.7 * 0.98));
    const auto vacant = gm_from_categorical(std::vector<double>{1, 0, 0, 0}, levels);
    CHECK(gm_binary_collapse(vacant, levels).mean() == doctest::Approx(vacant.mean()));
    const auto full = gm_from_categorical(std::vector<double>{0, 0, 0, 1}, levels);
    const auto cf = gm_binary_collapse(full, levels);
    CHECK(cf.mean() == doctest::Approx(0.98));
    CHECK(cf.variance() == doctest::Approx(0.0004));
    CHECK_THROWS_AS(gm_binary_collapse(GaussianMixture1D({1.0}, {0.0}, {1.0}), levels), DomainError);
}

TEST_CASE("gm_logpdf examples") {
    GaussianMixture1D g({1.0}, {2.0}, {0.5});
    CHECK(gm_logpdf(g, 2.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * 0.5)));
    GaussianMixture1D twin({0.5, 0.5}, {2.0, 2.0}, {0.5, 0.5});
    CHECK(gm_logpdf(twin, 1.3) == doctest::Approx(gm_logpdf(g, 1.3)));
    GaussianMixture1D p({0.2, 0.5, 0.3}, {-1.0, 0.0, 4.0}, {0.3, 1.0, 2.0});
    GaussianMixture1D q({0.3, 0.2, 0.5}, {4.0, -1.0, 0.0}, {2.0, 0.3, 1.0});
    for (double x : {-3.0, 0.1, 2.0, 9.0}) {
        CHECK(gm_logpdf(p, x) == doctest::Approx(gm_logpdf(q, x)).epsilon(1e-12));
    }
    // Far tails stay finite thanks to log-sum-exp.
    CHECK(std::isfinite(gm_logpdf(p, 1e4)));
}

TEST_CASE("logpdf integrates to one") {
    std::mt19937_64 rng(17);
    const LevelSet levels = LevelSet::quartiles();
    for (int rep = 0; rep < 5; ++rep) {
        const auto gm = gm_affine(gm_from_categorical(random_probs(rng, 4), levels), 50.0, 3.0);
        double lo = 1e300;
        double hi = -1e300;
        for (std::size_t k = 0; k < gm.size(); ++k) {
            const double s = std::sqrt(gm.variances()[k]);
            lo = std::min(lo, gm.means()[k] - 10.0 * s);
            hi = std::max(hi, gm.means()[k] + 10.0 * s);
        }
        const double mass =
            testing::simpson([&](double x) { return std::exp(gm_logpdf(gm, x)); }, lo, hi, 200000);
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
}

TEST_CASE("closure invariants and Monte-Carlo moments through the load pipeline") {
    std::mt19937_64 rng(23);
    const LevelSet levels = LevelSet::quartiles();
    for (int rep = 0; rep < 4; ++rep) {
        const auto z = gm_from_categorical(random_probs(rng, 4), levels);
        const auto plug = gm_affine(z, 20.0, 1.0);
        const auto light = gm_affine(gm_binary_collapse(z, levels), 15.0, 0.5);
        const auto weather = gm_shift_components(gm_affine(z, 0.0, 0.0), std::vector<double>{3.0, 7.0, 7.0, 7.0});
        const std::vector<GaussianMixture1D> parts{plug, light, weather};
        const auto total = gm_sum_aligned(parts);
        for (const auto* g : {&z, &plug, &light, &weather, &total}) {
            check_invariants(*g);
        }
        check_moments_mc(total, 100 + rep);
    }
}

TEST_CASE("log_sum_exp is stable") {
    const std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> small{-1000.0, -1001.0};
    CHECK(std::isfinite(log_sum_exp(small)));
}

TEST_CASE("categorical profile validation") {
    std::vector<double> probs(24 * 4, 0.25);
    CategoricalProfile p(DayType::working, 4, probs);
    CHECK(p.at(3)[2] == 0.25);
    probs[0] = 0.5;
    CHECK_THROWS_AS(CategoricalProfile(DayType::working, 4, probs), DomainError);
    CHECK_THROWS_AS(CategoricalProfile(DayType::working, 4, std::vector<double>(10, 0.1)), DimensionError);
}

}
