#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "occu/gm.hpp"

namespace testing {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;     // standard error of the sample mean
    double variance_se = 0.0; // standard error of the sample variance
};

inline SampleMoments moments_of(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return {m, m2, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

// Draws from a mixture: component by weight, then the component Gaussian.
inline std::vector<double> sample_mixture(const occu::GaussianMixture1D& gm, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(gm.weights().begin(), gm.weights().end());
    std::vector<double> out(n);
    for (auto& v : out) {
        const std::size_t k = pick(rng);
        v = std::normal_distribution<double>(gm.means()[k], std::sqrt(gm.variances()[k]))(rng);
    }
    return out;
}

// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    }
    return s * h / 3.0;
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

} // namespace testing
