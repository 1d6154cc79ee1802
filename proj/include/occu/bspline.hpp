#pragma once

#include <cstddef>
#include <vector>

namespace occu {

// Uniform clamped B-spline basis on [lower, upper].
struct SplineConfig {
    int order = 2;       // polynomial degree; 2 = parabolic
    int grid_count = 5;  // knot intervals
    double lower = -2.0;
    double upper = 2.0;

    std::size_t basis_count() const { return static_cast<std::size_t>(grid_count + order); }
    // order+1 copies of each end, grid_count-1 uniform interior knots.
    std::vector<double> knots() const;
    void validate() const;
    bool operator==(const SplineConfig&) const = default;
};

// Values of all basis functions at x (clipped to the domain). Non-negative,
// sum to one.
std::vector<double> bspline_basis(double x, const SplineConfig& cfg);

// Coefficient-weighted sum of the basis at x.
double bspline_eval(double x, const std::vector<double>& coeffs, const SplineConfig& cfg);

} // namespace occu
