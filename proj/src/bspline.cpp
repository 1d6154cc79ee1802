#include "occu/bspline.hpp"

#include <algorithm>

#include "occu/error.hpp"

namespace occu {

void SplineConfig::validate() const {
    if (order < 0 || grid_count < 1 || !(upper > lower)) {
        throw DomainError("invalid spline configuration");
    }
}

std::vector<double> SplineConfig::knots() const {
    std::vector<double> t;
    t.reserve(basis_count() + order + 1);
    for (int i = 0; i <= order; ++i) {
        t.push_back(lower);
    }
    const double step = (upper - lower) / grid_count;
    for (int i = 1; i < grid_count; ++i) {
        t.push_back(lower + step * i);
    }
    for (int i = 0; i <= order; ++i) {
        t.push_back(upper);
    }
    return t;
}

std::vector<double> bspline_basis(double x, const SplineConfig& cfg) {
    cfg.validate();
    const int p = cfg.order;
    const std::size_t n = cfg.basis_count();
    const auto t = cfg.knots();
    x = std::clamp(x, cfg.lower, cfg.upper);

    // Knot span: t[span] <= x < t[span+1], with the right end folded into the
    // last non-empty span.
    std::size_t span = static_cast<std::size_t>(p);
    while (span + 1 < n && x >= t[span + 1]) {
        ++span;
    }

    // Triangular evaluation of the p+1 non-zero basis functions on the span.
    std::vector<double> local(p + 1, 0.0);
    std::vector<double> left(p + 1, 0.0);
    std::vector<double> right(p + 1, 0.0);
    local[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double tmp = local[r] / denom;
            local[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        local[j] = saved;
    }

    std::vector<double> basis(n, 0.0);
    for (int j = 0; j <= p; ++j) {
        basis[span - p + j] = local[j];
    }
    return basis;
}

double bspline_eval(double x, const std::vector<double>& coeffs, const SplineConfig& cfg) {
    const auto basis = bspline_basis(x, cfg);
    if (coeffs.size() != basis.size()) {
        throw DimensionError("spline coefficient count does not match basis size");
    }
    double y = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        y += coeffs[i] * basis[i];
    }
    return y;
}

} // namespace occu
