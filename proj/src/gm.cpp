#include "occu/gm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "occu/error.hpp"

namespace occu {

const char* to_string(DayType type) {
    return type == DayType::working ? "working" : "non-working";
}

DayType day_type_from_string(const std::string& text) {
    if (text == "working" || text == "0") {
        return DayType::working;
    }
    if (text == "non-working" || text == "non_working" || text == "1") {
        return DayType::non_working;
    }
    throw DataError("unknown day type '" + text + "'");
}

GaussianMixture1D::GaussianMixture1D(std::vector<double> weights, std::vector<double> means,
                                     std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
    if (weights_.empty() || weights_.size() != means_.size() ||
        weights_.size() != variances_.size()) {
        throw DimensionError("mixture arrays must be non-empty and of equal length");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) {
            throw DomainError("mixture weight must be non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) {
        throw DomainError("mixture weights sum to " + std::to_string(total));
    }
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        if (!std::isfinite(means_[k]) || !(variances_[k] >= 0.0) || !std::isfinite(variances_[k])) {
            throw DomainError("mixture component has non-finite mean or invalid variance");
        }
        variances_[k] = std::max(variances_[k], kVarianceFloor);
    }
}

double GaussianMixture1D::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        m += weights_[k] * means_[k];
    }
    return m;
}

double GaussianMixture1D::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        const double d = means_[k] - m;
        v += weights_[k] * (variances_[k] + d * d);
    }
    return v;
}

LevelSet::LevelSet(std::vector<double> centroids, double boundary_offset, double boundary_std)
    : centroids_(std::move(centroids)), boundary_offset_(boundary_offset),
      boundary_std_(boundary_std) {
    if (centroids_.size() < 2) {
        throw DomainError("a level set needs at least the two boundary levels");
    }
    if (centroids_.front() != 0.0 || centroids_.back() != 1.0) {
        throw DomainError("level centroids must start at 0 and end at 1");
    }
    for (std::size_t k = 1; k < centroids_.size(); ++k) {
        if (!(centroids_[k] > centroids_[k - 1])) {
            throw DomainError("level centroids must be strictly increasing");
        }
    }
    if (!(boundary_offset_ > 0.0) || !(boundary_std_ > 0.0)) {
        throw DomainError("boundary offset and std must be positive");
    }
    edges_.reserve(centroids_.size() + 1);
    edges_.push_back(0.0);
    for (std::size_t k = 1; k < centroids_.size(); ++k) {
        edges_.push_back(0.5 * (centroids_[k - 1] + centroids_[k]));
    }
    edges_.push_back(1.0);
}

LevelSet LevelSet::quartiles() {
    return LevelSet({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
}

double LevelSet::component_mean(std::size_t k) const {
    if (k == 0) {
        return boundary_offset_;
    }
    if (k + 1 == size()) {
        return 1.0 - boundary_offset_;
    }
    return centroids_[k];
}

double LevelSet::component_variance(std::size_t k) const {
    if (k == 0 || k + 1 == size()) {
        return boundary_std_ * boundary_std_;
    }
    const double width = edges_[k + 1] - edges_[k];
    return width * width / 12.0;
}

CategoricalProfile::CategoricalProfile(DayType day_type, std::size_t levels,
                                       std::vector<double> probs)
    : day_type_(day_type), levels_(levels), probs_(std::move(probs)) {
    if (levels_ == 0 || probs_.size() != kSteps * levels_) {
        throw DimensionError("profile must hold 24 steps of level probabilities");
    }
    for (std::size_t t = 0; t < kSteps; ++t) {
        validate_categorical(at(t));
    }
}

void validate_categorical(std::span<const double> probs, double tolerance) {
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw DomainError("categorical probability must be non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > tolerance) {
        throw DomainError("categorical probabilities sum to " + std::to_string(total));
    }
}

GaussianMixture1D gm_from_categorical(std::span<const double> probs, const LevelSet& levels) {
    if (probs.size() != levels.size()) {
        throw DimensionError("probability vector length " + std::to_string(probs.size()) +
                             " does not match " + std::to_string(levels.size()) + " levels");
    }
    std::vector<double> means(levels.size());
    std::vector<double> variances(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
        means[k] = levels.component_mean(k);
        variances[k] = levels.component_variance(k);
    }
    return {std::vector<double>(probs.begin(), probs.end()), std::move(means), std::move(variances)};
}

GaussianMixture1D gm_affine(const GaussianMixture1D& gm, double scale, double offset) {
    if (!(scale >= 0.0)) {
        throw DomainError("affine scale must be non-negative");
    }
    std::vector<double> means(gm.size());
    std::vector<double> variances(gm.size());
    for (std::size_t k = 0; k < gm.size(); ++k) {
        means[k] = scale * gm.means()[k] + offset;
        variances[k] = scale * scale * gm.variances()[k];
    }
    return {std::vector<double>(gm.weights().begin(), gm.weights().end()), std::move(means),
            std::move(variances)};
}

GaussianMixture1D gm_shift_components(const GaussianMixture1D& gm, std::span<const double> shifts) {
    if (shifts.size() != gm.size()) {
        throw DimensionError("shift vector length does not match component count");
    }
    std::vector<double> means(gm.means().begin(), gm.means().end());
    for (std::size_t k = 0; k < gm.size(); ++k) {
        means[k] += shifts[k];
    }
    return {std::vector<double>(gm.weights().begin(), gm.weights().end()), std::move(means),
            std::vector<double>(gm.variances().begin(), gm.variances().end())};
}

GaussianMixture1D gm_sum_aligned(std::span<const GaussianMixture1D> gms) {
    if (gms.empty()) {
        throw DimensionError("nothing to sum");
    }
    const auto& first = gms.front();
    const std::size_t K = first.size();
    std::vector<double> means(K, 0.0);
    std::vector<double> variances(K, 0.0);
    for (const auto& gm : gms) {
        if (gm.size() != K) {
            throw AlignmentError("mixtures differ in component count");
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (std::abs(gm.weights()[k] - first.weights()[k]) > GaussianMixture1D::kWeightTolerance) {
                throw AlignmentError("mixtures differ in component weights");
            }
            means[k] += gm.means()[k];
            variances[k] += gm.variances()[k];
        }
    }
    return {std::vector<double>(first.weights().begin(), first.weights().end()), std::move(means),
            std::move(variances)};
}

GaussianMixture1D gm_binary_collapse(const GaussianMixture1D& gm, const LevelSet& levels) {
    if (gm.size() < 2) {
        throw DomainError("binary collapse needs at least two components");
    }
    if (gm.size() != levels.size()) {
        throw DimensionError("mixture was not built from this level set");
    }
    const std::size_t full = gm.size() - 1;
    std::vector<double> means(gm.means().begin(), gm.means().end());
    std::vector<double> variances(gm.variances().begin(), gm.variances().end());
    for (std::size_t k = 1; k < full; ++k) {
        means[k] = means[full];
        variances[k] = variances[full];
    }
    return {std::vector<double>(gm.weights().begin(), gm.weights().end()), std::move(means),
            std::move(variances)};
}

double gaussian_logpdf(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_sum_exp(std::span<const double> values) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        peak = std::max(peak, v);
    }
    if (!std::isfinite(peak)) {
        return peak;
    }
    double acc = 0.0;
    for (double v : values) {
        acc += std::exp(v - peak);
    }
    return peak + std::log(acc);
}

double gm_logpdf(const GaussianMixture1D& gm, double x) {
    // Zero-weight components contribute -inf terms, which log_sum_exp skips.
    std::vector<double> terms(gm.size());
    for (std::size_t k = 0; k < gm.size(); ++k) {
        const double w = gm.weights()[k];
        terms[k] = w > 0.0 ? std::log(w) + gaussian_logpdf(x, gm.means()[k], gm.variances()[k])
                           : -std::numeric_limits<double>::infinity();
    }
    return log_sum_exp(terms);
}

} // namespace occu
