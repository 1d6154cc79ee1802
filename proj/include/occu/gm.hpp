#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace occu {

enum class DayType { working = 0, non_working = 1 };

const char* to_string(DayType type);
DayType day_type_from_string(const std::string& text);

// Scalar Gaussian mixture. Immutable once built; every component variance is
// kept at or above kVarianceFloor so log-densities stay finite.
class GaussianMixture1D {
public:
    static constexpr double kVarianceFloor = 1e-8;
    static constexpr double kWeightTolerance = 1e-9;

    GaussianMixture1D(std::vector<double> weights, std::vector<double> means,
                      std::vector<double> variances);

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> means() const { return means_; }
    std::span<const double> variances() const { return variances_; }

    // Moments of the whole mixture.
    double mean() const;
    double variance() const;

private:
    std::vector<double> weights_;
    std::vector<double> means_;
    std::vector<double> variances_;
};

// Ordered occupancy levels on [0, 1]. The first and last centroids are the
// boundary levels 0 and 1; interior levels own the bin between the midpoints
// to their neighbours.
class LevelSet {
public:
    static constexpr double kDefaultBoundaryOffset = 0.02;
    static constexpr double kDefaultBoundaryStd = 0.02;

    explicit LevelSet(std::vector<double> centroids,
                      double boundary_offset = kDefaultBoundaryOffset,
                      double boundary_std = kDefaultBoundaryStd);

    // [0, 1/3, 2/3, 1]
    static LevelSet quartiles();

    std::size_t size() const { return centroids_.size(); }
    std::span<const double> centroids() const { return centroids_; }
    double centroid(std::size_t k) const { return centroids_[k]; }
    double boundary_offset() const { return boundary_offset_; }
    double boundary_std() const { return boundary_std_; }

    // size() + 1 edges; edge 0 is 0, the last edge is 1.
    std::span<const double> bin_edges() const { return edges_; }

    // Mean and variance of the Gaussian standing in for level k.
    double component_mean(std::size_t k) const;
    double component_variance(std::size_t k) const;

private:
    std::vector<double> centroids_;
    std::vector<double> edges_;
    double boundary_offset_;
    double boundary_std_;
};

// A day of categorical distributions over levels, one per hourly slot.
class CategoricalProfile {
public:
    static constexpr std::size_t kSteps = 24;

    CategoricalProfile(DayType day_type, std::size_t levels, std::vector<double> probs);

    DayType day_type() const { return day_type_; }
    std::size_t levels() const { return levels_; }
    std::size_t steps() const { return kSteps; }
    std::span<const double> at(std::size_t step) const {
        return {probs_.data() + step * levels_, levels_};
    }
    const std::vector<double>& flat() const { return probs_; }

    bool operator==(const CategoricalProfile&) const = default;

private:
    DayType day_type_;
    std::size_t levels_;
    std::vector<double> probs_;
};

using CandidateProfile = CategoricalProfile;

// Throws DomainError unless probs are non-negative and sum to 1.
void validate_categorical(std::span<const double> probs, double tolerance = 1e-9);

GaussianMixture1D gm_from_categorical(std::span<const double> probs, const LevelSet& levels);

GaussianMixture1D gm_affine(const GaussianMixture1D& gm, double scale, double offset);

GaussianMixture1D gm_shift_components(const GaussianMixture1D& gm, std::span<const double> shifts);

// Component-wise sum of mixtures that share their weight vector.
GaussianMixture1D gm_sum_aligned(std::span<const GaussianMixture1D> gms);

// All components except the zero-occupancy one take the mean and variance of
// the full-occupancy component, so the mixture approximates occupied/vacant.
GaussianMixture1D gm_binary_collapse(const GaussianMixture1D& gm, const LevelSet& levels);

double gm_logpdf(const GaussianMixture1D& gm, double x);

// log N(x | mean, variance)
double gaussian_logpdf(double x, double mean, double variance);

// log(sum(exp(values))) without overflow.
double log_sum_exp(std::span<const double> values);

} // namespace occu
