#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace occu {

inline constexpr int kTruthLevels = 3;

// Two cut points separating low / medium / high occupancy.
struct LevelThresholds {
    double cut1 = 0.0;
    double cut2 = 0.0;

    void validate() const;
    int label(double ratio) const; // 0 below cut1, 1 below cut2, else 2
    std::vector<int> apply(std::span<const double> ratios) const;
};

struct Discretization {
    LevelThresholds thresholds;
    std::vector<double> centers; // ascending, three values
    std::vector<int> labels;
};

// 3-means on the truth (50 seeded restarts); cuts at midpoints of the centers.
Discretization discretize_truth(std::span<const double> truth, std::uint64_t seed = 0);

struct F1Report {
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::size_t> support; // true-label counts
    double macro = 0.0;
    double weighted = 0.0;
};

F1Report f1_report(std::span<const int> predicted, std::span<const int> truth, int n_levels = kTruthLevels);

struct RmseReport {
    std::vector<std::optional<double>> per_level; // empty subsets are absent
    std::vector<std::size_t> counts;
    double overall = 0.0;
};

// Error subsets are defined by the true level.
RmseReport rmse_by_level(std::span<const double> predicted, std::span<const double> truth,
                         const LevelThresholds& thresholds);

// All non-decreasing maps from k ordered clusters onto the three levels.
std::vector<std::vector<int>> order_preserving_surjections(int k, int n_levels = kTruthLevels);

struct ClusterMapping {
    std::vector<int> mapping; // cluster index (center order) -> level
    std::vector<int> labels;  // mapped predictions
    F1Report report;
};

// Clusters must already be ordered by center. Picks the mapping with the best
// macro F1, then weighted F1; k < 3 maps cluster i to level i.
ClusterMapping map_clusters(std::span<const int> cluster_labels, int k, std::span<const int> truth);

// Same, after relabelling clusters into ascending-center order.
ClusterMapping map_clusters(std::span<const int> cluster_labels, std::span<const double> centers,
                            std::span<const int> truth);

// 100 * (est - true) / true; absent when true is 0.
std::optional<double> capacity_error(double estimated, double truth);

// 1 - SSE/SST.
double r_squared(std::span<const double> predicted, std::span<const double> observed);

// Linear interpolation between order statistics (position q * (n - 1)).
double quantile(std::span<const double> values, double q);

// min(1, count / q_0.999(counts)).
std::vector<double> normalize_counts(std::span<const double> counts, double q = 0.999);

} // namespace occu
