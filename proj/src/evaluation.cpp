#include "occu/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "occu/baselines.hpp"
#include "occu/error.hpp"

namespace occu {

void LevelThresholds::validate() const {
    if (!(0.0 < cut1 && cut1 < cut2 && cut2 < 1.0)) {
        throw DomainError("level thresholds must satisfy 0 < cut1 < cut2 < 1");
    }
}

int LevelThresholds::label(double ratio) const {
    if (ratio < cut1) {
        return 0;
    }
    return ratio < cut2 ? 1 : 2;
}

std::vector<int> LevelThresholds::apply(std::span<const double> ratios) const {
    std::vector<int> out(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        out[i] = label(ratios[i]);
    }
    return out;
}

Discretization discretize_truth(std::span<const double> truth, std::uint64_t seed) {
    for (double v : truth) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("truth ratios must lie in [0, 1]");
        }
    }
    KMeansOptions opt;
    opt.restarts = 50;
    const auto km = kmeans_fit(truth, kTruthLevels, seed, opt);
    Discretization d;
    d.centers = km.centers;
    d.thresholds.cut1 = 0.5 * (km.centers[0] + km.centers[1]);
    d.thresholds.cut2 = 0.5 * (km.centers[1] + km.centers[2]);
    d.labels = d.thresholds.apply(truth);
    return d;
}

F1Report f1_report(std::span<const int> predicted, std::span<const int> truth, int n_levels) {
    if (predicted.size() != truth.size()) {
        throw DimensionError("prediction and truth lengths differ");
    }
    if (truth.empty()) {
        throw DegenerateError("no labels to score");
    }
    const auto n = static_cast<std::size_t>(n_levels);
    std::vector<std::size_t> tp(n, 0);
    std::vector<std::size_t> pred_count(n, 0);
    F1Report r;
    r.support.assign(n, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] < 0 || predicted[i] >= n_levels || truth[i] < 0 || truth[i] >= n_levels) {
            throw DomainError("label outside [0, n_levels)");
        }
        ++pred_count[predicted[i]];
        ++r.support[truth[i]];
        if (predicted[i] == truth[i]) {
            ++tp[truth[i]];
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        const double p = pred_count[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(pred_count[c]) : 0.0;
        const double rc = r.support[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(r.support[c]) : 0.0;
        if (r.support[c] == 0) {
            spdlog::warn("level {} is absent from the truth; its F1 is reported as 0", c);
        }
        r.precision.push_back(p);
        r.recall.push_back(rc);
        r.f1.push_back(p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        r.macro += r.f1[c] / static_cast<double>(n);
        r.weighted += r.f1[c] * static_cast<double>(r.support[c]);
        total += static_cast<double>(r.support[c]);
    }
    r.weighted /= total;
    return r;
}

RmseReport rmse_by_level(std::span<const double> predicted, std::span<const double> truth,
                         const LevelThresholds& thresholds) {
    if (predicted.size() != truth.size()) {
        throw DimensionError("prediction and truth lengths differ");
    }
    if (truth.empty()) {
        throw DegenerateError("no points to score");
    }
    std::vector<double> se(kTruthLevels, 0.0);
    RmseReport r;
    r.counts.assign(kTruthLevels, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
        const int level = thresholds.label(truth[i]);
        se[level] += e;
        ++r.counts[level];
        total += e;
    }
    for (int c = 0; c < kTruthLevels; ++c) {
        if (r.counts[c] == 0) {
            r.per_level.emplace_back(std::nullopt);
        } else {
            r.per_level.emplace_back(std::sqrt(se[c] / static_cast<double>(r.counts[c])));
        }
    }
    r.overall = std::sqrt(total / static_cast<double>(truth.size()));
    return r;
}

std::vector<std::vector<int>> order_preserving_surjections(int k, int n_levels) {
    std::vector<std::vector<int>> out;
    if (k < n_levels) {
        return out;
    }
    // Choose n_levels - 1 cut positions among the k - 1 gaps between clusters.
    std::vector<int> cuts(n_levels - 1);
    std::iota(cuts.begin(), cuts.end(), 1);
    while (true) {
        std::vector<int> m(k, 0);
        for (int i = 0, level = 0; i < k; ++i) {
            while (level < n_levels - 1 && i >= cuts[level]) {
                ++level;
            }
            m[i] = level;
        }
        out.push_back(std::move(m));
        int j = n_levels - 2;
        while (j >= 0 && cuts[j] == k - (n_levels - 1) + j) {
            --j;
        }
        if (j < 0) {
            break;
        }
        ++cuts[j];
        for (int t = j + 1; t < n_levels - 1; ++t) {
            cuts[t] = cuts[t - 1] + 1;
        }
    }
    return out;
}

ClusterMapping map_clusters(std::span<const int> cluster_labels, int k, std::span<const int> truth) {
    if (k > 8) {
        throw DomainError("at most 8 clusters can be mapped");
    }
    std::vector<std::vector<int>> candidates;
    if (k < kTruthLevels) {
        std::vector<int> identity(k);
        std::iota(identity.begin(), identity.end(), 0);
        candidates.push_back(identity);
    } else {
        candidates = order_preserving_surjections(k);
    }
    ClusterMapping best;
    bool have = false;
    for (const auto& m : candidates) {
        std::vector<int> mapped(cluster_labels.size());
        for (std::size_t i = 0; i < cluster_labels.size(); ++i) {
            if (cluster_labels[i] < 0 || cluster_labels[i] >= k) {
                throw DomainError("cluster label outside [0, k)");
            }
            mapped[i] = m[cluster_labels[i]];
        }
        auto report = f1_report(mapped, truth);
        const bool better = !have || report.macro > best.report.macro ||
                            (report.macro == best.report.macro && report.weighted > best.report.weighted);
        if (better) {
            best = {m, std::move(mapped), std::move(report)};
            have = true;
        }
    }
    return best;
}

ClusterMapping map_clusters(std::span<const int> cluster_labels, std::span<const double> centers,
                            std::span<const int> truth) {
    const int k = static_cast<int>(centers.size());
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return centers[a] < centers[b]; });
    std::vector<int> rank(k);
    for (int r = 0; r < k; ++r) {
        rank[order[r]] = r;
    }
    std::vector<int> canonical(cluster_labels.size());
    for (std::size_t i = 0; i < cluster_labels.size(); ++i) {
        if (cluster_labels[i] < 0 || cluster_labels[i] >= k) {
            throw DomainError("cluster label outside [0, k)");
        }
        canonical[i] = rank[cluster_labels[i]];
    }
    auto result = map_clusters(canonical, k, truth);
    // Report the mapping in the caller's cluster numbering.
    std::vector<int> mapping(k);
    for (int c = 0; c < k; ++c) {
        mapping[c] = result.mapping[rank[c]];
    }
    result.mapping = std::move(mapping);
    return result;
}

std::optional<double> capacity_error(double estimated, double truth) {
    if (truth == 0.0) {
        return std::nullopt;
    }
    return 100.0 * (estimated - truth) / truth;
}

double r_squared(std::span<const double> predicted, std::span<const double> observed) {
    if (predicted.size() != observed.size()) {
        throw DimensionError("prediction and observation lengths differ");
    }
    if (observed.empty()) {
        throw DegenerateError("no points for R^2");
    }
    const double mean = std::accumulate(observed.begin(), observed.end(), 0.0) / static_cast<double>(observed.size());
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        sse += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
        sst += (observed[i] - mean) * (observed[i] - mean);
    }
    if (!(sst > 0.0)) {
        throw DegenerateError("observations are constant; R^2 is undefined");
    }
    return 1.0 - sse / sst;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw DegenerateError("quantile of an empty series");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw DomainError("quantile level must lie in [0, 1]");
    }
    std::vector<double> v(values.begin(), values.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double a = v[lo];
    double b = a;
    if (hi != lo) {
        b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    }
    return a + (b - a) * (pos - static_cast<double>(lo));
}

std::vector<double> normalize_counts(std::span<const double> counts, double q) {
    for (double c : counts) {
        if (!(c >= 0.0)) {
            throw DomainError("counts must be non-negative");
        }
    }
    const double scale = quantile(counts, q);
    if (!(scale > 0.0)) {
        throw DegenerateError("the normalising quantile of the counts is zero");
    }
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = std::min(1.0, counts[i] / scale);
    }
    return out;
}

} // namespace occu
