#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "occu/gm.hpp"
#include "occu/random.hpp"

namespace occu {

// Deterministic reference occupancy for one day type, plus the per-hour upper
// bound of the sampling temperature that controls candidate dispersion.
struct ReferenceSchedule {
    DayType day_type = DayType::working;
    std::array<double, 24> ratios{};
    std::array<double, 24> tau_upper{};

    void validate() const;
};

struct TauDefaults {
    double inactive_ratio = 0.05; // r_ref at or below this is an inactive hour
    double inactive_upper = 0.05;
    double active_upper = 0.1;
};

// Builds a schedule whose tau bounds follow the inactive/active rule.
ReferenceSchedule make_schedule(DayType day_type, const std::array<double, 24>& ratios,
                                const TauDefaults& tau = {});

// The bundled office schedules: a working day and a flat 5% non-working day.
ReferenceSchedule default_working_schedule();
ReferenceSchedule default_non_working_schedule();

// CSV columns: hour,ratio,tau_upper,day_type. Both day types must be present.
std::pair<ReferenceSchedule, ReferenceSchedule> load_schedules_csv(const std::filesystem::path& path);
void write_schedules_csv(const std::filesystem::path& path, const ReferenceSchedule& working,
                         const ReferenceSchedule& non_working);

std::vector<double> level_distance_scores(double r_ref, const LevelSet& levels);
std::vector<double> logits_from_scores(std::span<const double> scores, double tau);
std::vector<double> softmax_probs(std::span<const double> logits);

inline constexpr double kDefaultTauMin = 0.01;

// One candidate day: an independent temperature per hour drawn uniformly from
// [tau_min, tau_upper(t)] then scores -> logits -> softmax.
CandidateProfile sample_daily_profile(const ReferenceSchedule& schedule, const LevelSet& levels,
                                      Rng& rng, double tau_min = kDefaultTauMin);

struct PoolSizes {
    std::size_t working = 1500;
    std::size_t non_working = 500;
};

struct CandidatePool {
    std::vector<CandidateProfile> working;
    std::vector<CandidateProfile> non_working;
    std::uint64_t rng_seed = 0;

    const std::vector<CandidateProfile>& for_day(DayType type) const {
        return type == DayType::working ? working : non_working;
    }
    std::size_t size() const { return working.size() + non_working.size(); }
    bool operator==(const CandidatePool&) const = default;
};

// Each profile draws from its own sub-stream, so the result does not depend
// on how many threads fill the pool.
CandidatePool generate_pool(const ReferenceSchedule& working, const ReferenceSchedule& non_working,
                            const LevelSet& levels, PoolSizes sizes, std::uint64_t seed,
                            double tau_min = kDefaultTauMin);

} // namespace occu
