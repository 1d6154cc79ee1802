#include "occu/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "occu/csv.hpp"
#include "occu/error.hpp"

namespace occu {

void ReferenceSchedule::validate() const {
    for (std::size_t h = 0; h < 24; ++h) {
        if (!(ratios[h] >= 0.0 && ratios[h] <= 1.0)) {
            throw DomainError("reference ratio at hour " + std::to_string(h) + " outside [0,1]");
        }
        if (!(tau_upper[h] > 0.0)) {
            throw DomainError("tau upper bound at hour " + std::to_string(h) + " must be positive");
        }
    }
}

ReferenceSchedule make_schedule(DayType day_type, const std::array<double, 24>& ratios,
                                const TauDefaults& tau) {
    ReferenceSchedule s;
    s.day_type = day_type;
    s.ratios = ratios;
    for (std::size_t h = 0; h < 24; ++h) {
        s.tau_upper[h] = ratios[h] <= tau.inactive_ratio ? tau.inactive_upper : tau.active_upper;
    }
    s.validate();
    return s;
}

ReferenceSchedule default_working_schedule() {
    // Office weekday, reshaped around the 9h-18h core with ramps and a lunch dip.
    static constexpr std::array<double, 24> ratios = {
        0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.02, 0.3,  0.75, 0.9,  0.9,
        0.6,  0.85, 0.9,  0.85, 0.75, 0.6,  0.25, 0.02, 0.0,  0.0,  0.0,  0.0};
    return make_schedule(DayType::working, ratios);
}

ReferenceSchedule default_non_working_schedule() {
    std::array<double, 24> ratios{};
    ratios.fill(0.05);
    return make_schedule(DayType::non_working, ratios);
}

std::pair<ReferenceSchedule, ReferenceSchedule> load_schedules_csv(const std::filesystem::path& path) {
    const CsvTable table = CsvTable::read(path);
    const auto c_hour = table.require_column("hour");
    const auto c_ratio = table.require_column("ratio");
    const auto c_tau = table.require_column("tau_upper");
    const auto c_type = table.require_column("day_type");

    ReferenceSchedule working;
    ReferenceSchedule non_working;
    working.day_type = DayType::working;
    non_working.day_type = DayType::non_working;
    std::array<bool, 24> seen_w{};
    std::array<bool, 24> seen_n{};
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const double hour_value = table.number(r, c_hour);
        if (hour_value < 0 || hour_value > 23 || hour_value != std::floor(hour_value)) {
            throw DataError(path.string() + ":" + std::to_string(table.line_of(r)) +
                            ": hour must be an integer 0-23");
        }
        const auto hour = static_cast<std::size_t>(hour_value);
        const DayType type = day_type_from_string(table.cell(r, c_type));
        auto& sched = type == DayType::working ? working : non_working;
        auto& seen = type == DayType::working ? seen_w : seen_n;
        if (seen[hour]) {
            throw DataError(path.string() + ":" + std::to_string(table.line_of(r)) +
                            ": duplicate hour " + std::to_string(hour));
        }
        seen[hour] = true;
        sched.ratios[hour] = table.number(r, c_ratio);
        sched.tau_upper[hour] = table.number(r, c_tau);
    }
    for (std::size_t h = 0; h < 24; ++h) {
        if (!seen_w[h] || !seen_n[h]) {
            throw DataError(path.string() + ": schedules must list all 24 hours for both day types");
        }
    }
    working.validate();
    non_working.validate();
    return {working, non_working};
}

void write_schedules_csv(const std::filesystem::path& path, const ReferenceSchedule& working,
                         const ReferenceSchedule& non_working) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "hour,ratio,tau_upper,day_type\n";
    for (const auto* s : {&working, &non_working}) {
        for (std::size_t h = 0; h < 24; ++h) {
            out << h << ',' << format_number(s->ratios[h]) << ',' << format_number(s->tau_upper[h])
                << ',' << to_string(s->day_type) << '\n';
        }
    }
}

std::vector<double> level_distance_scores(double r_ref, const LevelSet& levels) {
    if (!(r_ref >= 0.0 && r_ref <= 1.0)) {
        throw DomainError("reference ratio outside [0,1]");
    }
    std::vector<double> scores(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        scores[j] = std::abs(r_ref - levels.centroid(j));
    }
    return scores;
}

std::vector<double> logits_from_scores(std::span<const double> scores, double tau) {
    if (!(tau > 0.0)) {
        throw DomainError("temperature tau must be positive");
    }
    std::vector<double> logits(scores.size());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        logits[j] = -scores[j] / tau;
    }
    return logits;
}

std::vector<double> softmax_probs(std::span<const double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        p[j] = std::exp(logits[j] - peak);
        total += p[j];
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

CandidateProfile sample_daily_profile(const ReferenceSchedule& schedule, const LevelSet& levels,
                                      Rng& rng, double tau_min) {
    const std::size_t L = levels.size();
    std::vector<double> probs;
    probs.reserve(24 * L);
    for (std::size_t h = 0; h < 24; ++h) {
        const double upper = schedule.tau_upper[h];
        double tau = upper;
        if (upper > tau_min) {
            tau = std::uniform_real_distribution<double>(tau_min, upper)(rng);
        }
        const auto scores = level_distance_scores(schedule.ratios[h], levels);
        const auto p = softmax_probs(logits_from_scores(scores, tau));
        probs.insert(probs.end(), p.begin(), p.end());
    }
    return {schedule.day_type, L, std::move(probs)};
}

CandidatePool generate_pool(const ReferenceSchedule& working, const ReferenceSchedule& non_working,
                            const LevelSet& levels, PoolSizes sizes, std::uint64_t seed,
                            double tau_min) {
    if (sizes.working == 0 || sizes.non_working == 0) {
        throw DomainError("pool sizes must be positive");
    }
    working.validate();
    non_working.validate();

    auto fill = [&](const ReferenceSchedule& schedule, std::size_t count) {
        std::vector<CandidateProfile> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(schedule.day_type), i));
            out.push_back(sample_daily_profile(schedule, levels, rng, tau_min));
        }
        return out;
    };

    CandidatePool pool;
    pool.rng_seed = seed;
    pool.working = fill(working, sizes.working);
    pool.non_working = fill(non_working, sizes.non_working);
    return pool;
}

} // namespace occu
