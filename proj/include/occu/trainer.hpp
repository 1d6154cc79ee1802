#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occu/disaggregator.hpp"
#include "occu/generator.hpp"
#include "occu/series.hpp"

namespace occu {

struct TrainConfig {
    std::size_t top_k = 32;
    double beta = 0.5;
    int epochs = 8;
    int inner_iterations = 200;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    Scenario scenario = Scenario::separate;

    void validate() const;
};

// One day of (load, temperature) observations.
struct DayView {
    std::span<const double> load;
    std::span<const double> temperature; // empty in the separate scenario
    DayType day_type = DayType::working;
};

DayView day_view(const BuildingSeries& series, std::size_t day);

// Per-day, per-hour level distributions built from the scored candidates.
struct PosteriorSeries {
    std::vector<CategoricalProfile> days;

    std::size_t hours() const { return days.size() * CategoricalProfile::kSteps; }
    // Expected occupancy ratio per hour: sum_k p_k * centroid_k.
    std::vector<double> expected_ratio(const LevelSet& levels) const;
    // Probability of the zero level per hour.
    std::vector<double> vacancy_probability() const;
    bool operator==(const PosteriorSeries&) const = default;
};

// Parameter vector layout shared by the loss gradient and the optimizer:
// plug_dynamic, plug_base, light_dynamic, light_base, obs_variance,
// occupied spline coefficients, unoccupied spline coefficients.
std::vector<double> pack_params(const DisaggregatorParams& params);
void unpack_params(std::span<const double> theta, DisaggregatorParams& params);
std::vector<std::string> param_names(const DisaggregatorParams& params);

// Reference scoring path: builds every mixture through the GM algebra.
double candidate_loglik(const CandidateProfile& candidate, const DayView& day,
                        const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels);

struct SparseWeights {
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

// Softmax over the top_k log-likelihoods; ties go to the lower index.
SparseWeights matching_scores(std::span<const double> logliks, std::size_t top_k);

CategoricalProfile combine_candidates(const std::vector<CandidateProfile>& candidates,
                                      const SparseWeights& weights);

// -sum_t sum_k pi_kt * (var_kt)^beta * log N(P_t | mu_kt, var_kt), with the
// variance power treated as a constant. Reference path through the GM algebra.
double beta_nll_loss(const PosteriorSeries& posterior, const BuildingSeries& series,
                     const DisaggregatorParams& params, double beta, Scenario scenario,
                     const LevelSet& levels);

enum class Execution { serial, parallel };

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient; // in pack_params() layout
};

// Analytic loss and gradient. The parallel variant reduces per-day partials
// in day order, so both variants return identical bits.
LossAndGradient beta_nll_loss_grad(const PosteriorSeries& posterior, const BuildingSeries& series,
                                   const DisaggregatorParams& params, double beta, Scenario scenario,
                                   const LevelSet& levels, Execution exec = Execution::parallel);

// log pi for every candidate, computed once per pool.
struct PoolLogWeights {
    std::vector<std::vector<double>> working;      // [candidate][t * L + k]
    std::vector<std::vector<double>> non_working;
    static PoolLogWeights from(const CandidatePool& pool);
    const std::vector<std::vector<double>>& for_day(DayType t) const {
        return t == DayType::working ? working : non_working;
    }
};

// Log-likelihood of every candidate of the day's type, for every day.
// Component log-densities are shared across candidates; rows are filled in
// parallel when exec is parallel.
std::vector<std::vector<double>> score_days(const BuildingSeries& series, const CandidatePool& pool,
                                            const PoolLogWeights& log_weights,
                                            const DisaggregatorParams& params, Scenario scenario,
                                            const LevelSet& levels, Execution exec = Execution::parallel);

// Step I alone: score, keep top_k, combine.
PosteriorSeries build_posterior(const BuildingSeries& series, const CandidatePool& pool,
                                const PoolLogWeights& log_weights, const DisaggregatorParams& params,
                                Scenario scenario, const LevelSet& levels, std::size_t top_k);

struct EpochRecord {
    int epoch = 0;
    double loss_before = 0.0; // per-hour loss right after Step I
    double loss = 0.0;        // per-hour loss after Step II
    double seconds = 0.0;
};

// In the lumped scenario only light_dynamic + B1 is identified on occupied
// components. Fixes the gauge so that B1 - B0 is zero where the HVAC idles:
// a piecewise-linear signature is fitted to B1 - B0 over the temperatures
// (the spline rounds the kink off) and its minimum is moved into
// light_dynamic. Every component mean is left unchanged.
void fix_lumped_gauge(DisaggregatorParams& params, std::span<const double> temps, const LevelSet& levels);

struct TrainResult {
    DisaggregatorParams params;
    PosteriorSeries posterior; // Step I under the final parameters
    std::vector<EpochRecord> trace;
    double load_scale = 1.0;
};

inline constexpr std::size_t kMinTrainingDays = 14;

TrainResult train(const BuildingSeries& series, const CandidatePool& pool, const DisaggregatorParams& init,
                  const TrainConfig& config, const LevelSet& levels);

struct InferenceResult {
    PosteriorSeries posterior;
    std::vector<double> expected_ratio;
};

InferenceResult infer(const BuildingSeries& series, const CandidatePool& pool,
                      const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels,
                      std::size_t top_k = 32);

} // namespace occu
