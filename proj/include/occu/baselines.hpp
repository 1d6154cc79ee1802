#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occu/series.hpp"

namespace occu {

// --- linear scaler -------------------------------------------------------

// z_max * (P - Pmin) / (Pmax - Pmin), clamped to [0,1].
std::vector<double> linear_scaler(std::span<const double> load, double z_max);

struct ScalerSweep {
    double best_z_max = 1.0;
    double best_rmse = 0.0;
    std::vector<std::pair<double, double>> table; // (z_max, overall RMSE)
};

// 0.70, 0.75, ..., 1.00
std::vector<double> default_zmax_grid();

ScalerSweep scaler_sweep(std::span<const double> load, std::span<const double> truth,
                         std::span<const double> grid);

// --- piecewise-linear energy signature ------------------------------------

// Continuous piecewise-linear load-temperature curve with 0-2 breakpoints.
struct PiecewiseES {
    std::vector<double> breakpoints; // sorted, degC
    std::vector<double> slopes;      // kW/degC, one per segment
    double intercept = 0.0;          // first segment's line evaluated at 0 degC
    double t_min = 0.0;              // observed temperature range
    double t_max = 0.0;
    double sse = 0.0;
    double bic = 0.0;

    double operator()(double temp) const;
    // Minimum of the curve over [t_min, t_max].
    double minimum() const;
};

struct EsFitOptions {
    int max_breakpoints = 2;
    double resolution = 0.5;      // degC grid step for breakpoint candidates
    std::size_t min_segment = 10; // observations required on each side of a breakpoint
};

PiecewiseES fit_piecewise_es(std::span<const double> loads, std::span<const double> temps,
                             const EsFitOptions& options = {});

// P_t - (f(T_t) - min f): removes the weather trend but keeps the base level.
std::vector<double> remove_weather_trend(std::span<const double> loads, std::span<const double> temps,
                                         const PiecewiseES& es);

// --- clustering -----------------------------------------------------------

struct KMeansModel {
    std::vector<double> centers; // ascending
    double inertia = 0.0;
    int iterations = 0;

    int assign(double x) const;
    std::vector<int> assign(std::span<const double> x) const;
};

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
    double tolerance = 1e-6;
};

// Lloyd iterations from k-means++ seeds; labels ordered by center.
KMeansModel kmeans_fit(std::span<const double> x, int k, std::uint64_t seed, const KMeansOptions& opt = {});

struct GmmModel {
    std::vector<double> weights;
    std::vector<double> means; // ascending
    std::vector<double> variances;
    std::vector<double> loglik_trace; // per EM iteration, total log-likelihood

    std::vector<double> responsibilities(double x) const;
    int assign(double x) const;
    std::vector<int> assign(std::span<const double> x) const;
    double loglik(std::span<const double> x) const;
};

struct GmmOptions {
    int max_iterations = 500;
    double tolerance = 1e-7;
};

GmmModel gmm_fit(std::span<const double> x, int k, std::uint64_t seed, const GmmOptions& opt = {});

struct Clustering {
    std::vector<int> labels;
    std::vector<double> centers;
};

Clustering kmeans_levels(std::span<const double> x, int k, std::uint64_t seed = 0);
Clustering gmm_levels(std::span<const double> x, int k, std::uint64_t seed = 0);

// --- hidden Markov model with hour/day-type transitions ----------------------

inline constexpr std::size_t kHmmSlots = 48;

// Slot of step t: hour * 2 + (non-working ? 1 : 0). The transition into step t
// uses the matrix of t's slot.
std::vector<int> calendar_slots(const BuildingSeries& series);

struct HmmModel {
    int n_states = 0;
    std::vector<double> means;
    std::vector<double> variances;
    std::vector<double> initial;
    std::vector<double> transitions; // [slot][from][to], row-stochastic

    double& a(std::size_t slot, std::size_t from, std::size_t to) {
        return transitions[(slot * n_states + from) * n_states + to];
    }
    double a(std::size_t slot, std::size_t from, std::size_t to) const {
        return transitions[(slot * n_states + from) * n_states + to];
    }
    void validate() const;
};

// Structure of the initial transition matrices. Each working-day hour carries
// a drift mode: 'L' pulls toward the lowest state, 'U' toward higher states,
// 'D' toward lower states, 'S' mostly stays. Non-working hours use 'L'.
struct HmmPrior {
    std::string working_modes = "LLLLLLLUUUSSSSSSSDDDLLLL";
    double low_self = 0.97;   // lowest state's self-loop in 'L' hours
    double drift_self = 0.4;  // other states' self-loop in 'L' hours
    double ramp_self = 0.5;   // self-loop in 'U' / 'D' hours
    double stay_self = 0.85;  // self-loop in 'S' hours
    double floor = 1e-3;      // added to every entry before normalising
    double pseudo_count = 0.5; // Dirichlet weight of the prior rows in Baum-Welch

    static HmmPrior load_json(const std::filesystem::path& path);
    void save_json(const std::filesystem::path& path) const;
};

HmmModel hmm_prior_model(std::span<const double> x, int n_states, const HmmPrior& prior, std::uint64_t seed = 0);

struct HmmPosterior {
    std::vector<double> gamma; // [t][state]
    double loglik = 0.0;
    std::vector<int> labels() const;
    int n_states = 0;
};

// Scaled forward-backward.
HmmPosterior hmm_decode(const HmmModel& model, std::span<const double> x, std::span<const int> slots);

struct HmmFit {
    HmmModel model;
    std::vector<double> loglik_trace;
    bool converged = false;
};

// Baum-Welch with transitions tied across days per slot; states are returned
// ordered by emission mean. Stops after max_iterations with a warning.
HmmFit hmm_fit(std::span<const double> x, std::span<const int> slots, int n_states,
               const HmmPrior& prior = {}, int max_iterations = 100, double tolerance = 1e-6,
               std::uint64_t seed = 0);

} // namespace occu
