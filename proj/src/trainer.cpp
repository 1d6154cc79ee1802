#include "occu/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "occu/baselines.hpp"
#include "occu/error.hpp"

namespace occu {

namespace {

constexpr double kFloor = GaussianMixture1D::kVarianceFloor;
constexpr std::size_t kFixedParams = 5;

// Level constants of the occupancy proxy and of its binary collapse.
struct LevelMoments {
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<double> collapsed_mean;
    std::vector<double> collapsed_var;

    explicit LevelMoments(const LevelSet& levels) {
        const std::size_t K = levels.size();
        const std::size_t full = K - 1;
        for (std::size_t k = 0; k < K; ++k) {
            mean.push_back(levels.component_mean(k));
            var.push_back(std::max(levels.component_variance(k), kFloor));
        }
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t src = k == 0 ? 0 : full;
            collapsed_mean.push_back(mean[src]);
            collapsed_var.push_back(var[src]);
        }
    }
};

// Observation-model moments of every component at one hour, evaluated in the
// same order as total_forward + observation_mixture.
struct StepMoments {
    std::vector<double> basis; // empty in the separate scenario
    double vacant_shift = 0.0;
    double occupied_shift = 0.0;
};

StepMoments step_moments(const DisaggregatorParams& p, Scenario scenario, double temp) {
    StepMoments s;
    if (scenario == Scenario::lumped) {
        s.basis = bspline_basis(normalize_temperature(temp, p), p.spline);
        for (std::size_t i = 0; i < s.basis.size(); ++i) {
            s.vacant_shift += p.spline_unoccupied[i] * s.basis[i];
            s.occupied_shift += p.spline_occupied[i] * s.basis[i];
        }
    }
    return s;
}

struct ComponentMoments {
    double mean;
    double var;
    double plug_var;
    double light_var;
};

inline ComponentMoments component(const DisaggregatorParams& p, const LevelMoments& lm, Scenario scenario,
                                  const StepMoments& s, std::size_t k) {
    const double dp = p.plug_dynamic_kw();
    const double dl = p.light_dynamic_kw();
    const double plug_mean = dp * lm.mean[k] + p.plug_base_kw();
    const double light_mean = dl * lm.collapsed_mean[k] + p.light_base_kw();
    const double plug_var = std::max(dp * dp * lm.var[k], kFloor);
    const double light_var = std::max(dl * dl * lm.collapsed_var[k], kFloor);
    double mean = plug_mean + light_mean;
    double var = plug_var + light_var;
    if (scenario == Scenario::lumped) {
        mean += occupied_gate(k) ? s.occupied_shift : s.vacant_shift;
        var += kFloor;
    }
    var = std::max(var + p.obs_variance, kFloor);
    return {mean, var, plug_var, light_var};
}

void require_whole_days(const BuildingSeries& series, std::size_t min_days, Scenario scenario) {
    series.validate();
    if (series.size() == 0 || hour_of(series.timestamps.front()) != 0 || series.size() % 24 != 0) {
        throw DataError("series must consist of whole days starting at hour 0");
    }
    if (series.days() < min_days) {
        throw DataError("series covers " + std::to_string(series.days()) + " days; at least " +
                        std::to_string(min_days) + " required");
    }
    if (scenario == Scenario::lumped && !series.has_temperature()) {
        throw DataError("the lumped scenario needs an outdoor temperature column");
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!std::isfinite(series.load[i])) {
            throw DataError("missing load observation at " + format_timestamp(series.timestamps[i]));
        }
    }
}

} // namespace

void TrainConfig::validate() const {
    if (top_k < 1) {
        throw DomainError("top_k must be at least 1");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in [0,1]");
    }
    if (epochs < 1 || inner_iterations < 1) {
        throw DomainError("epochs and inner iterations must be at least 1");
    }
    if (!(learning_rate > 0.0)) {
        throw DomainError("learning rate must be positive");
    }
}

DayView day_view(const BuildingSeries& series, std::size_t day) {
    const std::size_t begin = day * 24;
    if (begin + 24 > series.size()) {
        throw DataError("day " + std::to_string(day) + " lies outside the series");
    }
    DayView v;
    v.load = std::span<const double>(series.load).subspan(begin, 24);
    if (series.has_temperature()) {
        v.temperature = std::span<const double>(series.temperature).subspan(begin, 24);
    }
    v.day_type = series.day_type[begin];
    return v;
}

std::vector<double> PosteriorSeries::expected_ratio(const LevelSet& levels) const {
    std::vector<double> out;
    out.reserve(hours());
    for (const auto& day : days) {
        for (std::size_t t = 0; t < day.steps(); ++t) {
            const auto p = day.at(t);
            double r = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) {
                r += p[k] * levels.centroid(k);
            }
            out.push_back(std::clamp(r, 0.0, 1.0));
        }
    }
    return out;
}

std::vector<double> PosteriorSeries::vacancy_probability() const {
    std::vector<double> out;
    out.reserve(hours());
    for (const auto& day : days) {
        for (std::size_t t = 0; t < day.steps(); ++t) {
            out.push_back(day.at(t)[0]);
        }
    }
    return out;
}

std::vector<double> pack_params(const DisaggregatorParams& p) {
    std::vector<double> theta{p.plug_dynamic, p.plug_base, p.light_dynamic, p.light_base, p.obs_variance};
    theta.insert(theta.end(), p.spline_occupied.begin(), p.spline_occupied.end());
    theta.insert(theta.end(), p.spline_unoccupied.begin(), p.spline_unoccupied.end());
    return theta;
}

void unpack_params(std::span<const double> theta, DisaggregatorParams& p) {
    const std::size_t n = p.spline.basis_count();
    if (theta.size() != kFixedParams + 2 * n) {
        throw DimensionError("parameter vector has the wrong length");
    }
    p.plug_dynamic = theta[0];
    p.plug_base = theta[1];
    p.light_dynamic = theta[2];
    p.light_base = theta[3];
    p.obs_variance = theta[4];
    p.spline_occupied.assign(theta.begin() + kFixedParams, theta.begin() + kFixedParams + n);
    p.spline_unoccupied.assign(theta.begin() + kFixedParams + n, theta.end());
}

std::vector<std::string> param_names(const DisaggregatorParams& p) {
    std::vector<std::string> names{"plug_dynamic", "plug_base", "light_dynamic", "light_base", "obs_variance"};
    for (std::size_t i = 0; i < p.spline.basis_count(); ++i) {
        names.push_back("spline_occupied_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < p.spline.basis_count(); ++i) {
        names.push_back("spline_unoccupied_" + std::to_string(i));
    }
    return names;
}

double candidate_loglik(const CandidateProfile& candidate, const DayView& day,
                        const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels) {
    if (day.load.size() != candidate.steps()) {
        throw DataError("day must hold 24 load observations");
    }
    if (scenario == Scenario::lumped && day.temperature.size() != candidate.steps()) {
        throw DataError("day must hold 24 temperature observations in the lumped scenario");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < candidate.steps(); ++t) {
        if (!std::isfinite(day.load[t])) {
            throw DataError("missing load observation at hour " + std::to_string(t));
        }
        const auto z = gm_from_categorical(candidate.at(t), levels);
        const double temp = day.temperature.empty() ? 0.0 : day.temperature[t];
        const auto fwd = total_forward(z, temp, params, scenario, levels);
        total += gm_logpdf(observation_mixture(fwd.total, params), day.load[t]);
    }
    return total;
}

SparseWeights matching_scores(std::span<const double> logliks, std::size_t top_k) {
    if (logliks.empty()) {
        throw DomainError("no candidates to score");
    }
    std::vector<std::size_t> order(logliks.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t keep = std::min(std::max<std::size_t>(top_k, 1), logliks.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (logliks[a] != logliks[b]) {
                              return logliks[a] > logliks[b];
                          }
                          return a < b;
                      });
    order.resize(keep);
    SparseWeights w;
    w.index = order;
    const double peak = logliks[order.front()];
    double total = 0.0;
    for (std::size_t i : order) {
        const double e = std::exp(logliks[i] - peak);
        w.weight.push_back(e);
        total += e;
    }
    for (double& v : w.weight) {
        v /= total;
    }
    return w;
}

CategoricalProfile combine_candidates(const std::vector<CandidateProfile>& candidates,
                                      const SparseWeights& weights) {
    if (weights.index.empty() || weights.index.size() != weights.weight.size()) {
        throw DimensionError("combination needs matching index and weight lists");
    }
    const auto& first = candidates.at(weights.index.front());
    std::vector<double> probs(first.flat().size(), 0.0);
    for (std::size_t i = 0; i < weights.index.size(); ++i) {
        const auto& flat = candidates.at(weights.index[i]).flat();
        for (std::size_t j = 0; j < probs.size(); ++j) {
            probs[j] += weights.weight[i] * flat[j];
        }
    }
    // Re-normalise each hour against rounding drift.
    const std::size_t L = first.levels();
    for (std::size_t t = 0; t < CategoricalProfile::kSteps; ++t) {
        double s = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            s += probs[t * L + k];
        }
        for (std::size_t k = 0; k < L; ++k) {
            probs[t * L + k] /= s;
        }
    }
    return {first.day_type(), L, std::move(probs)};
}

double beta_nll_loss(const PosteriorSeries& posterior, const BuildingSeries& series,
                     const DisaggregatorParams& params, double beta, Scenario scenario,
                     const LevelSet& levels) {
    if (posterior.hours() != series.size()) {
        throw DimensionError("posterior and series cover different hours");
    }
    double loss = 0.0;
    for (std::size_t d = 0; d < posterior.days.size(); ++d) {
        for (std::size_t t = 0; t < 24; ++t) {
            const std::size_t i = d * 24 + t;
            const auto z = gm_from_categorical(posterior.days[d].at(t), levels);
            const double temp = series.has_temperature() ? series.temperature[i] : 0.0;
            const auto obs = observation_mixture(total_forward(z, temp, params, scenario, levels).total, params);
            for (std::size_t k = 0; k < obs.size(); ++k) {
                const double pi = obs.weights()[k];
                if (pi <= 0.0) {
                    continue;
                }
                const double var = obs.variances()[k];
                loss -= pi * std::pow(var, beta) * gaussian_logpdf(series.load[i], obs.means()[k], var);
            }
        }
    }
    return loss;
}

LossAndGradient beta_nll_loss_grad(const PosteriorSeries& posterior, const BuildingSeries& series,
                                   const DisaggregatorParams& params, double beta, Scenario scenario,
                                   const LevelSet& levels, Execution exec) {
    if (posterior.hours() != series.size()) {
        throw DimensionError("posterior and series cover different hours");
    }
    const LevelMoments lm(levels);
    const std::size_t K = levels.size();
    const std::size_t nb = params.spline.basis_count();
    const std::size_t P = kFixedParams + 2 * nb;
    const std::size_t D = posterior.days.size();

    const double dp = params.plug_dynamic_kw();
    const double dl = params.light_dynamic_kw();
    const double on_pd = params.plug_dynamic > 0.0 ? 1.0 : 0.0;
    const double on_pb = params.plug_base > 0.0 ? 1.0 : 0.0;
    const double on_ld = params.light_dynamic > 0.0 ? 1.0 : 0.0;
    const double on_lb = params.light_base > 0.0 ? 1.0 : 0.0;

    // partial[d] = {loss, gradient...}
    std::vector<std::vector<double>> partial(D, std::vector<double>(P + 1, 0.0));

    auto day_kernel = [&](std::size_t d) {
        auto& acc = partial[d];
        for (std::size_t t = 0; t < 24; ++t) {
            const std::size_t i = d * 24 + t;
            const double y = series.load[i];
            const double temp = series.has_temperature() ? series.temperature[i] : 0.0;
            const StepMoments s = step_moments(params, scenario, temp);
            const auto probs = posterior.days[d].at(t);
            for (std::size_t k = 0; k < K; ++k) {
                const double pi = probs[k];
                if (pi <= 0.0) {
                    continue;
                }
                const auto c = component(params, lm, scenario, s, k);
                const double w = pi * std::pow(c.var, beta);
                const double r = y - c.mean;
                acc[0] -= w * gaussian_logpdf(y, c.mean, c.var);
                // d(-w log N)/d mean and / d var
                const double g_mean = -w * r / c.var;
                const double g_var = -w * (-0.5 / c.var + 0.5 * r * r / (c.var * c.var));

                const double dv_dp = (c.plug_var > kFloor) ? 2.0 * dp * lm.var[k] : 0.0;
                const double dv_dl = (c.light_var > kFloor) ? 2.0 * dl * lm.collapsed_var[k] : 0.0;
                acc[1 + 0] += on_pd * (g_mean * lm.mean[k] + g_var * dv_dp);
                acc[1 + 1] += on_pb * g_mean;
                acc[1 + 2] += on_ld * (g_mean * lm.collapsed_mean[k] + g_var * dv_dl);
                acc[1 + 3] += on_lb * g_mean;
                acc[1 + 4] += g_var;
                if (scenario == Scenario::lumped) {
                    const std::size_t off = 1 + kFixedParams + (occupied_gate(k) ? 0 : nb);
                    for (std::size_t b = 0; b < nb; ++b) {
                        acc[off + b] += g_mean * s.basis[b];
                    }
                }
            }
        }
    };

    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(D); ++d) {
            day_kernel(static_cast<std::size_t>(d));
        }
    } else {
        for (std::size_t d = 0; d < D; ++d) {
            day_kernel(d);
        }
    }

    LossAndGradient out;
    out.gradient.assign(P, 0.0);
    for (std::size_t d = 0; d < D; ++d) {
        out.loss += partial[d][0];
        for (std::size_t j = 0; j < P; ++j) {
            out.gradient[j] += partial[d][j + 1];
        }
    }
    return out;
}

PoolLogWeights PoolLogWeights::from(const CandidatePool& pool) {
    auto logs = [](const std::vector<CandidateProfile>& cands) {
        std::vector<std::vector<double>> out;
        out.reserve(cands.size());
        for (const auto& c : cands) {
            std::vector<double> lw(c.flat().size());
            for (std::size_t j = 0; j < lw.size(); ++j) {
                const double p = c.flat()[j];
                lw[j] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
            }
            out.push_back(std::move(lw));
        }
        return out;
    };
    return {logs(pool.working), logs(pool.non_working)};
}

std::vector<std::vector<double>> score_days(const BuildingSeries& series, const CandidatePool& pool,
                                            const PoolLogWeights& log_weights,
                                            const DisaggregatorParams& params, Scenario scenario,
                                            const LevelSet& levels, Execution exec) {
    const LevelMoments lm(levels);
    const std::size_t K = levels.size();
    const std::size_t D = series.days();
    if (scenario == Scenario::lumped && !series.has_temperature()) {
        throw DataError("the lumped scenario needs an outdoor temperature column");
    }
    std::vector<std::vector<double>> scores(D);

    auto day_kernel = [&](std::size_t d) {
        // Component log-densities do not depend on the candidate.
        std::vector<double> logn(24 * K);
        for (std::size_t t = 0; t < 24; ++t) {
            const std::size_t i = d * 24 + t;
            if (!std::isfinite(series.load[i])) {
                throw DataError("missing load observation at " + format_timestamp(series.timestamps[i]));
            }
            const double temp = series.has_temperature() ? series.temperature[i] : 0.0;
            const StepMoments s = step_moments(params, scenario, temp);
            for (std::size_t k = 0; k < K; ++k) {
                const auto c = component(params, lm, scenario, s, k);
                logn[t * K + k] = gaussian_logpdf(series.load[i], c.mean, c.var);
            }
        }
        const DayType type = series.day_type[d * 24];
        const auto& lw = log_weights.for_day(type);
        auto& row = scores[d];
        row.resize(lw.size());
        std::vector<double> terms(K);
        for (std::size_t c = 0; c < lw.size(); ++c) {
            double ll = 0.0;
            for (std::size_t t = 0; t < 24; ++t) {
                for (std::size_t k = 0; k < K; ++k) {
                    terms[k] = lw[c][t * K + k] + logn[t * K + k];
                }
                ll += log_sum_exp(terms);
            }
            row[c] = ll;
        }
    };

    if (pool.for_day(DayType::working).size() != log_weights.working.size() ||
        pool.for_day(DayType::non_working).size() != log_weights.non_working.size()) {
        throw DimensionError("log-weight cache does not match the pool");
    }

    if (exec == Execution::parallel) {
        // Exceptions may not cross the OpenMP region boundary.
        std::vector<std::string> errors(D);
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(D); ++d) {
            try {
                day_kernel(static_cast<std::size_t>(d));
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(d)] = e.what();
            }
        }
        for (const auto& e : errors) {
            if (!e.empty()) {
                throw DataError(e);
            }
        }
    } else {
        for (std::size_t d = 0; d < D; ++d) {
            day_kernel(d);
        }
    }
    return scores;
}

PosteriorSeries build_posterior(const BuildingSeries& series, const CandidatePool& pool,
                                const PoolLogWeights& log_weights, const DisaggregatorParams& params,
                                Scenario scenario, const LevelSet& levels, std::size_t top_k) {
    const auto scores = score_days(series, pool, log_weights, params, scenario, levels);
    PosteriorSeries post;
    post.days.reserve(scores.size());
    for (std::size_t d = 0; d < scores.size(); ++d) {
        for (double s : scores[d]) {
            if (std::isnan(s)) {
                throw TrainingError("candidate score is NaN on day " + std::to_string(d));
            }
        }
        const DayType type = series.day_type[d * 24];
        post.days.push_back(combine_candidates(pool.for_day(type), matching_scores(scores[d], top_k)));
    }
    return post;
}

void fix_lumped_gauge(DisaggregatorParams& params, std::span<const double> temps, const LevelSet& levels) {
    if (temps.empty()) {
        throw DataError("the gauge fix needs training temperatures");
    }
    std::vector<double> gap(temps.size());
    for (std::size_t t = 0; t < temps.size(); ++t) {
        gap[t] = gate_spline(temps[t], params, true) - gate_spline(temps[t], params, false);
    }
    double offset = 0.0;
    try {
        offset = fit_piecewise_es(gap, temps).minimum();
    } catch (const DataError&) {
        offset = *std::min_element(gap.begin(), gap.end());
    }
    const double m0 = levels.component_mean(0);
    const double m_full = levels.component_mean(levels.size() - 1);
    params.light_dynamic = std::max(params.light_dynamic, 0.0);
    // light_dynamic cannot go negative without changing the fit.
    const double shift = std::max(offset / (m_full - m0), -params.light_dynamic);
    params.light_dynamic += shift;
    for (double& c : params.spline_occupied) c -= shift * m_full;
    for (double& c : params.spline_unoccupied) c -= shift * m0;
}

TrainResult train(const BuildingSeries& series, const CandidatePool& pool, const DisaggregatorParams& init,
                  const TrainConfig& config, const LevelSet& levels) {
    config.validate();
    init.validate();
    require_whole_days(series, kMinTrainingDays, config.scenario);

    // Work in load-scaled units so one learning rate suits any building size.
    double scale = 0.0;
    for (double v : series.load) {
        scale = std::max(scale, std::abs(v));
    }
    if (!(scale > 0.0)) {
        throw DataError("training load is identically zero");
    }
    BuildingSeries scaled = series;
    for (double& v : scaled.load) {
        v /= scale;
    }
    scaled.lighting.clear();
    scaled.plug.clear();
    scaled.hvac.clear();
    scaled.occupancy.clear();

    DisaggregatorParams params = init;
    params.plug_dynamic /= scale;
    params.plug_base /= scale;
    params.light_dynamic /= scale;
    params.light_base /= scale;
    for (double& c : params.spline_occupied) c /= scale;
    for (double& c : params.spline_unoccupied) c /= scale;
    params.obs_variance /= scale * scale;

    const PoolLogWeights log_weights = PoolLogWeights::from(pool);
    const double hours = static_cast<double>(scaled.size());

    // Adam over the packed vector; the noise variance is optimised in log space.
    std::vector<double> theta = pack_params(params);
    theta[4] = std::log(theta[4]);
    std::vector<double> m1(theta.size(), 0.0);
    std::vector<double> m2(theta.size(), 0.0);
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    long step = 0;

    auto to_params = [&](const std::vector<double>& th) {
        std::vector<double> natural = th;
        natural[4] = std::exp(th[4]);
        unpack_params(natural, params);
    };

    TrainResult result;
    PosteriorSeries posterior;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        posterior = build_posterior(scaled, pool, log_weights, params, config.scenario, levels, config.top_k);

        EpochRecord rec;
        rec.epoch = epoch + 1;
        for (int it = 0; it <= config.inner_iterations; ++it) {
            const auto lg = beta_nll_loss_grad(posterior, scaled, params, config.beta, config.scenario, levels);
            if (!std::isfinite(lg.loss)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                    std::to_string(it));
            }
            if (it == 0) {
                rec.loss_before = lg.loss / hours;
            }
            if (it == config.inner_iterations) {
                rec.loss = lg.loss / hours;
                break;
            }
            ++step;
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
            for (std::size_t j = 0; j < theta.size(); ++j) {
                double g = lg.gradient[j] / hours;
                if (j == 4) {
                    g *= params.obs_variance;
                }
                if (!std::isfinite(g)) {
                    throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch + 1) +
                                        ", step " + std::to_string(it));
                }
                m1[j] = b1 * m1[j] + (1.0 - b1) * g;
                m2[j] = b2 * m2[j] + (1.0 - b2) * g * g;
                theta[j] -= config.learning_rate * (m1[j] / c1) / (std::sqrt(m2[j] / c2) + eps);
            }
            to_params(theta);
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        spdlog::info("epoch {}: loss {:.6f} -> {:.6f} ({:.2f}s)", rec.epoch, rec.loss_before, rec.loss,
                     rec.seconds);
        result.trace.push_back(rec);
    }

    if (config.scenario == Scenario::lumped) {
        fix_lumped_gauge(params, scaled.temperature, levels);
    }
    result.posterior = build_posterior(scaled, pool, log_weights, params, config.scenario, levels, config.top_k);

    params.plug_dynamic *= scale;
    params.plug_base *= scale;
    params.light_dynamic *= scale;
    params.light_base *= scale;
    for (double& c : params.spline_occupied) c *= scale;
    for (double& c : params.spline_unoccupied) c *= scale;
    params.obs_variance *= scale * scale;
    params.epochs_trained = init.epochs_trained + config.epochs;
    result.params = params;
    result.load_scale = scale;
    return result;
}

InferenceResult infer(const BuildingSeries& series, const CandidatePool& pool,
                      const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels,
                      std::size_t top_k) {
    params.validate();
    require_whole_days(series, 1, scenario);
    const PoolLogWeights log_weights = PoolLogWeights::from(pool);
    InferenceResult out;
    out.posterior = build_posterior(series, pool, log_weights, params, scenario, levels, top_k);
    out.expected_ratio = out.posterior.expected_ratio(levels);
    return out;
}

} // namespace occu
