#include "occu/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "occu/error.hpp"
#include "occu/gm.hpp"
#include "occu/random.hpp"

namespace occu {

// --- linear scaler -------------------------------------------------------

std::vector<double> linear_scaler(std::span<const double> load, double z_max) {
    if (load.empty()) {
        throw DegenerateError("empty load series");
    }
    const auto [lo, hi] = std::minmax_element(load.begin(), load.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) {
        throw DegenerateError("linear scaler needs a non-constant load series");
    }
    std::vector<double> z(load.size());
    for (std::size_t i = 0; i < load.size(); ++i) {
        z[i] = std::clamp(z_max * (load[i] - *lo) / range, 0.0, 1.0);
    }
    return z;
}

std::vector<double> default_zmax_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 6; ++i) {
        grid.push_back(0.7 + 0.05 * i);
    }
    return grid;
}

ScalerSweep scaler_sweep(std::span<const double> load, std::span<const double> truth,
                         std::span<const double> grid) {
    if (load.size() != truth.size()) {
        throw DimensionError("load and truth lengths differ");
    }
    if (grid.empty()) {
        throw DomainError("z_max grid is empty");
    }
    ScalerSweep out;
    out.best_rmse = std::numeric_limits<double>::infinity();
    for (double z_max : grid) {
        const auto z = linear_scaler(load, z_max);
        double se = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            se += (z[i] - truth[i]) * (z[i] - truth[i]);
        }
        const double rmse = std::sqrt(se / static_cast<double>(z.size()));
        out.table.emplace_back(z_max, rmse);
        if (rmse < out.best_rmse) {
            out.best_rmse = rmse;
            out.best_z_max = z_max;
        }
    }
    return out;
}

// --- piecewise-linear energy signature ------------------------------------

double PiecewiseES::operator()(double temp) const {
    double y = intercept + slopes.front() * temp;
    for (std::size_t b = 0; b < breakpoints.size(); ++b) {
        y += (slopes[b + 1] - slopes[b]) * std::max(0.0, temp - breakpoints[b]);
    }
    return y;
}

double PiecewiseES::minimum() const {
    double m = std::min((*this)(t_min), (*this)(t_max));
    for (double b : breakpoints) {
        m = std::min(m, (*this)(b));
    }
    return m;
}

namespace {

struct HingeFit {
    Eigen::VectorXd coef;
    double sse = std::numeric_limits<double>::infinity();
};

// Least squares on [1, T, (T-c1)+, (T-c2)+ ...].
HingeFit fit_hinges(std::span<const double> y, std::span<const double> temps, const std::vector<double>& knots) {
    const std::size_t p = 2 + knots.size();
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd row(p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        row[0] = 1.0;
        row[1] = temps[i];
        for (std::size_t b = 0; b < knots.size(); ++b) {
            row[2 + b] = std::max(0.0, temps[i] - knots[b]);
        }
        xtx.noalias() += row * row.transpose();
        xty.noalias() += row * y[i];
    }
    HingeFit fit;
    fit.coef = xtx.ldlt().solve(xty);
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double pred = fit.coef[0] + fit.coef[1] * temps[i];
        for (std::size_t b = 0; b < knots.size(); ++b) {
            pred += fit.coef[2 + b] * std::max(0.0, temps[i] - knots[b]);
        }
        sse += (y[i] - pred) * (y[i] - pred);
    }
    fit.sse = sse;
    return fit;
}

} // namespace

PiecewiseES fit_piecewise_es(std::span<const double> loads, std::span<const double> temps,
                             const EsFitOptions& options) {
    if (loads.size() != temps.size()) {
        throw DimensionError("load and temperature lengths differ");
    }
    const std::size_t n = loads.size();
    if (n < 50) {
        throw DataError("energy-signature fit needs at least 50 observations");
    }
    const auto [tlo, thi] = std::minmax_element(temps.begin(), temps.end());
    if (*thi - *tlo < 5.0) {
        throw DataError("energy-signature fit needs a temperature span of at least 5 degC");
    }

    std::vector<double> sorted(temps.begin(), temps.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = std::min(options.min_segment, n / 4);
    const double lo_ok = sorted[m];
    const double hi_ok = sorted[n - 1 - m];
    std::vector<double> grid;
    for (double c = std::ceil(lo_ok / options.resolution) * options.resolution; c < hi_ok;
         c += options.resolution) {
        grid.push_back(c);
    }

    double mean = std::accumulate(loads.begin(), loads.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : loads) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(n);
    const double mse_floor = 1e-10 * var + 1e-20;
    const double dn = static_cast<double>(n);

    auto bic_of = [&](double sse, std::size_t nbp) {
        const double p = 2.0 + 2.0 * static_cast<double>(nbp);
        return dn * std::log(std::max(sse / dn, mse_floor)) + p * std::log(dn);
    };

    struct Candidate {
        std::vector<double> knots;
        HingeFit fit;
        double bic;
    };
    std::vector<Candidate> best_by_count;

    {
        auto fit = fit_hinges(loads, temps, {});
        best_by_count.push_back({{}, fit, bic_of(fit.sse, 0)});
    }
    if (options.max_breakpoints >= 1 && !grid.empty()) {
        Candidate best{{}, {}, std::numeric_limits<double>::infinity()};
        for (double c : grid) {
            auto fit = fit_hinges(loads, temps, {c});
            if (fit.sse < best.fit.sse) {
                best = {{c}, fit, bic_of(fit.sse, 1)};
            }
        }
        best_by_count.push_back(best);
    }
    if (options.max_breakpoints >= 2 && grid.size() >= 2) {
        Candidate best{{}, {}, std::numeric_limits<double>::infinity()};
        for (std::size_t a = 0; a < grid.size(); ++a) {
            for (std::size_t b = a + 1; b < grid.size(); ++b) {
                const auto between = std::count_if(temps.begin(), temps.end(), [&](double t) {
                    return t >= grid[a] && t < grid[b];
                });
                if (static_cast<std::size_t>(between) < m) {
                    continue;
                }
                auto fit = fit_hinges(loads, temps, {grid[a], grid[b]});
                if (fit.sse < best.fit.sse) {
                    best = {{grid[a], grid[b]}, fit, bic_of(fit.sse, 2)};
                }
            }
        }
        if (std::isfinite(best.bic)) {
            best_by_count.push_back(best);
        }
    }

    const auto chosen = std::min_element(best_by_count.begin(), best_by_count.end(),
                                         [](const Candidate& a, const Candidate& b) { return a.bic < b.bic; });
    PiecewiseES es;
    es.breakpoints = chosen->knots;
    es.intercept = chosen->fit.coef[0];
    double slope = chosen->fit.coef[1];
    es.slopes.push_back(slope);
    for (std::size_t b = 0; b < chosen->knots.size(); ++b) {
        slope += chosen->fit.coef[2 + b];
        es.slopes.push_back(slope);
    }
    es.t_min = *tlo;
    es.t_max = *thi;
    es.sse = chosen->fit.sse;
    es.bic = chosen->bic;
    return es;
}

std::vector<double> remove_weather_trend(std::span<const double> loads, std::span<const double> temps,
                                         const PiecewiseES& es) {
    if (loads.size() != temps.size()) {
        throw DimensionError("load and temperature lengths differ");
    }
    const double floor_level = es.minimum();
    std::vector<double> out(loads.size());
    for (std::size_t i = 0; i < loads.size(); ++i) {
        out[i] = loads[i] - (es(temps[i]) - floor_level);
    }
    return out;
}

// --- clustering -----------------------------------------------------------

int KMeansModel::assign(double x) const {
    int best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = std::abs(x - centers[c]);
        if (d < dist) {
            dist = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<int> KMeansModel::assign(std::span<const double> x) const {
    std::vector<int> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = assign(x[i]);
    }
    return out;
}

namespace {

KMeansModel lloyd(std::span<const double> x, int k, Rng& rng, const KMeansOptions& opt) {
    const std::size_t n = x.size();
    std::vector<double> centers;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centers.push_back(x[pick(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) {
                best = std::min(best, (x[i] - c) * (x[i] - c));
            }
            d2[i] = best;
            total += best;
        }
        if (!(total > 0.0)) {
            centers.push_back(x[pick(rng)]);
            continue;
        }
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0 && d2[i] > 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(x[chosen]);
    }

    KMeansModel model;
    std::vector<int> label(n, 0);
    for (int it = 0; it < opt.max_iterations; ++it) {
        model.iterations = it + 1;
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double dist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = std::abs(x[i] - centers[c]);
                if (d < dist) {
                    dist = d;
                    best = c;
                }
            }
            label[i] = best;
            sum[best] += x[i];
            ++count[best];
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            double next = centers[c];
            if (count[c] > 0) {
                next = sum[c] / static_cast<double>(count[c]);
            } else {
                // Re-seed an empty cluster at the point farthest from its center.
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = std::abs(x[i] - centers[label[i]]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                next = x[far];
            }
            shift = std::max(shift, std::abs(next - centers[c]));
            centers[c] = next;
        }
        if (shift < opt.tolerance) {
            break;
        }
    }
    std::sort(centers.begin(), centers.end());
    model.centers = centers;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = centers[model.assign(x[i])];
        inertia += (x[i] - c) * (x[i] - c);
    }
    model.inertia = inertia;
    return model;
}

} // namespace

KMeansModel kmeans_fit(std::span<const double> x, int k, std::uint64_t seed, const KMeansOptions& opt) {
    if (k < 1) {
        throw DomainError("k must be at least 1");
    }
    if (x.empty()) {
        throw DegenerateError("no data to cluster");
    }
    const std::set<double> distinct(x.begin(), x.end());
    if (static_cast<std::size_t>(k) > distinct.size()) {
        throw DegenerateError("k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct.size()) +
                              " distinct values");
    }
    KMeansModel best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        Rng rng(derive_seed(seed, 0x6b6d, static_cast<std::uint64_t>(r)));
        auto m = lloyd(x, k, rng, opt);
        if (m.inertia < best.inertia) {
            best = std::move(m);
        }
    }
    return best;
}

std::vector<double> GmmModel::responsibilities(double x) const {
    std::vector<double> terms(means.size());
    for (std::size_t c = 0; c < means.size(); ++c) {
        terms[c] = weights[c] > 0.0 ? std::log(weights[c]) + gaussian_logpdf(x, means[c], variances[c])
                                    : -std::numeric_limits<double>::infinity();
    }
    const double z = log_sum_exp(terms);
    for (double& t : terms) {
        t = std::exp(t - z);
    }
    return terms;
}

int GmmModel::assign(double x) const {
    const auto r = responsibilities(x);
    return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::vector<int> GmmModel::assign(std::span<const double> x) const {
    std::vector<int> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = assign(x[i]);
    }
    return out;
}

double GmmModel::loglik(std::span<const double> x) const {
    double ll = 0.0;
    std::vector<double> terms(means.size());
    for (double v : x) {
        for (std::size_t c = 0; c < means.size(); ++c) {
            terms[c] = weights[c] > 0.0 ? std::log(weights[c]) + gaussian_logpdf(v, means[c], variances[c])
                                        : -std::numeric_limits<double>::infinity();
        }
        ll += log_sum_exp(terms);
    }
    return ll;
}

GmmModel gmm_fit(std::span<const double> x, int k, std::uint64_t seed, const GmmOptions& opt) {
    const auto km = kmeans_fit(x, k, seed);
    const std::size_t n = x.size();
    const auto labels = km.assign(x);

    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double total_var = 0.0;
    for (double v : x) {
        total_var += (v - mean) * (v - mean);
    }
    total_var /= static_cast<double>(n);
    const double var_floor = 1e-6 * total_var + 1e-12;

    GmmModel g;
    g.means = km.centers;
    g.weights.assign(k, 0.0);
    g.variances.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        g.weights[labels[i]] += 1.0;
        const double d = x[i] - g.means[labels[i]];
        g.variances[labels[i]] += d * d;
    }
    for (int c = 0; c < k; ++c) {
        g.variances[c] = std::max(g.weights[c] > 0 ? g.variances[c] / g.weights[c] : total_var, var_floor);
        g.weights[c] /= static_cast<double>(n);
    }

    std::vector<double> resp(n * k);
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iterations; ++it) {
        double ll = 0.0;
        std::vector<double> terms(k);
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                terms[c] = g.weights[c] > 0.0
                               ? std::log(g.weights[c]) + gaussian_logpdf(x[i], g.means[c], g.variances[c])
                               : -std::numeric_limits<double>::infinity();
            }
            const double z = log_sum_exp(terms);
            ll += z;
            for (int c = 0; c < k; ++c) {
                resp[i * k + c] = std::exp(terms[c] - z);
            }
        }
        g.loglik_trace.push_back(ll);
        if (std::abs(ll - prev) / static_cast<double>(n) < opt.tolerance) {
            break;
        }
        prev = ll;
        for (int c = 0; c < k; ++c) {
            double nk = 0.0;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i * k + c];
                s += resp[i * k + c] * x[i];
            }
            if (nk <= 1e-12) {
                continue;
            }
            const double mu = s / nk;
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                v += resp[i * k + c] * (x[i] - mu) * (x[i] - mu);
            }
            g.means[c] = mu;
            g.variances[c] = std::max(v / nk, var_floor);
            g.weights[c] = nk / static_cast<double>(n);
        }
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.means[a] < g.means[b]; });
    GmmModel sorted = g;
    for (int c = 0; c < k; ++c) {
        sorted.means[c] = g.means[order[c]];
        sorted.variances[c] = g.variances[order[c]];
        sorted.weights[c] = g.weights[order[c]];
    }
    return sorted;
}

Clustering kmeans_levels(std::span<const double> x, int k, std::uint64_t seed) {
    const auto m = kmeans_fit(x, k, seed);
    return {m.assign(x), m.centers};
}

Clustering gmm_levels(std::span<const double> x, int k, std::uint64_t seed) {
    const auto g = gmm_fit(x, k, seed);
    return {g.assign(x), g.means};
}

// --- HMM -------------------------------------------------------------------

std::vector<int> calendar_slots(const BuildingSeries& series) {
    std::vector<int> slots(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        slots[i] = hour_of(series.timestamps[i]) * 2 + (series.day_type[i] == DayType::non_working ? 1 : 0);
    }
    return slots;
}

void HmmModel::validate() const {
    const auto n = static_cast<std::size_t>(n_states);
    if (n_states < 1 || means.size() != n || variances.size() != n || initial.size() != n ||
        transitions.size() != kHmmSlots * n * n) {
        throw DimensionError("HMM arrays have inconsistent sizes");
    }
    for (double v : variances) {
        if (!(v > 0.0)) {
            throw DomainError("HMM emission variance must be positive");
        }
    }
    for (std::size_t s = 0; s < kHmmSlots; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row += a(s, i, j);
            }
            if (std::abs(row - 1.0) > 1e-9) {
                throw DomainError("HMM transition row is not stochastic");
            }
        }
    }
}

HmmPrior HmmPrior::load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    nlohmann::json j;
    in >> j;
    HmmPrior p;
    p.working_modes = j.value("working_modes", p.working_modes);
    p.low_self = j.value("low_self", p.low_self);
    p.drift_self = j.value("drift_self", p.drift_self);
    p.ramp_self = j.value("ramp_self", p.ramp_self);
    p.stay_self = j.value("stay_self", p.stay_self);
    p.floor = j.value("floor", p.floor);
    p.pseudo_count = j.value("pseudo_count", p.pseudo_count);
    if (p.working_modes.size() != 24) {
        throw DataError("working_modes must have one character per hour");
    }
    return p;
}

void HmmPrior::save_json(const std::filesystem::path& path) const {
    nlohmann::json j{{"working_modes", working_modes}, {"low_self", low_self},     {"drift_self", drift_self},
                     {"ramp_self", ramp_self},         {"stay_self", stay_self},   {"floor", floor},
                     {"pseudo_count", pseudo_count}};
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

namespace {

std::vector<double> prior_row(std::size_t from, std::size_t n, char mode, const HmmPrior& prior) {
    std::vector<double> row(n, 0.0);
    double self = 0.0;
    std::vector<double> drift(n, 0.0);
    switch (mode) {
    case 'L':
        self = from == 0 ? prior.low_self : prior.drift_self;
        for (std::size_t j = 0; j < from; ++j) {
            drift[j] = 1.0 / static_cast<double>(from - j);
        }
        if (from == 0) {
            for (std::size_t j = 1; j < n; ++j) drift[j] = 1.0;
        }
        break;
    case 'U':
        self = prior.ramp_self;
        for (std::size_t j = from + 1; j < n; ++j) {
            drift[j] = 1.0 / static_cast<double>(j - from);
        }
        break;
    case 'D':
        self = prior.ramp_self;
        for (std::size_t j = 0; j < from; ++j) {
            drift[j] = 1.0 / static_cast<double>(from - j);
        }
        break;
    default:
        self = prior.stay_self;
        if (from > 0) drift[from - 1] = 1.0;
        if (from + 1 < n) drift[from + 1] = 1.0;
        break;
    }
    const double dsum = std::accumulate(drift.begin(), drift.end(), 0.0);
    if (dsum <= 0.0) {
        self = 1.0; // top state in 'U' hours or bottom state in 'D' hours
    }
    for (std::size_t j = 0; j < n; ++j) {
        row[j] = (j == from ? self : 0.0) + (dsum > 0.0 ? (1.0 - self) * drift[j] / dsum : 0.0) + prior.floor;
    }
    const double rsum = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& v : row) {
        v /= rsum;
    }
    return row;
}

std::vector<double> prior_transitions(std::size_t n, const HmmPrior& prior) {
    std::vector<double> tr(kHmmSlots * n * n);
    for (std::size_t slot = 0; slot < kHmmSlots; ++slot) {
        const std::size_t hour = slot / 2;
        const char mode = slot % 2 == 1 ? 'L' : prior.working_modes.at(hour);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = prior_row(i, n, mode, prior);
            std::copy(row.begin(), row.end(), tr.begin() + static_cast<std::ptrdiff_t>((slot * n + i) * n));
        }
    }
    return tr;
}

} // namespace

HmmModel hmm_prior_model(std::span<const double> x, int n_states, const HmmPrior& prior, std::uint64_t seed) {
    if (n_states < 2) {
        throw DomainError("the HMM needs at least two states");
    }
    const auto km = kmeans_fit(x, n_states, seed);
    const auto labels = km.assign(x);
    HmmModel m;
    m.n_states = n_states;
    m.means = km.centers;
    m.variances.assign(n_states, 0.0);
    std::vector<double> count(n_states, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - m.means[labels[i]];
        m.variances[labels[i]] += d * d;
        count[labels[i]] += 1.0;
    }
    double pooled = 0.0;
    for (int s = 0; s < n_states; ++s) {
        pooled += m.variances[s];
    }
    pooled = std::max(pooled / static_cast<double>(x.size()), 1e-12);
    for (int s = 0; s < n_states; ++s) {
        m.variances[s] = count[s] > 1 ? std::max(m.variances[s] / count[s], 1e-3 * pooled) : pooled;
    }
    m.initial.assign(n_states, 0.1 / (n_states - 1));
    m.initial[0] = 0.9;
    m.transitions = prior_transitions(static_cast<std::size_t>(n_states), prior);
    return m;
}

std::vector<int> HmmPosterior::labels() const {
    const std::size_t T = n_states > 0 ? gamma.size() / static_cast<std::size_t>(n_states) : 0;
    std::vector<int> out(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto* row = gamma.data() + t * n_states;
        out[t] = static_cast<int>(std::max_element(row, row + n_states) - row);
    }
    return out;
}

namespace {

struct ForwardBackward {
    std::vector<double> alpha; // scaled
    std::vector<double> beta;  // scaled
    std::vector<double> emit;  // scaled emission likelihoods
    std::vector<double> scale;
    double loglik = 0.0;
};

ForwardBackward forward_backward(const HmmModel& m, std::span<const double> x, std::span<const int> slots) {
    const std::size_t n = static_cast<std::size_t>(m.n_states);
    const std::size_t T = x.size();
    ForwardBackward fb;
    fb.alpha.assign(T * n, 0.0);
    fb.beta.assign(T * n, 0.0);
    fb.emit.assign(T * n, 0.0);
    fb.scale.assign(T, 0.0);

    std::vector<double> logb(n);
    for (std::size_t t = 0; t < T; ++t) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            logb[j] = gaussian_logpdf(x[t], m.means[j], m.variances[j]);
            peak = std::max(peak, logb[j]);
        }
        for (std::size_t j = 0; j < n; ++j) {
            fb.emit[t * n + j] = std::exp(logb[j] - peak);
        }
        fb.loglik += peak;
    }

    for (std::size_t t = 0; t < T; ++t) {
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double prior = 0.0;
            if (t == 0) {
                prior = m.initial[j];
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    prior += fb.alpha[(t - 1) * n + i] * m.a(static_cast<std::size_t>(slots[t]), i, j);
                }
            }
            const double v = prior * fb.emit[t * n + j];
            fb.alpha[t * n + j] = v;
            c += v;
        }
        if (!(c > 0.0)) {
            throw DegenerateError("HMM forward pass underflowed");
        }
        for (std::size_t j = 0; j < n; ++j) {
            fb.alpha[t * n + j] /= c;
        }
        fb.scale[t] = c;
        fb.loglik += std::log(c);
    }

    for (std::size_t j = 0; j < n; ++j) {
        fb.beta[(T - 1) * n + j] = 1.0;
    }
    for (std::size_t t = T - 1; t-- > 0;) {
        const auto slot = static_cast<std::size_t>(slots[t + 1]);
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                v += m.a(slot, i, j) * fb.emit[(t + 1) * n + j] * fb.beta[(t + 1) * n + j];
            }
            fb.beta[t * n + i] = v / fb.scale[t + 1];
        }
    }
    return fb;
}

void order_states(HmmModel& m) {
    const std::size_t n = static_cast<std::size_t>(m.n_states);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.means[a] < m.means[b]; });
    HmmModel out = m;
    for (std::size_t i = 0; i < n; ++i) {
        out.means[i] = m.means[order[i]];
        out.variances[i] = m.variances[order[i]];
        out.initial[i] = m.initial[order[i]];
    }
    for (std::size_t s = 0; s < kHmmSlots; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out.a(s, i, j) = m.a(s, order[i], order[j]);
            }
        }
    }
    m = std::move(out);
}

} // namespace

HmmPosterior hmm_decode(const HmmModel& model, std::span<const double> x, std::span<const int> slots) {
    model.validate();
    if (x.size() != slots.size()) {
        throw DimensionError("HMM observations and calendar slots are misaligned");
    }
    if (x.empty()) {
        throw DegenerateError("no observations to decode");
    }
    const std::size_t n = static_cast<std::size_t>(model.n_states);
    const auto fb = forward_backward(model, x, slots);
    HmmPosterior post;
    post.n_states = model.n_states;
    post.loglik = fb.loglik;
    post.gamma.resize(x.size() * n);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            post.gamma[t * n + j] = fb.alpha[t * n + j] * fb.beta[t * n + j];
            s += post.gamma[t * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            post.gamma[t * n + j] /= s;
        }
    }
    return post;
}

HmmFit hmm_fit(std::span<const double> x, std::span<const int> slots, int n_states, const HmmPrior& prior,
               int max_iterations, double tolerance, std::uint64_t seed) {
    if (x.size() != slots.size()) {
        throw DimensionError("HMM observations and calendar slots are misaligned");
    }
    for (int s : slots) {
        if (s < 0 || s >= static_cast<int>(kHmmSlots)) {
            throw DomainError("calendar slot out of range");
        }
    }
    HmmModel m = hmm_prior_model(x, n_states, prior, seed);
    const std::vector<double> prior_tr = m.transitions;
    const std::size_t n = static_cast<std::size_t>(n_states);
    const std::size_t T = x.size();

    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(T);
    double total_var = 0.0;
    for (double v : x) total_var += (v - mean) * (v - mean);
    total_var /= static_cast<double>(T);
    const double var_floor = 1e-6 * total_var + 1e-12;

    HmmFit fit;
    HmmModel best = m;
    double best_ll = -std::numeric_limits<double>::infinity();
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iterations; ++it) {
        const auto fb = forward_backward(m, x, slots);
        fit.loglik_trace.push_back(fb.loglik);
        if (fb.loglik > best_ll) {
            best_ll = fb.loglik;
            best = m;
        }
        if (std::abs(fb.loglik - prev) <= tolerance * (1.0 + std::abs(fb.loglik))) {
            fit.converged = true;
            break;
        }
        prev = fb.loglik;

        std::vector<double> gamma(T * n);
        for (std::size_t t = 0; t < T; ++t) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                gamma[t * n + j] = fb.alpha[t * n + j] * fb.beta[t * n + j];
                s += gamma[t * n + j];
            }
            for (std::size_t j = 0; j < n; ++j) gamma[t * n + j] /= s;
        }
        std::vector<double> xi(kHmmSlots * n * n, 0.0);
        for (std::size_t t = 1; t < T; ++t) {
            const auto slot = static_cast<std::size_t>(slots[t]);
            for (std::size_t i = 0; i < n; ++i) {
                const double ai = fb.alpha[(t - 1) * n + i];
                for (std::size_t j = 0; j < n; ++j) {
                    xi[(slot * n + i) * n + j] +=
                        ai * m.a(slot, i, j) * fb.emit[t * n + j] * fb.beta[t * n + j] / fb.scale[t];
                }
            }
        }
        for (std::size_t slot = 0; slot < kHmmSlots; ++slot) {
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t idx = (slot * n + i) * n + j;
                    xi[idx] += prior.pseudo_count * prior_tr[idx];
                    row += xi[idx];
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t idx = (slot * n + i) * n + j;
                    m.transitions[idx] = row > 0.0 ? xi[idx] / row : prior_tr[idx];
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            double w = 0.0;
            double s = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                w += gamma[t * n + j];
                s += gamma[t * n + j] * x[t];
            }
            if (w <= 1e-12) {
                continue;
            }
            const double mu = s / w;
            double v = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                v += gamma[t * n + j] * (x[t] - mu) * (x[t] - mu);
            }
            m.means[j] = mu;
            m.variances[j] = std::max(v / w, var_floor);
            m.initial[j] = gamma[j];
        }
        double init_sum = std::accumulate(m.initial.begin(), m.initial.end(), 0.0);
        for (double& v : m.initial) v /= init_sum;
    }
    if (!fit.converged) {
        spdlog::warn("HMM did not converge in {} iterations; returning the best model seen", max_iterations);
        m = best;
    }
    order_states(m);
    fit.model = std::move(m);
    return fit;
}

} // namespace occu
