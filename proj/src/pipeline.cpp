#include "occu/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "occu/csv.hpp"
#include "occu/error.hpp"
#include "occu/random.hpp"

namespace occu {

namespace {

template <class F>
auto staged(const std::string& stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

const std::array<const char*, 3> kLevelNames{"low", "medium", "high"};

std::pair<ReferenceSchedule, ReferenceSchedule> schedules_of(const RunConfig& config) {
    if (config.schedules.empty()) {
        return {default_working_schedule(), default_non_working_schedule()};
    }
    return load_schedules_csv(config.schedules);
}

Scenario effective_scenario(const RunConfig& config, const BuildingData& data) {
    if (config.scenario == Scenario::lumped && !data.train.has_temperature()) {
        throw DataError("the lumped scenario needs a temperature column");
    }
    return config.scenario;
}

DisaggregatorParams initial_params(const BuildingData& data, Scenario scenario) {
    double temp_mean = 0.0;
    double temp_std = 1.0;
    if (scenario == Scenario::lumped) {
        temp_mean = mean_of(data.train.temperature);
        temp_std = std_of(data.train.temperature);
        if (!(temp_std > 0.0)) {
            throw DegenerateError("training temperature is constant");
        }
    }
    const double peak = *std::max_element(data.train.load.begin(), data.train.load.end());
    return init_params(data.metadata, temp_mean, temp_std, peak);
}

void add_f1(std::vector<MetricRow>& rows, const std::string& method, const F1Report& f1) {
    for (std::size_t c = 0; c < f1.f1.size(); ++c) {
        rows.push_back({method, std::string("f1_") + kLevelNames[c], f1.f1[c]});
    }
    rows.push_back({method, "f1_macro", f1.macro});
    rows.push_back({method, "f1_weighted", f1.weighted});
}

void add_rmse(std::vector<MetricRow>& rows, const std::string& method, const RmseReport& r) {
    for (std::size_t c = 0; c < r.per_level.size(); ++c) {
        if (r.per_level[c]) {
            rows.push_back({method, std::string("rmse_") + kLevelNames[c], *r.per_level[c]});
        }
    }
    rows.push_back({method, "rmse_overall", r.overall});
}

void write_occupancy_csv(const std::filesystem::path& path, const BuildingSeries& series,
                         const PosteriorSeries& posterior, const LevelSet& levels) {
    auto out = open_out(path);
    const auto expected = posterior.expected_ratio(levels);
    out << "timestamp,day_type,expected_ratio,vacancy_prob";
    for (std::size_t k = 0; k < levels.size(); ++k) {
        out << ",p_level" << k;
    }
    if (series.has_occupancy()) {
        out << ",truth";
    }
    out << '\n';
    for (std::size_t t = 0; t < series.size(); ++t) {
        const auto probs = posterior.days[t / 24].at(t % 24);
        out << format_timestamp(series.timestamps[t]) << ',' << to_string(series.day_type[t]) << ','
            << format_number(expected[t]) << ',' << format_number(probs[0]);
        for (double p : probs) {
            out << ',' << format_number(p);
        }
        if (series.has_occupancy()) {
            out << ',' << format_number(series.occupancy[t]);
        }
        out << '\n';
    }
}

void write_system_loads_csv(const std::filesystem::path& path, const BuildingSeries& series,
                            const PosteriorSeries& posterior, const DisaggregatorParams& params,
                            Scenario scenario, const LevelSet& levels) {
    auto out = open_out(path);
    out << "timestamp,load_kw,plug_kw,lighting_kw,weather_kw,total_kw,total_std_kw\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        const auto z = gm_from_categorical(posterior.days[t / 24].at(t % 24), levels);
        const double temp = series.has_temperature() ? series.temperature[t] : 0.0;
        const auto f = total_forward(z, temp, params, scenario, levels);
        const auto obs = observation_mixture(f.total, params);
        out << format_timestamp(series.timestamps[t]) << ',' << format_number(series.load[t]) << ','
            << format_number(f.plug.mean()) << ',' << format_number(f.lighting.mean()) << ','
            << format_number(f.weather ? f.weather->mean() : 0.0) << ',' << format_number(f.total.mean()) << ','
            << format_number(std::sqrt(obs.variance())) << '\n';
    }
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochRecord>& trace) {
    auto out = open_out(path);
    out << "epoch,loss_before,loss,seconds\n";
    for (const auto& r : trace) {
        out << r.epoch << ',' << format_number(r.loss_before) << ',' << format_number(r.loss) << ','
            << format_number(r.seconds) << '\n';
    }
}

void write_es_curves(const std::filesystem::path& path, const DisaggregatorParams& params,
                     std::span<const double> temps, const SimBuilding* truth) {
    auto out = open_out(path);
    out << "temperature_c,occupied_kw,unoccupied_kw";
    if (truth) {
        out << ",true_occupied_kw,true_unoccupied_kw";
    }
    out << '\n';
    double lo = params.temp_mean - 2.0 * params.temp_std;
    double hi = params.temp_mean + 2.0 * params.temp_std;
    if (!temps.empty()) {
        lo = *std::min_element(temps.begin(), temps.end());
        hi = *std::max_element(temps.begin(), temps.end());
    }
    constexpr int kPoints = 61;
    for (int i = 0; i < kPoints; ++i) {
        const double temp = lo + (hi - lo) * i / (kPoints - 1);
        out << format_number(temp) << ',' << format_number(gate_spline(temp, params, true)) << ','
            << format_number(gate_spline(temp, params, false));
        if (truth) {
            out << ',' << format_number(truth->hvac.curve(temp, 1.0)) << ','
                << format_number(truth->hvac.curve(temp, 0.0));
        }
        out << '\n';
    }
}

void write_baselines_csv(const std::filesystem::path& path, const BuildingSeries& series,
                         const std::vector<BaselineResult>& results) {
    auto out = open_out(path);
    out << "timestamp,method,level,ratio\n";
    for (const auto& r : results) {
        for (std::size_t t = 0; t < series.size(); ++t) {
            out << format_timestamp(series.timestamps[t]) << ',' << r.method << ',' << r.levels[t] << ','
                << format_number(r.ratio[t]) << '\n';
        }
    }
}

} // namespace

// --- configuration -----------------------------------------------------------

void RunConfig::validate() const {
    train.validate();
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw DataError(std::string(what) + " file not found: " + p.string());
        }
    };
    must_exist(series, "series");
    must_exist(schedules, "schedules");
    must_exist(holidays, "holidays");
    must_exist(params, "params");
    must_exist(hmm_prior, "HMM prior");
    if (pool.working == 0 || pool.non_working == 0) {
        throw DomainError("candidate pool sizes must be positive");
    }
    if (!(tau_min > 0.0)) {
        throw DomainError("tau_min must be positive");
    }
    if (baseline_clusters < 1 || baseline_clusters > 8 || hmm_states < 2 || hmm_states > 6) {
        throw DomainError("baseline clusters must be 1-8 and HMM states 2-6");
    }
    if (!(0 <= whatif_start_hour && whatif_start_hour < whatif_end_hour && whatif_end_hour <= 24)) {
        throw DomainError("what-if interval must lie within 0-24h");
    }
    if (series.empty()) {
        if (simulation.climates.empty()) {
            throw DomainError("simulation needs at least one climate");
        }
        if (simulation.train_days < kMinTrainingDays || simulation.test_days < 1) {
            throw DomainError("simulation needs at least 14 training days and one test day");
        }
        if (building < 0 || static_cast<std::size_t>(building) >= simulation.climates.size()) {
            throw DomainError("building index outside the configured climates");
        }
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json climates = nlohmann::json::array();
    for (auto c : simulation.climates) {
        climates.push_back(to_string(c));
    }
    return {{"scenario", to_string(scenario)},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"input",
             {{"series", series.string()},
              {"schedules", schedules.string()},
              {"holidays", holidays.string()},
              {"params", params.string()},
              {"train_days", train_days},
              {"metadata",
               {{"floor_area_m2", metadata.floor_area},
                {"light_intensity_w_m2", metadata.light_intensity},
                {"plug_intensity_w_m2", metadata.plug_intensity}}}}},
            {"simulation",
             {{"start", format_timestamp(simulation.start_day * 24).substr(0, 10)},
              {"train_days", simulation.train_days},
              {"test_days", simulation.test_days},
              {"climates", climates},
              {"building", building}}},
            {"generator", {{"working", pool.working}, {"non_working", pool.non_working}, {"tau_min", tau_min}}},
            {"train",
             {{"top_k", train.top_k},
              {"beta", train.beta},
              {"epochs", train.epochs},
              {"inner_iterations", train.inner_iterations},
              {"learning_rate", train.learning_rate}}},
            {"baselines",
             {{"enabled", run_baselines},
              {"clusters", baseline_clusters},
              {"hmm_states", hmm_states},
              {"hmm_prior", hmm_prior.string()}}},
            {"whatif", {{"start_hour", whatif_start_hour}, {"end_hour", whatif_end_hour}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    static const std::set<std::string> known{"scenario", "seed",      "output_dir", "input", "simulation",
                                             "generator", "train",    "baselines",  "whatif"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw DataError("unknown config key '" + key + "'");
        }
    }
    auto path_of = [&](const nlohmann::json& obj, const char* key) -> std::filesystem::path {
        const std::string text = obj.value(key, std::string());
        if (text.empty()) {
            return {};
        }
        std::filesystem::path p(text);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    RunConfig c;
    c.scenario = scenario_from_string(j.value("scenario", std::string("separate")));
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("input")) {
        const auto& in = j.at("input");
        c.series = path_of(in, "series");
        c.schedules = path_of(in, "schedules");
        c.holidays = path_of(in, "holidays");
        c.params = path_of(in, "params");
        c.train_days = in.value("train_days", c.train_days);
        if (in.contains("metadata")) {
            const auto& m = in.at("metadata");
            c.metadata.floor_area = m.value("floor_area_m2", c.metadata.floor_area);
            c.metadata.light_intensity = m.value("light_intensity_w_m2", c.metadata.light_intensity);
            c.metadata.plug_intensity = m.value("plug_intensity_w_m2", c.metadata.plug_intensity);
        }
    }
    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        if (s.contains("start")) {
            c.simulation.start_day = parse_date(s.at("start").get<std::string>());
        }
        c.simulation.train_days = s.value("train_days", c.simulation.train_days);
        c.simulation.test_days = s.value("test_days", c.simulation.test_days);
        if (s.contains("climates")) {
            c.simulation.climates.clear();
            for (const auto& name : s.at("climates")) {
                c.simulation.climates.push_back(climate_from_string(name.get<std::string>()));
            }
        }
        c.building = s.value("building", c.building);
    }
    if (j.contains("generator")) {
        const auto& g = j.at("generator");
        c.pool.working = g.value("working", c.pool.working);
        c.pool.non_working = g.value("non_working", c.pool.non_working);
        c.tau_min = g.value("tau_min", c.tau_min);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.top_k = t.value("top_k", c.train.top_k);
        c.train.beta = t.value("beta", c.train.beta);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.inner_iterations = t.value("inner_iterations", c.train.inner_iterations);
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    }
    if (j.contains("baselines")) {
        const auto& b = j.at("baselines");
        c.run_baselines = b.value("enabled", c.run_baselines);
        c.baseline_clusters = b.value("clusters", c.baseline_clusters);
        c.hmm_states = b.value("hmm_states", c.hmm_states);
        c.hmm_prior = path_of(b, "hmm_prior");
    }
    if (j.contains("whatif")) {
        const auto& w = j.at("whatif");
        c.whatif_start_hour = w.value("start_hour", c.whatif_start_hour);
        c.whatif_end_hour = w.value("end_hour", c.whatif_end_hour);
    }
    c.simulation.seed = c.seed;
    c.train.seed = c.seed;
    c.train.scenario = c.scenario;
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

void init_logging() {
    const char* env = std::getenv("OCCU_LOG_LEVEL");
    spdlog::set_level(spdlog::level::warn);
    if (env && *env) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off") {
            spdlog::warn("unknown OCCU_LOG_LEVEL '{}'; keeping warn", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

// --- stages ------------------------------------------------------------------

BuildingData prepare_data(const RunConfig& config, int building, const std::optional<ForcedHvac>& forced) {
    BuildingData data;
    if (config.series.empty()) {
        SimConfig sim = config.simulation;
        sim.seed = config.seed;
        auto simulated = simulate_building(sim, building, forced);
        const auto view = scenario_view(simulated.sim.series, config.scenario);
        data.name = simulated.building.name;
        data.train = view.slice_days(0, sim.train_days);
        data.test = view.slice_days(sim.train_days, sim.test_days);
        data.metadata = simulated.building.metadata();
        data.truth = std::move(simulated);
        return data;
    }
    HolidaySet holidays;
    if (!config.holidays.empty()) {
        holidays = load_holidays(config.holidays);
    }
    const auto series = trim_to_whole_days(load_series_csv(config.series, holidays));
    data.name = config.series.stem().string();
    data.metadata = config.metadata;
    if (config.train_days == 0 || config.train_days >= series.days()) {
        data.train = series;
        data.test = series;
    } else {
        data.train = series.slice_days(0, config.train_days);
        data.test = series.slice_days(config.train_days, series.days() - config.train_days);
    }
    return data;
}

CandidatePool make_pool(const RunConfig& config) {
    const auto [working, non_working] = schedules_of(config);
    return generate_pool(working, non_working, LevelSet::quartiles(), config.pool,
                         derive_seed(config.seed, 0x706f6f6cULL), config.tau_min);
}

std::vector<BaselineResult> run_baselines(const RunConfig& config, const BuildingData& data,
                                          const Discretization& truth) {
    const Scenario scenario = effective_scenario(config, data);
    std::vector<double> fit_x = data.train.load;
    std::vector<double> eval_x = data.test.load;
    if (scenario == Scenario::lumped) {
        const auto es = fit_piecewise_es(data.train.load, data.train.temperature);
        fit_x = remove_weather_trend(data.train.load, data.train.temperature, es);
        eval_x = remove_weather_trend(data.test.load, data.test.temperature, es);
    }
    const LevelThresholds& th = truth.thresholds;
    auto level_ratio = [&](const std::vector<int>& levels) {
        std::vector<double> r(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i) {
            r[i] = truth.centers[levels[i]];
        }
        return r;
    };
    std::vector<BaselineResult> out;

    {
        const auto sweep = scaler_sweep(eval_x, data.test.occupancy, default_zmax_grid());
        BaselineResult r;
        r.method = "linear_scaler";
        r.ratio = linear_scaler(eval_x, sweep.best_z_max);
        r.levels = th.apply(r.ratio);
        r.f1 = f1_report(r.levels, truth.labels);
        r.rmse = rmse_by_level(r.ratio, data.test.occupancy, th);
        out.push_back(std::move(r));
    }
    const int k = config.baseline_clusters;
    const std::uint64_t seed = derive_seed(config.seed, 0x62617365ULL);
    {
        const auto km = kmeans_fit(fit_x, k, seed);
        const auto mapped = map_clusters(km.assign(eval_x), k, truth.labels);
        BaselineResult r{"kmeans", mapped.labels, level_ratio(mapped.labels), mapped.report, {}};
        r.rmse = rmse_by_level(r.ratio, data.test.occupancy, th);
        out.push_back(std::move(r));
    }
    {
        const auto g = gmm_fit(fit_x, k, seed);
        const auto mapped = map_clusters(g.assign(eval_x), k, truth.labels);
        BaselineResult r{"gmm", mapped.labels, level_ratio(mapped.labels), mapped.report, {}};
        r.rmse = rmse_by_level(r.ratio, data.test.occupancy, th);
        out.push_back(std::move(r));
    }
    {
        const HmmPrior prior = config.hmm_prior.empty() ? HmmPrior{} : HmmPrior::load_json(config.hmm_prior);
        const auto fit = hmm_fit(fit_x, calendar_slots(data.train), config.hmm_states, prior, 100, 1e-6, seed);
        const auto post = hmm_decode(fit.model, eval_x, calendar_slots(data.test));
        const auto mapped = map_clusters(post.labels(), config.hmm_states, truth.labels);
        BaselineResult r{"hmm", mapped.labels, level_ratio(mapped.labels), mapped.report, {}};
        r.rmse = rmse_by_level(r.ratio, data.test.occupancy, th);
        out.push_back(std::move(r));
    }
    return out;
}

EsComparison compare_energy_signature(const DisaggregatorParams& params, const SimBuilding& building,
                                      std::span<const double> occupied_temps,
                                      std::span<const double> unoccupied_temps, std::size_t points) {
    if (points < 2) {
        throw DomainError("the ES grid needs at least two points");
    }
    if (occupied_temps.size() < 2 || unoccupied_temps.size() < 2) {
        throw DataError("the ES comparison needs training hours in both HVAC modes");
    }
    const double dom_lo = params.temp_mean + params.spline.lower * params.temp_std;
    const double dom_hi = params.temp_mean + params.spline.upper * params.temp_std;
    auto make_grid = [&](std::span<const double> temps) {
        const double lo = std::max(quantile(temps, 0.025), dom_lo);
        const double hi = std::min(quantile(temps, 0.975), dom_hi);
        if (hi <= lo) {
            throw DataError("the ES grid is empty inside the spline domain");
        }
        std::vector<double> grid;
        for (std::size_t i = 0; i < points; ++i) {
            grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
        }
        return grid;
    };
    EsComparison es;
    es.grid_occupied = make_grid(occupied_temps);
    es.grid_unoccupied = make_grid(unoccupied_temps);
    for (std::size_t i = 0; i < points; ++i) {
        es.fitted_occupied.push_back(gate_spline(es.grid_occupied[i], params, true));
        es.true_occupied.push_back(building.hvac.curve(es.grid_occupied[i], 1.0));
        es.fitted_unoccupied.push_back(gate_spline(es.grid_unoccupied[i], params, false));
        es.true_unoccupied.push_back(building.hvac.curve(es.grid_unoccupied[i], 0.0));
    }
    auto aligned_r2 = [](std::vector<double> fitted, const std::vector<double>& truth) {
        const double shift = mean_of(truth) - mean_of(fitted);
        for (double& v : fitted) {
            v += shift;
        }
        return r_squared(fitted, truth);
    };
    es.r2_occupied = aligned_r2(es.fitted_occupied, es.true_occupied);
    es.r2_unoccupied = aligned_r2(es.fitted_unoccupied, es.true_unoccupied);
    return es;
}

BuildingReport run_building(const RunConfig& config, int building, const std::filesystem::path& dir) {
    const LevelSet levels = LevelSet::quartiles();
    const auto data = staged("data", [&] { return prepare_data(config, building); });
    const Scenario scenario = staged("data", [&] { return effective_scenario(config, data); });
    staged("output", [&] {
        std::filesystem::create_directories(dir);
        return 0;
    });
    spdlog::info("{}: {} training days, {} evaluation days ({})", data.name, data.train.days(), data.test.days(),
                 to_string(scenario));

    const auto pool = staged("pool", [&] { return make_pool(config); });
    const auto trained = staged("train", [&] {
        TrainConfig tc = config.train;
        tc.scenario = scenario;
        return train(data.train, pool, initial_params(data, scenario), tc, levels);
    });
    const auto inferred =
        staged("infer", [&] { return infer(data.test, pool, trained.params, scenario, levels, config.train.top_k); });

    BuildingReport report;
    report.name = data.name;
    std::vector<BaselineResult> baselines;
    std::optional<EsComparison> es;
    staged("evaluate", [&] {
        auto& m = report.metrics;
        m.push_back({"model", "capacity_plug_dynamic_kw", trained.params.plug_dynamic_kw()});
        m.push_back({"model", "capacity_light_dynamic_kw", trained.params.light_dynamic_kw()});
        m.push_back({"model", "final_loss", trained.trace.empty() ? 0.0 : trained.trace.back().loss});
        if (!data.test.has_occupancy()) {
            return 0;
        }
        const auto truth = discretize_truth(data.test.occupancy, derive_seed(config.seed, 0x74727574ULL));
        m.push_back({"truth", "cut1", truth.thresholds.cut1});
        m.push_back({"truth", "cut2", truth.thresholds.cut2});
        const auto labels = truth.thresholds.apply(inferred.expected_ratio);
        add_f1(m, "model", f1_report(labels, truth.labels));
        add_rmse(m, "model", rmse_by_level(inferred.expected_ratio, data.test.occupancy, truth.thresholds));
        if (data.truth) {
            const auto& b = data.truth->building;
            if (auto e = capacity_error(trained.params.plug_dynamic_kw(), b.plug_capacity_kw())) {
                m.push_back({"model", "capacity_error_plug_pct", *e});
            }
            if (auto e = capacity_error(trained.params.light_dynamic_kw(), b.light_capacity_kw())) {
                m.push_back({"model", "capacity_error_light_pct", *e});
            }
            if (scenario == Scenario::lumped) {
                std::vector<double> occ_t;
                std::vector<double> unocc_t;
                for (std::size_t t = 0; t < data.train.size(); ++t) {
                    (data.train.occupancy[t] >= b.hvac.occupied_ratio ? occ_t : unocc_t)
                        .push_back(data.train.temperature[t]);
                }
                es = compare_energy_signature(trained.params, b, occ_t, unocc_t);
                m.push_back({"model", "es_r2_occupied", es->r2_occupied});
                m.push_back({"model", "es_r2_unoccupied", es->r2_unoccupied});
            }
        }
        if (config.run_baselines) {
            baselines = run_baselines(config, data, truth);
            for (const auto& b : baselines) {
                add_f1(m, b.method, b.f1);
                add_rmse(m, b.method, b.rmse);
            }
        }
        return 0;
    });

    staged("write", [&] {
        write_occupancy_csv(dir / "occupancy.csv", data.test, inferred.posterior, levels);
        write_system_loads_csv(dir / "system_loads.csv", data.test, inferred.posterior, trained.params, scenario,
                               levels);
        save_params_json(dir / "params.json", trained.params, config.to_json());
        write_metrics_csv(dir / "metrics.csv", {report});
        write_es_curves(dir / "es_curves.csv", trained.params, data.train.temperature,
                        data.truth ? &data.truth->building : nullptr);
        write_training_log(dir / "training_log.csv", trained.trace);
        if (!baselines.empty()) {
            write_baselines_csv(dir / "baselines.csv", data.test, baselines);
        }
        if (data.truth) {
            SimConfig sim = config.simulation;
            sim.seed = config.seed;
            std::ofstream(dir / "truth.json") << truth_sidecar(*data.truth, sim).dump(2) << '\n';
        }
        std::ofstream(dir / "summary.txt") << summary_table({report});
        return 0;
    });
    return report;
}

BuildingReport run_pipeline(const RunConfig& config) {
    config.validate();
    return run_building(config, config.building, config.output_dir);
}

std::vector<BuildingReport> run_portfolio(const RunConfig& config) {
    config.validate();
    if (!config.series.empty()) {
        throw DomainError("portfolio mode runs the synthetic buildings; drop input.series");
    }
    const int n = static_cast<int>(config.simulation.climates.size());
    std::vector<BuildingReport> reports(n);
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < n; ++b) {
        try {
            const std::string name = "bldg" + std::to_string(b);
            reports[b] = run_building(config, b, config.output_dir / name);
        } catch (const std::exception& e) {
            errors[b] = e.what();
        }
    }
    for (int b = 0; b < n; ++b) {
        if (!errors[b].empty()) {
            throw StageError("portfolio", "building " + std::to_string(b) + ": " + errors[b]);
        }
    }
    write_metrics_csv(config.output_dir / "metrics.csv", reports);
    std::ofstream(config.output_dir / "summary.txt") << summary_table(reports);
    return reports;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<BuildingReport>& reports) {
    auto out = open_out(path);
    out << "building,method,metric,value\n";
    for (const auto& r : reports) {
        for (const auto& m : r.metrics) {
            out << r.name << ',' << m.method << ',' << m.metric << ',' << format_number(m.value) << '\n';
        }
    }
}

std::string summary_table(const std::vector<BuildingReport>& reports) {
    // method x metric, averaged over buildings
    std::map<std::string, std::map<std::string, std::pair<double, int>>> cells;
    std::vector<std::string> methods;
    std::vector<std::string> metrics;
    for (const auto& r : reports) {
        for (const auto& m : r.metrics) {
            if (std::find(methods.begin(), methods.end(), m.method) == methods.end()) methods.push_back(m.method);
            if (std::find(metrics.begin(), metrics.end(), m.metric) == metrics.end()) metrics.push_back(m.metric);
            auto& c = cells[m.method][m.metric];
            c.first += m.value;
            ++c.second;
        }
    }
    std::ostringstream os;
    os << std::left << std::setw(28) << "metric";
    for (const auto& method : methods) {
        os << std::setw(15) << method;
    }
    os << '\n';
    for (const auto& metric : metrics) {
        os << std::setw(28) << metric;
        for (const auto& method : methods) {
            const auto it = cells[method].find(metric);
            if (it == cells[method].end()) {
                os << std::setw(15) << "-";
            } else {
                std::ostringstream v;
                v << std::fixed << std::setprecision(4) << it->second.first / it->second.second;
                os << std::setw(15) << v.str();
            }
        }
        os << '\n';
    }
    os << "(" << reports.size() << " building" << (reports.size() == 1 ? "" : "s") << ", mean per cell)\n";
    return os.str();
}

// --- what-if -----------------------------------------------------------------

WhatIfReport whatif_setback(const DisaggregatorParams& params, const BuildingSeries& series,
                            const PosteriorSeries& posterior, int start_hour, int end_hour, const LevelSet& levels) {
    if (params.epochs_trained <= 0) {
        throw DomainError("what-if needs trained parameters");
    }
    params.validate();
    if (!(0 <= start_hour && start_hour < end_hour && end_hour <= 24)) {
        throw DomainError("what-if interval must lie within 0-24h");
    }
    if (!series.has_temperature()) {
        throw DataError("what-if needs outdoor temperature");
    }
    if (posterior.hours() != series.size()) {
        throw DimensionError("posterior and series cover different hours");
    }
    const double m0 = levels.component_mean(0);
    const double vacant_base = params.plug_base_kw() + params.light_base_kw() +
                               (params.plug_dynamic_kw() + params.light_dynamic_kw()) * m0;
    const auto vacancy = posterior.vacancy_probability();

    WhatIfReport report;
    report.adjusted_load = series.load;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const int hour = hour_of(series.timestamps[t]);
        if (t % 24 == 0) {
            report.days.push_back({series.timestamps[t], 0.0, 0.0, 0});
        }
        auto& day = report.days.back();
        double after = series.load[t];
        if (hour >= start_hour && hour < end_hour && vacancy[t] >= 0.5) {
            const double b0 = gate_spline(series.temperature[t], params, false);
            const double b1 = gate_spline(series.temperature[t], params, true);
            const double pred0 = vacant_base + b0;
            const double pred1 = vacant_base + b1;
            if (std::abs(series.load[t] - pred1) < std::abs(series.load[t] - pred0)) {
                after = std::max(0.0, series.load[t] - b1 + b0);
                ++day.flagged_steps;
            }
        }
        report.adjusted_load[t] = after;
        day.kwh_before += series.load[t];
        day.kwh_after += after;
        report.kwh_before += series.load[t];
        report.kwh_after += after;
    }
    return report;
}

WhatIfRun run_whatif_synthetic(const RunConfig& base, const std::filesystem::path& dir) {
    RunConfig config = base;
    config.scenario = Scenario::lumped;
    config.train.scenario = Scenario::lumped;
    config.validate();
    const LevelSet levels = LevelSet::quartiles();
    const ForcedHvac forced{config.whatif_start_hour, config.whatif_end_hour, config.simulation.train_days};
    const auto data = staged("data", [&] { return prepare_data(config, config.building, forced); });
    if (!data.truth) {
        throw StageError("data", "the synthetic what-if check needs generated data");
    }
    const auto pool = staged("pool", [&] { return make_pool(config); });
    const auto trained = staged("train", [&] {
        return train(data.train, pool, initial_params(data, Scenario::lumped), config.train, levels);
    });
    const auto inferred = staged("infer", [&] {
        return infer(data.test, pool, trained.params, Scenario::lumped, levels, config.train.top_k);
    });
    WhatIfRun run;
    run.report = staged("whatif", [&] {
        return whatif_setback(trained.params, data.test, inferred.posterior, config.whatif_start_hour,
                              config.whatif_end_hour, levels);
    });
    const auto& waste = data.truth->sim.hvac_waste;
    const std::size_t first = config.simulation.train_days * 24;
    run.injected_kwh = std::accumulate(waste.begin() + static_cast<std::ptrdiff_t>(first), waste.end(), 0.0);
    run.relative_error = run.injected_kwh > 0.0 ? (run.report.saving_kwh() - run.injected_kwh) / run.injected_kwh
                                                : 0.0;
    staged("write", [&] {
        std::filesystem::create_directories(dir);
        auto out = open_out(dir / "whatif.csv");
        out << "date,kwh_before,kwh_after,flagged_steps\n";
        for (const auto& d : run.report.days) {
            out << format_timestamp(d.day_start).substr(0, 10) << ',' << format_number(d.kwh_before) << ','
                << format_number(d.kwh_after) << ',' << d.flagged_steps << '\n';
        }
        nlohmann::json summary{{"building", data.name},
                               {"interval_hours", {config.whatif_start_hour, config.whatif_end_hour}},
                               {"kwh_before", run.report.kwh_before},
                               {"kwh_after", run.report.kwh_after},
                               {"saving_kwh", run.report.saving_kwh()},
                               {"injected_kwh", run.injected_kwh},
                               {"relative_error", run.relative_error}};
        std::ofstream(dir / "whatif_summary.json") << summary.dump(2) << '\n';
        save_params_json(dir / "params.json", trained.params, config.to_json());
        return 0;
    });
    return run;
}

} // namespace occu
