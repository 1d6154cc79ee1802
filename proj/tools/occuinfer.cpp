// occuinfer: occupancy inference from smart-meter load.
//
//   occuinfer simulate|train|infer|evaluate|baseline|whatif
//       [--config FILE] [--seed N] [--scenario separate|lumped] [--out DIR]
//       [--building N] [--params FILE] [--portfolio]
//
// Log verbosity comes from OCCU_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "occu/csv.hpp"
#include "occu/error.hpp"
#include "occu/pipeline.hpp"

namespace fs = std::filesystem;
using namespace occu;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string scenario;
    std::string out;
    std::optional<int> building;
    std::string params;
    bool portfolio = false;
};

RunConfig resolve(const Options& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
    if (o.seed) {
        c.seed = *o.seed;
        c.simulation.seed = *o.seed;
        c.train.seed = *o.seed;
    }
    if (!o.scenario.empty()) {
        c.scenario = scenario_from_string(o.scenario);
        c.train.scenario = c.scenario;
    }
    if (!o.out.empty()) {
        c.output_dir = o.out;
    }
    if (o.building) {
        c.building = *o.building;
    }
    if (!o.params.empty()) {
        c.params = o.params;
    }
    c.validate();
    return c;
}

std::vector<int> buildings_of(const RunConfig& c, bool portfolio) {
    std::vector<int> out;
    if (!portfolio) {
        out.push_back(c.building);
        return out;
    }
    for (std::size_t b = 0; b < c.simulation.climates.size(); ++b) {
        out.push_back(static_cast<int>(b));
    }
    return out;
}

fs::path building_dir(const RunConfig& c, const std::string& name, bool portfolio) {
    return portfolio ? c.output_dir / name : c.output_dir;
}

int cmd_simulate(const RunConfig& c, bool portfolio) {
    if (!c.series.empty()) {
        throw StageError("simulate", "simulate ignores input.series; remove it from the config");
    }
    for (int b : buildings_of(c, portfolio)) {
        const auto sim = simulate_building(c.simulation, b);
        const fs::path dir = building_dir(c, sim.building.name, portfolio);
        fs::create_directories(dir);
        write_series_csv(dir / "series_full.csv", sim.sim.series);
        write_series_csv(dir / "series.csv", scenario_view(sim.sim.series, c.scenario));
        std::ofstream(dir / "truth.json") << truth_sidecar(sim, c.simulation).dump(2) << '\n';
        std::cout << sim.building.name << ": " << sim.sim.series.size() << " hours -> " << dir.string() << '\n';
    }
    return 0;
}

int cmd_train(const RunConfig& c, bool portfolio) {
    const LevelSet levels = LevelSet::quartiles();
    const auto pool = make_pool(c);
    for (int b : buildings_of(c, portfolio)) {
        const auto data = prepare_data(c, b);
        const fs::path dir = building_dir(c, data.name, portfolio);
        fs::create_directories(dir);
        double temp_mean = 0.0;
        double temp_std = 1.0;
        if (c.scenario == Scenario::lumped) {
            if (!data.train.has_temperature()) {
                throw StageError("train", "the lumped scenario needs a temperature column");
            }
            double s = 0.0;
            for (double v : data.train.temperature) s += v;
            temp_mean = s / static_cast<double>(data.train.size());
            double v2 = 0.0;
            for (double v : data.train.temperature) v2 += (v - temp_mean) * (v - temp_mean);
            temp_std = std::sqrt(v2 / static_cast<double>(data.train.size()));
        }
        double peak = 0.0;
        for (double v : data.train.load) peak = std::max(peak, v);
        TrainResult r;
        try {
            r = train(data.train, pool, init_params(data.metadata, temp_mean, temp_std, peak), c.train, levels);
        } catch (const std::exception& e) {
            throw StageError("train", e.what());
        }
        save_params_json(dir / "params.json", r.params, c.to_json());
        std::ofstream log(dir / "training_log.csv");
        log << "epoch,loss_before,loss,seconds\n";
        for (const auto& e : r.trace) {
            log << e.epoch << ',' << format_number(e.loss_before) << ',' << format_number(e.loss) << ','
                << format_number(e.seconds) << '\n';
        }
        std::cout << data.name << ": plug " << r.params.plug_dynamic_kw() << " kW, lighting "
                  << r.params.light_dynamic_kw() << " kW -> " << (dir / "params.json").string() << '\n';
    }
    return 0;
}

int cmd_infer(const RunConfig& c) {
    if (c.params.empty()) {
        throw StageError("infer", "infer needs trained parameters (--params or input.params)");
    }
    const LevelSet levels = LevelSet::quartiles();
    const auto params = load_params_json(c.params);
    const auto data = prepare_data(c, c.building);
    const auto pool = make_pool(c);
    const auto r = infer(data.test, pool, params, c.scenario, levels, c.train.top_k);
    fs::create_directories(c.output_dir);
    std::ofstream out(c.output_dir / "occupancy.csv");
    out << "timestamp,day_type,expected_ratio,vacancy_prob\n";
    const auto vac = r.posterior.vacancy_probability();
    for (std::size_t t = 0; t < data.test.size(); ++t) {
        out << format_timestamp(data.test.timestamps[t]) << ',' << to_string(data.test.day_type[t]) << ','
            << format_number(r.expected_ratio[t]) << ',' << format_number(vac[t]) << '\n';
    }
    std::cout << data.test.size() << " hours -> " << (c.output_dir / "occupancy.csv").string() << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& c, bool portfolio) {
    if (portfolio) {
        const auto reports = run_portfolio(c);
        std::cout << summary_table(reports);
    } else {
        const auto report = run_pipeline(c);
        std::cout << summary_table({report});
    }
    return 0;
}

int cmd_baseline(const RunConfig& c, bool portfolio) {
    std::vector<BuildingReport> reports;
    for (int b : buildings_of(c, portfolio)) {
        const auto data = prepare_data(c, b);
        if (!data.test.has_occupancy()) {
            throw StageError("baseline", "baselines are scored against an occupancy column");
        }
        const auto truth = discretize_truth(data.test.occupancy);
        const auto results = run_baselines(c, data, truth);
        BuildingReport report{data.name, {}};
        const fs::path dir = building_dir(c, data.name, portfolio);
        fs::create_directories(dir);
        std::ofstream out(dir / "baselines.csv");
        out << "timestamp,method,level,ratio\n";
        for (const auto& r : results) {
            report.metrics.push_back({r.method, "f1_macro", r.f1.macro});
            report.metrics.push_back({r.method, "f1_weighted", r.f1.weighted});
            report.metrics.push_back({r.method, "rmse_overall", r.rmse.overall});
            for (std::size_t t = 0; t < data.test.size(); ++t) {
                out << format_timestamp(data.test.timestamps[t]) << ',' << r.method << ',' << r.levels[t] << ','
                    << format_number(r.ratio[t]) << '\n';
            }
        }
        reports.push_back(std::move(report));
    }
    write_metrics_csv(c.output_dir / "baseline_metrics.csv", reports);
    std::cout << summary_table(reports);
    return 0;
}

int cmd_whatif(const RunConfig& c) {
    if (c.series.empty()) {
        const auto run = run_whatif_synthetic(c, c.output_dir);
        std::printf("saving %.1f kWh (injected %.1f kWh, error %.1f%%)\n", run.report.saving_kwh(),
                    run.injected_kwh, 100.0 * run.relative_error);
        return 0;
    }
    if (c.params.empty()) {
        throw StageError("whatif", "what-if on measured data needs trained parameters (--params)");
    }
    const LevelSet levels = LevelSet::quartiles();
    const auto params = load_params_json(c.params);
    const auto data = prepare_data(c, c.building);
    const auto pool = make_pool(c);
    const auto inferred = infer(data.test, pool, params, Scenario::lumped, levels, c.train.top_k);
    const auto report =
        whatif_setback(params, data.test, inferred.posterior, c.whatif_start_hour, c.whatif_end_hour, levels);
    fs::create_directories(c.output_dir);
    std::ofstream out(c.output_dir / "whatif.csv");
    out << "date,kwh_before,kwh_after,flagged_steps\n";
    for (const auto& d : report.days) {
        out << format_timestamp(d.day_start).substr(0, 10) << ',' << format_number(d.kwh_before) << ','
            << format_number(d.kwh_after) << ',' << d.flagged_steps << '\n';
    }
    std::printf("%.1f kWh -> %.1f kWh (saving %.1f kWh)\n", report.kwh_before, report.kwh_after,
                report.saving_kwh());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"Occupancy inference from smart-meter load"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Overrides the config seed");
        sub->add_option("--scenario", o.scenario, "separate or lumped")
            ->check(CLI::IsMember({"separate", "lumped"}));
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--building", o.building, "Synthetic building index");
        sub->add_option("--params", o.params, "Trained parameter JSON");
        sub->add_flag("--portfolio", o.portfolio, "Run every configured synthetic building");
    };
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic buildings");
    auto* train_cmd = app.add_subcommand("train", "Fit the load model");
    auto* infer_cmd = app.add_subcommand("infer", "Infer occupancy with trained parameters");
    auto* evaluate = app.add_subcommand("evaluate", "Full pipeline with metrics and all artifacts");
    auto* baseline = app.add_subcommand("baseline", "Run the reference methods");
    auto* whatif = app.add_subcommand("whatif", "Setback what-if assessment");
    for (auto* sub : {simulate, train_cmd, infer_cmd, evaluate, baseline, whatif}) {
        add_common(sub);
    }
    CLI11_PARSE(app, argc, argv);

    std::string stage = "config";
    try {
        const RunConfig c = resolve(o);
        if (simulate->parsed()) {
            stage = "simulate";
            return cmd_simulate(c, o.portfolio);
        }
        if (train_cmd->parsed()) {
            stage = "train";
            return cmd_train(c, o.portfolio);
        }
        if (infer_cmd->parsed()) {
            stage = "infer";
            return cmd_infer(c);
        }
        if (evaluate->parsed()) {
            stage = "evaluate";
            return cmd_evaluate(c, o.portfolio);
        }
        if (baseline->parsed()) {
            stage = "baseline";
            return cmd_baseline(c, o.portfolio);
        }
        stage = "whatif";
        return cmd_whatif(c);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: [" << stage << "] " << e.what() << '\n';
        return 2;
    }
}
