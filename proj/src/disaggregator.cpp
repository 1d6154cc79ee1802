#include "occu/disaggregator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "occu/error.hpp"

namespace occu {

const char* to_string(Scenario scenario) {
    return scenario == Scenario::separate ? "separate" : "lumped";
}

Scenario scenario_from_string(const std::string& text) {
    if (text == "separate") {
        return Scenario::separate;
    }
    if (text == "lumped") {
        return Scenario::lumped;
    }
    throw DomainError("unknown scenario '" + text + "' (expected separate or lumped)");
}

void DisaggregatorParams::validate() const {
    spline.validate();
    if (spline_occupied.size() != spline.basis_count() ||
        spline_unoccupied.size() != spline.basis_count()) {
        throw DimensionError("spline coefficient vectors must have grid_count + order entries");
    }
    if (!(temp_std > 0.0)) {
        throw DomainError("temperature std must be positive");
    }
    if (!(obs_variance > 0.0)) {
        throw DomainError("observation variance must be positive");
    }
}

double normalize_temperature(double temp, const DisaggregatorParams& params) {
    const double z = (temp - params.temp_mean) / params.temp_std;
    return std::clamp(z, params.spline.lower, params.spline.upper);
}

double gate_spline(double temp, const DisaggregatorParams& params, bool occupied) {
    return bspline_eval(normalize_temperature(temp, params),
                        occupied ? params.spline_occupied : params.spline_unoccupied, params.spline);
}

GaussianMixture1D occupant_forward(const GaussianMixture1D& occupancy, const DisaggregatorParams& params,
                                   System system, const LevelSet& levels) {
    if (system == System::plug) {
        return gm_affine(occupancy, params.plug_dynamic_kw(), params.plug_base_kw());
    }
    return gm_affine(gm_binary_collapse(occupancy, levels), params.light_dynamic_kw(),
                     params.light_base_kw());
}

GaussianMixture1D weather_forward(const GaussianMixture1D& occupancy, double temp,
                                  const DisaggregatorParams& params) {
    const double vacant = gate_spline(temp, params, false);
    const double occupied = gate_spline(temp, params, true);
    const std::size_t K = occupancy.size();
    std::vector<double> shifts(K);
    for (std::size_t k = 0; k < K; ++k) {
        shifts[k] = occupied_gate(k) ? occupied : vacant;
    }
    GaussianMixture1D zero(std::vector<double>(occupancy.weights().begin(), occupancy.weights().end()),
                           std::vector<double>(K, 0.0),
                           std::vector<double>(K, GaussianMixture1D::kVarianceFloor));
    return gm_shift_components(zero, shifts);
}

ForwardResult total_forward(const GaussianMixture1D& occupancy, double temp,
                            const DisaggregatorParams& params, Scenario scenario, const LevelSet& levels) {
    auto plug = occupant_forward(occupancy, params, System::plug, levels);
    auto lighting = occupant_forward(occupancy, params, System::lighting, levels);
    if (scenario == Scenario::separate) {
        std::vector<GaussianMixture1D> parts{plug, lighting};
        auto total = gm_sum_aligned(parts);
        return {std::move(plug), std::move(lighting), std::nullopt, std::move(total)};
    }
    auto weather = weather_forward(occupancy, temp, params);
    std::vector<GaussianMixture1D> parts{plug, lighting, weather};
    auto total = gm_sum_aligned(parts);
    return {std::move(plug), std::move(lighting), std::move(weather), std::move(total)};
}

GaussianMixture1D observation_mixture(const GaussianMixture1D& total, const DisaggregatorParams& params) {
    std::vector<double> variances(total.variances().begin(), total.variances().end());
    for (double& v : variances) {
        v += params.obs_variance;
    }
    return {std::vector<double>(total.weights().begin(), total.weights().end()),
            std::vector<double>(total.means().begin(), total.means().end()), std::move(variances)};
}

DisaggregatorParams init_params(const BuildingMetadata& meta, double temp_mean, double temp_std,
                                double peak_load, const SplineConfig& spline) {
    if (!(meta.floor_area > 0.0)) {
        throw DomainError("floor area must be positive");
    }
    if (!(meta.light_intensity >= 0.0) || !(meta.plug_intensity >= 0.0)) {
        throw DomainError("power intensities must be non-negative");
    }
    spline.validate();
    DisaggregatorParams p;
    p.spline = spline;
    p.light_dynamic = meta.floor_area * meta.light_intensity / 1000.0;
    p.plug_dynamic = meta.floor_area * meta.plug_intensity / 1000.0;
    p.light_base = 0.1 * p.light_dynamic;
    p.plug_base = 0.1 * p.plug_dynamic;
    p.spline_occupied.assign(spline.basis_count(), 0.0);
    p.spline_unoccupied.assign(spline.basis_count(), 0.0);
    p.temp_mean = temp_mean;
    p.temp_std = temp_std > 0.0 ? temp_std : 1.0;
    const double noise = 0.01 * (peak_load > 0.0 ? peak_load : p.light_dynamic + p.plug_dynamic);
    p.obs_variance = std::max(noise * noise, 1e-8);
    p.epochs_trained = 0;
    return p;
}

nlohmann::json params_to_json(const DisaggregatorParams& p) {
    using nlohmann::json;
    return json{
        {"capacities_kw",
         {{"plug_dynamic", p.plug_dynamic_kw()},
          {"plug_base", p.plug_base_kw()},
          {"light_dynamic", p.light_dynamic_kw()},
          {"light_base", p.light_base_kw()}}},
        {"raw",
         {{"plug_dynamic", p.plug_dynamic},
          {"plug_base", p.plug_base},
          {"light_dynamic", p.light_dynamic},
          {"light_base", p.light_base}}},
        {"spline_coeffs_kw", {{"occupied", p.spline_occupied}, {"unoccupied", p.spline_unoccupied}}},
        {"spline",
         {{"order", p.spline.order},
          {"grid_count", p.spline.grid_count},
          {"lower", p.spline.lower},
          {"upper", p.spline.upper}}},
        {"temperature_normalization", {{"mean_c", p.temp_mean}, {"std_c", p.temp_std}}},
        {"obs_variance_kw2", p.obs_variance},
        {"epochs_trained", p.epochs_trained},
    };
}

DisaggregatorParams params_from_json(const nlohmann::json& j) {
    DisaggregatorParams p;
    try {
        const auto& raw = j.contains("raw") ? j.at("raw") : j.at("capacities_kw");
        p.plug_dynamic = raw.at("plug_dynamic").get<double>();
        p.plug_base = raw.at("plug_base").get<double>();
        p.light_dynamic = raw.at("light_dynamic").get<double>();
        p.light_base = raw.at("light_base").get<double>();
        p.spline_occupied = j.at("spline_coeffs_kw").at("occupied").get<std::vector<double>>();
        p.spline_unoccupied = j.at("spline_coeffs_kw").at("unoccupied").get<std::vector<double>>();
        const auto& s = j.at("spline");
        p.spline.order = s.at("order").get<int>();
        p.spline.grid_count = s.at("grid_count").get<int>();
        p.spline.lower = s.at("lower").get<double>();
        p.spline.upper = s.at("upper").get<double>();
        p.temp_mean = j.at("temperature_normalization").at("mean_c").get<double>();
        p.temp_std = j.at("temperature_normalization").at("std_c").get<double>();
        p.obs_variance = j.at("obs_variance_kw2").get<double>();
        p.epochs_trained = j.value("epochs_trained", 0);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed parameter file: ") + e.what());
    }
    p.validate();
    return p;
}

void save_params_json(const std::filesystem::path& path, const DisaggregatorParams& params,
                      const nlohmann::json& config_echo) {
    auto j = params_to_json(params);
    if (!config_echo.empty()) {
        j["config"] = config_echo;
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

DisaggregatorParams load_params_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return params_from_json(j);
}

} // namespace occu
