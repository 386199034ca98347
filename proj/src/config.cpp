#include "pmfseg/config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace pmfseg {

std::string to_string(BiasMode m) { return m == BiasMode::Uniform ? "uniform" : "color"; }
std::string to_string(PriorMode m) {
    return m == PriorMode::Symmetric ? "symmetric" : "background-only";
}

BiasMode bias_mode_from_string(const std::string& s) {
    if (s == "uniform") return BiasMode::Uniform;
    if (s == "color") return BiasMode::Color;
    throw std::invalid_argument("bias_mode must be \"uniform\" or \"color\", got \"" + s + "\"");
}

PriorMode prior_mode_from_string(const std::string& s) {
    if (s == "symmetric") return PriorMode::Symmetric;
    if (s == "background-only") return PriorMode::BackgroundOnly;
    throw std::invalid_argument(
        "prior_mode must be \"symmetric\" or \"background-only\", got \"" + s + "\"");
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    require(gamma >= 0.0, "gamma must be >= 0");
    require(sigma_sq > 0.0, "sigma_sq must be > 0");
    require(k >= 1, "k must be >= 1");
    require(w_s >= 0.0, "w_s must be >= 0");
    require(w_p >= 0.0, "w_p must be >= 0");
    require(boundary_samples >= 3, "boundary_samples must be >= 3");
    require(mu >= 0.0, "mu must be >= 0");
    require(epsilon >= 0.0, "epsilon must be >= 0");
    require(select_band_scale > 0.0, "select_band_scale must be > 0");
    require(select_band_floor >= 0.0, "select_band_floor must be >= 0");
    require(sc_radial_bins >= 1 && sc_angular_bins >= 1, "shape-context bins must be >= 1");
    require(delta_lambda_rel > 0.0, "delta_lambda_rel must be > 0");
    require(nms_iou >= 0.0 && nms_iou <= 1.0, "nms_iou must be in [0,1]");
    require(baseline_grid >= 2, "baseline_grid must be >= 2");
    if (lambda_min && lambda_max)
        require(*lambda_min <= *lambda_max, "lambda_min must be <= lambda_max");
}

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["gamma"] = c.gamma;
    j["sigma_sq"] = c.sigma_sq;
    j["k"] = c.k;
    j["w_s"] = c.w_s;
    j["w_p"] = c.w_p;
    j["bias_mode"] = to_string(c.bias_mode);
    j["prior_mode"] = to_string(c.prior_mode);
    j["boundary_samples"] = c.boundary_samples;
    j["mu"] = c.mu;
    j["epsilon"] = c.epsilon;
    j["select_band_scale"] = c.select_band_scale;
    j["select_band_floor"] = c.select_band_floor;
    j["sc_radial_bins"] = c.sc_radial_bins;
    j["sc_angular_bins"] = c.sc_angular_bins;
    if (c.lambda_min) j["lambda_min"] = *c.lambda_min; else j["lambda_min"] = nullptr;
    if (c.lambda_max) j["lambda_max"] = *c.lambda_max; else j["lambda_max"] = nullptr;
    j["delta_lambda_rel"] = c.delta_lambda_rel;
    j["nms_iou"] = c.nms_iou;
    j["baseline_grid"] = c.baseline_grid;
    j["rng_seed"] = c.rng_seed;
    return j;
}

void from_json(const ordered_json& j, RunConfig& c) {
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("sigma_sq")) c.sigma_sq = j.at("sigma_sq").get<double>();
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("w_s")) c.w_s = j.at("w_s").get<double>();
    if (j.contains("w_p")) c.w_p = j.at("w_p").get<double>();
    if (j.contains("bias_mode")) c.bias_mode = bias_mode_from_string(j.at("bias_mode"));
    if (j.contains("prior_mode")) c.prior_mode = prior_mode_from_string(j.at("prior_mode"));
    if (j.contains("boundary_samples")) c.boundary_samples = j.at("boundary_samples").get<int>();
    if (j.contains("mu")) c.mu = j.at("mu").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("select_band_scale"))
        c.select_band_scale = j.at("select_band_scale").get<double>();
    if (j.contains("select_band_floor"))
        c.select_band_floor = j.at("select_band_floor").get<double>();
    if (j.contains("sc_radial_bins")) c.sc_radial_bins = j.at("sc_radial_bins").get<int>();
    if (j.contains("sc_angular_bins")) c.sc_angular_bins = j.at("sc_angular_bins").get<int>();
    if (j.contains("lambda_min") && !j.at("lambda_min").is_null())
        c.lambda_min = j.at("lambda_min").get<double>();
    if (j.contains("lambda_max") && !j.at("lambda_max").is_null())
        c.lambda_max = j.at("lambda_max").get<double>();
    if (j.contains("delta_lambda_rel")) c.delta_lambda_rel = j.at("delta_lambda_rel").get<double>();
    if (j.contains("nms_iou")) c.nms_iou = j.at("nms_iou").get<double>();
    if (j.contains("baseline_grid")) c.baseline_grid = j.at("baseline_grid").get<int>();
    if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<uint64_t>();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
    RunConfig cfg;
    from_json(j, cfg);
    cfg.validate();
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) { return to_json(cfg).dump(2); }

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << config_to_json(cfg) << "\n";
}

}  // namespace pmfseg
