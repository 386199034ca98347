#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pmfseg {

enum class BiasMode { Uniform, Color };
enum class PriorMode { Symmetric, BackgroundOnly };

std::string to_string(BiasMode m);
std::string to_string(PriorMode m);
BiasMode bias_mode_from_string(const std::string& s);
PriorMode prior_mode_from_string(const std::string& s);

// All tunables in one place; every run is a pure function of (inputs, config).
struct RunConfig {
    // energy
    double gamma = 5.0;        // color-bias scale on [0,1]^3 RGB
    double sigma_sq = 0.1;     // boundary sharpness sigma^2
    int k = 5;                 // k-means centers per seed side
    double w_s = 1.0;          // shape-prior unary weight
    double w_p = 0.5;          // pairwise weight
    BiasMode bias_mode = BiasMode::Color;
    PriorMode prior_mode = PriorMode::Symmetric;

    // shape / maf
    int boundary_samples = 60;  // K
    double mu = 0.25;           // chi^2 gate on unit-normalized shape contexts
    double epsilon = 14.0;      // absolute alignment gate, px^2 at 200px candidate height
    // relative gate: also require e < band_scale * (best e + band_floor), so an
    // exact match keeps the selection pure while noisy candidates still admit
    // matches commensurate with the best available
    double select_band_scale = 2.0;
    double select_band_floor = 0.5;
    int sc_radial_bins = 5;
    int sc_angular_bins = 12;

    // parametric search
    std::optional<double> lambda_min;  // unset: -(max|f| + w_s)
    std::optional<double> lambda_max;  // unset: +(max|f| + w_s)
    double delta_lambda_rel = 1e-6;    // bisection stop, relative to the lambda range

    // pipeline
    double nms_iou = 0.25;
    int baseline_grid = 200;  // lambda grid size for the no-prior baseline pool

    uint64_t rng_seed = 0;

    void validate() const;  // throws std::invalid_argument on bad values
};

RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

}  // namespace pmfseg
