#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pmfseg/config.hpp"
#include "pmfseg/image.hpp"

namespace pmfseg {

// Disjoint foreground/background seed pixels (indices into the image grid).
struct SeedSets {
    std::vector<int> foreground;  // V_f
    std::vector<int> background;  // V_b

    void validate(int pixels) const;  // disjointness + bounds
};

// k-means color centers per seed side; the bias is
//   f(u) = ln p_f(u) - ln p_b(u) = gamma * (min-dist to bg centers - min-dist to fg centers)
// with p(u) = exp(-gamma * min-dist to that side's centers).
struct ColorModel {
    std::vector<std::array<double, 3>> fg_centers;
    std::vector<std::array<double, 3>> bg_centers;
    double gamma = 5.0;
};

// Per-pixel boundary strength in [0,1] plus the sharpness parameter of the
// pairwise similarity g(u,v) = exp(-max(Gb(u),Gb(v)) / sigma^2).
struct ContourMap {
    int width = 0, height = 0;
    std::vector<double> gb;
    double sigma_sq = 0.1;
};

// Grid energy
//   E_lambda(X) = sum_u U_lambda(x_u) + sum_(u,v) V_uv(x_u, x_v)
// with the background cost of non-seed pixels carrying the +lambda offset.
// Seed pixels carry the sentinel (a documented large-finite stand-in for
// infinity) on the opposite label. Costs are stored in doubles and, scaled by
// kCostScale and rounded, as 64-bit integers; the solver and the scaled
// evaluator share the integer arrays so optimality checks are exact.
struct EnergyModel {
    int width = 0, height = 0;

    std::vector<double> unary_fg;       // cost of x_u = 1
    std::vector<double> unary_bg_base;  // cost of x_u = 0, excluding lambda
    std::vector<uint8_t> lambda_coeff;  // 1 exactly on non-seed pixels
    std::vector<uint8_t> hard_fg, hard_bg;

    // 4-connected grid edges: right neighbor (x,y)-(x+1,y), down neighbor (x,y)-(x,y+1)
    std::vector<double> edge_right;  // size (width-1)*height, indexed y*(width-1)+x
    std::vector<double> edge_down;   // size width*(height-1), indexed y*width+x

    double sentinel = 0.0;    // larger than any finite cut over the admitted lambda range
    double lambda_cap = 0.0;  // max |lambda| the sentinel is proven against
    double default_lambda_abs = 0.0;  // default lambda range is +/- this (max|f| + w_s)

    // integer-scaled mirrors (kCostScale, llround)
    std::vector<int64_t> s_unary_fg, s_unary_bg_base;
    std::vector<int64_t> s_edge_right, s_edge_down;

    static constexpr double kCostScale = 1e6;

    int pixels() const { return width * height; }
    int right_index(int x, int y) const { return y * (width - 1) + x; }
    int down_index(int x, int y) const { return y * width + x; }

    void finalize(double lambda_cap_hint);  // computes sentinel, bakes scaled arrays
};

ColorModel build_color_model(const Image& image, const SeedSets& seeds, int k, double gamma,
                             uint64_t rng_seed);

double foreground_bias(const float* rgb, const ColorModel& model);

// Per-pixel bias map; OpenMP-parallel over rows.
std::vector<double> foreground_bias_map(const Image& image, const ColorModel& model);

// Gradient-magnitude stand-in for a learned contour detector: forward
// differences on the luma channel, normalized to [0,1] by the global max
// (all zeros when the image is constant). OpenMP-parallel over rows.
ContourMap contour_map(const Image& image, double sigma_sq);

double pairwise_weight(int u, int v, const ContourMap& contours);

// color_seeds, when given, provides the color-model sample pixels instead of
// the hard seeds (the no-prior baseline has no foreground hard seeds).
EnergyModel build_energy(const Image& image, const SeedSets& seeds,
                         const std::vector<double>& prior, const RunConfig& config,
                         const SeedSets* color_seeds = nullptr);

}  // namespace pmfseg
