#pragma once

#include "pmfseg/energy.hpp"
#include "pmfseg/maf.hpp"

namespace pmfseg::reference {

// Serial reference implementations of the OpenMP kernels. Plain loops, same
// arithmetic; tests assert bit-identical outputs and the benchmark target
// compares throughput.

ContourMap contour_map(const Image& image, double sigma_sq);

std::vector<double> foreground_bias_map(const Image& image, const ColorModel& model);

BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& w, int out_width,
                     int out_height);

ShapePrior fuse(const std::vector<SelectedExemplar>& selected, int out_width, int out_height);

std::vector<SelectedExemplar> select_exemplars(const BinaryMask& candidate,
                                               const ExemplarLibrary& library, double epsilon,
                                               double mu, const RunConfig& config);

}  // namespace pmfseg::reference
