#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "pmfseg/image.hpp"
#include "pmfseg/shape.hpp"

namespace pmfseg {

// 15-joint human skeleton. The neck joint doubles as the thorax anchor so the
// tree stays at 15 nodes / 14 edges.
enum Joint : int {
    kHead = 0,
    kNeck,
    kPelvis,
    kLShoulder,
    kRShoulder,
    kLElbow,
    kRElbow,
    kLWrist,
    kRWrist,
    kLHip,
    kRHip,
    kLKnee,
    kRKnee,
    kLAnkle,
    kRAnkle,
    kJointCount
};

using Skeleton2D = std::array<Point2, kJointCount>;

// joint-name order is part of the on-disk library format
const std::array<std::string, kJointCount>& joint_names();

// the 14 bones (semantically adjacent joint pairs)
const std::array<std::pair<int, int>, 14>& skeleton_edges();

// Integer Bresenham line, 8-connected, endpoints included.
std::vector<std::pair<int, int>> bresenham_line(int x0, int y0, int x1, int y1);

// Rasterize a segment clipped to [0,w-1]x[0,h-1] into the mask. Segments fully
// inside the rectangle produce the textbook pixel sequence; out-of-bounds
// segments are Liang-Barsky clipped first.
void draw_segment(BinaryMask& mask, const Point2& a, const Point2& b);

}  // namespace pmfseg
