#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "pmfseg/image.hpp"

namespace pmfseg {

struct Point2 {
    double x = 0.0, y = 0.0;
};

// Ordered samples along the outer contour of a mask.
struct BoundaryPoints {
    std::vector<Point2> points;
};

// Log-polar histogram of the other points around one reference point.
// Radial bins are log-spaced over [1/8, 2] x mean pairwise distance, so the
// descriptor is exactly invariant to translation and uniform scaling.
struct ShapeContext {
    int radial_bins = 0, angular_bins = 0;
    std::vector<double> histogram;  // radial-major, sums to K-1

    bool same_layout(const ShapeContext& o) const {
        return radial_bins == o.radial_bins && angular_bins == o.angular_bins &&
               histogram.size() == o.histogram.size();
    }
    ShapeContext normalized() const;  // unit mass
};

// Homogeneous 2D transform constrained to translation * rotation * diag scale
// (5 DOF; negative scales encode reflections).
struct Transform2D {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major 3x3
    double error = 0.0;  // mean squared residual per coordinate, px^2

    static Transform2D identity() { return {}; }
    static Transform2D from_params(double theta, double sx, double sy, double tx, double ty);
    static Transform2D translation(double tx, double ty);

    Point2 apply(const Point2& p) const {
        return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
    }
    Transform2D compose(const Transform2D& rhs) const;  // this * rhs
    Transform2D inverse() const;                        // throws if singular
    double linear_det() const { return m[0] * m[4] - m[1] * m[3]; }
};

// K points at approximately equal arc-length spacing along the outer contour
// (Moore trace, 8-connected); starts at the topmost-leftmost boundary pixel.
// K larger than the number of distinct boundary pixels returns all of them.
BoundaryPoints sample_boundary(const BinaryMask& mask, int k);

// Full outer-contour walk (closed, consecutive pixels 8-adjacent); exposed for
// tests and for callers that need the raw trace.
std::vector<Point2> trace_outer_contour(const BinaryMask& mask);

ShapeContext shape_context(const BoundaryPoints& points, int at, int radial_bins = 5,
                           int angular_bins = 12);

// Descriptors for every point of the set; shares the O(K^2) distance pass.
std::vector<ShapeContext> shape_context_all(const BoundaryPoints& points, int radial_bins = 5,
                                            int angular_bins = 12);

double chi2(const ShapeContext& a, const ShapeContext& b);

// Mutual-nearest-neighbor pairs (query index, exemplar index) with chi^2
// distance below mu; descriptors are unit-normalized before the test.
std::vector<std::pair<int, int>> match_points(const BoundaryPoints& query,
                                              const BoundaryPoints& exemplar, double mu,
                                              int radial_bins = 5, int angular_bins = 12);

// Same matching over precomputed (already normalized) descriptor sets.
std::vector<std::pair<int, int>> match_descriptors(const std::vector<ShapeContext>& query,
                                                   const std::vector<ShapeContext>& exemplar,
                                                   double mu);

// Best 5-DOF transform mapping src onto dst over the given correspondences
// (src index, dst index); |J| must exceed 2. Gauss-Newton over the rotation
// with closed-form scales/translation, seeded from both similarity-Procrustes
// reflection branches.
Transform2D procrustes_fit(const std::vector<Point2>& src, const std::vector<Point2>& dst,
                           const std::vector<std::pair<int, int>>& correspondences);

// Inverse (pull-back) warp with nearest-neighbor lookup; hole-free.
BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& w, int out_width,
                     int out_height);

std::vector<Point2> warp_points(const std::vector<Point2>& pts, const Transform2D& w);

// Principal-axis angle of the foreground pixel cloud, in [-pi/2, pi/2).
double principal_axis_angle(const BinaryMask& mask);

}  // namespace pmfseg
