#include "pmfseg/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace pmfseg {

const std::array<std::string, kJointCount>& joint_names() {
    static const std::array<std::string, kJointCount> names = {
        "head",    "neck",    "pelvis",  "l_shoulder", "r_shoulder",
        "l_elbow", "r_elbow", "l_wrist", "r_wrist",    "l_hip",
        "r_hip",   "l_knee",  "r_knee",  "l_ankle",    "r_ankle"};
    return names;
}

const std::array<std::pair<int, int>, 14>& skeleton_edges() {
    static const std::array<std::pair<int, int>, 14> edges = {{{kHead, kNeck},
                                                               {kNeck, kPelvis},
                                                               {kNeck, kLShoulder},
                                                               {kNeck, kRShoulder},
                                                               {kLShoulder, kLElbow},
                                                               {kRShoulder, kRElbow},
                                                               {kLElbow, kLWrist},
                                                               {kRElbow, kRWrist},
                                                               {kPelvis, kLHip},
                                                               {kPelvis, kRHip},
                                                               {kLHip, kLKnee},
                                                               {kRHip, kRKnee},
                                                               {kLKnee, kLAnkle},
                                                               {kRKnee, kRAnkle}}};
    return edges;
}

std::vector<std::pair<int, int>> bresenham_line(int x0, int y0, int x1, int y1) {
    std::vector<std::pair<int, int>> pts;
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        pts.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return pts;
}

namespace {

// Liang-Barsky; returns false when the segment misses the rectangle entirely.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double xmin, double ymin,
                  double xmax, double ymax) {
    const double dx = x1 - x0, dy = y1 - y0;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - xmin, xmax - x0, y0 - ymin, ymax - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            const double r = q[i] / p[i];
            if (p[i] < 0.0) {
                if (r > t1) return false;
                t0 = std::max(t0, r);
            } else {
                if (r < t0) return false;
                t1 = std::min(t1, r);
            }
        }
    }
    const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
    const double nx1 = x0 + t1 * dx, ny1 = y0 + t1 * dy;
    x0 = nx0;
    y0 = ny0;
    x1 = nx1;
    y1 = ny1;
    return true;
}

}  // namespace

void draw_segment(BinaryMask& mask, const Point2& a, const Point2& b) {
    double x0 = a.x, y0 = a.y, x1 = b.x, y1 = b.y;
    if (!clip_segment(x0, y0, x1, y1, 0.0, 0.0, mask.width() - 1.0, mask.height() - 1.0)) return;
    for (const auto& [x, y] : bresenham_line(
             static_cast<int>(std::llround(x0)), static_cast<int>(std::llround(y0)),
             static_cast<int>(std::llround(x1)), static_cast<int>(std::llround(y1))))
        if (mask.inside(x, y)) mask.set(x, y, 1);
}

}  // namespace pmfseg
