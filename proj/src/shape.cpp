#include "pmfseg/shape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmfseg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ShapeContext ShapeContext::normalized() const {
    ShapeContext out = *this;
    double sum = 0.0;
    for (double v : histogram) sum += v;
    if (sum > 0.0)
        for (double& v : out.histogram) v /= sum;
    return out;
}

Transform2D Transform2D::from_params(double theta, double sx, double sy, double tx, double ty) {
    const double c = std::cos(theta), s = std::sin(theta);
    Transform2D w;
    w.m = {sx * c, -sy * s, tx, sx * s, sy * c, ty, 0, 0, 1};
    return w;
}

Transform2D Transform2D::translation(double tx, double ty) {
    Transform2D w;
    w.m[2] = tx;
    w.m[5] = ty;
    return w;
}

Transform2D Transform2D::compose(const Transform2D& r) const {
    Transform2D out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double v = 0.0;
            for (int k = 0; k < 3; ++k) v += m[i * 3 + k] * r.m[k * 3 + j];
            out.m[i * 3 + j] = v;
        }
    out.error = error;
    return out;
}

Transform2D Transform2D::inverse() const {
    const double det = linear_det();
    if (std::abs(det) <= 1e-12)
        throw std::runtime_error("Transform2D::inverse: transform is not invertible");
    Transform2D inv;
    const double a = m[0], b = m[1], tx = m[2], c = m[3], d = m[4], ty = m[5];
    inv.m[0] = d / det;
    inv.m[1] = -b / det;
    inv.m[3] = -c / det;
    inv.m[4] = a / det;
    inv.m[2] = -(inv.m[0] * tx + inv.m[1] * ty);
    inv.m[5] = -(inv.m[3] * tx + inv.m[4] * ty);
    return inv;
}

std::vector<Point2> trace_outer_contour(const BinaryMask& mask) {
    const int w = mask.width(), h = mask.height();
    int sx = -1, sy = -1;
    for (int y = 0; y < h && sx < 0; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) throw std::runtime_error("trace_outer_contour: empty mask");

    // clockwise Moore neighborhood in image coordinates (y down)
    static const int dx8[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int dy8[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    auto fg = [&](int x, int y) { return mask.inside(x, y) && mask.at(x, y) != 0; };

    std::vector<Point2> walk;
    walk.push_back({double(sx), double(sy)});
    int px = sx, py = sy;
    int dir = 2;  // pretend we entered the start pixel moving south
    int first_move = -1;
    const size_t step_cap = 8 * static_cast<size_t>(mask.pixels()) + 16;
    while (walk.size() < step_cap) {
        const int scan_start = (dir + 6) % 8;
        int found = -1;
        for (int i = 0; i < 8; ++i) {
            const int d = (scan_start + i) % 8;
            if (fg(px + dx8[d], py + dy8[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) return walk;  // isolated pixel
        if (px == sx && py == sy && found == first_move) break;  // closed the loop
        if (first_move < 0) first_move = found;
        px += dx8[found];
        py += dy8[found];
        dir = found;
        walk.push_back({double(px), double(py)});
    }
    if (walk.size() > 1 && walk.back().x == walk.front().x && walk.back().y == walk.front().y)
        walk.pop_back();
    return walk;
}

BoundaryPoints sample_boundary(const BinaryMask& mask, int k) {
    if (k < 1) throw std::invalid_argument("sample_boundary: k must be >= 1");
    std::vector<Point2> walk = trace_outer_contour(mask);

    // distinct boundary pixels in first-visit order
    std::vector<Point2> distinct;
    {
        std::vector<uint8_t> seen(mask.pixels(), 0);
        for (const Point2& p : walk) {
            const int idx = int(p.y) * mask.width() + int(p.x);
            if (!seen[idx]) {
                seen[idx] = 1;
                distinct.push_back(p);
            }
        }
    }
    BoundaryPoints out;
    if (k >= static_cast<int>(distinct.size())) {
        out.points = std::move(distinct);
        return out;
    }

    const size_t n = walk.size();
    std::vector<double> cum(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const Point2& a = walk[i];
        const Point2& b = walk[(i + 1) % n];
        cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
    }
    const double total = cum[n];
    out.points.reserve(k);
    for (int j = 0; j < k; ++j) {
        const double target = total * j / k;
        const auto it = std::upper_bound(cum.begin(), cum.end(), target);
        size_t idx = static_cast<size_t>(it - cum.begin());
        idx = idx == 0 ? 0 : idx - 1;
        if (idx >= n) idx = n - 1;
        out.points.push_back(walk[idx]);
    }
    return out;
}

namespace {

struct BinLayout {
    int nr, na;
    double log_lo, log_hi;

    BinLayout(int radial, int angular)
        : nr(radial), na(angular), log_lo(std::log(0.125)), log_hi(std::log(2.0)) {}

    int radial_bin(double r) const {
        if (!(r > 0.0)) return 0;
        const double t = (std::log(r) - log_lo) / (log_hi - log_lo);
        const int b = static_cast<int>(std::floor(t * nr));
        return std::clamp(b, 0, nr - 1);
    }
    int angular_bin(double dx, double dy) const {
        double th = std::atan2(dy, dx);
        if (th < 0) th += 2.0 * kPi;
        const int b = static_cast<int>(th / (2.0 * kPi / na));
        return std::min(b, na - 1);
    }
};

double mean_pairwise_distance(const std::vector<Point2>& pts) {
    double sum = 0.0;
    size_t cnt = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            sum += std::hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y);
            ++cnt;
        }
    return cnt ? sum / cnt : 0.0;
}

ShapeContext context_at(const std::vector<Point2>& pts, int at, double mean_dist,
                        const BinLayout& layout) {
    ShapeContext sc;
    sc.radial_bins = layout.nr;
    sc.angular_bins = layout.na;
    sc.histogram.assign(static_cast<size_t>(layout.nr) * layout.na, 0.0);
    const double scale = mean_dist > 0.0 ? mean_dist : 1.0;
    for (size_t j = 0; j < pts.size(); ++j) {
        if (static_cast<int>(j) == at) continue;
        const double dx = pts[j].x - pts[at].x;
        const double dy = pts[j].y - pts[at].y;
        const double r = std::hypot(dx, dy) / scale;
        const int rb = layout.radial_bin(r);
        const int ab = layout.angular_bin(dx, dy);
        sc.histogram[static_cast<size_t>(rb) * layout.na + ab] += 1.0;
    }
    return sc;
}

}  // namespace

ShapeContext shape_context(const BoundaryPoints& points, int at, int radial_bins,
                           int angular_bins) {
    const auto& pts = points.points;
    if (pts.size() < 2) throw std::invalid_argument("shape_context: need at least 2 points");
    if (at < 0 || at >= static_cast<int>(pts.size()))
        throw std::invalid_argument("shape_context: index out of range");
    BinLayout layout(radial_bins, angular_bins);
    return context_at(pts, at, mean_pairwise_distance(pts), layout);
}

std::vector<ShapeContext> shape_context_all(const BoundaryPoints& points, int radial_bins,
                                            int angular_bins) {
    const auto& pts = points.points;
    if (pts.size() < 2) throw std::invalid_argument("shape_context_all: need at least 2 points");
    BinLayout layout(radial_bins, angular_bins);
    const double mean_dist = mean_pairwise_distance(pts);
    std::vector<ShapeContext> out;
    out.reserve(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        out.push_back(context_at(pts, static_cast<int>(i), mean_dist, layout));
    return out;
}

double chi2(const ShapeContext& a, const ShapeContext& b) {
    if (!a.same_layout(b)) throw std::invalid_argument("chi2: mismatched bin layouts");
    double d = 0.0;
    for (size_t i = 0; i < a.histogram.size(); ++i) {
        const double s = a.histogram[i] + b.histogram[i];
        if (s > 0.0) {
            const double diff = a.histogram[i] - b.histogram[i];
            d += diff * diff / s;
        }
    }
    return 0.5 * d;
}

std::vector<std::pair<int, int>> match_points(const BoundaryPoints& query,
                                              const BoundaryPoints& exemplar, double mu,
                                              int radial_bins, int angular_bins) {
    if (query.points.size() < 2 || exemplar.points.size() < 2) return {};
    std::vector<ShapeContext> dq = shape_context_all(query, radial_bins, angular_bins);
    std::vector<ShapeContext> de = shape_context_all(exemplar, radial_bins, angular_bins);
    for (auto& d : dq) d = d.normalized();
    for (auto& d : de) d = d.normalized();
    return match_descriptors(dq, de, mu);
}

std::vector<std::pair<int, int>> match_descriptors(const std::vector<ShapeContext>& dq,
                                                   const std::vector<ShapeContext>& de,
                                                   double mu) {
    std::vector<std::pair<int, int>> out;
    if (dq.empty() || de.empty()) return out;

    const int nq = static_cast<int>(dq.size()), ne = static_cast<int>(de.size());
    std::vector<double> dist(static_cast<size_t>(nq) * ne);
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < ne; ++j) dist[static_cast<size_t>(i) * ne + j] = chi2(dq[i], de[j]);

    std::vector<int> best_e(nq, 0), best_q(ne, 0);
    for (int i = 0; i < nq; ++i)
        for (int j = 1; j < ne; ++j)
            if (dist[static_cast<size_t>(i) * ne + j] <
                dist[static_cast<size_t>(i) * ne + best_e[i]])
                best_e[i] = j;
    for (int j = 0; j < ne; ++j)
        for (int i = 1; i < nq; ++i)
            if (dist[static_cast<size_t>(i) * ne + j] <
                dist[static_cast<size_t>(best_q[j]) * ne + j])
                best_q[j] = i;

    for (int i = 0; i < nq; ++i) {
        const int j = best_e[i];
        if (best_q[j] == i && dist[static_cast<size_t>(i) * ne + j] < mu)
            out.emplace_back(i, j);
    }
    return out;
}

namespace {

struct FitResult {
    double theta = 0, sx = 1, sy = 1, tx = 0, ty = 0;
    double error = std::numeric_limits<double>::infinity();
};

struct FitStep {
    FitResult fit;
    double dtheta = 0.0;
    bool valid = false;
};

// closed-form (sx, sy, tx, ty) at fixed theta, plus the Gauss-Newton step on theta
FitStep step_at(double theta, const std::vector<Point2>& q, const std::vector<Point2>& p) {
    const int n = static_cast<int>(q.size());
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
    for (int i = 0; i < n; ++i) {
        Eigen::Matrix<double, 2, 4> A;
        A.col(0) = Eigen::Vector2d(q[i].x * c, q[i].x * s);
        A.col(1) = Eigen::Vector2d(-q[i].y * s, q[i].y * c);
        A.col(2) = Eigen::Vector2d(1, 0);
        A.col(3) = Eigen::Vector2d(0, 1);
        M += A.transpose() * A;
        rhs += A.transpose() * Eigen::Vector2d(p[i].x, p[i].y);
    }
    const Eigen::Vector4d v = M.ldlt().solve(rhs);
    if (!v.allFinite() || (M * v - rhs).norm() > 1e-6 * (1.0 + rhs.norm()))
        return {};  // degenerate geometry
    const double sx = v[0], sy = v[1], tx = v[2], ty = v[3];

    double jr = 0.0, jj = 0.0, err = 0.0;
    for (int i = 0; i < n; ++i) {
        const double hx = sx * q[i].x * c - sy * q[i].y * s + tx;
        const double hy = sx * q[i].x * s + sy * q[i].y * c + ty;
        const double rx = p[i].x - hx, ry = p[i].y - hy;
        const double jx = -sx * q[i].x * s - sy * q[i].y * c;
        const double jy = sx * q[i].x * c - sy * q[i].y * s;
        jr += jx * rx + jy * ry;
        jj += jx * jx + jy * jy;
        err += rx * rx + ry * ry;
    }
    FitStep out;
    out.fit = FitResult{theta, sx, sy, tx, ty, err / (2.0 * n)};
    out.dtheta = jj > 0.0 ? jr / jj : 0.0;
    out.valid = true;
    return out;
}

FitResult refine_from_angle(const std::vector<Point2>& q, const std::vector<Point2>& p,
                            double theta0) {
    FitResult best;
    double theta = theta0;
    for (int iter = 0; iter < 100; ++iter) {
        const FitStep st = step_at(theta, q, p);
        if (!st.valid) break;
        if (st.fit.error < best.error) best = st.fit;
        if (std::abs(st.dtheta) < 1e-10) break;
        theta += st.dtheta;
    }
    return best;
}

double similarity_angle(const std::vector<Point2>& q, const std::vector<Point2>& p,
                        double mirror) {
    const int n = static_cast<int>(q.size());
    double qcx = 0, qcy = 0, pcx = 0, pcy = 0;
    for (int i = 0; i < n; ++i) {
        qcx += q[i].x;
        qcy += mirror * q[i].y;
        pcx += p[i].x;
        pcy += p[i].y;
    }
    qcx /= n;
    qcy /= n;
    pcx /= n;
    pcy /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        const double qx = q[i].x - qcx, qy = mirror * q[i].y - qcy;
        const double px = p[i].x - pcx, py = p[i].y - pcy;
        num += qx * py - qy * px;
        den += qx * px + qy * py;
    }
    if (num == 0.0 && den == 0.0) return 0.0;
    return std::atan2(num, den);
}

}  // namespace

Transform2D procrustes_fit(const std::vector<Point2>& src, const std::vector<Point2>& dst,
                           const std::vector<std::pair<int, int>>& correspondences) {
    if (correspondences.size() <= 2)
        throw std::invalid_argument("procrustes_fit: insufficient correspondences");
    std::vector<Point2> q, p;
    q.reserve(correspondences.size());
    p.reserve(correspondences.size());
    for (const auto& [si, di] : correspondences) {
        if (si < 0 || si >= static_cast<int>(src.size()) || di < 0 ||
            di >= static_cast<int>(dst.size()))
            throw std::invalid_argument("procrustes_fit: correspondence index out of range");
        q.push_back(src[si]);
        p.push_back(dst[di]);
    }

    FitResult best;
    for (const double mirror : {1.0, -1.0}) {
        const double theta0 = similarity_angle(q, p, mirror);
        const FitResult fit = refine_from_angle(q, p, theta0);
        if (fit.error < best.error) best = fit;
    }
    if (!std::isfinite(best.error))
        throw std::invalid_argument("procrustes_fit: insufficient correspondences");

    Transform2D w = Transform2D::from_params(best.theta, best.sx, best.sy, best.tx, best.ty);
    w.error = best.error;
    return w;
}

BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& w, int out_width,
                     int out_height) {
    const Transform2D inv = w.inverse();
    BinaryMask out(out_width, out_height);
#pragma omp parallel for
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            const Point2 s = inv.apply({double(x), double(y)});
            const int sx = static_cast<int>(std::llround(s.x));
            const int sy = static_cast<int>(std::llround(s.y));
            if (mask.inside(sx, sy) && mask.at(sx, sy)) out.set(x, y, 1);
        }
    return out;
}

std::vector<Point2> warp_points(const std::vector<Point2>& pts, const Transform2D& w) {
    std::vector<Point2> out;
    out.reserve(pts.size());
    for (const Point2& p : pts) out.push_back(w.apply(p));
    return out;
}

double principal_axis_angle(const BinaryMask& mask) {
    double cx = 0, cy = 0;
    int n = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                cx += x;
                cy += y;
                ++n;
            }
    if (n == 0) throw std::runtime_error("principal_axis_angle: empty mask");
    cx /= n;
    cy /= n;
    double mxx = 0, myy = 0, mxy = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                mxx += (x - cx) * (x - cx);
                myy += (y - cy) * (y - cy);
                mxy += (x - cx) * (y - cy);
            }
    double ang = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
    if (ang >= kPi / 2) ang -= kPi;
    if (ang < -kPi / 2) ang += kPi;
    return ang;
}

}  // namespace pmfseg
