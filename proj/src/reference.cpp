#include "pmfseg/reference.hpp"

#include <algorithm>
#include <cmath>

namespace pmfseg::reference {

ContourMap contour_map(const Image& image, double sigma_sq) {
    if (sigma_sq <= 0.0) throw std::invalid_argument("sigma_sq must be > 0");
    const int w = image.width(), h = image.height();
    ContourMap map;
    map.width = w;
    map.height = h;
    map.sigma_sq = sigma_sq;
    map.gb.assign(static_cast<size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = luma(image.at(x, y));
            const double gx = (x + 1 < w) ? luma(image.at(x + 1, y)) - v : 0.0;
            const double gy = (y + 1 < h) ? luma(image.at(x, y + 1)) - v : 0.0;
            map.gb[y * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    double mx = 0.0;
    for (double v : map.gb) mx = std::max(mx, v);
    if (mx > 0.0)
        for (double& v : map.gb) v /= mx;
    return map;
}

std::vector<double> foreground_bias_map(const Image& image, const ColorModel& model) {
    std::vector<double> f(image.pixels());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            f[y * image.width() + x] = foreground_bias(image.at(x, y), model);
    return f;
}

BinaryMask warp_mask(const BinaryMask& mask, const Transform2D& w, int out_width,
                     int out_height) {
    const Transform2D inv = w.inverse();
    BinaryMask out(out_width, out_height);
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            const Point2 s = inv.apply({double(x), double(y)});
            const int sx = static_cast<int>(std::llround(s.x));
            const int sy = static_cast<int>(std::llround(s.y));
            if (mask.inside(sx, sy) && mask.at(sx, sy)) out.set(x, y, 1);
        }
    return out;
}

ShapePrior fuse(const std::vector<SelectedExemplar>& selected, int out_width, int out_height) {
    if (selected.empty()) throw std::invalid_argument("no exemplars to fuse");
    const int n = static_cast<int>(selected.size());
    std::vector<Transform2D> inv(n);
    for (int t = 0; t < n; ++t) inv[t] = selected[t].transform.inverse();

    ShapePrior prior;
    prior.width = out_width;
    prior.height = out_height;
    prior.s.assign(static_cast<size_t>(out_width) * out_height, 0.0);
    prior.support = n;
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            int count = 0;
            for (int t = 0; t < n; ++t) {
                const Point2 s = inv[t].apply({double(x), double(y)});
                const int sx = static_cast<int>(std::llround(s.x));
                const int sy = static_cast<int>(std::llround(s.y));
                const BinaryMask& m = selected[t].exemplar->mask;
                if (m.inside(sx, sy) && m.at(sx, sy)) ++count;
            }
            prior.s[static_cast<size_t>(y) * out_width + x] = double(count) / n;
        }
    for (int j = 0; j < kJointCount; ++j) {
        double sx = 0, sy = 0;
        for (int t = 0; t < n; ++t) {
            const Point2 p = selected[t].transform.apply(selected[t].exemplar->joints[j]);
            sx += p.x;
            sy += p.y;
        }
        prior.b[j] = {sx / n, sy / n};
    }
    return prior;
}

}  // namespace pmfseg::reference
