#include "pmfseg/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "pmfseg/rng.hpp"

namespace pmfseg {

void SeedSets::validate(int pixels) const {
    std::vector<uint8_t> mark(pixels, 0);
    for (int u : foreground) {
        if (u < 0 || u >= pixels) throw std::invalid_argument("seed index out of range");
        mark[u] = 1;
    }
    for (int u : background) {
        if (u < 0 || u >= pixels) throw std::invalid_argument("seed index out of range");
        if (mark[u]) throw std::invalid_argument("overlapping seeds");
    }
}

namespace {

using Color = std::array<double, 3>;

double sq_dist(const Color& a, const Color& b) {
    const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
    return dr * dr + dg * dg + db * db;
}

// Lloyd iterations with k-means++ seeding; ties and empty clusters resolved
// deterministically (lowest index wins, empty clusters keep their center).
std::vector<Color> kmeans(const std::vector<Color>& points, int k, Rng& rng) {
    std::vector<Color> centers;
    centers.reserve(k);
    // k-means++ seeding
    centers.push_back(points[rng.uniform_int(points.size())]);
    std::vector<double> d2(points.size());
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = sq_dist(points[i], centers[0]);
            for (size_t c = 1; c < centers.size(); ++c)
                best = std::min(best, sq_dist(points[i], centers[c]));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all points already covered; duplicate the first center
            centers.push_back(centers[0]);
            continue;
        }
        double r = rng.uniform() * total;
        size_t pick = points.size() - 1;
        double acc = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            acc += d2[i];
            if (acc >= r) { pick = i; break; }
        }
        centers.push_back(points[pick]);
    }

    std::vector<int> assign(points.size(), 0);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = false;
        for (size_t i = 0; i < points.size(); ++i) {
            int best = 0;
            double bd = sq_dist(points[i], centers[0]);
            for (int c = 1; c < k; ++c) {
                double d = sq_dist(points[i], centers[c]);
                if (d < bd) { bd = d; best = c; }
            }
            if (assign[i] != best) { assign[i] = best; changed = true; }
        }
        std::vector<Color> sum(k, Color{0, 0, 0});
        std::vector<int> cnt(k, 0);
        for (size_t i = 0; i < points.size(); ++i) {
            for (int c = 0; c < 3; ++c) sum[assign[i]][c] += points[i][c];
            cnt[assign[i]]++;
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0)
                for (int j = 0; j < 3; ++j) centers[c][j] = sum[c][j] / cnt[c];
        if (!changed && iter > 0) break;
    }
    return centers;
}

std::vector<Color> side_centers(const Image& image, const std::vector<int>& seed,
                                int k, Rng& rng, const char* side) {
    if (seed.empty()) throw std::invalid_argument(std::string("insufficient seeds: empty ") + side);
    std::vector<Color> pts;
    pts.reserve(seed.size());
    for (int u : seed) {
        const float* p = image.at(u);
        pts.push_back(Color{p[0], p[1], p[2]});
    }
    std::set<Color> distinct(pts.begin(), pts.end());
    int kk = k;
    if (static_cast<int>(distinct.size()) < k) {
        kk = static_cast<int>(distinct.size());
        std::cerr << "warning: " << side << " seeds have only " << kk
                  << " distinct colors, reducing k from " << k << "\n";
    }
    return kmeans(pts, kk, rng);
}

}  // namespace

ColorModel build_color_model(const Image& image, const SeedSets& seeds, int k, double gamma,
                             uint64_t rng_seed) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    seeds.validate(image.pixels());
    ColorModel model;
    model.gamma = gamma;
    Rng rng_fg(derive_seed(rng_seed, 0x11));
    Rng rng_bg(derive_seed(rng_seed, 0x22));
    model.fg_centers = side_centers(image, seeds.foreground, k, rng_fg, "foreground");
    model.bg_centers = side_centers(image, seeds.background, k, rng_bg, "background");
    return model;
}

double foreground_bias(const float* rgb, const ColorModel& model) {
    const Color c{rgb[0], rgb[1], rgb[2]};
    double df = sq_dist(c, model.fg_centers[0]);
    for (size_t i = 1; i < model.fg_centers.size(); ++i)
        df = std::min(df, sq_dist(c, model.fg_centers[i]));
    double db = sq_dist(c, model.bg_centers[0]);
    for (size_t i = 1; i < model.bg_centers.size(); ++i)
        db = std::min(db, sq_dist(c, model.bg_centers[i]));
    return model.gamma * (std::sqrt(db) - std::sqrt(df));
}

std::vector<double> foreground_bias_map(const Image& image, const ColorModel& model) {
    std::vector<double> f(image.pixels());
#pragma omp parallel for
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            f[y * image.width() + x] = foreground_bias(image.at(x, y), model);
    return f;
}

ContourMap contour_map(const Image& image, double sigma_sq) {
    if (sigma_sq <= 0.0) throw std::invalid_argument("sigma_sq must be > 0");
    const int w = image.width(), h = image.height();
    ContourMap map;
    map.width = w;
    map.height = h;
    map.sigma_sq = sigma_sq;
    map.gb.assign(static_cast<size_t>(w) * h, 0.0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = luma(image.at(x, y));
            const double gx = (x + 1 < w) ? luma(image.at(x + 1, y)) - v : 0.0;
            const double gy = (y + 1 < h) ? luma(image.at(x, y + 1)) - v : 0.0;
            map.gb[y * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    double mx = 0.0;
    for (double v : map.gb) mx = std::max(mx, v);
    if (mx > 0.0)
        for (double& v : map.gb) v /= mx;
    return map;
}

double pairwise_weight(int u, int v, const ContourMap& contours) {
    const int w = contours.width;
    const int ux = u % w, uy = u / w, vx = v % w, vy = v / w;
    if (std::abs(ux - vx) + std::abs(uy - vy) != 1)
        throw std::invalid_argument("pairwise_weight: pixels are not 4-adjacent");
    return std::exp(-std::max(contours.gb[u], contours.gb[v]) / contours.sigma_sq);
}

void EnergyModel::finalize(double lambda_cap_hint) {
    lambda_cap = lambda_cap_hint;
    // sentinel must dominate every finite cut over |lambda| <= lambda_cap
    double finite_sum = 1.0;
    const int n = pixels();
    for (int u = 0; u < n; ++u) {
        if (!hard_bg[u]) finite_sum += std::abs(unary_fg[u]);
        if (!hard_fg[u]) finite_sum += std::abs(unary_bg_base[u]) + lambda_cap * lambda_coeff[u];
    }
    for (double v : edge_right) finite_sum += v;
    for (double v : edge_down) finite_sum += v;
    sentinel = 1e6 * finite_sum;
    for (int u = 0; u < n; ++u) {
        if (hard_fg[u]) unary_bg_base[u] = sentinel;
        if (hard_bg[u]) unary_fg[u] = sentinel;
    }

    auto scale = [](const std::vector<double>& src, std::vector<int64_t>& dst) {
        dst.resize(src.size());
        for (size_t i = 0; i < src.size(); ++i) dst[i] = std::llround(src[i] * kCostScale);
    };
    scale(unary_fg, s_unary_fg);
    scale(unary_bg_base, s_unary_bg_base);
    scale(edge_right, s_edge_right);
    scale(edge_down, s_edge_down);
}

EnergyModel build_energy(const Image& image, const SeedSets& seeds,
                         const std::vector<double>& prior, const RunConfig& config,
                         const SeedSets* color_seeds) {
    const int w = image.width(), h = image.height(), n = w * h;
    if (static_cast<int>(prior.size()) != n)
        throw std::invalid_argument("prior dimensions do not match image");
    for (double s : prior)
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("prior values must lie in [0,1]");
    seeds.validate(n);

    EnergyModel m;
    m.width = w;
    m.height = h;
    m.unary_fg.assign(n, 0.0);
    m.unary_bg_base.assign(n, 0.0);
    m.lambda_coeff.assign(n, 1);
    m.hard_fg.assign(n, 0);
    m.hard_bg.assign(n, 0);
    for (int u : seeds.foreground) m.hard_fg[u] = 1;
    for (int u : seeds.background) m.hard_bg[u] = 1;

    std::vector<double> f(n, 0.0);
    if (config.bias_mode == BiasMode::Color) {
        const SeedSets& cs = color_seeds ? *color_seeds : seeds;
        ColorModel cm = build_color_model(image, cs, config.k, config.gamma, config.rng_seed);
        f = foreground_bias_map(image, cm);
    }

    const double ws = config.w_s;
    for (int u = 0; u < n; ++u) {
        const bool seeded = m.hard_fg[u] || m.hard_bg[u];
        m.lambda_coeff[u] = seeded ? 0 : 1;
        m.unary_bg_base[u] = f[u] + ws * prior[u];
        m.unary_fg[u] = config.prior_mode == PriorMode::Symmetric ? ws * (1.0 - prior[u]) : 0.0;
    }

    ContourMap contours = contour_map(image, config.sigma_sq);
    m.edge_right.assign(static_cast<size_t>(w - 1) * h, 0.0);
    m.edge_down.assign(static_cast<size_t>(w) * (h - 1), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x)
            m.edge_right[m.right_index(x, y)] =
                config.w_p * pairwise_weight(y * w + x, y * w + x + 1, contours);
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x < w; ++x)
            m.edge_down[m.down_index(x, y)] =
                config.w_p * pairwise_weight(y * w + x, (y + 1) * w + x, contours);

    double max_abs_f = 0.0;
    for (int u = 0; u < n; ++u) max_abs_f = std::max(max_abs_f, std::abs(f[u]));
    m.default_lambda_abs = max_abs_f + config.w_s;
    double cap = m.default_lambda_abs;
    if (config.lambda_min) cap = std::max(cap, std::abs(*config.lambda_min));
    if (config.lambda_max) cap = std::max(cap, std::abs(*config.lambda_max));
    m.finalize(cap);
    return m;
}

}  // namespace pmfseg
