#include "pmfseg/figures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pmfseg/pnm.hpp"

namespace pmfseg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

Point2 rotate(const Point2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {v.x * c - v.y * s, v.x * s + v.y * c};
}

Point2 add(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
Point2 scale(const Point2& v, double k) { return {v.x * k, v.y * k}; }

double dist_sq_to_segment(double px, double py, const Point2& a, const Point2& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = px - a.x, wy = py - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy;
    return dx * dx + dy * dy;
}

}  // namespace

Skeleton2D figure_joints(const FigureSpec& sp) {
    const Point2 up{0.0, -1.0};
    const Point2 spine_dir = rotate(up, sp.spine_angle);
    const Point2 perp_l = rotate(spine_dir, -1.5707963267948966);  // figure's left
    const Point2 down = scale(spine_dir, -1.0);

    Skeleton2D j;
    j[kPelvis] = {0.0, 0.0};
    j[kNeck] = scale(spine_dir, sp.torso_len);
    j[kHead] = add(j[kNeck], scale(rotate(spine_dir, sp.head_angle), sp.head_len));
    j[kLShoulder] = add(j[kNeck], scale(perp_l, sp.shoulder_off));
    j[kRShoulder] = add(j[kNeck], scale(perp_l, -sp.shoulder_off));
    const Point2 l_upper = rotate(down, sp.shoulder_angle[0]);
    const Point2 r_upper = rotate(down, -sp.shoulder_angle[1]);
    j[kLElbow] = add(j[kLShoulder], scale(l_upper, sp.upper_arm));
    j[kRElbow] = add(j[kRShoulder], scale(r_upper, sp.upper_arm));
    j[kLWrist] = add(j[kLElbow], scale(rotate(l_upper, sp.elbow_angle[0]), sp.fore_arm));
    j[kRWrist] = add(j[kRElbow], scale(rotate(r_upper, -sp.elbow_angle[1]), sp.fore_arm));
    j[kLHip] = scale(perp_l, sp.hip_off);
    j[kRHip] = scale(perp_l, -sp.hip_off);
    const Point2 l_thigh = rotate(down, sp.hip_angle[0]);
    const Point2 r_thigh = rotate(down, -sp.hip_angle[1]);
    j[kLKnee] = add(j[kLHip], scale(l_thigh, sp.thigh));
    j[kRKnee] = add(j[kRHip], scale(r_thigh, sp.thigh));
    j[kLAnkle] = add(j[kLKnee], scale(rotate(l_thigh, sp.knee_angle[0]), sp.shin));
    j[kRAnkle] = add(j[kRKnee], scale(rotate(r_thigh, -sp.knee_angle[1]), sp.shin));

    const double unit = sp.head_unit * sp.scale;
    for (Point2& p : j) {
        const Point2 r = rotate(p, sp.rotation);
        p = {sp.pos_x + unit * r.x, sp.pos_y + unit * r.y};
    }
    return j;
}

namespace {

struct Capsule {
    Point2 a, b;
    double radius;
};

std::vector<Capsule> figure_capsules(const FigureSpec& sp, const Skeleton2D& j) {
    const double unit = sp.head_unit * sp.scale;
    auto radius_for = [&](int ja, int jb) {
        if (ja == kHead || jb == kHead) return sp.head_radius;
        if ((ja == kNeck && jb == kPelvis) || (ja == kPelvis && jb == kNeck))
            return sp.torso_radius;
        if (ja == kNeck || jb == kNeck) return sp.torso_radius * 0.6;  // shoulder girdle
        if (ja == kPelvis || jb == kPelvis) return sp.leg_radius * 1.2;
        const bool leg = ja >= kLHip;
        return leg ? sp.leg_radius : sp.arm_radius;
    };
    std::vector<Capsule> caps;
    caps.reserve(skeleton_edges().size());
    for (const auto& [a, b] : skeleton_edges())
        caps.push_back({j[a], j[b], radius_for(a, b) * unit});
    return caps;
}

void render_capsules(BinaryMask& mask, const std::vector<Capsule>& caps) {
    for (const Capsule& c : caps) {
        const int x0 = std::max(0, (int)std::floor(std::min(c.a.x, c.b.x) - c.radius - 1));
        const int x1 = std::min(mask.width() - 1, (int)std::ceil(std::max(c.a.x, c.b.x) + c.radius + 1));
        const int y0 = std::max(0, (int)std::floor(std::min(c.a.y, c.b.y) - c.radius - 1));
        const int y1 = std::min(mask.height() - 1, (int)std::ceil(std::max(c.a.y, c.b.y) + c.radius + 1));
        const double r2 = c.radius * c.radius;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (dist_sq_to_segment(x, y, c.a, c.b) <= r2) mask.set(x, y, 1);
    }
}

}  // namespace

Exemplar gen_figure(const FigureSpec& spec, int canvas_width, int canvas_height) {
    Exemplar ex;
    ex.joints = figure_joints(spec);
    ex.mask = BinaryMask(canvas_width, canvas_height);
    render_capsules(ex.mask, figure_capsules(spec, ex.joints));
    if (ex.mask.empty_foreground())
        throw std::runtime_error("gen_figure: silhouette is empty after clipping");
    return ex;
}

Exemplar gen_figure_tight(const FigureSpec& spec, int margin) {
    // render centered on a conservative canvas, then crop to the silhouette
    FigureSpec sp = spec;
    const double unit = sp.head_unit * sp.scale;
    const double reach = unit * (sp.torso_len + sp.head_len + sp.upper_arm + sp.fore_arm +
                                 sp.thigh + sp.shin + 2.0);
    sp.pos_x = reach;
    sp.pos_y = reach;
    const int canvas = static_cast<int>(std::ceil(2.0 * reach));
    Exemplar big = gen_figure(sp, canvas, canvas);

    const BBox box = tight_bbox(big.mask);
    const int x0 = std::max(0, box.x - margin), y0 = std::max(0, box.y - margin);
    const int x1 = std::min(canvas - 1, box.x + box.w - 1 + margin);
    const int y1 = std::min(canvas - 1, box.y + box.h - 1 + margin);
    Exemplar out;
    out.mask = BinaryMask(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (big.mask.at(x, y)) out.mask.set(x - x0, y - y0, 1);
    for (int i = 0; i < kJointCount; ++i)
        out.joints[i] = {big.joints[i].x - x0, big.joints[i].y - y0};
    return out;
}

FigureSpec random_figure_spec(Rng& rng, const ArticulationRanges& r) {
    FigureSpec sp;
    sp.spine_angle = rng.uniform(-r.spine, r.spine);
    sp.head_angle = rng.uniform(-r.head, r.head);
    for (int s = 0; s < 2; ++s) sp.shoulder_angle[s] = rng.uniform(-r.shoulder, r.shoulder);
    for (int s = 0; s < 2; ++s) sp.elbow_angle[s] = rng.uniform(-r.elbow, r.elbow);
    for (int s = 0; s < 2; ++s) sp.hip_angle[s] = rng.uniform(-r.hip, r.hip);
    for (int s = 0; s < 2; ++s) sp.knee_angle[s] = rng.uniform(-r.knee, r.knee);
    return sp;
}

ExemplarLibrary gen_library(int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_library: n must be >= 1");
    ExemplarLibrary lib;
    lib.exemplars.resize(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
        FigureSpec sp = random_figure_spec(rng);
        Exemplar ex = gen_figure_tight(sp);
        ex.id = i;
        ex.validate();
        lib.exemplars[i] = std::move(ex);
    }
    return lib;
}

namespace {

struct Color3 {
    double r, g, b;
};

double color_dist(const Color3& a, const Color3& b) {
    return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) +
                     (a.b - b.b) * (a.b - b.b));
}

Color3 quantized(Color3 c) {
    auto q = [](double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; };
    return {q(c.r), q(c.g), q(c.b)};
}

void erode_or_dilate(BinaryMask& m, int radius, bool dilate) {
    BinaryMask out(m.width(), m.height());
    const int r2 = radius * radius;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool hit = dilate ? false : true;
            for (int dy = -radius; dy <= radius && (dilate ? !hit : hit); ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    if (dx * dx + dy * dy > r2) continue;
                    const bool fg = m.inside(x + dx, y + dy) && m.at(x + dx, y + dy);
                    if (dilate && fg) { hit = true; break; }
                    if (!dilate && !fg) { hit = false; break; }
                }
            out.set(x, y, hit ? 1 : 0);
        }
    m = std::move(out);
}

BinaryMask shift_mask(const BinaryMask& m, int dx, int dy) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y) && m.inside(x + dx, y + dy)) out.set(x + dx, y + dy, 1);
    return out;
}

}  // namespace

Scene gen_scene(uint64_t seed, const SceneParams& params) {
    Rng rng(derive_seed(seed, 0x5ce9eULL));
    const int w = params.width, h = params.height;

    // smoothed value-noise background plus a couple of flat patches
    const int cell = 16;
    const int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<Color3> grid(static_cast<size_t>(gw) * gh);
    std::vector<Color3> palette;
    for (Color3& c : grid) {
        c = quantized({rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)});
        palette.push_back(c);
    }
    Scene scene;
    scene.image = Image(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double fx = double(x) / cell, fy = double(y) / cell;
            const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
            const double tx = fx - ix, ty = fy - iy;
            auto at = [&](int gx, int gy) -> const Color3& { return grid[gy * gw + gx]; };
            auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
            const Color3& c00 = at(ix, iy);
            const Color3& c10 = at(ix + 1, iy);
            const Color3& c01 = at(ix, iy + 1);
            const Color3& c11 = at(ix + 1, iy + 1);
            const double r = lerp(lerp(c00.r, c10.r, tx), lerp(c01.r, c11.r, tx), ty);
            const double g = lerp(lerp(c00.g, c10.g, tx), lerp(c01.g, c11.g, tx), ty);
            const double b = lerp(lerp(c00.b, c10.b, tx), lerp(c01.b, c11.b, tx), ty);
            scene.image.set(x, y, float(r), float(g), float(b));
        }
    const int n_patches = rng.uniform_int(1, 2);
    for (int i = 0; i < n_patches; ++i) {
        const int pw = rng.uniform_int(w / 6, w / 3), ph = rng.uniform_int(h / 6, h / 3);
        const int px = rng.uniform_int(0, w - pw), py = rng.uniform_int(0, h - ph);
        const Color3 c =
            quantized({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
        palette.push_back(c);
        for (int y = py; y < py + ph; ++y)
            for (int x = px; x < px + pw; ++x)
                scene.image.set(x, y, float(c.r), float(c.g), float(c.b));
    }

    // figure
    FigureSpec sp = random_figure_spec(rng);
    sp.head_unit = params.figure_head_unit;
    sp.scale = rng.uniform(0.85, 1.1);
    sp.rotation = rng.uniform(-0.45, 0.45);
    sp.pos_x = w / 2.0 + rng.uniform(-8.0, 8.0);
    sp.pos_y = h / 2.0 + rng.uniform(-5.0, 5.0);
    Exemplar fig = gen_figure(sp, w, h);

    Color3 fig_color{0.5, 0.5, 0.5};
    double best_sep = -1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Color3 c = quantized({rng.uniform(), rng.uniform(), rng.uniform()});
        double sep = 1e9;
        for (const Color3& p : palette) sep = std::min(sep, color_dist(c, p));
        if (sep > best_sep) {
            best_sep = sep;
            fig_color = c;
        }
        if (sep >= params.min_contrast) break;
    }

    // distractor patches near the figure color so color alone cannot separate
    // the figure: one abutting the figure bbox, the rest spread in the image
    const BBox fig_box = tight_bbox(fig.mask);
    const int n_distract = 2 + static_cast<int>(rng.uniform_int(2));
    for (int d = 0; d < n_distract; ++d) {
        auto near_color = [&] {
            return quantized({fig_color.r + rng.uniform(-0.1, 0.1),
                              fig_color.g + rng.uniform(-0.1, 0.1),
                              fig_color.b + rng.uniform(-0.1, 0.1)});
        };
        const Color3 c = near_color();
        int dw, dh, dx, dy;
        if (d == 0) {  // flush against the figure bbox
            dw = std::max(6, (int)std::lround(fig_box.w * rng.uniform(0.3, 0.5)));
            dh = std::max(8, (int)std::lround(fig_box.h * rng.uniform(0.4, 0.8)));
            const bool left = rng.bernoulli(0.5);
            dx = left ? fig_box.x - dw : fig_box.x + fig_box.w;
            dy = fig_box.y + (int)rng.uniform_int(std::max(1, fig_box.h / 3));
        } else {
            dw = (int)rng.uniform_int(w / 8, w / 4);
            dh = (int)rng.uniform_int(h / 8, h / 4);
            dx = (int)rng.uniform_int(0, w - dw);
            dy = (int)rng.uniform_int(0, h - dh);
        }
        for (int y = std::max(0, dy); y < std::min(h, dy + dh); ++y)
            for (int x = std::max(0, dx); x < std::min(w, dx + dw); ++x)
                scene.image.set(x, y, float(c.r), float(c.g), float(c.b));
    }

    for (int u = 0; u < w * h; ++u)
        if (fig.mask.at(u))
            scene.image.set(u % w, u / w, float(fig_color.r), float(fig_color.g),
                            float(fig_color.b));

    // occluder rectangle over the figure; truth keeps only visible foreground
    scene.truth = fig.mask;
    if (rng.bernoulli(params.occlusion_prob)) {
        const BBox box = tight_bbox(fig.mask);
        const int ow = std::max(4, (int)std::lround(box.w * rng.uniform(0.25, 0.5)));
        const int oh = std::max(4, (int)std::lround(box.h * rng.uniform(0.2, 0.45)));
        const int ox = box.x + rng.uniform_int(0, std::max(0, box.w - ow));
        const int oy = box.y + rng.uniform_int(0, std::max(0, box.h - oh));
        Color3 occ_color{0.2, 0.2, 0.2};
        for (int attempt = 0; attempt < 100; ++attempt) {
            const Color3 c = quantized({rng.uniform(), rng.uniform(), rng.uniform()});
            if (color_dist(c, fig_color) >= params.min_contrast) {
                occ_color = c;
                break;
            }
        }
        BinaryMask occluded = scene.truth;
        for (int y = oy; y < std::min(h, oy + oh); ++y)
            for (int x = ox; x < std::min(w, ox + ow); ++x) {
                scene.image.set(x, y, float(occ_color.r), float(occ_color.g), float(occ_color.b));
                occluded.set(x, y, 0);
            }
        if (!occluded.empty_foreground()) scene.truth = std::move(occluded);
    }

    // noisy candidate: morphological perturbation plus a small shift
    scene.candidate = scene.truth;
    const bool dilate = rng.bernoulli(0.5);
    const int radius = rng.uniform_int(1, 2);
    erode_or_dilate(scene.candidate, radius, dilate);
    scene.candidate = shift_mask(scene.candidate, rng.uniform_int(-2, 2), rng.uniform_int(-2, 2));
    if (scene.candidate.foreground_count() < 30) {
        scene.candidate = scene.truth;
        erode_or_dilate(scene.candidate, 1, true);
    }
    scene.candidate_score = 1.0 - 0.1 * rng.uniform();
    return scene;
}

void write_scene_set(const std::string& dir, int count, uint64_t seed,
                     const SceneParams& params) {
    fs::create_directories(dir);
    ordered_json manifest;
    manifest["scenes"] = ordered_json::array();
    for (int i = 0; i < count; ++i) {
        const Scene scene = gen_scene(derive_seed(seed, 0x100000ULL + i), params);
        char img[32], truth[32], cand[32], cmask[40];
        std::snprintf(img, sizeof(img), "scene_%04d.ppm", i);
        std::snprintf(truth, sizeof(truth), "truth_%04d.pgm", i);
        std::snprintf(cand, sizeof(cand), "cand_%04d.json", i);
        std::snprintf(cmask, sizeof(cmask), "candmask_%04d_0.pgm", i);
        write_ppm(scene.image, (fs::path(dir) / img).string());
        write_mask_pgm(scene.truth, (fs::path(dir) / truth).string());
        write_mask_pgm(scene.candidate, (fs::path(dir) / cmask).string());

        const BBox box = tight_bbox(scene.candidate);
        ordered_json cj;
        cj["candidates"] = ordered_json::array();
        ordered_json c0;
        c0["id"] = 0;
        c0["mask"] = cmask;
        c0["bbox"] = {box.x, box.y, box.w, box.h};
        c0["score"] = scene.candidate_score;
        cj["candidates"].push_back(std::move(c0));
        std::ofstream cf(fs::path(dir) / cand);
        if (!cf) throw std::runtime_error("cannot write " + std::string(cand));
        cf << cj.dump(2) << "\n";

        ordered_json sj;
        sj["id"] = i;
        sj["image"] = img;
        sj["truth"] = truth;
        sj["candidates"] = cand;
        manifest["scenes"].push_back(std::move(sj));
    }
    std::ofstream mf(fs::path(dir) / "scenes.json");
    if (!mf) throw std::runtime_error("cannot write scenes.json in " + dir);
    mf << manifest.dump(2) << "\n";
}

}  // namespace pmfseg
