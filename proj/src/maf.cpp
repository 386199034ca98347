#include "pmfseg/maf.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "pmfseg/pnm.hpp"
#include "pmfseg/reference.hpp"

namespace pmfseg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void Exemplar::validate() const {
    if (mask.empty_foreground()) throw std::invalid_argument("exemplar mask is empty");
    const BBox box = tight_bbox(mask);
    const double dx = 0.1 * box.w, dy = 0.1 * box.h;
    for (const Point2& j : joints) {
        if (j.x < box.x - dx || j.x > box.x + box.w - 1 + dx || j.y < box.y - dy ||
            j.y > box.y + box.h - 1 + dy)
            throw std::invalid_argument("exemplar joint outside dilated mask bbox");
    }
}

void save_library(const ExemplarLibrary& lib, const std::string& dir) {
    fs::create_directories(dir);
    ordered_json index;
    index["joint_order"] = joint_names();
    index["exemplars"] = ordered_json::array();
    for (const Exemplar& ex : lib.exemplars) {
        char name[32];
        std::snprintf(name, sizeof(name), "mask_%05d.pgm", ex.id);
        write_mask_pgm(ex.mask, (fs::path(dir) / name).string());
        ordered_json j;
        j["id"] = ex.id;
        j["mask"] = name;
        ordered_json joints = ordered_json::array();
        for (const Point2& p : ex.joints) joints.push_back({p.x, p.y});
        j["joints"] = joints;
        index["exemplars"].push_back(std::move(j));
    }
    std::ofstream out(fs::path(dir) / "index.json");
    if (!out) throw std::runtime_error("cannot write library index in " + dir);
    out << index.dump(2) << "\n";
}

ExemplarLibrary load_library(const std::string& dir) {
    const fs::path index_path = fs::path(dir) / "index.json";
    std::ifstream in(index_path);
    if (!in) throw std::runtime_error("cannot open library index " + index_path.string());
    ordered_json index;
    try {
        in >> index;
    } catch (const std::exception& e) {
        throw std::runtime_error("library index " + index_path.string() + ": " + e.what());
    }

    const auto& order = index.at("joint_order");
    const auto& names = joint_names();
    if (order.size() != names.size())
        throw std::runtime_error("library " + dir + ": joint_order must list exactly 15 joints");
    for (size_t i = 0; i < names.size(); ++i)
        if (order[i].get<std::string>() != names[i])
            throw std::runtime_error("library " + dir + ": joint_order[" + std::to_string(i) +
                                     "] is \"" + order[i].get<std::string>() + "\", expected \"" +
                                     names[i] + "\"");

    ExemplarLibrary lib;
    for (const auto& j : index.at("exemplars")) {
        Exemplar ex;
        ex.id = j.at("id").get<int>();
        ex.mask = read_mask_pgm((fs::path(dir) / j.at("mask").get<std::string>()).string());
        const auto& joints = j.at("joints");
        if (joints.size() != static_cast<size_t>(kJointCount))
            throw std::runtime_error("library " + dir + ": exemplar " + std::to_string(ex.id) +
                                     " must have 15 joints");
        for (int i = 0; i < kJointCount; ++i)
            ex.joints[i] = {joints[i][0].get<double>(), joints[i][1].get<double>()};
        ex.validate();
        lib.exemplars.push_back(std::move(ex));
    }
    std::sort(lib.exemplars.begin(), lib.exemplars.end(),
              [](const Exemplar& a, const Exemplar& b) { return a.id < b.id; });
    return lib;
}

namespace {

Point2 foreground_centroid(const BinaryMask& m) {
    double cx = 0, cy = 0;
    int n = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) {
                cx += x;
                cy += y;
                ++n;
            }
    return {cx / n, cy / n};
}

struct CandidateFeatures {
    BoundaryPoints boundary;
    std::vector<ShapeContext> descriptors;  // normalized
    Point2 centroid;
    double axis_angle = 0.0;
    double bbox_diag = 1.0;
    double height_norm = 1.0;  // (200 / bbox height)^2, scales alignment errors
};

CandidateFeatures candidate_features(const BinaryMask& candidate, const RunConfig& cfg) {
    CandidateFeatures f;
    f.boundary = sample_boundary(candidate, cfg.boundary_samples);
    f.descriptors = shape_context_all(f.boundary, cfg.sc_radial_bins, cfg.sc_angular_bins);
    for (auto& d : f.descriptors) d = d.normalized();
    f.centroid = foreground_centroid(candidate);
    f.axis_angle = principal_axis_angle(candidate);
    const BBox box = tight_bbox(candidate);
    f.bbox_diag = std::hypot(box.w, box.h);
    const double h = std::max(box.h, 1);
    f.height_norm = (200.0 / h) * (200.0 / h);
    return f;
}

// Selection error: trimmed one-sided chamfer residual of the candidate
// boundary against the aligned exemplar boundary, per coordinate, px^2. The
// residual over the correspondences alone admits overfit false positives at
// |J| near 3; scoring the whole boundary rejects misplaced fits, and trimming
// the worst 30% keeps partially visible candidates matchable.
double alignment_error(const std::vector<Point2>& cand_pts,
                       const std::vector<Point2>& warped_ex) {
    std::vector<double> d2(cand_pts.size());
    for (size_t i = 0; i < cand_pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point2& w : warped_ex) {
            const double dx = cand_pts[i].x - w.x, dy = cand_pts[i].y - w.y;
            best = std::min(best, dx * dx + dy * dy);
        }
        d2[i] = best;
    }
    std::sort(d2.begin(), d2.end());
    const size_t keep = std::max<size_t>(1, (d2.size() * 7) / 10);
    double sum = 0.0;
    for (size_t i = 0; i < keep; ++i) sum += d2[i];
    return sum / (2.0 * keep);
}

// Match one exemplar: coarse pre-alignment (principal axis + bbox diagonal,
// both rotation branches, both reflections), shape-context correspondence,
// Procrustes refinement; returns the lowest-error variant.
SelectedExemplar match_exemplar(const Exemplar& ex, const CandidateFeatures& cand,
                                const RunConfig& cfg) {
    SelectedExemplar out;
    out.exemplar = &ex;
    out.error = std::numeric_limits<double>::infinity();

    BoundaryPoints ex_boundary = sample_boundary(ex.mask, cfg.boundary_samples);
    if (ex_boundary.points.size() < 3) return out;
    const Point2 ex_centroid = foreground_centroid(ex.mask);
    const double ex_axis = principal_axis_angle(ex.mask);
    const BBox ex_box = tight_bbox(ex.mask);
    const double ex_diag = std::max(std::hypot(ex_box.w, ex_box.h), 1e-9);
    const double base_scale = cand.bbox_diag / ex_diag;

    const Transform2D to_origin = Transform2D::translation(-ex_centroid.x, -ex_centroid.y);
    const Transform2D to_cand = Transform2D::translation(cand.centroid.x, cand.centroid.y);

    constexpr double kPi = 3.14159265358979323846;
    for (const double rot_extra : {0.0, kPi}) {
        for (const double mirror : {1.0, -1.0}) {
            const Transform2D pre =
                to_cand
                    .compose(Transform2D::from_params(cand.axis_angle - ex_axis + rot_extra,
                                                      mirror * base_scale, base_scale, 0, 0))
                    .compose(to_origin);
            const std::vector<Point2> pts = warp_points(ex_boundary.points, pre);
            BoundaryPoints aligned{pts};
            std::vector<ShapeContext> desc =
                shape_context_all(aligned, cfg.sc_radial_bins, cfg.sc_angular_bins);
            for (auto& d : desc) d = d.normalized();

            // pairs come back as (query idx, exemplar idx); Procrustes wants (src, dst)
            std::vector<std::pair<int, int>> pairs =
                match_descriptors(cand.descriptors, desc, cfg.mu);
            if (pairs.size() <= 2) continue;
            for (auto& pr : pairs) std::swap(pr.first, pr.second);

            Transform2D fit;
            try {
                fit = procrustes_fit(pts, cand.boundary.points, pairs);
            } catch (const std::invalid_argument&) {
                continue;  // degenerate correspondence geometry
            }
            const double err =
                alignment_error(cand.boundary.points, warp_points(pts, fit)) * cand.height_norm;
            if (err < out.error) {
                out.error = err;
                out.transform = fit.compose(pre);
                out.transform.error = err;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<SelectedExemplar> select_exemplars(const BinaryMask& candidate,
                                               const ExemplarLibrary& library, double epsilon,
                                               double mu, const RunConfig& config) {
    RunConfig cfg = config;
    cfg.mu = mu;
    if (candidate.empty_foreground()) return {};
    CandidateFeatures cand = candidate_features(candidate, cfg);
    if (cand.boundary.points.size() < 3) return {};

    const int n = static_cast<int>(library.exemplars.size());
    std::vector<SelectedExemplar> slots(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) slots[i] = match_exemplar(library.exemplars[i], cand, cfg);

    double best = std::numeric_limits<double>::infinity();
    for (const SelectedExemplar& s : slots) best = std::min(best, s.error);
    const double band = cfg.select_band_scale * (best + cfg.select_band_floor);
    std::vector<SelectedExemplar> out;
    for (SelectedExemplar& s : slots)
        if (s.error < epsilon && s.error < band) out.push_back(std::move(s));
    return out;  // library order == id order, so the reduction is deterministic
}

namespace reference {

std::vector<SelectedExemplar> select_exemplars(const BinaryMask& candidate,
                                               const ExemplarLibrary& library, double epsilon,
                                               double mu, const RunConfig& config) {
    RunConfig cfg = config;
    cfg.mu = mu;
    if (candidate.empty_foreground()) return {};
    CandidateFeatures cand = candidate_features(candidate, cfg);
    if (cand.boundary.points.size() < 3) return {};

    std::vector<SelectedExemplar> slots;
    for (const Exemplar& ex : library.exemplars) slots.push_back(match_exemplar(ex, cand, cfg));
    double best = std::numeric_limits<double>::infinity();
    for (const SelectedExemplar& s : slots) best = std::min(best, s.error);
    const double band = cfg.select_band_scale * (best + cfg.select_band_floor);
    std::vector<SelectedExemplar> out;
    for (SelectedExemplar& s : slots)
        if (s.error < epsilon && s.error < band) out.push_back(std::move(s));
    return out;
}

}  // namespace reference

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

#pragma omp parallel for
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
            const Point2 w = selected[t].transform.apply(selected[t].exemplar->joints[j]);
            sx += w.x;
            sy += w.y;
        }
        prior.b[j] = {sx / n, sy / n};
    }
    return prior;
}

SkeletonSeeds rasterize_skeleton(const Skeleton2D& joints, int width, int height) {
    SkeletonSeeds seeds;
    seeds.mask = BinaryMask(width, height);
    for (const auto& [a, b] : skeleton_edges())
        draw_segment(seeds.mask, joints[a], joints[b]);
    for (int u = 0; u < seeds.mask.pixels(); ++u)
        if (seeds.mask.at(u)) seeds.nodes.push_back(u);
    return seeds;
}

PriorResult build_prior(const BinaryMask& candidate, const ExemplarLibrary& library,
                        const RunConfig& config) {
    if (candidate.empty_foreground())
        throw PriorRejected(PriorRejected::Reason::DegenerateCandidate, "candidate mask is empty");
    {
        BoundaryPoints b = sample_boundary(candidate, config.boundary_samples);
        if (b.points.size() < 3)
            throw PriorRejected(PriorRejected::Reason::DegenerateCandidate,
                                "candidate boundary has fewer than 3 pixels");
    }
    if (library.exemplars.empty())
        throw PriorRejected(PriorRejected::Reason::NoExemplarsSelected, "exemplar library is empty");

    std::vector<SelectedExemplar> selected =
        select_exemplars(candidate, library, config.epsilon, config.mu, config);
    if (selected.empty())
        throw PriorRejected(PriorRejected::Reason::NoExemplarsSelected, "no exemplars to fuse");

    PriorResult result;
    result.prior = fuse(selected, candidate.width(), candidate.height());
    result.skeleton = rasterize_skeleton(result.prior.b, candidate.width(), candidate.height());

    // foreground seeds: skeleton nodes restricted to strong prior support
    for (int u : result.skeleton.nodes)
        if (result.prior.s[u] > 0.5) result.seeds.foreground.push_back(u);
    if (result.seeds.foreground.empty())
        throw PriorRejected(PriorRejected::Reason::NoFeasibleSeeds,
                            "skeleton seeds fall outside the prior support");

    // background seeds: border pixels with weak prior, plus everything outside
    // the candidate bbox dilated by 20% per side
    const int w = candidate.width(), h = candidate.height();
    const BBox box = tight_bbox(candidate);
    const int dx = static_cast<int>(std::lround(0.2 * box.w));
    const int dy = static_cast<int>(std::lround(0.2 * box.h));
    const int x0 = box.x - dx, x1 = box.x + box.w - 1 + dx;
    const int y0 = box.y - dy, y1 = box.y + box.h - 1 + dy;
    std::vector<uint8_t> is_fg_seed(candidate.pixels(), 0);
    for (int u : result.seeds.foreground) is_fg_seed[u] = 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int u = y * w + x;
            if (is_fg_seed[u]) continue;
            const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            const bool outside_box = x < x0 || x > x1 || y < y0 || y > y1;
            if ((border && result.prior.s[u] < 0.05) || outside_box)
                result.seeds.background.push_back(u);
        }
    if (result.seeds.background.empty())
        throw PriorRejected(PriorRejected::Reason::NoFeasibleSeeds,
                            "no background seeds available");
    return result;
}

}  // namespace pmfseg
