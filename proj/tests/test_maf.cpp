#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pmfseg/figures.hpp"
#include "pmfseg/maf.hpp"
#include "pmfseg/pipeline.hpp"

using namespace pmfseg;
namespace fs = std::filesystem;

namespace {

// exemplar transformed by a known 5-DOF map, re-rendered on a fitting canvas
Exemplar transformed_exemplar(const Exemplar& src, const Transform2D& w, int id) {
    double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
    const BBox box = tight_bbox(src.mask);
    const double xs[2] = {double(box.x), double(box.x + box.w - 1)};
    const double ys[2] = {double(box.y), double(box.y + box.h - 1)};
    for (double cx : xs)
        for (double cy : ys) {
            const Point2 p = w.apply({cx, cy});
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
    const int margin = 4;
    const Transform2D shift = Transform2D::translation(margin - minx, margin - miny);
    const Transform2D total = shift.compose(w);
    Exemplar out;
    out.id = id;
    out.mask = warp_mask(src.mask, total, int(maxx - minx) + 2 * margin + 1,
                         int(maxy - miny) + 2 * margin + 1);
    for (int j = 0; j < kJointCount; ++j) out.joints[j] = total.apply(src.joints[j]);
    return out;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("select_exemplars: self-retrieval and the epsilon gate") {
    const ExemplarLibrary lib = gen_library(12, 99);
    const RunConfig cfg;
    const BinaryMask& query = lib.exemplars[4].mask;

    auto selected = select_exemplars(query, lib, cfg.epsilon, cfg.mu, cfg);
    bool found_self = false;
    for (const auto& s : selected)
        if (s.exemplar->id == 4) {
            found_self = true;
            CHECK(s.error <= 1e-9);
        }
    CHECK(found_self);

    CHECK(select_exemplars(query, lib, 0.0, cfg.mu, cfg).empty());

    // shrinking epsilon never grows the selection
    auto tight = select_exemplars(query, lib, cfg.epsilon / 4, cfg.mu, cfg);
    std::set<int> wide_ids, tight_ids;
    for (const auto& s : selected) wide_ids.insert(s.exemplar->id);
    for (const auto& s : tight) tight_ids.insert(s.exemplar->id);
    for (int id : tight_ids) CHECK(wide_ids.count(id) == 1);
}

TEST_CASE("select_exemplars finds exactly the transformed copies") {
    Rng rng(1234);
    FigureSpec base = random_figure_spec(rng);
    const Exemplar anchor = gen_figure_tight(base);

    ExemplarLibrary lib;
    const Transform2D transforms[5] = {
        Transform2D::from_params(0.4, 1.2, 1.2, 0, 0),
        Transform2D::from_params(-0.7, 0.85, 1.1, 15, -4),
        Transform2D::from_params(0.1, -1.1, 1.0, 8, 8),  // reflection
        Transform2D::translation(12, 30),
        Transform2D::from_params(1.5707963267948966, 1.4, 1.3, 2, 1),
    };
    for (int i = 0; i < 5; ++i) lib.exemplars.push_back(transformed_exemplar(anchor, transforms[i], i));
    // structurally different figures: stretched proportions and wild poses
    for (int i = 5; i < 20; ++i) {
        Rng r2(777 + i);
        FigureSpec sp = random_figure_spec(r2);
        sp.torso_len = 1.6 + 0.35 * (i % 5);
        sp.upper_arm = sp.fore_arm = 1.0 + 0.4 * (i % 4);
        sp.thigh = sp.shin = 3.0 - 0.3 * (i % 4);
        sp.torso_radius = 0.5 + 0.12 * (i % 3);
        Exemplar ex = gen_figure_tight(sp);
        ex.id = i;
        lib.exemplars.push_back(std::move(ex));
    }

    const RunConfig cfg;
    const auto selected = select_exemplars(anchor.mask, lib, cfg.epsilon, cfg.mu, cfg);
    std::set<int> ids;
    for (const auto& s : selected) ids.insert(s.exemplar->id);
    CAPTURE(ids.size());
    for (int i = 0; i < 5; ++i) CHECK(ids.count(i) == 1);
    for (int i = 5; i < 20; ++i) CHECK(ids.count(i) == 0);
}

TEST_CASE("fuse: means of warped masks and skeletons") {
    BinaryMask a(10, 10), b(10, 10);
    for (int y = 1; y <= 4; ++y)
        for (int x = 1; x <= 4; ++x) a.set(x, y, 1);
    for (int y = 6; y <= 8; ++y)
        for (int x = 6; x <= 8; ++x) b.set(x, y, 1);
    Exemplar ea, eb;
    ea.mask = a;
    eb.mask = b;
    for (int j = 0; j < kJointCount; ++j) {
        ea.joints[j] = {2.0, 2.0};
        eb.joints[j] = {7.0, 7.0};
    }

    // single exemplar, identity transform: S equals the mask exactly
    std::vector<SelectedExemplar> one = {{&ea, Transform2D::identity(), 0.0}};
    const ShapePrior p1 = fuse(one, 10, 10);
    CHECK(p1.support == 1);
    for (int u = 0; u < 100; ++u) CHECK(p1.s[u] == double(a.at(u)));

    // two disjoint masks: S in {0, 0.5}; B is the joint mean
    std::vector<SelectedExemplar> two = {{&ea, Transform2D::identity(), 0.0},
                                         {&eb, Transform2D::identity(), 0.0}};
    const ShapePrior p2 = fuse(two, 10, 10);
    for (int u = 0; u < 100; ++u) {
        CHECK((p2.s[u] == 0.0 || p2.s[u] == 0.5));
        CHECK(p2.s[u] * p2.support == std::round(p2.s[u] * p2.support));  // integral counts
    }
    CHECK(p2.b[kHead].x == doctest::Approx(4.5));
    CHECK(p2.b[kHead].y == doctest::Approx(4.5));

    // n identical copies collapse to the mask and skeleton
    std::vector<SelectedExemplar> many(5, SelectedExemplar{&ea, Transform2D::identity(), 0.0});
    const ShapePrior p3 = fuse(many, 10, 10);
    for (int u = 0; u < 100; ++u) CHECK(p3.s[u] == double(a.at(u)));
    CHECK(p3.b[kLWrist].x == doctest::Approx(2.0));

    CHECK_THROWS_WITH_AS(fuse({}, 10, 10), doctest::Contains("no exemplars to fuse"),
                         std::invalid_argument);
}

TEST_CASE("bresenham_line matches the textbook sequence") {
    const auto pts = bresenham_line(0, 0, 5, 3);
    const std::vector<std::pair<int, int>> expected = {{0, 0}, {1, 1}, {2, 1},
                                                       {3, 2}, {4, 2}, {5, 3}};
    CHECK(pts == expected);
}

TEST_CASE("rasterize_skeleton draws the kinematic tree") {
    // all joints coincident except the head: one horizontal bone
    Skeleton2D joints;
    for (Point2& p : joints) p = {3.0, 4.0};
    joints[kHead] = {7.0, 4.0};
    const SkeletonSeeds seeds = rasterize_skeleton(joints, 12, 9);
    std::set<int> expected;
    for (int x = 3; x <= 7; ++x) expected.insert(4 * 12 + x);
    CHECK(std::set<int>(seeds.nodes.begin(), seeds.nodes.end()) == expected);

    // fully coincident tree: a single seed pixel
    for (Point2& p : joints) p = {5.0, 5.0};
    const SkeletonSeeds one = rasterize_skeleton(joints, 12, 9);
    CHECK(one.nodes.size() == 1);
    CHECK(one.nodes[0] == 5 * 12 + 5);

    // out-of-bounds joints are clipped, never crash
    joints[kHead] = {-50.0, 3.0};
    joints[kNeck] = {60.0, 3.0};
    const SkeletonSeeds clipped = rasterize_skeleton(joints, 12, 9);
    for (int u : clipped.nodes) CHECK((u >= 0 && u < 12 * 9));
}

TEST_CASE("build_prior: self-retrieval yields a faithful prior and seeds") {
    const ExemplarLibrary lib = gen_library(30, 5);
    const RunConfig cfg;
    const BinaryMask& cand = lib.exemplars[7].mask;
    const PriorResult pr = build_prior(cand, lib, cfg);

    CHECK(pr.prior.support >= 1);
    double mean_inside = 0.0;
    int n_inside = 0;
    for (int u = 0; u < cand.pixels(); ++u)
        if (cand.at(u)) {
            mean_inside += pr.prior.s[u];
            ++n_inside;
        }
    mean_inside /= n_inside;
    CHECK(mean_inside >= 0.8);

    BinaryMask support(cand.width(), cand.height());
    for (int u = 0; u < cand.pixels(); ++u) support.set(u, pr.prior.s[u] > 0.5 ? 1 : 0);
    CHECK(iou(support, cand) >= 0.85);

    CHECK(!pr.seeds.foreground.empty());
    CHECK(!pr.seeds.background.empty());
    for (int u : pr.seeds.foreground) CHECK(pr.prior.s[u] > 0.5);
    // disjoint seed sets
    std::set<int> fg(pr.seeds.foreground.begin(), pr.seeds.foreground.end());
    for (int u : pr.seeds.background) CHECK(fg.count(u) == 0);
}

TEST_CASE("build_prior rejections") {
    const RunConfig cfg;
    ExemplarLibrary lib = gen_library(3, 8);

    BinaryMask two_px(8, 8);
    two_px.set(3, 3, 1);
    two_px.set(4, 3, 1);
    CHECK_THROWS_AS(build_prior(two_px, lib, cfg), PriorRejected);

    ExemplarLibrary empty;
    CHECK_THROWS_AS(build_prior(lib.exemplars[0].mask, empty, cfg), PriorRejected);

    try {
        build_prior(two_px, lib, cfg);
    } catch (const PriorRejected& r) {
        CHECK(r.reason() == PriorRejected::Reason::DegenerateCandidate);
    }
}

TEST_CASE("library save/load round-trip and format validation") {
    const fs::path dir = fs::temp_directory_path() / "pmfseg_test_lib";
    fs::remove_all(dir);
    const ExemplarLibrary lib = gen_library(4, 21);
    save_library(lib, dir.string());
    const ExemplarLibrary loaded = load_library(dir.string());
    REQUIRE(loaded.exemplars.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(loaded.exemplars[i].id == lib.exemplars[i].id);
        CHECK(loaded.exemplars[i].mask == lib.exemplars[i].mask);
        for (int j = 0; j < kJointCount; ++j) {
            CHECK(loaded.exemplars[i].joints[j].x ==
                  doctest::Approx(lib.exemplars[i].joints[j].x));
            CHECK(loaded.exemplars[i].joints[j].y ==
                  doctest::Approx(lib.exemplars[i].joints[j].y));
        }
    }

    // writing twice produces identical bytes
    const fs::path dir2 = fs::temp_directory_path() / "pmfseg_test_lib2";
    fs::remove_all(dir2);
    save_library(lib, dir2.string());
    CHECK(file_bytes(dir / "index.json") == file_bytes(dir2 / "index.json"));
    CHECK(file_bytes(dir / "mask_00000.pgm") == file_bytes(dir2 / "mask_00000.pgm"));

    // joint order is a bit-exact contract
    {
        std::ifstream in(dir / "index.json");
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        const auto pos = text.find("\"neck\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 6, "\"nape\"");
        std::ofstream out(dir / "index.json");
        out << text;
    }
    CHECK_THROWS_WITH_AS(load_library(dir.string()), doctest::Contains("joint_order"),
                         std::runtime_error);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}
