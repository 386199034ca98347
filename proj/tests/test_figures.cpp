#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <queue>
#include <sstream>

#include "doctest.h"
#include "pmfseg/figures.hpp"
#include "pmfseg/pnm.hpp"

using namespace pmfseg;
namespace fs = std::filesystem;

namespace {

bool four_connected(const BinaryMask& m) {
    const int n = m.foreground_count();
    if (n == 0) return false;
    int start = -1;
    for (int i = 0; i < m.pixels() && start < 0; ++i)
        if (m.at(i)) start = i;
    std::vector<uint8_t> seen(m.pixels(), 0);
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    int visited = 0;
    const int w = m.width();
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        ++visited;
        const int x = u % w, y = u / w;
        const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (const auto& [nx, ny] : nb)
            if (m.inside(nx, ny) && m.at(nx, ny) && !seen[ny * w + nx]) {
                seen[ny * w + nx] = 1;
                q.push(ny * w + nx);
            }
    }
    return visited == n;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("canonical pose is symmetric about the vertical axis") {
    FigureSpec sp;  // all articulation angles zero
    sp.pos_x = 60;
    sp.pos_y = 60;
    const Skeleton2D j = figure_joints(sp);
    const std::pair<int, int> mirror_pairs[] = {
        {kLShoulder, kRShoulder}, {kLElbow, kRElbow}, {kLWrist, kRWrist},
        {kLHip, kRHip},           {kLKnee, kRKnee},   {kLAnkle, kRAnkle}};
    for (const auto& [l, r] : mirror_pairs) {
        CHECK(std::abs((j[l].x - 60.0) + (j[r].x - 60.0)) <= 1.0);
        CHECK(std::abs(j[l].y - j[r].y) <= 1.0);
    }
    CHECK(j[kHead].x == doctest::Approx(60.0));
    CHECK(j[kPelvis].y > j[kNeck].y);  // image y grows downward
}

TEST_CASE("doubling widths strictly grows the silhouette") {
    FigureSpec sp;
    sp.pos_x = sp.pos_y = 70;
    const Exemplar thin = gen_figure(sp, 140, 140);
    FigureSpec wide = sp;
    wide.torso_radius *= 2;
    wide.arm_radius *= 2;
    wide.leg_radius *= 2;
    wide.head_radius *= 2;
    const Exemplar fat = gen_figure(wide, 140, 140);
    CHECK(fat.mask.foreground_count() > thin.mask.foreground_count());
    for (int u = 0; u < thin.mask.pixels(); ++u)
        if (thin.mask.at(u)) CHECK(fat.mask.at(u) == 1);
}

TEST_CASE("same spec renders bit-identical masks") {
    Rng rng(4);
    const FigureSpec sp = [&] {
        FigureSpec s = random_figure_spec(rng);
        s.pos_x = s.pos_y = 70;
        return s;
    }();
    const Exemplar a = gen_figure(sp, 140, 140);
    const Exemplar b = gen_figure(sp, 140, 140);
    CHECK(a.mask == b.mask);
}

TEST_CASE("generated exemplars are valid, 4-connected silhouettes") {
    const ExemplarLibrary lib = gen_library(16, 3);
    for (const Exemplar& ex : lib.exemplars) {
        CHECK_NOTHROW(ex.validate());
        CHECK(four_connected(ex.mask));
    }
}

TEST_CASE("gen_library is reproducible and writes identical bytes") {
    const ExemplarLibrary a = gen_library(6, 42);
    const ExemplarLibrary b = gen_library(6, 42);
    REQUIRE(a.exemplars.size() == b.exemplars.size());
    for (size_t i = 0; i < a.exemplars.size(); ++i) {
        CHECK(a.exemplars[i].mask == b.exemplars[i].mask);
        for (int j = 0; j < kJointCount; ++j) {
            CHECK(a.exemplars[i].joints[j].x == b.exemplars[i].joints[j].x);
            CHECK(a.exemplars[i].joints[j].y == b.exemplars[i].joints[j].y);
        }
    }

    const fs::path d1 = fs::temp_directory_path() / "pmfseg_lib_a";
    const fs::path d2 = fs::temp_directory_path() / "pmfseg_lib_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    save_library(a, d1.string());
    save_library(b, d2.string());
    CHECK(file_bytes(d1 / "index.json") == file_bytes(d2 / "index.json"));
    CHECK(file_bytes(d1 / "mask_00003.pgm") == file_bytes(d2 / "mask_00003.pgm"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("scenes: determinism, occlusion subtraction, candidate sanity") {
    SceneParams params;
    const Scene s1 = gen_scene(123, params);
    const Scene s2 = gen_scene(123, params);
    CHECK(s1.image.data() == s2.image.data());
    CHECK(s1.truth == s2.truth);
    CHECK(s1.candidate == s2.candidate);

    CHECK(s1.truth.foreground_count() > 0);
    CHECK(s1.candidate.foreground_count() > 0);

    // occlusion removes truth pixels: compare forced-on vs forced-off runs
    SceneParams occl = params;
    occl.occlusion_prob = 1.0;
    SceneParams none = params;
    none.occlusion_prob = 0.0;
    int shrunk = 0;
    for (uint64_t seed = 0; seed < 8; ++seed) {
        const Scene with = gen_scene(seed, occl);
        const Scene without = gen_scene(seed, none);
        for (int u = 0; u < with.truth.pixels(); ++u)
            if (with.truth.at(u)) CHECK(without.truth.at(u) == 1);  // subset
        if (with.truth.foreground_count() < without.truth.foreground_count()) ++shrunk;
    }
    CHECK(shrunk >= 6);  // the occluder actually lands on the figure
}

TEST_CASE("write_scene_set produces a loadable, reproducible set") {
    const fs::path dir = fs::temp_directory_path() / "pmfseg_scenes";
    fs::remove_all(dir);
    SceneParams params;
    write_scene_set(dir.string(), 3, 7, params);
    CHECK(fs::exists(dir / "scenes.json"));
    CHECK(fs::exists(dir / "scene_0002.ppm"));
    CHECK(fs::exists(dir / "truth_0002.pgm"));
    CHECK(fs::exists(dir / "cand_0002.json"));

    const Image img = read_ppm((dir / "scene_0000.ppm").string());
    CHECK(img.width() == params.width);
    const BinaryMask truth = read_mask_pgm((dir / "truth_0000.pgm").string());
    CHECK(truth.foreground_count() > 0);

    const std::string bytes1 = file_bytes(dir / "scene_0001.ppm");
    fs::remove_all(dir);
    write_scene_set(dir.string(), 3, 7, params);
    CHECK(file_bytes(dir / "scene_0001.ppm") == bytes1);
    fs::remove_all(dir);
}
