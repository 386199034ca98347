#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "pmfseg/energy.hpp"
#include "pmfseg/maxflow.hpp"
#include "pmfseg/rng.hpp"
#include "test_util.hpp"

using namespace pmfseg;

namespace {

Image constant_image(int w, int h, float r, float g, float b) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
    return img;
}

}  // namespace

TEST_CASE("build_color_model recovers distinct seed colors when k matches") {
    Image img(5, 2);
    const float colors[5][3] = {
        {0.1f, 0.2f, 0.3f}, {0.9f, 0.1f, 0.2f}, {0.3f, 0.8f, 0.1f},
        {0.2f, 0.3f, 0.9f}, {0.7f, 0.7f, 0.1f}};
    SeedSets seeds;
    for (int x = 0; x < 5; ++x) {
        img.set(x, 0, colors[x][0], colors[x][1], colors[x][2]);
        img.set(x, 1, 0.5f, 0.5f, 0.5f);
        seeds.foreground.push_back(x);
        seeds.background.push_back(5 + x);
    }
    ColorModel cm = build_color_model(img, seeds, 5, 5.0, 7);
    REQUIRE(cm.fg_centers.size() == 5);
    // centers equal the 5 distinct colors up to permutation
    for (int x = 0; x < 5; ++x) {
        bool found = false;
        for (const auto& c : cm.fg_centers)
            if (std::abs(c[0] - colors[x][0]) < 1e-6 && std::abs(c[1] - colors[x][1]) < 1e-6 &&
                std::abs(c[2] - colors[x][2]) < 1e-6)
                found = true;
        CHECK(found);
    }
    CHECK(cm.bg_centers.size() == 1);  // uniform background collapses (k reduced, warned)
}

TEST_CASE("uniform image gives zero bias everywhere") {
    Image img = constant_image(4, 4, 0.5f, 0.5f, 0.5f);
    SeedSets seeds;
    seeds.foreground = {0, 1};
    seeds.background = {14, 15};
    ColorModel cm = build_color_model(img, seeds, 5, 5.0, 3);
    for (int u = 0; u < img.pixels(); ++u)
        CHECK(foreground_bias(img.at(u), cm) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("build_color_model rejects empty seed sets") {
    Image img = constant_image(2, 2, 0.5f, 0.5f, 0.5f);
    SeedSets seeds;
    seeds.background = {3};
    CHECK_THROWS_WITH_AS(build_color_model(img, seeds, 5, 5.0, 0),
                         doctest::Contains("insufficient seeds"), std::invalid_argument);
}

TEST_CASE("foreground_bias hand cases") {
    ColorModel cm;
    cm.gamma = 2.0;
    cm.fg_centers = {{0.2, 0.2, 0.2}};
    cm.bg_centers = {{0.8, 0.2, 0.2}};

    // pixel exactly at the fg center, bg center at distance 0.6
    const float at_fg[3] = {0.2f, 0.2f, 0.2f};
    CHECK(foreground_bias(at_fg, cm) == doctest::Approx(2.0 * 0.6).epsilon(1e-6));

    // equidistant pixel
    const float mid[3] = {0.5f, 0.2f, 0.2f};
    CHECK(foreground_bias(mid, cm) == doctest::Approx(0.0).epsilon(1e-9));

    // gamma = 0 collapses the bias
    cm.gamma = 0.0;
    CHECK(foreground_bias(at_fg, cm) == 0.0);
}

TEST_CASE("contour_map: constant, step edge, checkerboard") {
    ContourMap flat = contour_map(constant_image(6, 5, 0.3f, 0.3f, 0.3f), 0.1);
    for (double v : flat.gb) CHECK(v == 0.0);

    // vertical step: only the last dark column responds, normalized to 1
    Image step(6, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) {
            const float v = x < 3 ? 0.0f : 1.0f;
            step.set(x, y, v, v, v);
        }
    ContourMap sm = contour_map(step, 0.1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) {
            if (x == 2)
                CHECK(sm.gb[y * 6 + x] == doctest::Approx(1.0));
            else
                CHECK(sm.gb[y * 6 + x] == doctest::Approx(0.0));
        }

    // checkerboard vs an independent finite-difference evaluation
    Image cb(8, 8);
    auto shade = [](int x, int y) { return float(((x / 2) + (y / 2)) % 2); };
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) cb.set(x, y, shade(x, y), shade(x, y), shade(x, y));
    ContourMap cm = contour_map(cb, 0.1);
    double expected[64], mx = 0.0;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double v = shade(x, y);
            const double gx = x + 1 < 8 ? shade(x + 1, y) - v : 0.0;
            const double gy = y + 1 < 8 ? shade(x, y + 1) - v : 0.0;
            expected[y * 8 + x] = std::sqrt(gx * gx + gy * gy);
            mx = std::max(mx, expected[y * 8 + x]);
        }
    for (int i = 0; i < 64; ++i) {
        CHECK(cm.gb[i] == doctest::Approx(expected[i] / mx).epsilon(1e-12));
        // response exactly at block boundaries: gradient nonzero iff a block
        // edge separates this pixel from its right or down neighbor
        const int x = i % 8, y = i / 8;
        const bool at_boundary = (x + 1 < 8 && (x + 1) % 2 == 0) || (y + 1 < 8 && (y + 1) % 2 == 0);
        CHECK((cm.gb[i] > 0.0) == at_boundary);
    }
}

TEST_CASE("pairwise_weight evaluation and monotonicity") {
    ContourMap cm;
    cm.width = 2;
    cm.height = 2;
    cm.sigma_sq = 0.1;
    cm.gb = {0.0, 0.0, 0.1, 0.5};

    CHECK(pairwise_weight(0, 1, cm) == doctest::Approx(1.0));          // both zero
    CHECK(pairwise_weight(0, 2, cm) == doctest::Approx(std::exp(-1.0)));  // max == sigma^2
    CHECK_THROWS_AS(pairwise_weight(0, 3, cm), std::invalid_argument);    // diagonal

    // non-increasing in max(Gb): random pairs
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        ContourMap c2 = cm;
        c2.gb = {a, b, 0.0, 0.0};
        const double w_low = pairwise_weight(0, 1, c2);
        c2.gb[1] = std::min(1.0, b + rng.uniform() * (1.0 - b));
        CHECK(pairwise_weight(0, 1, c2) <= w_low + 1e-15);
    }
}

TEST_CASE("build_energy: pure lambda bias when prior and bias are flat") {
    Image img = constant_image(3, 3, 0.4f, 0.4f, 0.4f);
    RunConfig cfg;
    cfg.bias_mode = BiasMode::Uniform;
    SeedSets none;
    std::vector<double> prior(9, 0.0);
    EnergyModel m = build_energy(img, none, prior, cfg);
    for (int u = 0; u < 9; ++u) {
        CHECK(m.unary_bg_base[u] == 0.0);
        CHECK(m.unary_fg[u] == doctest::Approx(cfg.w_s));  // symmetric prior: w_s*(1-0)
        CHECK(m.lambda_coeff[u] == 1);
    }
    BinaryMask all_bg(3, 3);
    CHECK(evaluate_energy(m, all_bg, 0.7) == doctest::Approx(0.7 * 9));
}

TEST_CASE("build_energy: seed pixels carry the sentinel on the opposite label") {
    Image img = constant_image(3, 2, 0.2f, 0.6f, 0.8f);
    RunConfig cfg;
    cfg.bias_mode = BiasMode::Uniform;
    SeedSets seeds;
    seeds.foreground = {0};
    seeds.background = {5};
    std::vector<double> prior(6, 0.5);
    EnergyModel m = build_energy(img, seeds, prior, cfg);
    CHECK(m.unary_bg_base[0] == m.sentinel);
    CHECK(m.unary_fg[5] == m.sentinel);
    CHECK(m.lambda_coeff[0] == 0);
    CHECK(m.lambda_coeff[5] == 0);
    CHECK(m.sentinel > 1e5);

    BinaryMask violates(3, 2);  // all background: violates the foreground seed
    CHECK(evaluate_energy(m, violates, 0.0) >= m.sentinel);
}

TEST_CASE("build_energy rejects bad inputs") {
    Image img = constant_image(2, 2, 0.1f, 0.1f, 0.1f);
    RunConfig cfg;
    cfg.bias_mode = BiasMode::Uniform;
    SeedSets overlap;
    overlap.foreground = {1};
    overlap.background = {1};
    std::vector<double> prior(4, 0.0);
    CHECK_THROWS_WITH_AS(build_energy(img, overlap, prior, cfg),
                         doctest::Contains("overlapping seeds"), std::invalid_argument);

    SeedSets none;
    std::vector<double> bad(4, 1.5);
    CHECK_THROWS_AS(build_energy(img, none, bad, cfg), std::invalid_argument);
    std::vector<double> short_prior(3, 0.0);
    CHECK_THROWS_AS(build_energy(img, none, short_prior, cfg), std::invalid_argument);
}

TEST_CASE("2x1 energy table matches the hand computation") {
    Image img = constant_image(2, 1, 0.5f, 0.5f, 0.5f);
    RunConfig cfg;
    cfg.bias_mode = BiasMode::Uniform;
    cfg.w_s = 1.0;
    cfg.w_p = 0.5;
    SeedSets none;
    const std::vector<double> prior = {0.3, 0.8};
    EnergyModel m = build_energy(img, none, prior, cfg);

    // constant image: g = exp(0) = 1, edge = w_p = 0.5
    // bg costs: S(u); fg costs: 1 - S(u)
    BinaryMask x(2, 1);
    x.set(0, 0);
    x.set(1, 0);
    CHECK(evaluate_energy(m, x, 0.0) == doctest::Approx(0.3 + 0.8));  // (0,0)
    x.set(1, 1);
    CHECK(evaluate_energy(m, x, 0.0) == doctest::Approx(0.3 + 0.2 + 0.5));  // (0,1)
    x.set(0, 1);
    x.set(1, 0);
    CHECK(evaluate_energy(m, x, 0.0) == doctest::Approx(0.7 + 0.8 + 0.5));  // (1,0)
    x.set(1, 1);
    CHECK(evaluate_energy(m, x, 0.0) == doctest::Approx(0.7 + 0.2));  // (1,1)
}

TEST_CASE("submodularity and lambda affinity over random models") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        EnergyModel m = testutil::random_model(3, 3, rng, t % 2 == 0);
        for (double e : m.edge_right) CHECK(e >= 0.0);  // V(0,0)+V(1,1)=0 <= 2g
        for (double e : m.edge_down) CHECK(e >= 0.0);

        // E_lambda(X) affine in lambda with slope = # non-seed background pixels
        BinaryMask x(3, 3);
        for (int u = 0; u < 9; ++u) x.set(u, rng.bernoulli(0.5) ? 1 : 0);
        int slope = 0;
        for (int u = 0; u < 9; ++u)
            if (!x.at(u) && m.lambda_coeff[u]) ++slope;
        const double e1 = evaluate_energy(m, x, -1.5);
        const double e2 = evaluate_energy(m, x, 2.5);
        CHECK(e2 - e1 == doctest::Approx(4.0 * slope).epsilon(1e-9));
    }
}
