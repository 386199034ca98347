#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "pmfseg/maxflow.hpp"
#include "pmfseg/rng.hpp"
#include "test_util.hpp"

using namespace pmfseg;
using pmfseg::testutil::brute_force_min;
using pmfseg::testutil::random_model;

namespace {

bool nested(const BinaryMask& a, const BinaryMask& b) {  // a subseteq b
    for (int i = 0; i < a.pixels(); ++i)
        if (a.at(i) && !b.at(i)) return false;
    return true;
}

}  // namespace

TEST_CASE("min_cut equals exhaustive enumeration on random 3x4 grids") {
    Rng rng(2024);
    for (int t = 0; t < 40; ++t) {
        const int w = 1 + static_cast<int>(rng.uniform_int(3));
        const int h = 1 + static_cast<int>(rng.uniform_int(4));
        EnergyModel m = random_model(w, h, rng, t % 3 == 0);
        const double lambda = rng.uniform(-6.0, 6.0);
        const CutSolution sol = min_cut(m, lambda);
        const auto brute = brute_force_min(m, lambda);
        CHECK(evaluate_energy_scaled(m, sol.labeling, lambda) == brute.energy);
        CHECK(sol.labeling == brute.minimal);  // minimal-foreground tie-breaking
        CHECK(sol.energy ==
              doctest::Approx(evaluate_energy(m, sol.labeling, lambda)).epsilon(1e-9));
    }
}

TEST_CASE("zero pairwise and no seeds: independent per-pixel labeling") {
    Rng rng(5);
    EnergyModel m = random_model(4, 3, rng, false);
    for (double& e : m.edge_right) e = 0.0;
    for (double& e : m.edge_down) e = 0.0;
    m.finalize(8.0);
    const double lambda = 0.8;
    const CutSolution sol = min_cut(m, lambda);
    for (int u = 0; u < m.pixels(); ++u) {
        const double bg = m.unary_bg_base[u] + lambda;
        const double fg = m.unary_fg[u];
        if (fg < bg) CHECK(sol.labeling.at(u) == 1);
        if (bg < fg) CHECK(sol.labeling.at(u) == 0);
    }
}

TEST_CASE("single foreground seed with huge pairwise floods the grid") {
    EnergyModel m;
    m.width = 4;
    m.height = 4;
    const int n = 16;
    m.unary_fg.assign(n, 1.0);  // foreground slightly disfavored
    m.unary_bg_base.assign(n, 0.0);
    m.lambda_coeff.assign(n, 1);
    m.hard_fg.assign(n, 0);
    m.hard_bg.assign(n, 0);
    m.hard_fg[5] = 1;
    m.lambda_coeff[5] = 0;
    m.edge_right.assign(static_cast<size_t>(3) * 4, 100.0);
    m.edge_down.assign(static_cast<size_t>(4) * 3, 100.0);
    m.finalize(2.0);
    const CutSolution sol = min_cut(m, 0.0);
    for (int u = 0; u < n; ++u) CHECK(sol.labeling.at(u) == 1);
}

TEST_CASE("evaluate_energy basics") {
    // all-background, no seeds, flat costs: energy = lambda * |V|
    EnergyModel m;
    m.width = 2;
    m.height = 2;
    m.unary_fg.assign(4, 0.0);
    m.unary_bg_base.assign(4, 0.0);
    m.lambda_coeff.assign(4, 1);
    m.hard_fg.assign(4, 0);
    m.hard_bg.assign(4, 0);
    m.edge_right.assign(2, 0.25);
    m.edge_down.assign(2, 0.75);
    m.finalize(4.0);
    BinaryMask all_bg(2, 2);
    CHECK(evaluate_energy(m, all_bg, 1.25) == doctest::Approx(5.0));

    // hand-summed 2x2 table: pixels 0,3 foreground
    // unary: fg(0)=0, bg(1)=lambda, bg(2)=lambda, fg(3)=0
    // cut edges: right(0-1), right(2-3), down(0-2), down(1-3) all cut
    BinaryMask x(2, 2);
    x.set(0, 1);
    x.set(3, 1);
    CHECK(evaluate_energy(m, x, 0.5) ==
          doctest::Approx(0.5 * 2 + 0.25 * 2 + 0.75 * 2).epsilon(1e-12));
}

TEST_CASE("parametric_cuts: constant family collapses to one solution") {
    EnergyModel m;
    m.width = 2;
    m.height = 1;
    m.unary_fg.assign(2, 0.0);
    m.unary_bg_base.assign(2, 0.0);
    m.lambda_coeff.assign(2, 0);
    m.hard_fg.assign(2, 1);  // both pixels pinned foreground
    m.hard_bg.assign(2, 0);
    m.edge_right.assign(1, 0.5);
    m.edge_down.clear();
    m.finalize(2.0);
    const BreakpointSet bps = parametric_cuts(m, -2.0, 2.0, 1e-6);
    CHECK(bps.solutions.size() == 1);
    CHECK(bps.solutions[0].labeling.foreground_count() == 2);
}

TEST_CASE("parametric_cuts finds the designed 1x2 crossover") {
    EnergyModel m;
    m.width = 2;
    m.height = 1;
    m.unary_fg = {0.0, 0.0};
    m.unary_bg_base = {1.0, 0.0};
    m.lambda_coeff = {1, 0};
    m.hard_fg = {0, 0};
    m.hard_bg = {0, 1};  // pixel B pinned background
    m.edge_right = {0.2};
    m.edge_down.clear();
    m.finalize(2.0);

    // pixel A: background pays 1 + lambda, foreground pays the cut edge 0.2
    // crossover at lambda* = -0.8
    const double delta = 1e-6 * 4.0;
    const BreakpointSet bps = parametric_cuts(m, -2.0, 2.0, delta);
    REQUIRE(bps.solutions.size() == 2);
    CHECK(bps.solutions[0].labeling.foreground_count() == 0);
    CHECK(bps.solutions[1].labeling.foreground_count() == 1);
    CHECK(bps.solutions[1].labeling.at(0) == 1);

    // the bisection localized the transition to delta resolution
    CHECK(bps.solutions[1].lambda > -0.8);
    CHECK(bps.solutions[1].lambda <= -0.8 + 2 * delta);

    // exact crossover from the two energy lines, in scaled-integer arithmetic
    const auto& x1 = bps.solutions[0].labeling;
    const auto& x2 = bps.solutions[1].labeling;
    const double c1 = double(evaluate_energy_scaled(m, x1, 0.0)) / EnergyModel::kCostScale;
    const double c2 = double(evaluate_energy_scaled(m, x2, 0.0)) / EnergyModel::kCostScale;
    const double lambda_star = (c1 - c2) / (0.0 - 1.0);  // slopes: n1=1, n2=0
    CHECK(lambda_star == doctest::Approx(-0.8).epsilon(1e-9));
}

TEST_CASE("parametric_cuts rejects a reversed range") {
    Rng rng(1);
    EnergyModel m = random_model(2, 2, rng, false);
    CHECK_THROWS_AS(parametric_cuts(m, 1.0, -1.0, 1e-6), std::invalid_argument);
}

TEST_CASE("dense lambda sweep is a subset of the enumerated breakpoints") {
    Rng rng(77);
    for (int t = 0; t < 4; ++t) {
        EnergyModel m = random_model(5, 5, rng, t % 2 == 0);
        const double lo = -7.0, hi = 7.0;
        const BreakpointSet bps = parametric_cuts(m, lo, hi, 1e-6 * (hi - lo));

        std::set<std::vector<uint8_t>> enumerated;
        for (const CutSolution& s : bps.solutions) enumerated.insert(s.labeling.data());

        GridFlowSolver solver(m);
        for (int i = 0; i < 300; ++i) {
            const double lambda = lo + (hi - lo) * i / 299.0;
            CHECK(enumerated.count(solver.solve(lambda).data()) == 1);
        }

        // nested chain, strictly growing, bounded by |V|+1
        CHECK(bps.solutions.size() <= static_cast<size_t>(m.pixels() + 1));
        for (size_t i = 1; i < bps.solutions.size(); ++i) {
            CHECK(nested(bps.solutions[i - 1].labeling, bps.solutions[i].labeling));
            CHECK(bps.solutions[i - 1].labeling.foreground_count() <
                  bps.solutions[i].labeling.foreground_count());
            CHECK(bps.solutions[i - 1].lambda < bps.solutions[i].lambda);
        }
        for (const CutSolution& s : bps.solutions)
            CHECK(s.energy == doctest::Approx(evaluate_energy(m, s.labeling, s.lambda))
                                  .epsilon(1e-9));
    }
}
