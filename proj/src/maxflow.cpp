#include "pmfseg/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace pmfseg {

double evaluate_energy(const EnergyModel& m, const BinaryMask& x, double lambda) {
    if (x.width() != m.width || x.height() != m.height)
        throw std::invalid_argument("evaluate_energy: labeling dimension mismatch");
    double e = 0.0;
    const int n = m.pixels();
    for (int u = 0; u < n; ++u)
        e += x.at(u) ? m.unary_fg[u] : m.unary_bg_base[u] + lambda * m.lambda_coeff[u];
    const int w = m.width, h = m.height;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx + 1 < w; ++xx)
            if (x.at(xx, y) != x.at(xx + 1, y)) e += m.edge_right[m.right_index(xx, y)];
    for (int y = 0; y + 1 < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            if (x.at(xx, y) != x.at(xx, y + 1)) e += m.edge_down[m.down_index(xx, y)];
    return e;
}

int64_t evaluate_energy_scaled(const EnergyModel& m, const BinaryMask& x, double lambda) {
    if (x.width() != m.width || x.height() != m.height)
        throw std::invalid_argument("evaluate_energy_scaled: labeling dimension mismatch");
    const int64_t ls = std::llround(lambda * EnergyModel::kCostScale);
    int64_t e = 0;
    const int n = m.pixels();
    for (int u = 0; u < n; ++u)
        e += x.at(u) ? m.s_unary_fg[u] : m.s_unary_bg_base[u] + ls * m.lambda_coeff[u];
    const int w = m.width, h = m.height;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx + 1 < w; ++xx)
            if (x.at(xx, y) != x.at(xx + 1, y)) e += m.s_edge_right[m.right_index(xx, y)];
    for (int y = 0; y + 1 < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            if (x.at(xx, y) != x.at(xx, y + 1)) e += m.s_edge_down[m.down_index(xx, y)];
    return e;
}

GridFlowSolver::GridFlowSolver(const EnergyModel& model) : model_(&model) {
    const int w = model.width, h = model.height, n = model.pixels();
    n_nodes_ = n + 2;
    source_ = n;
    sink_ = n + 1;

    // node degrees: pixel = 2 terminal + grid neighbors; source/sink = n each
    std::vector<int> degree(n_nodes_, 0);
    degree[source_] = n;
    degree[sink_] = n;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int d = 2;
            if (x > 0) ++d;
            if (x + 1 < w) ++d;
            if (y > 0) ++d;
            if (y + 1 < h) ++d;
            degree[y * w + x] = d;
        }
    arc_head_.assign(n_nodes_ + 1, 0);
    for (int i = 0; i < n_nodes_; ++i) arc_head_[i + 1] = arc_head_[i] + degree[i];
    const int total_arcs = arc_head_[n_nodes_];
    arc_to_.assign(total_arcs, -1);
    arc_rev_.assign(total_arcs, -1);
    arc_cap_.assign(total_arcs, 0);

    std::vector<int> cursor(arc_head_.begin(), arc_head_.end() - 1);
    auto add_pair = [&](int a, int b) {  // returns arc a->b; reverse is b->a
        const int ab = cursor[a]++;
        const int ba = cursor[b]++;
        arc_to_[ab] = b;
        arc_to_[ba] = a;
        arc_rev_[ab] = ba;
        arc_rev_[ba] = ab;
        return ab;
    };

    term_src_arc_.resize(n);
    term_snk_arc_.resize(n);
    for (int u = 0; u < n; ++u) {
        term_src_arc_[u] = add_pair(source_, u);
        term_snk_arc_[u] = add_pair(u, sink_);
    }
    // grid arcs; the reverse of u->v is v->u and both carry the edge weight
    grid_right_arc_.resize(model.edge_right.size());
    grid_down_arc_.resize(model.edge_down.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x)
            grid_right_arc_[model.right_index(x, y)] = add_pair(y * w + x, y * w + x + 1);
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x < w; ++x)
            grid_down_arc_[model.down_index(x, y)] = add_pair(y * w + x, (y + 1) * w + x);

    level_.resize(n_nodes_);
    iter_.resize(n_nodes_);
    queue_.resize(n_nodes_);
}

void GridFlowSolver::load_capacities(int64_t lambda_scaled) {
    const EnergyModel& m = *model_;
    const int n = m.pixels();
    for (int u = 0; u < n; ++u) {
        // cap(s->u) pays for u labeled background, cap(u->t) for foreground;
        // per-pixel constant shift keeps both non-negative
        const int64_t bg = m.s_unary_bg_base[u] + lambda_scaled * m.lambda_coeff[u];
        const int64_t fg = m.s_unary_fg[u];
        const int64_t base = std::min(bg, fg);
        const int src = term_src_arc_[u], snk = term_snk_arc_[u];
        arc_cap_[src] = bg - base;
        arc_cap_[arc_rev_[src]] = 0;
        arc_cap_[snk] = fg - base;
        arc_cap_[arc_rev_[snk]] = 0;
    }
    for (size_t e = 0; e < grid_right_arc_.size(); ++e) {
        const int a = grid_right_arc_[e];
        arc_cap_[a] = m.s_edge_right[e];
        arc_cap_[arc_rev_[a]] = m.s_edge_right[e];
    }
    for (size_t e = 0; e < grid_down_arc_.size(); ++e) {
        const int a = grid_down_arc_[e];
        arc_cap_[a] = m.s_edge_down[e];
        arc_cap_[arc_rev_[a]] = m.s_edge_down[e];
    }
}

bool GridFlowSolver::bfs_levels() {
    std::fill(level_.begin(), level_.end(), -1);
    int qh = 0, qt = 0;
    level_[source_] = 0;
    queue_[qt++] = source_;
    while (qh < qt) {
        const int u = queue_[qh++];
        for (int a = arc_head_[u]; a < arc_head_[u + 1]; ++a) {
            const int v = arc_to_[a];
            if (arc_cap_[a] > 0 && level_[v] < 0) {
                level_[v] = level_[u] + 1;
                queue_[qt++] = v;
            }
        }
    }
    return level_[sink_] >= 0;
}

int64_t GridFlowSolver::dfs_augment(int node, int64_t limit) {
    if (node == sink_) return limit;
    for (int& a = iter_[node]; a < arc_head_[node + 1]; ++a) {
        const int v = arc_to_[a];
        if (arc_cap_[a] > 0 && level_[v] == level_[node] + 1) {
            const int64_t d = dfs_augment(v, std::min(limit, arc_cap_[a]));
            if (d > 0) {
                arc_cap_[a] -= d;
                arc_cap_[arc_rev_[a]] += d;
                return d;
            }
        }
    }
    return 0;
}

BinaryMask GridFlowSolver::solve(double lambda) {
    const EnergyModel& m = *model_;
    if (std::abs(lambda) > m.lambda_cap * (1.0 + 1e-12) + 1e-9)
        throw std::logic_error("min_cut: lambda outside the range the sentinel covers");
    load_capacities(std::llround(lambda * EnergyModel::kCostScale));

    const int64_t inf = std::numeric_limits<int64_t>::max();
    while (bfs_levels()) {
        std::copy(arc_head_.begin(), arc_head_.end() - 1, iter_.begin());
        while (dfs_augment(source_, inf) > 0) {
        }
    }

    // minimal source side = residual-reachable set; source side is foreground
    std::fill(level_.begin(), level_.end(), -1);
    int qh = 0, qt = 0;
    level_[source_] = 0;
    queue_[qt++] = source_;
    while (qh < qt) {
        const int u = queue_[qh++];
        for (int a = arc_head_[u]; a < arc_head_[u + 1]; ++a)
            if (arc_cap_[a] > 0 && level_[arc_to_[a]] < 0) {
                level_[arc_to_[a]] = 1;
                queue_[qt++] = arc_to_[a];
            }
    }
    BinaryMask x(m.width, m.height);
    for (int u = 0; u < m.pixels(); ++u) x.set(u, level_[u] >= 0 ? 1 : 0);
    return x;
}

CutSolution min_cut(const EnergyModel& model, double lambda) {
    GridFlowSolver solver(model);
    CutSolution s;
    s.labeling = solver.solve(lambda);
    s.lambda = lambda;
    s.energy = evaluate_energy(model, s.labeling, lambda);
    return s;
}

namespace {

struct BreakpointCollector {
    GridFlowSolver& solver;
    double delta;
    std::map<std::vector<uint8_t>, double> first_lambda;

    BinaryMask solve_and_record(double lambda) {
        BinaryMask x = solver.solve(lambda);
        auto [it, inserted] = first_lambda.try_emplace(x.data(), lambda);
        if (!inserted && lambda < it->second) it->second = lambda;
        return x;
    }

    void recurse(double lo, const BinaryMask& xlo, double hi, const BinaryMask& xhi) {
        if (xlo == xhi) return;
        if (hi - lo < delta) return;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) return;  // fp resolution exhausted
        BinaryMask xmid = solve_and_record(mid);
        recurse(lo, xlo, mid, xmid);
        recurse(mid, xmid, hi, xhi);
    }
};

}  // namespace

BreakpointSet parametric_cuts(const EnergyModel& model, double lambda_min, double lambda_max,
                              double delta_lambda) {
    if (lambda_min > lambda_max)
        throw std::invalid_argument("parametric_cuts: lambda_min > lambda_max");
    GridFlowSolver solver(model);
    BreakpointCollector col{solver, std::max(delta_lambda, 0.0), {}};

    BinaryMask xlo = col.solve_and_record(lambda_min);
    if (lambda_max > lambda_min) {
        BinaryMask xhi = col.solve_and_record(lambda_max);
        col.recurse(lambda_min, xlo, lambda_max, xhi);
    }

    BreakpointSet out;
    out.lambda_min = lambda_min;
    out.lambda_max = lambda_max;
    out.solutions.reserve(col.first_lambda.size());
    for (const auto& [labeling, lambda] : col.first_lambda) {
        CutSolution s;
        s.labeling = BinaryMask(model.width, model.height);
        s.labeling.data() = labeling;
        s.lambda = lambda;
        s.energy = evaluate_energy(model, s.labeling, lambda);
        out.solutions.push_back(std::move(s));
    }
    std::sort(out.solutions.begin(), out.solutions.end(),
              [](const CutSolution& a, const CutSolution& b) {
                  if (a.lambda != b.lambda) return a.lambda < b.lambda;
                  return a.labeling.foreground_count() < b.labeling.foreground_count();
              });
    return out;
}

BreakpointSet parametric_cuts_default(const EnergyModel& model, const RunConfig& config) {
    const double lo = config.lambda_min.value_or(-model.default_lambda_abs);
    const double hi = config.lambda_max.value_or(model.default_lambda_abs);
    const double delta = std::max(config.delta_lambda_rel * (hi - lo), 1e-12);
    return parametric_cuts(model, lo, hi, delta);
}

}  // namespace pmfseg
