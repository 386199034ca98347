#pragma once

#include <cstdint>
#include <vector>

#include "pmfseg/energy.hpp"
#include "pmfseg/image.hpp"

namespace pmfseg {

struct CutSolution {
    BinaryMask labeling;
    double lambda = 0.0;
    double energy = 0.0;  // evaluate_energy(labeling, lambda)
};

// All distinct optimal labelings over [lambda_min, lambda_max], ordered by
// increasing lambda; foreground sets form an inclusion chain.
struct BreakpointSet {
    std::vector<CutSolution> solutions;
    double lambda_min = 0.0, lambda_max = 0.0;
};

// Direct summation of the energy terms; independent of the solver.
double evaluate_energy(const EnergyModel& model, const BinaryMask& labeling, double lambda);

// Same summation over the integer-scaled costs the solver optimizes;
// exact, used by optimality oracles.
int64_t evaluate_energy_scaled(const EnergyModel& model, const BinaryMask& labeling,
                               double lambda);

// Exact global minimizer of E_lambda; ties broken toward the minimal
// foreground set (source-side minimal cut).
CutSolution min_cut(const EnergyModel& model, double lambda);

// Recursive bisection over lambda: solve both endpoints, recurse on the
// midpoint while the endpoint labelings differ and the interval is wider
// than delta_lambda. Each solution carries the smallest lambda at which the
// solver returned it.
BreakpointSet parametric_cuts(const EnergyModel& model, double lambda_min, double lambda_max,
                              double delta_lambda);

// parametric_cuts with the range and tolerance derived from the model and config.
BreakpointSet parametric_cuts_default(const EnergyModel& model, const RunConfig& config);

// Reusable solver for one model; min_cut/parametric_cuts wrap this.
// Residual-graph structure is built once, capacities reloaded per lambda.
class GridFlowSolver {
public:
    explicit GridFlowSolver(const EnergyModel& model);
    BinaryMask solve(double lambda);  // minimal-foreground optimal labeling
    const EnergyModel& model() const { return *model_; }

private:
    void load_capacities(int64_t lambda_scaled);
    bool bfs_levels();
    int64_t dfs_augment(int node, int64_t limit);

    const EnergyModel* model_;
    int n_nodes_, source_, sink_;
    std::vector<int> arc_head_;   // CSR offsets, size n_nodes_+1
    std::vector<int> arc_to_;     // arc target
    std::vector<int> arc_rev_;    // index of the reverse arc
    std::vector<int64_t> arc_cap_;
    std::vector<int> term_src_arc_, term_snk_arc_;  // per-pixel terminal arcs
    std::vector<int> grid_right_arc_, grid_down_arc_;
    std::vector<int> level_, iter_, queue_;
};

}  // namespace pmfseg
