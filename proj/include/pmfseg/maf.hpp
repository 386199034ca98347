#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pmfseg/config.hpp"
#include "pmfseg/energy.hpp"
#include "pmfseg/image.hpp"
#include "pmfseg/shape.hpp"
#include "pmfseg/skeleton.hpp"

namespace pmfseg {

// One training shape: silhouette plus 15-joint 2D skeleton in mask pixel space.
struct Exemplar {
    int id = 0;
    BinaryMask mask;
    Skeleton2D joints{};

    void validate() const;  // joints inside the mask bbox dilated by 10%
};

struct ExemplarLibrary {
    std::vector<Exemplar> exemplars;
};

// On-disk library: directory of PGM masks plus index.json with the joint-name
// order and, per exemplar, {id, mask file, 15 [x,y] joints}.
void save_library(const ExemplarLibrary& lib, const std::string& dir);
ExemplarLibrary load_library(const std::string& dir);

// Per-pixel foreground probability plus the fused skeleton.
struct ShapePrior {
    int width = 0, height = 0;
    std::vector<double> s;  // in [0,1]; exact mean of |support| binary masks
    Skeleton2D b{};         // fused joints (homogeneous third row is 1)
    int support = 0;        // number of fused exemplars
};

struct SkeletonSeeds {
    BinaryMask mask;
    std::vector<int> nodes;  // T = foreground pixel indices of mask
};

// Candidates the MAF stage cannot serve are rejected, not failed.
class PriorRejected : public std::runtime_error {
public:
    enum class Reason { DegenerateCandidate, NoExemplarsSelected, NoFeasibleSeeds };

    PriorRejected(Reason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

struct SelectedExemplar {
    const Exemplar* exemplar = nullptr;
    Transform2D transform;  // exemplar mask space -> candidate image space
    double error = 0.0;     // alignment residual, normalized to 200px candidate height
};

// Match every library exemplar against the candidate (coarse pre-alignment by
// principal axis + bbox diagonal, shape-context matching, 5-DOF Procrustes)
// and keep those with alignment error below epsilon. Parallel over exemplars.
std::vector<SelectedExemplar> select_exemplars(const BinaryMask& candidate,
                                               const ExemplarLibrary& library,
                                               double epsilon, double mu,
                                               const RunConfig& config);

// S = pixelwise mean of the warped masks, B = mean of the warped skeletons.
ShapePrior fuse(const std::vector<SelectedExemplar>& selected, int out_width, int out_height);

// Bresenham rasterization of the 14-bone tree; T = all drawn pixels.
SkeletonSeeds rasterize_skeleton(const Skeleton2D& joints, int width, int height);

struct PriorResult {
    ShapePrior prior;
    SkeletonSeeds skeleton;
    SeedSets seeds;  // V_f = T restricted to S > 0.5; V_b from border + bbox rule
};

// Full MAF stage for one candidate; throws PriorRejected when the candidate
// cannot be matched (degenerate, nothing selected, or infeasible seeds).
PriorResult build_prior(const BinaryMask& candidate, const ExemplarLibrary& library,
                        const RunConfig& config);

}  // namespace pmfseg
