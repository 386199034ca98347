#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmfseg/config.hpp"
#include "pmfseg/image.hpp"
#include "pmfseg/maf.hpp"
#include "pmfseg/maxflow.hpp"

namespace pmfseg {

struct Candidate {
    int id = 0;
    BinaryMask mask;
    BBox bbox;  // tight box of the mask foreground
    double score = 0.0;
};

struct Hypothesis {
    BinaryMask mask;
    double lambda = 0.0;
    double energy = 0.0;        // evaluate_energy at its lambda
    double energy_at_zero = 0.0;  // lambda-free part, used for cross-lambda ranking
    double prior_mean = 0.0;    // mean of S over the hypothesis foreground
    double rank_score = 0.0;
    int candidate_id = -1;
};

struct HypothesisPool {
    std::vector<Hypothesis> hypotheses;  // sorted by rank_score descending
};

enum class SegmentMode { CpdcMaf, NoPriorBaseline };

double iou(const BinaryMask& a, const BinaryMask& b);

// Greedy: keep the highest-score candidate, drop the rest above the overlap
// threshold against any kept one.
std::vector<Candidate> nms(std::vector<Candidate> candidates, double threshold);

// Full per-candidate run. CpdcMaf: MAF prior + skeleton seeds + breakpoint
// enumeration (MAF rejection yields an empty pool). NoPriorBaseline: S = 0, no
// skeleton seeds, color model seeded from the candidate mask, pool from an
// exhaustive lambda grid.
HypothesisPool segment_candidate(const Image& image, const Candidate& candidate,
                                 const ExemplarLibrary& library, const RunConfig& config,
                                 SegmentMode mode = SegmentMode::CpdcMaf);

// Union with exact-duplicate removal (higher score kept), rank scores
// recomputed over the merged set, sorted descending.
HypothesisPool merge_and_rank(const std::vector<HypothesisPool>& pools);

struct PoolStats {
    double first = 0.0;
    double best = 0.0;
    int size = 0;
};

PoolStats pool_stats(const HypothesisPool& pool, const BinaryMask& truth);

// --- scene evaluation -------------------------------------------------------

struct SceneFiles {
    int id = 0;
    std::string image, truth, candidates;  // paths relative to the manifest dir
};

std::vector<SceneFiles> load_scene_manifest(const std::string& path);
std::vector<Candidate> load_candidates(const std::string& index_path);

struct SceneResult {
    int id = 0;
    PoolStats stats;
};

struct EvalResult {
    std::vector<SceneResult> scenes;
    double mean_first = 0.0, mean_best = 0.0, mean_pool_size = 0.0;
};

EvalResult evaluate_scenes(const std::string& manifest_path, const ExemplarLibrary& library,
                           const RunConfig& config, SegmentMode mode);

// JSON report for one eval (optionally with the no-prior baseline and the
// comparison block); byte-identical across runs with identical inputs.
std::string eval_report_json(const RunConfig& config, const EvalResult& cpdc,
                             const std::optional<EvalResult>& baseline);

}  // namespace pmfseg
