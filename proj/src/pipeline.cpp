#include "pmfseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"
#include "pmfseg/pnm.hpp"

namespace pmfseg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("iou: dimension mismatch");
    int inter = 0, uni = 0;
    for (int i = 0; i < a.pixels(); ++i) {
        const bool fa = a.at(i) != 0, fb = b.at(i) != 0;
        inter += fa && fb;
        uni += fa || fb;
    }
    return uni == 0 ? 1.0 : double(inter) / uni;
}

std::vector<Candidate> nms(std::vector<Candidate> candidates, double threshold) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.id < b.id;
                     });
    std::vector<Candidate> kept;
    for (Candidate& c : candidates) {
        bool suppressed = false;
        for (const Candidate& k : kept)
            if (iou(c.mask, k.mask) > threshold) {
                suppressed = true;
                break;
            }
        if (!suppressed) kept.push_back(std::move(c));
    }
    return kept;
}

namespace {

double prior_mean_over(const std::vector<double>& s, const BinaryMask& mask) {
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < mask.pixels(); ++i)
        if (mask.at(i)) {
            sum += s[i];
            ++n;
        }
    return n ? sum / n : 0.0;
}

std::vector<Hypothesis> hypotheses_from_solutions(const EnergyModel& model,
                                                  std::vector<CutSolution> solutions,
                                                  const std::vector<double>& prior,
                                                  int candidate_id) {
    std::vector<Hypothesis> out;
    out.reserve(solutions.size());
    for (CutSolution& sol : solutions) {
        Hypothesis h;
        h.lambda = sol.lambda;
        h.energy = sol.energy;
        h.energy_at_zero = evaluate_energy(model, sol.labeling, 0.0);
        h.prior_mean = prior_mean_over(prior, sol.labeling);
        h.candidate_id = candidate_id;
        h.mask = std::move(sol.labeling);
        out.push_back(std::move(h));
    }
    return out;
}

// The bbox-derived background seeds belong to the prior construction, so the
// no-prior baseline keeps only the classic border anchor.
SeedSets baseline_seeds(int w, int h) {
    SeedSets seeds;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1)
                seeds.background.push_back(y * w + x);
    return seeds;
}

}  // namespace

HypothesisPool segment_candidate(const Image& image, const Candidate& candidate,
                                 const ExemplarLibrary& library, const RunConfig& config,
                                 SegmentMode mode) {
    if (candidate.mask.width() != image.width() || candidate.mask.height() != image.height())
        throw std::invalid_argument("candidate mask dimensions do not match image");

    HypothesisPool pool;
    if (mode == SegmentMode::CpdcMaf) {
        PriorResult pr;
        try {
            pr = build_prior(candidate.mask, library, config);
        } catch (const PriorRejected& rej) {
            std::fprintf(stderr, "candidate %d rejected by MAF: %s\n", candidate.id, rej.what());
            return pool;
        }
        const EnergyModel model = build_energy(image, pr.seeds, pr.prior.s, config);
        BreakpointSet bps = parametric_cuts_default(model, config);
        pool.hypotheses = hypotheses_from_solutions(model, std::move(bps.solutions), pr.prior.s,
                                                    candidate.id);
    } else {
        // no-prior ablation: flat prior, no foreground hard seeds, color model
        // sampled from the candidate mask, exhaustive lambda grid
        const std::vector<double> flat(image.pixels(), 0.0);
        const SeedSets hard = baseline_seeds(image.width(), image.height());
        SeedSets color;
        for (int i = 0; i < candidate.mask.pixels(); ++i)
            if (candidate.mask.at(i)) color.foreground.push_back(i);
        color.background = hard.background;
        const EnergyModel model = build_energy(image, hard, flat, config, &color);

        const double lo = config.lambda_min.value_or(-model.default_lambda_abs);
        const double hi = config.lambda_max.value_or(model.default_lambda_abs);
        const int grid = config.baseline_grid;
        GridFlowSolver solver(model);
        std::map<std::vector<uint8_t>, double> seen;  // labeling -> first lambda
        for (int g = 0; g < grid; ++g) {
            const double lambda = lo + (hi - lo) * g / (grid - 1);
            BinaryMask x = solver.solve(lambda);
            seen.try_emplace(x.data(), lambda);
        }
        std::vector<CutSolution> solutions;
        for (const auto& [labeling, lambda] : seen) {
            CutSolution s;
            s.labeling = BinaryMask(model.width, model.height);
            s.labeling.data() = labeling;
            s.lambda = lambda;
            s.energy = evaluate_energy(model, s.labeling, lambda);
            solutions.push_back(std::move(s));
        }
        std::sort(solutions.begin(), solutions.end(),
                  [](const CutSolution& a, const CutSolution& b) { return a.lambda < b.lambda; });
        pool.hypotheses =
            hypotheses_from_solutions(model, std::move(solutions), flat, candidate.id);
    }
    return pool;
}

HypothesisPool merge_and_rank(const std::vector<HypothesisPool>& pools) {
    // exact-duplicate removal; of two copies keep the one that can only score
    // higher (higher prior coverage, then lower lambda-free energy)
    std::map<std::vector<uint8_t>, Hypothesis> retained;
    for (const HypothesisPool& pool : pools)
        for (const Hypothesis& h : pool.hypotheses) {
            auto [it, inserted] = retained.try_emplace(h.mask.data(), h);
            if (inserted) continue;
            Hypothesis& cur = it->second;
            const auto key = [](const Hypothesis& x) {
                return std::make_tuple(-x.prior_mean, x.energy_at_zero, x.candidate_id, x.lambda);
            };
            if (key(h) < key(cur)) cur = h;
        }

    HypothesisPool merged;
    merged.hypotheses.reserve(retained.size());
    for (auto& [mask, h] : retained) merged.hypotheses.push_back(std::move(h));
    if (merged.hypotheses.empty()) return merged;

    double lo = merged.hypotheses[0].energy_at_zero, hi = lo;
    for (const Hypothesis& h : merged.hypotheses) {
        lo = std::min(lo, h.energy_at_zero);
        hi = std::max(hi, h.energy_at_zero);
    }
    for (Hypothesis& h : merged.hypotheses) {
        const double norm = hi > lo ? (h.energy_at_zero - lo) / (hi - lo) : 0.0;
        h.rank_score = h.prior_mean * (1.0 - norm);
    }
    std::sort(merged.hypotheses.begin(), merged.hypotheses.end(),
              [](const Hypothesis& a, const Hypothesis& b) {
                  if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
                  if (a.energy_at_zero != b.energy_at_zero)
                      return a.energy_at_zero < b.energy_at_zero;
                  if (a.candidate_id != b.candidate_id) return a.candidate_id < b.candidate_id;
                  if (a.lambda != b.lambda) return a.lambda < b.lambda;
                  return a.mask.data() < b.mask.data();
              });
    return merged;
}

PoolStats pool_stats(const HypothesisPool& pool, const BinaryMask& truth) {
    PoolStats st;
    st.size = static_cast<int>(pool.hypotheses.size());
    if (pool.hypotheses.empty()) return st;
    st.first = iou(pool.hypotheses.front().mask, truth);
    for (const Hypothesis& h : pool.hypotheses) st.best = std::max(st.best, iou(h.mask, truth));
    return st;
}

std::vector<SceneFiles> load_scene_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene manifest " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("scene manifest " + path + ": " + e.what());
    }
    const fs::path dir = fs::path(path).parent_path();
    std::vector<SceneFiles> scenes;
    for (const auto& s : j.at("scenes")) {
        SceneFiles f;
        f.id = s.at("id").get<int>();
        f.image = (dir / s.at("image").get<std::string>()).string();
        f.truth = (dir / s.at("truth").get<std::string>()).string();
        f.candidates = (dir / s.at("candidates").get<std::string>()).string();
        scenes.push_back(std::move(f));
    }
    return scenes;
}

std::vector<Candidate> load_candidates(const std::string& index_path) {
    std::ifstream in(index_path);
    if (!in) throw std::runtime_error("cannot open candidate index " + index_path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("candidate index " + index_path + ": " + e.what());
    }
    const fs::path dir = fs::path(index_path).parent_path();
    std::vector<Candidate> out;
    for (const auto& c : j.at("candidates")) {
        Candidate cand;
        cand.id = c.at("id").get<int>();
        cand.mask = read_mask_pgm((dir / c.at("mask").get<std::string>()).string());
        const auto& bb = c.at("bbox");
        cand.bbox = BBox{bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
        cand.score = c.at("score").get<double>();
        if (cand.mask.empty_foreground())
            throw std::runtime_error("candidate " + std::to_string(cand.id) + " in " +
                                     index_path + ": empty mask");
        if (tight_bbox(cand.mask) != cand.bbox)
            throw std::runtime_error("candidate " + std::to_string(cand.id) + " in " +
                                     index_path + ": bbox is not the tight foreground box");
        out.push_back(std::move(cand));
    }
    return out;
}

EvalResult evaluate_scenes(const std::string& manifest_path, const ExemplarLibrary& library,
                           const RunConfig& config, SegmentMode mode) {
    const std::vector<SceneFiles> scenes = load_scene_manifest(manifest_path);
    EvalResult result;
    result.scenes.resize(scenes.size());

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(scenes.size()); ++i) {
        const Image image = read_ppm(scenes[i].image);
        const BinaryMask truth = read_mask_pgm(scenes[i].truth);
        std::vector<Candidate> candidates = load_candidates(scenes[i].candidates);
        candidates = nms(std::move(candidates), config.nms_iou);

        std::vector<HypothesisPool> pools;
        pools.reserve(candidates.size());
        for (const Candidate& c : candidates)
            pools.push_back(segment_candidate(image, c, library, config, mode));
        const HypothesisPool merged = merge_and_rank(pools);
        result.scenes[i] = SceneResult{scenes[i].id, pool_stats(merged, truth)};
    }

    if (!result.scenes.empty()) {
        for (const SceneResult& s : result.scenes) {
            result.mean_first += s.stats.first;
            result.mean_best += s.stats.best;
            result.mean_pool_size += s.stats.size;
        }
        const double n = static_cast<double>(result.scenes.size());
        result.mean_first /= n;
        result.mean_best /= n;
        result.mean_pool_size /= n;
    }
    return result;
}

namespace {

ordered_json eval_to_json(const EvalResult& r) {
    ordered_json j;
    j["scenes"] = ordered_json::array();
    for (const SceneResult& s : r.scenes) {
        ordered_json sj;
        sj["id"] = s.id;
        sj["first"] = s.stats.first;
        sj["best"] = s.stats.best;
        sj["pool_size"] = s.stats.size;
        j["scenes"].push_back(std::move(sj));
    }
    j["means"] = {{"first", r.mean_first}, {"best", r.mean_best},
                  {"pool_size", r.mean_pool_size}};
    return j;
}

}  // namespace

std::string eval_report_json(const RunConfig& config, const EvalResult& cpdc,
                             const std::optional<EvalResult>& baseline) {
    ordered_json report;
    report["config"] = ordered_json::parse(config_to_json(config));
    report["cpdc_maf"] = eval_to_json(cpdc);
    if (baseline) {
        report["baseline_no_prior"] = eval_to_json(*baseline);
        ordered_json cmp;
        cmp["first_margin"] = cpdc.mean_first - baseline->mean_first;
        if (baseline->mean_pool_size > 0.0)
            cmp["pool_ratio"] = cpdc.mean_pool_size / baseline->mean_pool_size;
        else
            cmp["pool_ratio"] = nullptr;
        report["comparison"] = std::move(cmp);
    }
    return report.dump(2) + "\n";
}

}  // namespace pmfseg
