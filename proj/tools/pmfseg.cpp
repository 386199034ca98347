// pmfseg command-line front end: gen / segment / eval / breakpoints / prior.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmfseg/config.hpp"
#include "pmfseg/figures.hpp"
#include "pmfseg/maf.hpp"
#include "pmfseg/maxflow.hpp"
#include "pmfseg/pipeline.hpp"
#include "pmfseg/pnm.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pmfseg;

namespace {

// Every subcommand takes --config plus per-key overrides; CLI values win.
struct ConfigCli {
    std::string config_path;
    std::optional<double> gamma, sigma_sq, w_s, w_p, mu, epsilon, lambda_min, lambda_max,
        delta_lambda_rel, nms_iou;
    std::optional<int> k, boundary_samples, baseline_grid;
    std::optional<uint64_t> rng_seed;
    std::optional<std::string> bias_mode, prior_mode;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its values");
        cmd->add_option("--gamma", gamma, "color-bias scale");
        cmd->add_option("--sigma-sq", sigma_sq, "boundary sharpness sigma^2");
        cmd->add_option("--k", k, "k-means centers per seed side");
        cmd->add_option("--w-s", w_s, "shape-prior unary weight");
        cmd->add_option("--w-p", w_p, "pairwise weight");
        cmd->add_option("--bias-mode", bias_mode, "uniform | color");
        cmd->add_option("--prior-mode", prior_mode, "symmetric | background-only");
        cmd->add_option("--boundary-samples", boundary_samples, "boundary samples K");
        cmd->add_option("--mu", mu, "chi^2 match gate");
        cmd->add_option("--epsilon", epsilon, "alignment error gate");
        cmd->add_option("--lambda-min", lambda_min, "lambda range lower bound");
        cmd->add_option("--lambda-max", lambda_max, "lambda range upper bound");
        cmd->add_option("--delta-lambda-rel", delta_lambda_rel, "bisection stop, relative");
        cmd->add_option("--nms-iou", nms_iou, "NMS overlap threshold");
        cmd->add_option("--baseline-grid", baseline_grid, "baseline lambda grid size");
        cmd->add_option("--rng-seed", rng_seed, "master RNG seed");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (gamma) cfg.gamma = *gamma;
        if (sigma_sq) cfg.sigma_sq = *sigma_sq;
        if (k) cfg.k = *k;
        if (w_s) cfg.w_s = *w_s;
        if (w_p) cfg.w_p = *w_p;
        if (bias_mode) cfg.bias_mode = bias_mode_from_string(*bias_mode);
        if (prior_mode) cfg.prior_mode = prior_mode_from_string(*prior_mode);
        if (boundary_samples) cfg.boundary_samples = *boundary_samples;
        if (mu) cfg.mu = *mu;
        if (epsilon) cfg.epsilon = *epsilon;
        if (lambda_min) cfg.lambda_min = *lambda_min;
        if (lambda_max) cfg.lambda_max = *lambda_max;
        if (delta_lambda_rel) cfg.delta_lambda_rel = *delta_lambda_rel;
        if (nms_iou) cfg.nms_iou = *nms_iou;
        if (baseline_grid) cfg.baseline_grid = *baseline_grid;
        if (rng_seed) cfg.rng_seed = *rng_seed;
        cfg.validate();
        return cfg;
    }
};

ordered_json skeleton_json(const Skeleton2D& b) {
    ordered_json j;
    j["joint_order"] = joint_names();
    ordered_json pts = ordered_json::array();
    for (const Point2& p : b) pts.push_back({p.x, p.y});
    j["joints"] = pts;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int run_gen(int library_n, int scenes_n, uint64_t seed, const std::string& out_dir,
            double occlude, int scene_size) {
    if (library_n > 0) {
        ExemplarLibrary lib = gen_library(library_n, seed);
        save_library(lib, out_dir);
        std::printf("wrote %d exemplars to %s\n", library_n, out_dir.c_str());
    } else {
        SceneParams params;
        params.width = params.height = scene_size;
        params.occlusion_prob = occlude;
        write_scene_set(out_dir, scenes_n, seed, params);
        std::printf("wrote %d scenes to %s\n", scenes_n, out_dir.c_str());
    }
    return 0;
}

int run_segment(const std::string& image_path, const std::string& candidates_path,
                const std::string& library_dir, const std::string& out_dir,
                const RunConfig& cfg, bool dump_prior, bool baseline) {
    const Image image = read_ppm(image_path);
    const ExemplarLibrary library = baseline ? ExemplarLibrary{} : load_library(library_dir);
    std::vector<Candidate> candidates = load_candidates(candidates_path);
    candidates = nms(std::move(candidates), cfg.nms_iou);

    fs::create_directories(out_dir);
    const SegmentMode mode = baseline ? SegmentMode::NoPriorBaseline : SegmentMode::CpdcMaf;

    std::vector<HypothesisPool> pools;
    for (const Candidate& c : candidates) {
        if (dump_prior && !baseline) {
            try {
                PriorResult pr = build_prior(c.mask, library, cfg);
                char name[48];
                std::snprintf(name, sizeof(name), "prior_c%03d.pgm", c.id);
                write_gray_pgm(pr.prior.s, pr.prior.width, pr.prior.height,
                               (fs::path(out_dir) / name).string());
                std::snprintf(name, sizeof(name), "skeleton_c%03d.json", c.id);
                write_text((fs::path(out_dir) / name).string(),
                           skeleton_json(pr.prior.b).dump(2) + "\n");
            } catch (const PriorRejected& rej) {
                std::fprintf(stderr, "candidate %d rejected by MAF: %s\n", c.id, rej.what());
            }
        }
        pools.push_back(segment_candidate(image, c, library, cfg, mode));
    }
    const HypothesisPool merged = merge_and_rank(pools);

    ordered_json report;
    report["config"] = ordered_json::parse(config_to_json(cfg));
    report["mode"] = baseline ? "no-prior" : "cpdc-maf";
    report["candidates_after_nms"] = candidates.size();
    report["pool"] = ordered_json::array();
    for (size_t i = 0; i < merged.hypotheses.size(); ++i) {
        const Hypothesis& h = merged.hypotheses[i];
        char name[32];
        std::snprintf(name, sizeof(name), "pool_%04zu.pgm", i);
        write_mask_pgm(h.mask, (fs::path(out_dir) / name).string());
        ordered_json hj;
        hj["rank"] = i;
        hj["mask"] = name;
        hj["candidate_id"] = h.candidate_id;
        hj["lambda"] = h.lambda;
        hj["energy"] = h.energy;
        hj["rank_score"] = h.rank_score;
        hj["prior_mean"] = h.prior_mean;
        hj["foreground_pixels"] = h.mask.foreground_count();
        report["pool"].push_back(std::move(hj));
    }
    write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
    std::printf("pool of %zu hypotheses written to %s\n", merged.hypotheses.size(),
                out_dir.c_str());
    return 0;
}

int run_eval(const std::string& manifest, const std::string& library_dir,
             const std::string& out_path, const RunConfig& cfg, bool with_baseline) {
    if (load_scene_manifest(manifest).empty()) {
        std::fprintf(stderr, "eval: scene list is empty\n");
        return 2;
    }
    const ExemplarLibrary library = load_library(library_dir);
    const EvalResult cpdc = evaluate_scenes(manifest, library, cfg, SegmentMode::CpdcMaf);
    std::optional<EvalResult> baseline;
    if (with_baseline)
        baseline = evaluate_scenes(manifest, library, cfg, SegmentMode::NoPriorBaseline);
    write_text(out_path, eval_report_json(cfg, cpdc, baseline));
    std::printf("cpdc-maf: first %.4f best %.4f pool %.1f\n", cpdc.mean_first, cpdc.mean_best,
                cpdc.mean_pool_size);
    if (baseline)
        std::printf("baseline: first %.4f best %.4f pool %.1f\n", baseline->mean_first,
                    baseline->mean_best, baseline->mean_pool_size);
    return 0;
}

int run_breakpoints(const std::string& image_path, const std::string& candidate_path,
                    const std::string& library_dir, const std::string& out_dir,
                    const RunConfig& cfg, bool no_prior) {
    const Image image = read_ppm(image_path);
    const BinaryMask cand_mask = read_mask_pgm(candidate_path);
    if (cand_mask.width() != image.width() || cand_mask.height() != image.height())
        throw std::runtime_error("candidate mask dimensions do not match image");

    EnergyModel model;
    if (no_prior) {
        const std::vector<double> flat(image.pixels(), 0.0);
        SeedSets hard, color;
        for (int y = 0; y < image.height(); ++y)
            for (int x = 0; x < image.width(); ++x)
                if (x == 0 || y == 0 || x == image.width() - 1 || y == image.height() - 1)
                    hard.background.push_back(y * image.width() + x);
        for (int i = 0; i < cand_mask.pixels(); ++i)
            if (cand_mask.at(i)) color.foreground.push_back(i);
        color.background = hard.background;
        model = build_energy(image, hard, flat, cfg, &color);
    } else {
        const ExemplarLibrary library = load_library(library_dir);
        const PriorResult pr = build_prior(cand_mask, library, cfg);
        model = build_energy(image, pr.seeds, pr.prior.s, cfg);
    }

    const BreakpointSet bps = parametric_cuts_default(model, cfg);
    fs::create_directories(out_dir);
    ordered_json index;
    index["lambda_range"] = {bps.lambda_min, bps.lambda_max};
    index["breakpoints"] = ordered_json::array();
    for (size_t i = 0; i < bps.solutions.size(); ++i) {
        const CutSolution& s = bps.solutions[i];
        char name[32];
        std::snprintf(name, sizeof(name), "bp_%04zu.pgm", i);
        write_mask_pgm(s.labeling, (fs::path(out_dir) / name).string());
        ordered_json bj;
        bj["mask"] = name;
        bj["lambda"] = s.lambda;
        bj["energy"] = s.energy;
        bj["foreground_pixels"] = s.labeling.foreground_count();
        index["breakpoints"].push_back(std::move(bj));
    }
    write_text((fs::path(out_dir) / "index.json").string(), index.dump(2) + "\n");
    std::printf("%zu breakpoints written to %s\n", bps.solutions.size(), out_dir.c_str());
    return 0;
}

int run_prior(const std::string& candidate_path, const std::string& library_dir,
              const std::string& out_dir, const RunConfig& cfg) {
    const BinaryMask cand = read_mask_pgm(candidate_path);
    const ExemplarLibrary library = load_library(library_dir);
    PriorResult pr;
    try {
        pr = build_prior(cand, library, cfg);
    } catch (const PriorRejected& rej) {
        std::fprintf(stderr, "candidate rejected by MAF: %s\n", rej.what());
        return 1;
    }
    fs::create_directories(out_dir);
    write_gray_pgm(pr.prior.s, pr.prior.width, pr.prior.height,
                   (fs::path(out_dir) / "prior.pgm").string());
    ordered_json sj = skeleton_json(pr.prior.b);
    sj["support"] = pr.prior.support;
    write_text((fs::path(out_dir) / "skeleton.json").string(), sj.dump(2) + "\n");
    BinaryMask fg(cand.width(), cand.height()), bg(cand.width(), cand.height());
    for (int u : pr.seeds.foreground) fg.set(u, 1);
    for (int u : pr.seeds.background) bg.set(u, 1);
    write_mask_pgm(fg, (fs::path(out_dir) / "seeds_fg.pgm").string());
    write_mask_pgm(bg, (fs::path(out_dir) / "seeds_bg.pgm").string());
    std::printf("prior from %d exemplars written to %s\n", pr.prior.support, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"figure-ground segmentation with parametric max-flow and on-the-fly shape priors"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic exemplar library or scene set");
    int gen_library = 0, gen_scenes = 0, gen_scene_size = 128;
    uint64_t gen_seed = 42;
    double gen_occlude = 0.3;
    std::string gen_out;
    auto* opt_lib = gen->add_option("--library", gen_library, "number of exemplars to generate");
    auto* opt_scn = gen->add_option("--scenes", gen_scenes, "number of scenes to generate");
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--occlude", gen_occlude, "occlusion probability for scenes")
        ->capture_default_str();
    gen->add_option("--scene-size", gen_scene_size, "scene canvas size")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();
    opt_lib->excludes(opt_scn);

    // segment
    auto* seg = app.add_subcommand("segment", "run the full pipeline on one image");
    std::string seg_image, seg_cands, seg_lib, seg_out, seg_baseline;
    bool seg_dump_prior = false;
    ConfigCli seg_cfg;
    seg->add_option("--image", seg_image, "input image (PPM)")->required();
    seg->add_option("--candidates", seg_cands, "candidate index JSON")->required();
    seg->add_option("--library", seg_lib, "exemplar library directory");
    seg->add_option("--out", seg_out, "output directory")->required();
    seg->add_flag("--dump-prior", seg_dump_prior, "also write S (PGM) and B (JSON)");
    seg->add_option("--baseline", seg_baseline, "\"no-prior\": skip MAF, flat prior")
        ->check(CLI::IsMember({"no-prior"}));
    seg_cfg.attach(seg);

    // eval
    auto* eval = app.add_subcommand("eval", "First/Best/Pool-size means over a scene set");
    std::string eval_scenes, eval_lib, eval_out, eval_baseline;
    ConfigCli eval_cfg;
    eval->add_option("--scenes", eval_scenes, "scene manifest JSON")->required();
    eval->add_option("--library", eval_lib, "exemplar library directory")->required();
    eval->add_option("--out", eval_out, "report JSON path")->required();
    eval->add_option("--baseline", eval_baseline, "\"no-prior\": also run the ablation")
        ->check(CLI::IsMember({"no-prior"}));
    eval_cfg.attach(eval);

    // breakpoints
    auto* bp = app.add_subcommand("breakpoints", "dump every breakpoint of one candidate");
    std::string bp_image, bp_cand, bp_lib, bp_out;
    bool bp_no_prior = false;
    ConfigCli bp_cfg;
    bp->add_option("--image", bp_image, "input image (PPM)")->required();
    bp->add_option("--candidate", bp_cand, "candidate mask (PGM)")->required();
    bp->add_option("--library", bp_lib, "exemplar library directory");
    bp->add_option("--out", bp_out, "output directory")->required();
    bp->add_flag("--no-prior", bp_no_prior, "flat prior instead of MAF");
    bp_cfg.attach(bp);

    // prior
    auto* pr = app.add_subcommand("prior", "run MAF only: prior S, skeleton B, seeds");
    std::string pr_cand, pr_lib, pr_out;
    ConfigCli pr_cfg;
    pr->add_option("--candidate", pr_cand, "candidate mask (PGM)")->required();
    pr->add_option("--library", pr_lib, "exemplar library directory")->required();
    pr->add_option("--out", pr_out, "output directory")->required();
    pr_cfg.attach(pr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            if (gen_library <= 0 && gen_scenes <= 0) {
                std::fprintf(stderr, "gen: one of --library or --scenes is required\n");
                return 2;
            }
            return run_gen(gen_library, gen_scenes, gen_seed, gen_out, gen_occlude,
                           gen_scene_size);
        }
        if (seg->parsed()) {
            const bool baseline = seg_baseline == "no-prior";
            if (!baseline && seg_lib.empty()) {
                std::fprintf(stderr, "segment: --library is required unless --baseline\n");
                return 2;
            }
            return run_segment(seg_image, seg_cands, seg_lib, seg_out, seg_cfg.resolve(),
                               seg_dump_prior, baseline);
        }
        if (eval->parsed())
            return run_eval(eval_scenes, eval_lib, eval_out, eval_cfg.resolve(),
                            eval_baseline == "no-prior");
        if (bp->parsed()) {
            if (!bp_no_prior && bp_lib.empty()) {
                std::fprintf(stderr, "breakpoints: --library is required unless --no-prior\n");
                return 2;
            }
            return run_breakpoints(bp_image, bp_cand, bp_lib, bp_out, bp_cfg.resolve(),
                                   bp_no_prior);
        }
        if (pr->parsed()) return run_prior(pr_cand, pr_lib, pr_out, pr_cfg.resolve());
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
