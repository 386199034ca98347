#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "pmfseg/image.hpp"
#include "pmfseg/maf.hpp"
#include "pmfseg/rng.hpp"
#include "pmfseg/skeleton.hpp"

namespace pmfseg {

// Articulated 2D stick figure: capsule-rendered bones along the 14-edge tree.
// Lengths are in "head units" scaled by head_unit; angles in radians.
struct FigureSpec {
    // articulation, relative to the parent bone (0 = canonical pose)
    double spine_angle = 0.0;
    double head_angle = 0.0;
    std::array<double, 2> shoulder_angle{0.0, 0.0};  // l, r
    std::array<double, 2> elbow_angle{0.0, 0.0};
    std::array<double, 2> hip_angle{0.0, 0.0};
    std::array<double, 2> knee_angle{0.0, 0.0};

    // proportions (head units)
    double head_len = 1.0;
    double torso_len = 3.0;
    double shoulder_off = 0.9;
    double hip_off = 0.7;
    double upper_arm = 2.0, fore_arm = 2.0;
    double thigh = 2.0, shin = 2.0;

    // capsule half-widths (head units)
    double head_radius = 0.55;
    double torso_radius = 0.8;
    double arm_radius = 0.3;
    double leg_radius = 0.38;

    // global pose
    double head_unit = 14.0;  // pixels per head unit
    double pos_x = 0.0, pos_y = 0.0;  // pelvis position
    double rotation = 0.0;
    double scale = 1.0;
};

// articulation ranges used by the random generators
struct ArticulationRanges {
    double spine = 0.35, head = 0.45;
    double shoulder = 1.0471975511965976;  // +/- 60 deg
    double elbow = 1.5707963267948966;     // +/- 90 deg
    double hip = 1.0471975511965976;
    double knee = 1.5707963267948966;
};

Skeleton2D figure_joints(const FigureSpec& spec);

// Renders the capsule union; throws when the clipped silhouette is empty.
Exemplar gen_figure(const FigureSpec& spec, int canvas_width, int canvas_height);

// Figure rendered on a tight canvas (silhouette bbox + margin), joints shifted.
Exemplar gen_figure_tight(const FigureSpec& spec, int margin = 2);

FigureSpec random_figure_spec(Rng& rng, const ArticulationRanges& ranges = {});

// n exemplars with per-figure RNG streams derived from the seed.
ExemplarLibrary gen_library(int n, uint64_t seed);

struct Scene {
    Image image;
    BinaryMask truth;      // visible foreground (occluder removed)
    BinaryMask candidate;  // noisy stand-in for a bottom-up proposal
    double candidate_score = 1.0;
};

struct SceneParams {
    int width = 128, height = 128;
    double occlusion_prob = 0.3;
    double min_contrast = 0.2;  // figure color distance from background palette
    double figure_head_unit = 10.0;
};

Scene gen_scene(uint64_t seed, const SceneParams& params);

// Writes scenes/<image|truth|cand PGM/PPM files> plus scenes.json and one
// candidate index JSON per scene.
void write_scene_set(const std::string& dir, int count, uint64_t seed, const SceneParams& params);

}  // namespace pmfseg
