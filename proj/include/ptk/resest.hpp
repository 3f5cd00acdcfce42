#pragma once

#include <Eigen/Dense>

#include "ptk/condnum.hpp"
#include "ptk/geometry.hpp"
#include "ptk/raster.hpp"

namespace ptk {

// Exact homography through four point correspondences, standard 8x9
// nullspace construction with Hartley normalization on both point sets.
// Throws std::domain_error on a degenerate quad.
Homography dlt_from_offsets(const CornerQuad& reference,
                            const CornerOffsets& offsets);
Homography dlt_from_quads(const CornerQuad& reference, const CornerQuad& target);

struct RefineConfig {
    int max_iters = 30;
    double convergence = 1e-6;   // parameter-update norm threshold
    double damping = 1e-3;       // initial Levenberg lambda
    double damping_up = 10.0;
    double damping_down = 0.1;
    int max_failures = 6;        // consecutive rejected steps before giving up
    // final RMS above this means no alignment; interpolation can smooth a
    // mismatched patch to roughly half its raw contrast, so the threshold
    // sits below that floor but well above aligned-tracking error levels
    double lost_rms = 0.15;
    bool allow_translation_slack = true;
    ParamRanges bounds;          // residual parameters clamped inside
};

struct RefineResult {
    Homography h;                // residual homography (identity similarity)
    TransformParams params;      // recovered residual + translation slack
    double rms = 0.0;            // final photometric RMS error
    bool lost = false;           // diverged
    int iterations = 0;
};

// Photometric Gauss-Newton over (k1, k2, nu1, nu2) plus a small translation
// slack, template vs. an approximately aligned warped search patch.
RefineResult refine_residual(const Raster& templ, const Raster& warped_search,
                             const RefineConfig& cfg = {});

// Negative-sample target packaging: the ground truth for a wrong-object
// input is the zero offset vector.
CornerOffsets corners_to_negative_target(const CornerOffsets& predicted);

}  // namespace ptk
