#pragma once

#include <vector>

#include "ptk/condnum.hpp"
#include "ptk/geometry.hpp"
#include "ptk/raster.hpp"
#include "ptk/resest.hpp"
#include "ptk/simest.hpp"

namespace ptk {

struct TrackerConfig {
    int template_size = 127;
    int search_size = 255;
    double lost_threshold = 0.3;  // ZNCC confidence below which a frame is lost
    SimestConfig simest;
    RefineConfig refine;
    ParamRanges motion_bounds;    // per-frame similarity clamp
    bool use_similarity = true;   // ablation switches
    bool use_residual = true;
};

struct FrameEstimate {
    Homography similarity;   // template-frame incremental similarity
    Homography residual;
    double confidence = 0.0;
    bool lost = false;
    bool clamped = false;    // similarity params hit the motion bounds
};

struct TrackState {
    Homography h_cum;        // template coords -> frame coords
    Raster templ;            // fixed at init
    CornerQuad p_template;   // template-coords box
    double confidence = 1.0;
    bool lost = false;
    std::vector<FrameEstimate> history;
    TrackerConfig config;
};

struct FrameResult {
    CornerQuad quad;         // predicted object corners in frame coords
    Homography h;            // cumulative homography at this frame
    double confidence = 0.0;
    bool lost = false;
};

// Crops and rectifies the template so the initial quad becomes the centered
// template box; h_cum starts as the rectifying homography.
TrackState tracker_init(const Raster& frame0, const CornerQuad& p0,
                        const TrackerConfig& cfg = {});

FrameResult tracker_step(TrackState& state, const Raster& frame);

std::vector<FrameResult> run_sequence(const std::vector<Raster>& frames,
                                      const CornerQuad& p0,
                                      const TrackerConfig& cfg = {});

}  // namespace ptk
