#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptk/geometry.hpp"
#include "ptk/raster.hpp"

namespace ptk::bench {

struct Keyframe {
    int frame = 0;
    TransformParams x;
};

struct OcclusionSpec {
    int first_frame = -1;  // inclusive; negative disables
    int last_frame = -1;
    double x = 0, y = 0, w = 0, h = 0;  // frame coords
    float value = 0.5f;
};

// Per-frame transformation path plus challenge effects. Parameters are
// interpolated linearly between keyframes and applied about the object
// center.
struct MotionScript {
    std::vector<Keyframe> keyframes;
    double blur_sigma = 0.0;
    double gain = 1.0;
    double bias = 0.0;
    double noise_sigma = 0.0;
    OcclusionSpec occlusion;

    TransformParams at(int frame) const;
    int length() const;
};

struct SyntheticSequence {
    std::vector<Raster> frames;
    std::vector<CornerQuad> gt_quads;     // object corners per frame
    std::vector<Homography> gt_h;         // maps frame-0 quad to frame-i quad
};

// Warps the base image per frame, renders challenge effects on top and keeps
// the exact ground truth. Throws when the object leaves the frame.
SyntheticSequence synthesize(const Raster& base, const CornerQuad& object,
                             const MotionScript& script, std::uint64_t seed);

// Mean of the four per-corner Euclidean distances.
double alignment_error(const CornerQuad& predicted, const CornerQuad& truth);

std::vector<double> precision_curve(const std::vector<double>& errors,
                                    const std::vector<double>& thresholds);
double avg_precision(const std::vector<double>& curve);
std::vector<double> default_error_thresholds();  // 1..50 px
std::vector<double> default_iou_thresholds();    // 0.05..0.95

// Mean reprojection distance of a 10x10 grid on the template box under
// gt^-1 * predicted.
double homography_discrepancy(const Homography& predicted, const Homography& truth,
                              const CornerQuad& box, int grid = 10);
std::vector<double> hsr_curve(const std::vector<double>& scores,
                              const std::vector<double>& thresholds);

double centroid_distance(const CornerQuad& a, const CornerQuad& b);

// Intersection-over-union of two quads via convex polygon clipping.
double quad_iou(const CornerQuad& a, const CornerQuad& b);

std::vector<double> centroid_precision_curve(const std::vector<CornerQuad>& pred,
                                             const std::vector<CornerQuad>& truth,
                                             const std::vector<double>& thresholds);
std::vector<double> success_rate_curve(const std::vector<CornerQuad>& pred,
                                       const std::vector<CornerQuad>& truth,
                                       const std::vector<double>& thresholds);

struct RobustnessReport {
    std::vector<int> run_lengths;     // maximal failure-free runs
    double short_ratio = 0.0;         // runs shorter than the report length
};

RobustnessReport robustness_histogram(const std::vector<double>& iou_series,
                                      double fail_threshold = 0.2,
                                      int report_length = 10);

struct EvalReport {
    std::vector<double> error_thresholds;
    std::vector<double> precision;
    double avg_prec = 0.0;
    std::vector<double> hsr;
    double avg_hsr = 0.0;
    std::vector<double> cp;
    double avg_cp = 0.0;
    std::vector<double> iou_thresholds;
    std::vector<double> sr;
    double avg_sr = 0.0;
    RobustnessReport robustness;
};

EvalReport evaluate(const std::vector<CornerQuad>& pred,
                    const std::vector<CornerQuad>& truth,
                    const std::vector<Homography>& pred_h,
                    const std::vector<Homography>& truth_h,
                    const CornerQuad& template_box);

// POT-style corner files: 8 numbers per line (x1 y1 ... x4 y4).
std::vector<CornerQuad> read_corner_file(const std::string& path);
void write_corner_file(const std::string& path,
                       const std::vector<CornerQuad>& quads);
void write_report_csv(const std::string& path, const EvalReport& report);

}  // namespace ptk::bench
