#include "ptk/tracker.hpp"

#include <cmath>
#include <stdexcept>

namespace ptk {

namespace {

Eigen::Matrix3d translation(double dx, double dy) {
    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 2) = dx;
    t(1, 2) = dy;
    return t;
}

// Similarity acting about the template center.
Homography centered_similarity(const SimilarityEstimate& est, double cx, double cy) {
    TransformParams x;
    x.t1 = est.t.x();
    x.t2 = est.t.y();
    x.gamma = est.gamma;
    x.theta = est.theta;
    Homography h;
    h.m = translation(cx, cy) * build_homography(x).m * translation(-cx, -cy);
    h.normalize();
    return h;
}

bool clamp_similarity(SimilarityEstimate& est, const ParamRanges& b) {
    bool clamped = false;
    auto clip = [&clamped](double v, double lo, double hi) {
        const double c = std::clamp(v, lo, hi);
        if (c != v) clamped = true;
        return c;
    };
    est.t.x() = clip(est.t.x(), b.t_lo, b.t_hi);
    est.t.y() = clip(est.t.y(), b.t_lo, b.t_hi);
    est.gamma = clip(est.gamma, b.gamma_lo, b.gamma_hi);
    est.theta = clip(est.theta, b.theta_lo, b.theta_hi);
    return clamped;
}

}  // namespace

TrackState tracker_init(const Raster& frame0, const CornerQuad& p0,
                        const TrackerConfig& cfg) {
    if (p0.degenerate()) throw std::invalid_argument("tracker_init: degenerate quad");
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d c = p0.corner(i);
        if (c.x() < 0 || c.y() < 0 || c.x() > frame0.width - 1 || c.y() > frame0.height - 1)
            throw std::invalid_argument("tracker_init: quad outside frame");
    }
    TrackState s;
    s.config = cfg;
    const int t = cfg.template_size;
    s.p_template = CornerQuad::box(0, 0, t - 1, t - 1);
    s.h_cum = dlt_from_quads(s.p_template, p0);
    s.templ = warp_homography(frame0, s.h_cum, t, t);
    return s;
}

FrameResult tracker_step(TrackState& state, const Raster& frame) {
    const TrackerConfig& cfg = state.config;
    const int ts = cfg.template_size;
    const int ss = cfg.search_size;
    const double pad = (ss - ts) / 2.0;  // search-to-template coordinate offset

    FrameEstimate fe;
    SimilarityEstimate sim;  // identity by default

    if (cfg.use_similarity) {
        Homography to_search;
        to_search.m = state.h_cum.m * translation(-pad, -pad);
        const Raster search = warp_homography(frame, to_search, ss, ss);
        sim = estimate_similarity(state.templ, search, cfg.simest);
        fe.clamped = clamp_similarity(sim, cfg.motion_bounds);
    }

    const double cx = (ts - 1) / 2.0, cy = (ts - 1) / 2.0;
    const Homography h_sim = centered_similarity(sim, cx, cy);

    fe.similarity = h_sim;
    fe.confidence = cfg.use_similarity ? sim.confidence : 1.0;

    bool lost = cfg.use_similarity && sim.confidence < cfg.lost_threshold;
    Homography h_res = Homography::identity();
    if (!lost && cfg.use_residual) {
        Homography to_template;
        to_template.m = state.h_cum.m * h_sim.m;
        const Raster warped = warp_homography(frame, to_template, ts, ts);
        const RefineResult rr = refine_residual(state.templ, warped, cfg.refine);
        if (rr.lost)
            lost = true;
        else
            h_res = rr.h;
    }
    fe.residual = h_res;
    fe.lost = lost;

    if (!lost) {
        state.h_cum.m = state.h_cum.m * h_sim.m * h_res.m;
        state.h_cum.normalize();
    }
    state.confidence = fe.confidence;
    state.lost = lost;
    state.history.push_back(fe);

    FrameResult out;
    out.h = state.h_cum;
    out.quad = transport_corners(state.h_cum, state.p_template);
    out.confidence = fe.confidence;
    out.lost = lost;
    return out;
}

std::vector<FrameResult> run_sequence(const std::vector<Raster>& frames,
                                      const CornerQuad& p0,
                                      const TrackerConfig& cfg) {
    if (frames.empty()) throw std::invalid_argument("run_sequence: no frames");
    TrackState state = tracker_init(frames.front(), p0, cfg);
    std::vector<FrameResult> results;
    results.reserve(frames.size());
    for (const auto& f : frames) results.push_back(tracker_step(state, f));
    return results;
}

}  // namespace ptk
