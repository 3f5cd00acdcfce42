#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ptk/raster.hpp"
#include "ptk/tracker.hpp"

using namespace ptk;

namespace {

// band-limited random texture (see test_raster)
Raster textured(int edge, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> period(14.0, 40.0);
    struct Wave {
        double kx, ky, ph;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 10; ++i) {
        const double p = period(rng);
        const double dir = phase(rng);
        waves.push_back(
            {2.0 * M_PI * std::cos(dir) / p, 2.0 * M_PI * std::sin(dir) / p,
             phase(rng)});
    }
    Raster img(edge, edge);
    for (int y = 0; y < edge; ++y)
        for (int x = 0; x < edge; ++x) {
            double v = 0.5;
            for (const Wave& w : waves)
                v += 0.04 * std::sin(w.kx * x + w.ky * y + w.ph);
            img.at(x, y) = float(std::clamp(v, 0.0, 1.0));
        }
    return img;
}

// frame content transformed by the homography acting about a pivot point
Raster move_content(const Raster& frame, const TransformParams& x,
                    const Eigen::Vector2d& pivot) {
    Eigen::Matrix3d to_p = Eigen::Matrix3d::Identity(), from_p = to_p;
    to_p(0, 2) = pivot.x();
    to_p(1, 2) = pivot.y();
    from_p(0, 2) = -pivot.x();
    from_p(1, 2) = -pivot.y();
    Homography h;
    h.m = to_p * build_homography(x).m * from_p;
    return warp_homography(frame, invert(h), frame.width, frame.height,
                           Border::clamp);
}

CornerQuad moved_quad(const CornerQuad& q, const TransformParams& x,
                      const Eigen::Vector2d& pivot) {
    Eigen::Matrix3d to_p = Eigen::Matrix3d::Identity(), from_p = to_p;
    to_p(0, 2) = pivot.x();
    to_p(1, 2) = pivot.y();
    from_p(0, 2) = -pivot.x();
    from_p(1, 2) = -pivot.y();
    Homography h;
    h.m = to_p * build_homography(x).m * from_p;
    return transport_corners(h, q);
}

double mean_corner_error(const CornerQuad& a, const CornerQuad& b) {
    double e = 0.0;
    for (int i = 0; i < 4; ++i) e += (a.corner(i) - b.corner(i)).norm();
    return e / 4.0;
}

const CornerQuad kObject = CornerQuad::box(107, 107, 233, 233);
const Eigen::Vector2d kPivot(170, 170);

}  // namespace

TEST_CASE("init rectifies an axis-aligned object to a pure similarity") {
    const Raster frame = textured(340, 31);
    const TrackState s = tracker_init(frame, kObject);

    // scale + translation only
    CHECK(s.h_cum.m(0, 0) == doctest::Approx(s.h_cum.m(1, 1)).epsilon(1e-9));
    CHECK(std::abs(s.h_cum.m(0, 1)) < 1e-9);
    CHECK(std::abs(s.h_cum.m(1, 0)) < 1e-9);
    CHECK(std::abs(s.h_cum.m(2, 0)) < 1e-12);
    CHECK(std::abs(s.h_cum.m(2, 1)) < 1e-12);

    // transports the template box back onto the object
    const CornerQuad back = transport_corners(s.h_cum, s.p_template);
    CHECK(mean_corner_error(back, kObject) < 1e-6);

    // template equals the rectifying warp output
    const Raster expect = warp_homography(frame, s.h_cum, 127, 127);
    REQUIRE(s.templ.data.size() == expect.data.size());
    CHECK(s.templ.data == expect.data);
}

TEST_CASE("init input validation") {
    const Raster frame = textured(340, 32);
    CornerQuad collinear;
    collinear.p << 0, 1, 2, 0,
                   0, 1, 2, 5,
                   1, 1, 1, 1;
    CHECK_THROWS(tracker_init(frame, collinear));
    CHECK_THROWS(tracker_init(frame, CornerQuad::box(-5, 10, 120, 200)));
    CHECK_THROWS(tracker_init(frame, CornerQuad::box(10, 10, 120, 400)));
}

TEST_CASE("identity frame reproduces the initial quad") {
    const Raster frame = textured(340, 33);
    TrackState s = tracker_init(frame, kObject);
    const FrameResult r = tracker_step(s, frame);

    CHECK_FALSE(r.lost);
    CHECK(r.confidence > 0.9);
    CHECK(mean_corner_error(r.quad, kObject) <= 1.0);
    const FrameEstimate& fe = s.history.back();
    // the translation entries dominate the norm; sub-pixel estimates are fine
    CHECK((fe.similarity.m - Eigen::Matrix3d::Identity()).norm() < 1.0);
    CHECK((fe.residual.m - Eigen::Matrix3d::Identity()).norm() < 0.2);
}

TEST_CASE("single step recovers a known in-range motion") {
    const Raster frame0 = textured(340, 34);
    TransformParams x;
    x.t1 = 6.0;
    x.t2 = -4.0;
    x.gamma = 1.1;
    x.theta = 0.25;
    x.k1 = 1.02;
    x.k2 = 0.005;
    x.nu1 = 3e-4;
    x.nu2 = -2e-4;
    const Raster frame1 = move_content(frame0, x, kPivot);
    const CornerQuad truth = moved_quad(kObject, x, kPivot);

    TrackState s = tracker_init(frame0, kObject);
    const FrameResult r = tracker_step(s, frame1);
    CHECK_FALSE(r.lost);
    CHECK(mean_corner_error(r.quad, truth) <= 2.0);
}

TEST_CASE("noise frame freezes the cumulative homography") {
    const Raster frame = textured(340, 35);
    TrackState s = tracker_init(frame, kObject);
    tracker_step(s, frame);
    const Eigen::Matrix3d before = s.h_cum.m;
    const CornerQuad quad_before = transport_corners(s.h_cum, s.p_template);

    std::mt19937_64 rng(36);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    Raster noise(340, 340);
    for (float& v : noise.data) v = d(rng);

    const FrameResult r = tracker_step(s, noise);
    CHECK(r.lost);
    CHECK(s.lost);
    // bitwise identical: the lost frame must not touch h_cum
    CHECK(std::memcmp(before.data(), s.h_cum.m.data(), sizeof(double) * 9) == 0);
    CHECK(mean_corner_error(r.quad, quad_before) == 0.0);
}

TEST_CASE("out-of-bound translation is clamped and flagged") {
    const Raster frame0 = textured(340, 37);
    TransformParams x;
    x.t1 = 40.0;  // beyond the per-frame bound
    const Raster frame1 = move_content(frame0, x, kPivot);

    TrackState s = tracker_init(frame0, kObject);
    tracker_step(s, frame1);
    CHECK(s.history.back().clamped);
}

TEST_CASE("ablation switches force identity factors") {
    const Raster frame0 = textured(340, 38);
    TransformParams x;
    x.t1 = 3.0;
    x.theta = 0.1;
    x.nu1 = 2e-4;
    const Raster frame1 = move_content(frame0, x, kPivot);

    TrackerConfig cfg;
    cfg.use_similarity = false;
    TrackState a = tracker_init(frame0, kObject, cfg);
    tracker_step(a, frame1);
    CHECK((a.history.back().similarity.m - Eigen::Matrix3d::Identity()).norm() ==
          0.0);
    CHECK(a.history.back().confidence == 1.0);

    cfg = {};
    cfg.use_residual = false;
    TrackState b = tracker_init(frame0, kObject, cfg);
    tracker_step(b, frame1);
    CHECK((b.history.back().residual.m - Eigen::Matrix3d::Identity()).norm() ==
          0.0);
}

TEST_CASE("template is immutable across steps") {
    const Raster frame0 = textured(340, 39);
    TrackState s = tracker_init(frame0, kObject);
    const std::vector<float> before = s.templ.data;
    TransformParams x;
    x.t1 = 2.0;
    x.theta = 0.05;
    tracker_step(s, move_content(frame0, x, kPivot));
    tracker_step(s, frame0);
    CHECK(s.templ.data == before);
}

TEST_CASE("composition consistency over accepted frames") {
    const Raster frame0 = textured(340, 40);
    TrackState s = tracker_init(frame0, kObject);
    const Eigen::Matrix3d h0 = s.h_cum.m;

    TransformParams x;
    x.t1 = 2.0;
    x.t2 = 1.0;
    x.theta = 0.05;
    const Raster frame1 = move_content(frame0, x, kPivot);
    x.t1 = 4.0;
    x.theta = 0.10;
    const Raster frame2 = move_content(frame0, x, kPivot);

    tracker_step(s, frame1);
    tracker_step(s, frame2);

    Eigen::Matrix3d prod = h0;
    for (const FrameEstimate& fe : s.history)
        if (!fe.lost) prod = prod * fe.similarity.m * fe.residual.m;
    prod /= prod(2, 2);
    CHECK((prod - s.h_cum.m).norm() < 1e-9);
}

TEST_CASE("run_sequence on a constant sequence is stable and deterministic") {
    const Raster frame = textured(340, 41);
    const std::vector<Raster> frames(4, frame);
    const auto res1 = run_sequence(frames, kObject);
    REQUIRE(res1.size() == 4);
    for (const FrameResult& r : res1) {
        CHECK_FALSE(r.lost);
        CHECK(mean_corner_error(r.quad, kObject) <= 1.0);
    }
    const auto res2 = run_sequence(frames, kObject);
    for (std::size_t i = 0; i < res1.size(); ++i) {
        CHECK(res1[i].h.m == res2[i].h.m);
        CHECK(res1[i].confidence == res2[i].confidence);
    }
    CHECK_THROWS(run_sequence({}, kObject));
}
