#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ptk/condnum.hpp"
#include "ptk/losses.hpp"
#include "ptk/raster.hpp"
#include "ptk/resest.hpp"

using namespace ptk;

namespace {

std::mt19937_64 rng(17);

TransformParams random_params() {
    const ParamRanges r;
    TransformParams x;
    x.t1 = uniform_draw(rng(), r.t_lo, r.t_hi);
    x.t2 = uniform_draw(rng(), r.t_lo, r.t_hi);
    x.gamma = uniform_draw(rng(), r.gamma_lo, r.gamma_hi);
    x.theta = uniform_draw(rng(), r.theta_lo, r.theta_hi);
    x.k1 = 1.0 + uniform_draw(rng(), r.k1_lo, r.k1_hi);
    x.k2 = uniform_draw(rng(), r.k2_lo, r.k2_hi);
    x.nu1 = uniform_draw(rng(), r.nu_lo, r.nu_hi);
    x.nu2 = uniform_draw(rng(), r.nu_lo, r.nu_hi);
    return x;
}

// band-limited random texture (see test_raster)
Raster textured(int edge, std::uint64_t seed) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> period(14.0, 40.0);
    struct Wave {
        double kx, ky, ph;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 10; ++i) {
        const double p = period(r);
        const double dir = phase(r);
        waves.push_back(
            {2.0 * M_PI * std::cos(dir) / p, 2.0 * M_PI * std::sin(dir) / p,
             phase(r)});
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

// residual homography about the patch center, as the refiner parameterizes it
Homography centered(const TransformParams& x, double cx, double cy) {
    Eigen::Matrix3d to_c = Eigen::Matrix3d::Identity(), from_c = to_c;
    to_c(0, 2) = cx;
    to_c(1, 2) = cy;
    from_c(0, 2) = -cx;
    from_c(1, 2) = -cy;
    Homography h;
    h.m = to_c * build_homography(x).m * from_c;
    h.normalize();
    return h;
}

}  // namespace

TEST_CASE("dlt trivial cases") {
    const CornerQuad p = CornerQuad::box(-63.5, -63.5, 63.5, 63.5);

    // zero offsets -> identity
    const Homography id = dlt_from_offsets(p, CornerOffsets{});
    CHECK((id.m - Eigen::Matrix3d::Identity()).norm() < 1e-10);

    // equal offsets -> pure translation
    CornerOffsets t;
    for (auto& d : t.d) d = Eigen::Vector2d(3.0, 4.0);
    const Homography ht = dlt_from_offsets(p, t);
    Eigen::Matrix3d expect = Eigen::Matrix3d::Identity();
    expect(0, 2) = 3.0;
    expect(1, 2) = 4.0;
    CHECK((ht.m - expect).norm() < 1e-9);
}

TEST_CASE("dlt recovers a known homography from transported corners") {
    TransformParams x;
    x.t1 = 4.0;
    x.t2 = -2.0;
    x.gamma = 1.1;
    x.theta = 0.25;
    x.k1 = 1.04;
    x.k2 = 0.01;
    x.nu1 = 8e-4;
    x.nu2 = -5e-4;
    const Homography h = build_homography(x);
    const CornerQuad p = CornerQuad::box(-63.5, -63.5, 63.5, 63.5);
    const CornerQuad q = transport_corners(h, p);
    CornerOffsets off;
    for (int i = 0; i < 4; ++i) off.d[i] = q.corner(i) - p.corner(i);
    const Homography rec = dlt_from_offsets(p, off);
    CHECK((rec.m - h.m).norm() / h.m.norm() < 1e-8);
}

TEST_CASE("dlt round trip over random in-range homographies") {
    const CornerQuad p = CornerQuad::box(-63.5, -63.5, 63.5, 63.5);
    double worst = 0.0;
    for (int s = 0; s < 2000; ++s) {
        const Homography h = build_homography(random_params());
        const Homography rec = dlt_from_quads(p, transport_corners(h, p));
        worst = std::max(worst, (rec.m - h.m).norm() / h.m.norm());
    }
    CHECK(worst <= 1e-7);
}

TEST_CASE("dlt rejects degenerate quads") {
    CornerQuad collinear;
    collinear.p << 0, 1, 2, 0,
                   0, 1, 2, 5,
                   1, 1, 1, 1;
    CHECK_THROWS_AS(dlt_from_quads(collinear,
                                   CornerQuad::box(0, 0, 1, 1)),
                    std::domain_error);
    CHECK_THROWS_AS(dlt_from_quads(CornerQuad::box(0, 0, 1, 1), collinear),
                    std::domain_error);
}

TEST_CASE("refine_residual on identical inputs is an exact no-op") {
    const Raster templ = textured(127, 21);
    const RefineResult res = refine_residual(templ, templ);
    CHECK_FALSE(res.lost);
    CHECK(res.rms == 0.0);
    CHECK((res.h.m - Eigen::Matrix3d::Identity()).norm() < 1e-9);
}

TEST_CASE("refine_residual recovers known residual parameters") {
    const Raster templ = textured(127, 22);
    TransformParams x;
    x.k1 = 1.03;
    x.k2 = 0.005;
    x.nu1 = 5e-4;
    x.nu2 = -3e-4;
    const Homography h = centered(x, 63.0, 63.0);
    // the refiner compares img(h q) against templ(q): img = templ o h^{-1}
    const Raster warped = warp_homography(templ, invert(h), 127, 127, Border::clamp);

    const RefineResult res = refine_residual(templ, warped);
    REQUIRE_FALSE(res.lost);
    CHECK(res.rms < 0.01);
    CHECK(res.params.k1 - 1.0 == doctest::Approx(0.03).epsilon(0.10));
    CHECK(res.params.k2 == doctest::Approx(0.005).epsilon(0.10));
    CHECK(res.params.nu1 == doctest::Approx(5e-4).epsilon(0.10));
    CHECK(res.params.nu2 == doctest::Approx(-3e-4).epsilon(0.10));
    // translation slack stays small for a pure residual pair
    CHECK(std::abs(res.params.t1) < 0.5);
    CHECK(std::abs(res.params.t2) < 0.5);
}

TEST_CASE("refine_residual flags pure noise as lost") {
    const Raster templ = textured(127, 23);
    std::mt19937_64 r(24);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    Raster noise(127, 127);
    for (float& v : noise.data) v = d(r);
    const RefineResult res = refine_residual(templ, noise);
    CHECK(res.lost);
    CHECK((res.h.m - Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("refine_residual rejects size mismatch") {
    CHECK_THROWS(refine_residual(textured(127, 25), textured(129, 25)));
}

TEST_CASE("negative-target packaging feeds the negative loss") {
    // zero prediction -> zero loss
    CHECK(losses::loss_neg(corners_to_negative_target(CornerOffsets{})) == 0.0);

    // one corner at (2, 0): per-corner component sums of smooth-l1, over 4
    CornerOffsets one;
    one.d[0] = Eigen::Vector2d(2.0, 0.0);
    const double expect = (losses::smooth_l1(2.0) + losses::smooth_l1(0.0)) / 4.0;
    CHECK(losses::loss_neg(corners_to_negative_target(one)) ==
          doctest::Approx(expect).epsilon(1e-12));

    // evenness
    CornerOffsets neg;
    for (int i = 0; i < 4; ++i) neg.d[i] = -one.d[i];
    CHECK(losses::loss_neg(corners_to_negative_target(neg)) ==
          doctest::Approx(losses::loss_neg(corners_to_negative_target(one))));
}
