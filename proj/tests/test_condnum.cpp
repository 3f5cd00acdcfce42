#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ptk/condnum.hpp"

using namespace ptk;

namespace {

std::mt19937_64 rng(11);

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

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("delta_p trivial cases and transport oracle") {
    CHECK(delta_p(TransformParams::identity(), {12.0, -4.0}).norm() == 0.0);

    TransformParams t;
    t.t1 = 5;
    t.t2 = -3;
    CHECK((delta_p(t, {7.0, 8.0}) - Eigen::Vector2d(5, -3)).norm() < 1e-14);

    const TransformParams x = random_params();
    const Eigen::Vector2d p(64, 64);
    const CornerQuad q = transport_corners(
        build_homography(x), CornerQuad::box(p.x(), p.y(), p.x() + 1, p.y() + 1));
    CHECK((delta_p(x, p) - (q.corner(0) - p)).norm() < 1e-12);

    TransformParams bad;
    bad.t1 = std::nan("");
    CHECK_THROWS(delta_p(bad, p));
}

TEST_CASE("jacobian translation columns at identity are the identity") {
    const Eigen::MatrixXd j =
        jacobian(TransformParams::identity(), {30.0, -12.0}, Subgroup::full8);
    REQUIRE(j.cols() == 8);
    CHECK(std::abs(j(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(j(1, 0)) < 1e-8);
    CHECK(std::abs(j(0, 1)) < 1e-8);
    CHECK(std::abs(j(1, 1) - 1.0) < 1e-8);
}

TEST_CASE("jacobian rotation column at identity is (-y, x)") {
    const double r = 50.0;
    const Eigen::MatrixXd j =
        jacobian(TransformParams::identity(), {r, 0.0}, Subgroup::full8);
    // column 3 = theta; at p=(r,0): d/dtheta (R(theta)p) = (0, r) at theta=0
    CHECK(std::abs(j(0, 3)) < 1e-6);
    CHECK(std::abs(j(1, 3) - r) < 1e-6);
}

TEST_CASE("jacobian Richardson half-step cross-check") {
    // independent oracle: central differences at half the step size
    const TransformParams x = random_params();
    const Eigen::Vector2d p(63.5, -63.5);
    const Eigen::MatrixXd j = jacobian(x, p, Subgroup::full8);

    auto get = [](const TransformParams& q, int i) {
        const double* f[8] = {&q.t1, &q.t2, &q.gamma, &q.theta,
                              &q.k1, &q.k2, &q.nu1, &q.nu2};
        return *f[i];
    };
    auto set = [](TransformParams& q, int i, double v) {
        double* f[8] = {&q.t1, &q.t2, &q.gamma, &q.theta,
                        &q.k1, &q.k2, &q.nu1, &q.nu2};
        *f[i] = v;
    };
    for (int i = 0; i < 8; ++i) {
        const double h = 0.5 * std::max(1e-6, 1e-6 * std::abs(get(x, i)));
        TransformParams hi = x, lo = x;
        set(hi, i, get(x, i) + h);
        set(lo, i, get(x, i) - h);
        const Eigen::Vector2d oracle =
            (delta_p(hi, p) - delta_p(lo, p)) / (2.0 * h);
        CHECK((j.col(i) - oracle).norm() <=
              1e-5 * std::max(1.0, oracle.norm()));
    }
}

TEST_CASE("subgroup jacobians drop the known columns") {
    const TransformParams x = random_params();
    const Eigen::Vector2d p(10, 20);
    CHECK(jacobian(x, p, Subgroup::translation_known).cols() == 6);
    CHECK(jacobian(x, p, Subgroup::similarity_known).cols() == 4);
}

TEST_CASE("condition_number formula oracle and rejection guard") {
    TransformParams t;
    t.t1 = 1.0;
    const Eigen::Vector2d p(63.5, 63.5);
    const auto cond = condition_number(t, p, Subgroup::full8);
    REQUIRE(cond.has_value());
    const Eigen::MatrixXd j = jacobian(t, p, Subgroup::full8);
    // free vector components: t1 = 1 and gamma = 1 (gamma enters as-is while
    // k1 enters as its offset from 1, so k1 contributes zero here)
    const double expect = j.norm() * std::sqrt(2.0) / delta_p(t, p).norm();
    CHECK(*cond == doctest::Approx(expect).epsilon(1e-12));

    // identity has delta_p = 0 everywhere: rejected, not infinite
    CHECK_FALSE(
        condition_number(TransformParams::identity(), p, Subgroup::full8)
            .has_value());
}

TEST_CASE("known-subgroup condition number is far below full8 at the same x") {
    const TransformParams x = random_params();
    const Eigen::Vector2d p(63.5, -63.5);
    const auto full = condition_number(x, p, Subgroup::full8);
    const auto sim = condition_number(x, p, Subgroup::similarity_known);
    REQUIRE(full.has_value());
    REQUIRE(sim.has_value());
    CHECK(*sim < *full);
}

TEST_CASE("translation-only displacement is exactly linear in t") {
    TransformParams t;
    t.t1 = 3.0;
    t.t2 = -2.0;
    const Eigen::Vector2d p(40, -25);
    const Eigen::Vector2d d1 = delta_p(t, p);
    t.t1 *= 5;
    t.t2 *= 5;
    CHECK((delta_p(t, p) - 5.0 * d1).norm() < 1e-12);
}

TEST_CASE("monte_carlo_study determinism and worker independence") {
    StudyConfig cfg;
    cfg.n_samples = 200;
    cfg.seed = 7;
    const CondStudyResult a = monte_carlo_study(cfg);
    const CondStudyResult b = monte_carlo_study(cfg);
    cfg.workers = 4;
    const CondStudyResult c = monte_carlo_study(cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    REQUIRE(a.samples.size() == c.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].cond == b.samples[i].cond);
        CHECK(a.samples[i].cond == c.samples[i].cond);
    }

    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "cond_a.csv").string();
    const std::string p2 = (dir / "cond_b.csv").string();
    write_samples_csv(p1, a.samples);
    write_samples_csv(p2, c.samples);
    CHECK(slurp(p1) == slurp(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("distribution-level subgroup ordering") {
    StudyConfig cfg;
    cfg.n_samples = 2000;
    cfg.seed = 5;
    cfg.workers = 4;
    cfg.subgroup = Subgroup::full8;
    const auto full = monte_carlo_study(cfg);
    cfg.subgroup = Subgroup::translation_known;
    const auto tk = monte_carlo_study(cfg);
    cfg.subgroup = Subgroup::similarity_known;
    const auto sk = monte_carlo_study(cfg);

    CHECK(full.max_cond > tk.max_cond);
    CHECK(tk.max_cond > sk.max_cond);
    CHECK(full.p99_cond > tk.p99_cond);
    CHECK(tk.p99_cond > sk.p99_cond);
}

TEST_CASE("monte_carlo_study input validation") {
    StudyConfig cfg;
    cfg.n_samples = 0;
    CHECK_THROWS(monte_carlo_study(cfg));
    cfg.n_samples = 1;
    cfg.ranges.gamma_lo = -1.0;
    CHECK_THROWS(monte_carlo_study(cfg));
    cfg.ranges = {};
    cfg.ranges.t_lo = 5.0;
    cfg.ranges.t_hi = -5.0;
    CHECK_THROWS(monte_carlo_study(cfg));
}

TEST_CASE("log10 histogram counts all samples") {
    StudyConfig cfg;
    cfg.n_samples = 500;
    cfg.seed = 2;
    const auto res = monte_carlo_study(cfg);
    const Histogram h = log10_histogram(res.samples, 30);
    std::uint64_t total = 0;
    for (auto c : h.count) total += c;
    CHECK(total == res.samples.size());
    for (std::size_t b = 1; b < h.bin_left.size(); ++b)
        CHECK(h.bin_left[b] == doctest::Approx(h.bin_right[b - 1]));
}

TEST_CASE("ray study endpoints and ordering") {
    const auto pts = ray_study({}, 11);
    REQUIRE(pts.size() == 11);
    // identity endpoint: delta_p = 0, rejected
    CHECK_FALSE(pts.front().cond_full8.has_value());
    REQUIRE(pts.back().cond_full8.has_value());
    REQUIRE(pts.back().cond_similarity_known.has_value());
    CHECK(*pts.back().cond_full8 >= *pts.back().cond_similarity_known);

    // endpoint values match the per-point oracle
    ParamRanges r;
    TransformParams x;
    x.t1 = r.t_hi;
    x.t2 = r.t_hi;
    x.gamma = r.gamma_hi;
    x.theta = r.theta_hi;
    x.k1 = 1.0 + r.k1_hi;
    x.k2 = r.k2_hi;
    x.nu1 = r.nu_hi;
    x.nu2 = r.nu_hi;
    const auto oracle = condition_number(x, {63.5, 63.5}, Subgroup::full8);
    REQUIRE(oracle.has_value());
    CHECK(*pts.back().cond_full8 == doctest::Approx(*oracle).epsilon(1e-12));

    CHECK_THROWS(ray_study({}, 1));
}
