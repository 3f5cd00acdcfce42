#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptk/geometry.hpp"

namespace ptk {

// Which parameters are assumed known (and therefore excluded from the
// sensitivity analysis). For the known variants the displacement is the one
// produced by the remaining parameters alone.
enum class Subgroup { full8, translation_known, similarity_known };

std::string subgroup_name(Subgroup s);
Subgroup parse_subgroup(const std::string& name);

struct ParamRanges {
    double t_lo = -32.0, t_hi = 32.0;
    double gamma_lo = 1.0 / 1.38, gamma_hi = 1.38;
    double theta_lo = -0.7, theta_hi = 0.7;
    // k1 is sampled as an offset around 1: matrix entry in [1+k1_lo, 1+k1_hi]
    double k1_lo = -0.1, k1_hi = 0.1;
    double k2_lo = -0.015, k2_hi = 0.015;
    double nu_lo = -0.0015, nu_hi = 0.0015;

    void validate() const;  // throws on empty or invalid intervals
};

struct CondSample {
    std::uint64_t index = 0;
    Subgroup subgroup = Subgroup::full8;
    TransformParams x;
    int corner_id = 0;
    double cond = 0.0;
};

struct CondStudyResult {
    std::vector<CondSample> samples;   // accepted samples, index order
    std::uint64_t rejected = 0;        // |delta_p| below threshold
    double max_cond = 0.0;
    double p99_cond = 0.0;
};

struct Histogram {
    std::vector<double> bin_left;
    std::vector<double> bin_right;
    std::vector<std::uint64_t> count;
};

inline constexpr double kDefaultDeltaEps = 1e-8;

// Displacement of pixel p under H(x).
Eigen::Vector2d delta_p(const TransformParams& x, const Eigen::Vector2d& p);

// Displacement produced by the free parameters of the subgroup alone
// (known parameters replaced by their identity values).
Eigen::Vector2d delta_p_free(const TransformParams& x, const Eigen::Vector2d& p,
                             Subgroup subgroup);

// Central finite-difference Jacobian of the subgroup displacement map,
// 2 x d where d is the number of free parameters (8, 6 or 4).
Eigen::MatrixXd jacobian(const TransformParams& x, const Eigen::Vector2d& p,
                         Subgroup subgroup);

// ||J||_F * ||x_free||_2 / |delta_p|. Empty when |delta_p| < delta_eps.
// The parameter vector uses the sampling convention: k1 enters as its offset
// from 1, gamma as-is.
std::optional<double> condition_number(const TransformParams& x,
                                       const Eigen::Vector2d& p,
                                       Subgroup subgroup,
                                       double delta_eps = kDefaultDeltaEps);

struct StudyConfig {
    ParamRanges ranges;
    std::uint64_t n_samples = 100000;
    Subgroup subgroup = Subgroup::full8;
    std::uint64_t seed = 0;
    double delta_eps = kDefaultDeltaEps;
    // probe points: corners of a box of this edge length centered at origin
    double box_edge = 127.0;
    int workers = 1;
};

// Uniform per-parameter sampling, deterministic per seed and independent of
// the worker count.
CondStudyResult monte_carlo_study(const StudyConfig& cfg);

Histogram log10_histogram(const std::vector<CondSample>& samples, int bins = 60);

void write_samples_csv(const std::string& path,
                       const std::vector<CondSample>& samples);
void write_histogram_csv(const std::string& path, const Histogram& hist);

struct RayPoint {
    double ratio = 0.0;
    std::optional<double> cond_full8;
    std::optional<double> cond_translation_known;
    std::optional<double> cond_similarity_known;
};

// Condition numbers along the ray from the identity toward the upper range
// extremes, all eight parameters increased together.
std::vector<RayPoint> ray_study(const ParamRanges& ranges, int steps,
                                double box_edge = 127.0,
                                double delta_eps = kDefaultDeltaEps);

void write_ray_csv(const std::string& path, const std::vector<RayPoint>& pts);

// Deterministic uniform draw helper shared by condnum and bench: maps the
// next engine output to [lo, hi) identically on every platform.
double uniform_draw(std::uint64_t raw, double lo, double hi);

}  // namespace ptk
