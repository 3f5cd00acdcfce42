#pragma once

#include <Eigen/Dense>

#include "ptk/raster.hpp"

namespace ptk {

// ZNCC response grid over stride-zeta placements of a template window.
struct ResponseMap {
    Eigen::MatrixXd scores;  // rows = vertical placement index
    Eigen::MatrixXd off_x;   // subpixel offsets in pixels
    Eigen::MatrixXd off_y;
    int stride = 8;
    int template_w = 0, template_h = 0;
    int search_w = 0, search_h = 0;
};

struct SimilarityEstimate {
    Eigen::Vector2d t = Eigen::Vector2d::Zero();  // search-center origin
    double gamma = 1.0;
    double theta = 0.0;
    double confidence = 0.0;  // min of the two stage peak scores
};

struct SimestConfig {
    int stride = 8;          // translation stage
    int rsew_n = 256;        // log-polar grid edge, even
    double scale_search = 1.45;   // gamma search bound (and 1/bound)
    double theta_search = 0.75;   // radians, search bound
    // translation stage probes a coarse grid of template pre-warps so the
    // correlation peak survives large in-range scale/rotation
    double probe_theta_step = 0.2;
    double probe_scale_step = 1.15;  // geometric step
};

// Zero-normalized cross-correlation of the template at every stride-zeta
// placement, with quadratic subpixel offsets around each cell.
// Throws on a constant (zero-variance) template.
ResponseMap correlate(const Raster& templ, const Raster& search, int stride);

// Peak cell (ties: smallest row, then column) combined with its subpixel
// offset, in coordinates whose origin is the search-image center.
std::pair<Eigen::Vector2d, double> estimate_translation(const ResponseMap& map);

struct ScaleRotEstimate {
    double gamma = 1.0;
    double theta = 0.0;
    double confidence = 0.0;
};

// Log-polar correlation of the recentered search patch against the
// Hamming-windowed template.
ScaleRotEstimate estimate_scale_rotation(const Raster& templ, const Raster& search,
                                         const Eigen::Vector2d& t_hat,
                                         const SimestConfig& cfg = {});

SimilarityEstimate estimate_similarity(const Raster& templ, const Raster& search,
                                       const SimestConfig& cfg = {});

}  // namespace ptk
