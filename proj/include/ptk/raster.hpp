#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptk/geometry.hpp"

namespace ptk {

enum class Border {
    zero,              // outside pixels read as 0
    clamp,             // nearest edge pixel
    circular_vertical  // rows wrap, columns clamp
};

// Single-channel image, row-major, intensities in [0,1].
// Coordinates are pixel-centered: integer (u,v) addresses the center of
// column u, row v.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    Raster() = default;
    Raster(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(std::size_t(w) * h, fill) {}

    float& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    float at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    const float* row(int y) const { return data.data() + std::size_t(y) * width; }
    float* row(int y) { return data.data() + std::size_t(y) * width; }
    bool empty() const { return data.empty(); }
    bool square() const { return width == height && width > 0; }
};

// Per-output-pixel source coordinates.
struct WarpGrid {
    int width = 0;
    int height = 0;
    std::vector<float> u;  // row-major, size width*height
    std::vector<float> v;
};

float sample_bilinear(const Raster& img, double u, double v,
                      Border border = Border::zero);

// Inverse warping: output pixel q takes sample_bilinear(img, H*q).
Raster warp_homography(const Raster& img, const Homography& h,
                       int out_width, int out_height,
                       Border border = Border::zero);

Raster warp_grid(const Raster& img, const WarpGrid& grid,
                 Border border = Border::zero);

// Log-polar sampling grid that turns rotation and scale into translation.
// Column index mu1 selects radius s^(2*mu1/n) with s = n/4, row index mu2
// selects angle 4*pi*mu2/n; pivot (1,0). (u,v) are offsets from t_hat.
// With centered = true, mu1 is taken as column - n/2 so that unit scale sits
// at the grid center and scales below 1 are representable.
WarpGrid rsew_grid(int n, double t1 = 0.0, double t2 = 0.0,
                   bool centered = false);

// Log-polar resampling of a square image about its center. Output edge n
// (even) defaults to the input edge rounded down to even. Column = scale
// axis (centered), row = angle axis.
Raster rsew_warp(const Raster& img, double t1 = 0.0, double t2 = 0.0,
                 int n = 0);

// Peak location in the warped domain (centered mu1, mu2 rows) back to
// (gamma, theta); theta wrapped to (-pi, pi].
std::pair<double, double> recover_scale_rotation(double mu1, double mu2, int n);

// Vertical circular padding of n/2 rows top and bottom plus horizontal zero
// padding of pad_x columns on each side.
Raster pad_for_correlation(const Raster& warped, int pad_x);

// 8-bit binary PGM (P5).
Raster read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Raster& img);

}  // namespace ptk
