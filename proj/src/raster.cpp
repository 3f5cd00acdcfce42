#include "ptk/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ptk {

namespace {

inline float fetch(const Raster& img, int x, int y, Border border) {
    switch (border) {
        case Border::zero:
            if (x < 0 || x >= img.width || y < 0 || y >= img.height) return 0.0f;
            break;
        case Border::clamp:
            x = std::clamp(x, 0, img.width - 1);
            y = std::clamp(y, 0, img.height - 1);
            break;
        case Border::circular_vertical:
            x = std::clamp(x, 0, img.width - 1);
            y = ((y % img.height) + img.height) % img.height;
            break;
    }
    return img.at(x, y);
}

}  // namespace

float sample_bilinear(const Raster& img, double u, double v, Border border) {
    const int x0 = int(std::floor(u));
    const int y0 = int(std::floor(v));
    const double fx = u - x0;
    const double fy = v - y0;
    const double v00 = fetch(img, x0, y0, border);
    const double v10 = fetch(img, x0 + 1, y0, border);
    const double v01 = fetch(img, x0, y0 + 1, border);
    const double v11 = fetch(img, x0 + 1, y0 + 1, border);
    const double top = v00 * (1.0 - fx) + v10 * fx;
    const double bot = v01 * (1.0 - fx) + v11 * fx;
    return float(top * (1.0 - fy) + bot * fy);
}

Raster warp_homography(const Raster& img, const Homography& h,
                       int out_width, int out_height, Border border) {
    if (std::abs(h.det()) <= kDefaultDetEps)
        throw std::domain_error("warp_homography: singular homography");
    Raster out(out_width, out_height);
    const Eigen::Matrix3d& m = h.m;
    for (int y = 0; y < out_height; ++y) {
        float* dst = out.row(y);
        for (int x = 0; x < out_width; ++x) {
            const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
            if (std::abs(w) < kDefaultWEps) {
                dst[x] = 0.0f;
                continue;
            }
            const double u = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
            const double v = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
            dst[x] = sample_bilinear(img, u, v, border);
        }
    }
    return out;
}

Raster warp_grid(const Raster& img, const WarpGrid& grid, Border border) {
    Raster out(grid.width, grid.height);
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            const std::size_t i = std::size_t(y) * grid.width + x;
            out.at(x, y) = sample_bilinear(img, grid.u[i], grid.v[i], border);
        }
    return out;
}

WarpGrid rsew_grid(int n, double t1, double t2, bool centered) {
    if (n <= 0 || n % 2 != 0)
        throw std::invalid_argument("rsew_grid: n must be positive and even");
    WarpGrid g;
    g.width = n;
    g.height = n;
    g.u.resize(std::size_t(n) * n);
    g.v.resize(std::size_t(n) * n);
    const double s = n / 4.0;
    for (int row = 0; row < n; ++row) {
        const double phi = 4.0 * M_PI * row / n;
        const double c = std::cos(phi), si = std::sin(phi);
        for (int col = 0; col < n; ++col) {
            const double mu1 = centered ? col - n / 2.0 : double(col);
            const double r = std::pow(s, 2.0 * mu1 / n);
            const std::size_t i = std::size_t(row) * n + col;
            g.u[i] = float(t1 + r * c);
            g.v[i] = float(t2 + r * si);
        }
    }
    return g;
}

Raster rsew_warp(const Raster& img, double t1, double t2, int n) {
    if (!img.square()) throw std::invalid_argument("rsew_warp: input must be square");
    if (n == 0) n = img.width & ~1;
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    WarpGrid g = rsew_grid(n, t1 + cx, t2 + cy, /*centered=*/true);
    return warp_grid(img, g, Border::zero);
}

std::pair<double, double> recover_scale_rotation(double mu1, double mu2, int n) {
    if (n <= 0) throw std::invalid_argument("recover_scale_rotation: n must be > 0");
    const double gamma = std::pow(n / 4.0, 2.0 * mu1 / n);
    double theta = 4.0 * M_PI * mu2 / n;
    theta = std::remainder(theta, 2.0 * M_PI);
    if (theta <= -M_PI) theta = M_PI;
    return {gamma, theta};
}

Raster pad_for_correlation(const Raster& warped, int pad_x) {
    if (!warped.square()) throw std::invalid_argument("pad_for_correlation: square input expected");
    const int n = warped.height;
    const int pad_y = n / 2;
    Raster out(warped.width + 2 * pad_x, n + 2 * pad_y, 0.0f);
    for (int y = 0; y < out.height; ++y) {
        const int src = ((y - pad_y) % n + n) % n;
        std::copy_n(warped.row(src), warped.width, out.row(y) + pad_x);
    }
    return out;
}

Raster read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
    auto next_token = [&in, &path]() -> long {
        // skips whitespace and '#' comments
        while (true) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v;
        if (!(in >> v)) throw std::runtime_error(path + ": malformed PGM header");
        return v;
    };
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error(path + ": unsupported PGM dimensions or maxval");
    in.get();  // single whitespace after header
    Raster img{int(w), int(h)};
    std::vector<uint8_t> buf(std::size_t(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size()))
        throw std::runtime_error(path + ": truncated PGM data");
    for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0f;
    return img;
}

void write_pgm(const std::string& path, const Raster& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> buf(img.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const float v = std::clamp(img.data[i], 0.0f, 1.0f);
        buf[i] = uint8_t(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

}  // namespace ptk
