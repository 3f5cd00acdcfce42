#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ptk {

// Eight-parameter homography parameterization.
// The similarity part is (t1, t2, gamma, theta); the residual part is
// (k1, k2, nu1, nu2). Identity: t=0, gamma=1, theta=0, k1=1, k2=0, nu=0.
struct TransformParams {
    double t1 = 0.0;
    double t2 = 0.0;
    double gamma = 1.0;   // isotropic scale, > 0
    double theta = 0.0;   // in-plane rotation, radians
    double k1 = 1.0;      // anisotropic scale, > 0 on the canonical branch
    double k2 = 0.0;      // shear
    double nu1 = 0.0;     // perspective, 1/pixels
    double nu2 = 0.0;

    static TransformParams identity() { return {}; }
    bool finite() const;
};

// Zeroes the residual part (keeps t, gamma, theta).
TransformParams similarity_only(const TransformParams& x);
// Zeroes the similarity part (keeps k1, k2, nu1, nu2).
TransformParams residual_only(const TransformParams& x);

struct Homography {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

    static Homography identity() { return {}; }

    // Scales so that m(2,2) == 1 when |m(2,2)| is not vanishing.
    void normalize();
    double det() const { return m.determinant(); }
};

// Four corners in homogeneous coordinates, columns ordered
// left-top, right-top, right-bottom, left-bottom. Last row is 1.
struct CornerQuad {
    Eigen::Matrix<double, 3, 4> p;

    static CornerQuad from_points(const std::array<Eigen::Vector2d, 4>& pts);
    // Axis-aligned box with the given corner coordinates.
    static CornerQuad box(double x0, double y0, double x1, double y1);
    Eigen::Vector2d corner(int i) const { return p.col(i).head<2>() / p(2, i); }
    bool degenerate() const;  // three collinear corners
};

// Per-corner displacements in pixels, same corner order as CornerQuad.
struct CornerOffsets {
    std::array<Eigen::Vector2d, 4> d{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                     Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
};

inline constexpr double kDefaultDetEps = 1e-12;
inline constexpr double kDefaultWEps = 1e-9;

// H(x) = similarity factor times residual factor.
Homography build_homography(const TransformParams& x);

// Recovers the eight parameters from a normalized homography.
// Throws std::domain_error when m(2,2) == 0 or the translation-corrected
// upper-left block has non-positive determinant (orientation-reversing).
TransformParams decompose(const Homography& h);

Homography compose(const Homography& a, const Homography& b);
Homography invert(const Homography& h, double det_eps = kDefaultDetEps);

CornerQuad transport_corners(const Homography& h, const CornerQuad& q,
                             double w_eps = kDefaultWEps);

// One homography per line, 9 row-major decimal numbers.
std::string serialize(const Homography& h);
Homography parse_homography(const std::string& line);
std::vector<Homography> read_homography_file(const std::string& path);
void write_homography_file(const std::string& path,
                           const std::vector<Homography>& hs);

}  // namespace ptk
