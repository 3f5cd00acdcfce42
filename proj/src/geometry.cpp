#include "ptk/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ptk {

bool TransformParams::finite() const {
    return std::isfinite(t1) && std::isfinite(t2) && std::isfinite(gamma) &&
           std::isfinite(theta) && std::isfinite(k1) && std::isfinite(k2) &&
           std::isfinite(nu1) && std::isfinite(nu2);
}

TransformParams similarity_only(const TransformParams& x) {
    TransformParams s;
    s.t1 = x.t1;
    s.t2 = x.t2;
    s.gamma = x.gamma;
    s.theta = x.theta;
    return s;
}

TransformParams residual_only(const TransformParams& x) {
    TransformParams r;
    r.k1 = x.k1;
    r.k2 = x.k2;
    r.nu1 = x.nu1;
    r.nu2 = x.nu2;
    return r;
}

void Homography::normalize() {
    const double w = m(2, 2);
    if (std::abs(w) > 1e-300) m /= w;
}

CornerQuad CornerQuad::from_points(const std::array<Eigen::Vector2d, 4>& pts) {
    CornerQuad q;
    for (int i = 0; i < 4; ++i) {
        q.p(0, i) = pts[i].x();
        q.p(1, i) = pts[i].y();
        q.p(2, i) = 1.0;
    }
    return q;
}

CornerQuad CornerQuad::box(double x0, double y0, double x1, double y1) {
    return from_points({Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y0),
                        Eigen::Vector2d(x1, y1), Eigen::Vector2d(x0, y1)});
}

bool CornerQuad::degenerate() const {
    // any three collinear corners
    for (int a = 0; a < 4; ++a) {
        const int b = (a + 1) % 4, c = (a + 2) % 4;
        const Eigen::Vector2d u = corner(b) - corner(a);
        const Eigen::Vector2d v = corner(c) - corner(a);
        const double cross = u.x() * v.y() - u.y() * v.x();
        const double scale = u.norm() * v.norm();
        if (std::abs(cross) <= 1e-12 * std::max(scale, 1.0)) return true;
    }
    return false;
}

Homography build_homography(const TransformParams& x) {
    if (!x.finite()) throw std::invalid_argument("build_homography: non-finite parameters");
    if (x.gamma <= 0.0) throw std::invalid_argument("build_homography: gamma must be > 0");
    if (x.k1 == 0.0) throw std::invalid_argument("build_homography: k1 must be nonzero");

    const double c = std::cos(x.theta), s = std::sin(x.theta);
    Eigen::Matrix3d sim;
    sim << x.gamma * c, -x.gamma * s, x.t1,
           x.gamma * s,  x.gamma * c, x.t2,
           0.0,          0.0,         1.0;
    Eigen::Matrix3d res;
    res << x.k1, x.k2,     0.0,
           0.0,  1.0 / x.k1, 0.0,
           x.nu1, x.nu2,    1.0;
    Homography h;
    h.m = sim * res;
    return h;
}

TransformParams decompose(const Homography& h) {
    if (h.m(2, 2) == 0.0)
        throw std::domain_error("decompose: m(2,2) == 0 (object at infinity)");
    const Eigen::Matrix3d m = h.m / h.m(2, 2);

    TransformParams x;
    x.nu1 = m(2, 0);
    x.nu2 = m(2, 1);
    x.t1 = m(0, 2);
    x.t2 = m(1, 2);

    // A = M - t * nu^T is gamma * R(theta) * [[k1, k2], [0, 1/k1]].
    Eigen::Matrix2d a;
    a(0, 0) = m(0, 0) - x.t1 * x.nu1;
    a(0, 1) = m(0, 1) - x.t1 * x.nu2;
    a(1, 0) = m(1, 0) - x.t2 * x.nu1;
    a(1, 1) = m(1, 1) - x.t2 * x.nu2;

    const double det = a.determinant();
    if (det <= 0.0)
        throw std::domain_error("decompose: non-positive determinant (reflection or degenerate)");

    x.gamma = std::sqrt(det);
    x.theta = std::atan2(a(1, 0), a(0, 0));
    if (x.theta == -M_PI) x.theta = M_PI;
    x.k1 = a.col(0).norm() / x.gamma;
    // rotate back: R^T A / gamma has k2 in the (0,1) slot
    const double c = std::cos(x.theta), s = std::sin(x.theta);
    x.k2 = (c * a(0, 1) + s * a(1, 1)) / x.gamma;
    return x;
}

Homography compose(const Homography& a, const Homography& b) {
    Homography r;
    r.m = a.m * b.m;
    r.normalize();
    return r;
}

Homography invert(const Homography& h, double det_eps) {
    if (std::abs(h.det()) <= det_eps)
        throw std::domain_error("invert: singular homography");
    Homography r;
    r.m = h.m.inverse();
    r.normalize();
    return r;
}

CornerQuad transport_corners(const Homography& h, const CornerQuad& q, double w_eps) {
    CornerQuad out;
    out.p = h.m * q.p;
    for (int i = 0; i < 4; ++i) {
        const double w = out.p(2, i);
        if (std::abs(w) < w_eps)
            throw std::domain_error("transport_corners: corner crosses the plane at infinity");
        out.p.col(i) /= w;
    }
    return out;
}

std::string serialize(const Homography& h) {
    std::ostringstream os;
    os.precision(17);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            if (r || c) os << ' ';
            os << h.m(r, c);
        }
    return os.str();
}

Homography parse_homography(const std::string& line) {
    std::istringstream is(line);
    Homography h;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (!(is >> h.m(r, c)))
                throw std::runtime_error("parse_homography: expected 9 numbers");
    return h;
}

std::vector<Homography> read_homography_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Homography> hs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        hs.push_back(parse_homography(line));
    }
    return hs;
}

void write_homography_file(const std::string& path, const std::vector<Homography>& hs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const auto& h : hs) out << serialize(h) << '\n';
}

}  // namespace ptk
