#include "ptk/resest.hpp"

#include <cmath>
#include <stdexcept>

namespace ptk {

namespace {

Eigen::Matrix3d hartley_normalizer(const CornerQuad& q) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (int i = 0; i < 4; ++i) centroid += q.corner(i);
    centroid /= 4.0;
    double mean_dist = 0.0;
    for (int i = 0; i < 4; ++i) mean_dist += (q.corner(i) - centroid).norm();
    mean_dist /= 4.0;
    const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
    Eigen::Matrix3d t;
    t << s, 0, -s * centroid.x(),
         0, s, -s * centroid.y(),
         0, 0, 1;
    return t;
}

}  // namespace

Homography dlt_from_quads(const CornerQuad& reference, const CornerQuad& target) {
    if (reference.degenerate() || target.degenerate())
        throw std::domain_error("dlt: degenerate quad (three collinear corners)");

    const Eigen::Matrix3d t1 = hartley_normalizer(reference);
    const Eigen::Matrix3d t2 = hartley_normalizer(target);

    Eigen::Matrix<double, 8, 9> a;
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d p = t1 * reference.p.col(i);
        const Eigen::Vector3d q = t2 * target.p.col(i);
        const double x = p.x() / p.z(), y = p.y() / p.z();
        const double u = q.x() / q.z(), v = q.y() / q.z();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }

    // smallest eigenvector of the 9x9 normal matrix
    const Eigen::Matrix<double, 9, 9> ata = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> es(ata);
    const Eigen::Matrix<double, 9, 1> h = es.eigenvectors().col(0);

    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    Homography out;
    out.m = t2.inverse() * hn * t1;
    if (std::abs(out.m(2, 2)) < 1e-14)
        throw std::domain_error("dlt: degenerate solution");
    out.normalize();
    return out;
}

Homography dlt_from_offsets(const CornerQuad& reference,
                            const CornerOffsets& offsets) {
    CornerQuad target = reference;
    for (int i = 0; i < 4; ++i) {
        target.p(0, i) = reference.corner(i).x() + offsets.d[i].x();
        target.p(1, i) = reference.corner(i).y() + offsets.d[i].y();
        target.p(2, i) = 1.0;
    }
    return dlt_from_quads(reference, target);
}

namespace {

constexpr int kNumRefineParams = 6;  // k1 offset, k2, nu1, nu2, dt1, dt2
constexpr double kSlackBound = 4.0;  // pixels

Homography residual_homography(const Eigen::Matrix<double, 6, 1>& q,
                               double cx, double cy) {
    TransformParams x;
    x.k1 = 1.0 + q(0);
    x.k2 = q(1);
    x.nu1 = q(2);
    x.nu2 = q(3);
    x.t1 = q(4);
    x.t2 = q(5);
    Eigen::Matrix3d to_center = Eigen::Matrix3d::Identity();
    to_center(0, 2) = cx;
    to_center(1, 2) = cy;
    Eigen::Matrix3d from_center = Eigen::Matrix3d::Identity();
    from_center(0, 2) = -cx;
    from_center(1, 2) = -cy;
    Homography h;
    h.m = to_center * build_homography(x).m * from_center;
    h.normalize();
    return h;
}

// residuals of W(img, H(q)) against the template over interior pixels
double residual_vector(const Raster& templ, const Raster& img,
                       const Eigen::Matrix<double, 6, 1>& q,
                       Eigen::VectorXd& r) {
    const double cx = (templ.width - 1) / 2.0;
    const double cy = (templ.height - 1) / 2.0;
    const Homography h = residual_homography(q, cx, cy);
    const int margin = 2;
    const int w = templ.width, hgt = templ.height;
    r.resize(std::ptrdiff_t(w - 2 * margin) * (hgt - 2 * margin));
    std::ptrdiff_t k = 0;
    double ss = 0.0;
    for (int y = margin; y < hgt - margin; ++y)
        for (int x = margin; x < w - margin; ++x) {
            const Eigen::Vector3d s = h.m * Eigen::Vector3d(x, y, 1.0);
            const double d =
                sample_bilinear(img, s.x() / s.z(), s.y() / s.z(), Border::clamp) -
                templ.at(x, y);
            r(k++) = d;
            ss += d * d;
        }
    return std::sqrt(ss / double(r.size()));
}

}  // namespace

RefineResult refine_residual(const Raster& templ, const Raster& warped_search,
                             const RefineConfig& cfg) {
    if (templ.width != warped_search.width || templ.height != warped_search.height)
        throw std::invalid_argument("refine_residual: size mismatch");

    Eigen::Matrix<double, 6, 1> q = Eigen::Matrix<double, 6, 1>::Zero();
    const double steps[kNumRefineParams] = {1e-4, 1e-4, 1e-6, 1e-6, 1e-2, 1e-2};

    Eigen::VectorXd r, r_probe, r_trial;
    double rms = residual_vector(templ, warped_search, q, r);
    const double initial_rms = rms;

    double lambda = cfg.damping;
    int failures = 0;
    RefineResult out;

    const int np = cfg.allow_translation_slack ? kNumRefineParams : 4;

    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        // numeric Jacobian, central differences
        Eigen::MatrixXd j(r.size(), np);
        for (int p = 0; p < np; ++p) {
            Eigen::Matrix<double, 6, 1> qp = q, qn = q;
            qp(p) += steps[p];
            qn(p) -= steps[p];
            residual_vector(templ, warped_search, qp, r_probe);
            j.col(p) = r_probe;
            residual_vector(templ, warped_search, qn, r_probe);
            j.col(p) = (j.col(p) - r_probe) / (2.0 * steps[p]);
        }
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtr = j.transpose() * r;

        bool accepted = false;
        while (failures < cfg.max_failures) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);

            Eigen::Matrix<double, 6, 1> q_trial = q;
            for (int p = 0; p < np; ++p) q_trial(p) += delta(p);
            q_trial(0) = std::clamp(q_trial(0), cfg.bounds.k1_lo, cfg.bounds.k1_hi);
            q_trial(1) = std::clamp(q_trial(1), cfg.bounds.k2_lo, cfg.bounds.k2_hi);
            q_trial(2) = std::clamp(q_trial(2), cfg.bounds.nu_lo, cfg.bounds.nu_hi);
            q_trial(3) = std::clamp(q_trial(3), cfg.bounds.nu_lo, cfg.bounds.nu_hi);
            q_trial(4) = std::clamp(q_trial(4), -kSlackBound, kSlackBound);
            q_trial(5) = std::clamp(q_trial(5), -kSlackBound, kSlackBound);

            const double trial_rms = residual_vector(templ, warped_search, q_trial, r_trial);
            if (trial_rms <= rms) {
                const double update = (q_trial - q).norm();
                q = q_trial;
                r.swap(r_trial);
                rms = trial_rms;
                lambda = std::max(lambda * cfg.damping_down, 1e-12);
                failures = 0;
                accepted = true;
                if (update < cfg.convergence) iter = cfg.max_iters;  // converged
                break;
            }
            lambda *= cfg.damping_up;
            ++failures;
        }
        if (!accepted) break;
    }

    out.iterations = iter;
    out.rms = rms;
    if (rms > cfg.lost_rms || (failures >= cfg.max_failures && rms >= initial_rms)) {
        out.lost = true;
        out.h = Homography::identity();
        out.params = TransformParams::identity();
        out.rms = rms;
        return out;
    }

    const double cx = (templ.width - 1) / 2.0;
    const double cy = (templ.height - 1) / 2.0;
    out.h = residual_homography(q, cx, cy);
    out.params.k1 = 1.0 + q(0);
    out.params.k2 = q(1);
    out.params.nu1 = q(2);
    out.params.nu2 = q(3);
    out.params.t1 = q(4);
    out.params.t2 = q(5);
    return out;
}

CornerOffsets corners_to_negative_target(const CornerOffsets& predicted) {
    // the ground truth for a negative sample is all-zero offsets; the
    // prediction itself is what the negative loss consumes
    return predicted;
}

}  // namespace ptk
