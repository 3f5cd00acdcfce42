#include "ptk/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ptk::bench {

namespace {

double lerp(double a, double b, double s) { return a + (b - a) * s; }

TransformParams lerp_params(const TransformParams& a, const TransformParams& b,
                            double s) {
    TransformParams x;
    x.t1 = lerp(a.t1, b.t1, s);
    x.t2 = lerp(a.t2, b.t2, s);
    x.gamma = lerp(a.gamma, b.gamma, s);
    x.theta = lerp(a.theta, b.theta, s);
    x.k1 = lerp(a.k1, b.k1, s);
    x.k2 = lerp(a.k2, b.k2, s);
    x.nu1 = lerp(a.nu1, b.nu1, s);
    x.nu2 = lerp(a.nu2, b.nu2, s);
    return x;
}

Eigen::Matrix3d translation(double dx, double dy) {
    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 2) = dx;
    t(1, 2) = dy;
    return t;
}

Raster gaussian_blur(const Raster& img, double sigma) {
    const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<float> kernel(2 * radius + 1);
    float ksum = 0.0f;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = float(std::exp(-0.5 * i * i / (sigma * sigma)));
        ksum += kernel[i + radius];
    }
    for (float& k : kernel) k /= ksum;

    Raster tmp(img.width, img.height), out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            float acc = 0.0f;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] *
                       img.at(std::clamp(x + i, 0, img.width - 1), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            float acc = 0.0f;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] *
                       tmp.at(x, std::clamp(y + i, 0, img.height - 1));
            out.at(x, y) = acc;
        }
    return out;
}

Eigen::Vector2d quad_centroid(const CornerQuad& q) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < 4; ++i) c += q.corner(i);
    return c / 4.0;
}

}  // namespace

TransformParams MotionScript::at(int frame) const {
    if (keyframes.empty()) return TransformParams::identity();
    if (frame <= keyframes.front().frame) return keyframes.front().x;
    if (frame >= keyframes.back().frame) return keyframes.back().x;
    for (std::size_t i = 1; i < keyframes.size(); ++i) {
        const Keyframe& a = keyframes[i - 1];
        const Keyframe& b = keyframes[i];
        if (frame <= b.frame) {
            const double s = double(frame - a.frame) / double(b.frame - a.frame);
            return lerp_params(a.x, b.x, s);
        }
    }
    return keyframes.back().x;
}

int MotionScript::length() const {
    return keyframes.empty() ? 0 : keyframes.back().frame + 1;
}

SyntheticSequence synthesize(const Raster& base, const CornerQuad& object,
                             const MotionScript& script, std::uint64_t seed) {
    if (base.empty()) throw std::invalid_argument("synthesize: empty base image");
    const int n = script.length();
    if (n <= 0) throw std::invalid_argument("synthesize: empty script");
    for (std::size_t i = 1; i < script.keyframes.size(); ++i)
        if (script.keyframes[i].frame <= script.keyframes[i - 1].frame)
            throw std::invalid_argument("synthesize: keyframes out of order");

    const Eigen::Vector2d c = quad_centroid(object);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> noise(0.0f, float(script.noise_sigma));

    SyntheticSequence seq;
    seq.frames.reserve(n);
    seq.gt_quads.reserve(n);
    seq.gt_h.reserve(n);

    for (int f = 0; f < n; ++f) {
        const TransformParams x = script.at(f);
        Homography h;
        h.m = translation(c.x(), c.y()) * build_homography(x).m *
              translation(-c.x(), -c.y());
        h.normalize();

        const CornerQuad q = transport_corners(h, object);
        for (int i = 0; i < 4; ++i) {
            const Eigen::Vector2d p = q.corner(i);
            if (p.x() < 0 || p.y() < 0 || p.x() > base.width - 1 ||
                p.y() > base.height - 1)
                throw std::invalid_argument("synthesize: object leaves frame");
        }

        Raster frame = warp_homography(base, invert(h), base.width, base.height,
                                       Border::clamp);
        if (script.blur_sigma > 0.0) frame = gaussian_blur(frame, script.blur_sigma);
        if (script.gain != 1.0 || script.bias != 0.0)
            for (float& v : frame.data)
                v = float(script.gain * v + script.bias);
        const OcclusionSpec& occ = script.occlusion;
        if (occ.first_frame >= 0 && f >= occ.first_frame && f <= occ.last_frame) {
            const int x0 = std::max(0, int(std::floor(occ.x)));
            const int y0 = std::max(0, int(std::floor(occ.y)));
            const int x1 = std::min(frame.width, int(std::ceil(occ.x + occ.w)));
            const int y1 = std::min(frame.height, int(std::ceil(occ.y + occ.h)));
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) frame.at(x, y) = occ.value;
        }
        if (script.noise_sigma > 0.0)
            for (float& v : frame.data) v += noise(rng);
        for (float& v : frame.data) v = std::clamp(v, 0.0f, 1.0f);

        seq.frames.push_back(std::move(frame));
        seq.gt_quads.push_back(q);
        seq.gt_h.push_back(h);
    }
    return seq;
}

double alignment_error(const CornerQuad& predicted, const CornerQuad& truth) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
        sum += (predicted.corner(i) - truth.corner(i)).norm();
    return sum / 4.0;
}

std::vector<double> precision_curve(const std::vector<double>& errors,
                                    const std::vector<double>& thresholds) {
    if (errors.empty()) throw std::invalid_argument("precision_curve: no errors");
    std::vector<double> curve(thresholds.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        std::size_t hits = 0;
        for (double e : errors)
            if (e <= thresholds[i]) ++hits;
        curve[i] = double(hits) / double(errors.size());
    }
    return curve;
}

double avg_precision(const std::vector<double>& curve) {
    if (curve.empty()) return 0.0;
    double s = 0.0;
    for (double v : curve) s += v;
    return s / double(curve.size());
}

std::vector<double> default_error_thresholds() {
    std::vector<double> t;
    for (int i = 1; i <= 50; ++i) t.push_back(double(i));
    return t;
}

std::vector<double> default_iou_thresholds() {
    std::vector<double> t;
    for (int i = 1; i <= 19; ++i) t.push_back(0.05 * i);
    return t;
}

double homography_discrepancy(const Homography& predicted, const Homography& truth,
                              const CornerQuad& box, int grid) {
    if (grid < 2) throw std::invalid_argument("homography_discrepancy: grid < 2");
    Homography rel;
    rel.m = invert(truth).m * predicted.m;

    const Eigen::Vector2d lt = box.corner(0);
    const Eigen::Vector2d rb = box.corner(2);
    double sum = 0.0;
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
            const double x = lerp(lt.x(), rb.x(), double(gx) / (grid - 1));
            const double y = lerp(lt.y(), rb.y(), double(gy) / (grid - 1));
            const Eigen::Vector3d m = rel.m * Eigen::Vector3d(x, y, 1.0);
            if (std::abs(m.z()) < kDefaultWEps)
                throw std::domain_error("homography_discrepancy: point at infinity");
            sum += (m.head<2>() / m.z() - Eigen::Vector2d(x, y)).norm();
        }
    return sum / double(grid * grid);
}

std::vector<double> hsr_curve(const std::vector<double>& scores,
                              const std::vector<double>& thresholds) {
    return precision_curve(scores, thresholds);
}

double centroid_distance(const CornerQuad& a, const CornerQuad& b) {
    return (quad_centroid(a) - quad_centroid(b)).norm();
}

namespace {

using Poly = std::vector<Eigen::Vector2d>;

double signed_area(const Poly& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Eigen::Vector2d& u = p[i];
        const Eigen::Vector2d& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

Poly quad_to_poly(const CornerQuad& q) {
    Poly p(4);
    for (int i = 0; i < 4; ++i) p[i] = q.corner(i);
    if (signed_area(p) < 0.0) std::reverse(p.begin(), p.end());  // force CCW
    return p;
}

// Sutherland-Hodgman clip of a convex subject polygon by a CCW convex clip
// polygon.
Poly clip_convex(const Poly& subject, const Poly& clip) {
    Poly out = subject;
    for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Eigen::Vector2d a = clip[i];
        const Eigen::Vector2d b = clip[(i + 1) % clip.size()];
        const Eigen::Vector2d e = b - a;
        auto inside = [&](const Eigen::Vector2d& p) {
            return e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()) >= 0.0;
        };
        Poly next;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const Eigen::Vector2d& p = out[j];
            const Eigen::Vector2d& q = out[(j + 1) % out.size()];
            const bool pin = inside(p), qin = inside(q);
            if (pin) next.push_back(p);
            if (pin != qin) {
                const double dp = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
                const double dq = e.x() * (q.y() - a.y()) - e.y() * (q.x() - a.x());
                next.push_back(p + (q - p) * (dp / (dp - dq)));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

double quad_iou(const CornerQuad& a, const CornerQuad& b) {
    const Poly pa = quad_to_poly(a);
    const Poly pb = quad_to_poly(b);
    const double area_a = signed_area(pa);
    const double area_b = signed_area(pb);
    if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
    const Poly inter = clip_convex(pa, pb);
    const double ai = inter.size() >= 3 ? std::abs(signed_area(inter)) : 0.0;
    const double u = area_a + area_b - ai;
    return u > 0.0 ? ai / u : 0.0;
}

std::vector<double> centroid_precision_curve(const std::vector<CornerQuad>& pred,
                                             const std::vector<CornerQuad>& truth,
                                             const std::vector<double>& thresholds) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("centroid_precision_curve: length mismatch");
    std::vector<double> d(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        d[i] = centroid_distance(pred[i], truth[i]);
    return precision_curve(d, thresholds);
}

std::vector<double> success_rate_curve(const std::vector<CornerQuad>& pred,
                                       const std::vector<CornerQuad>& truth,
                                       const std::vector<double>& thresholds) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("success_rate_curve: length mismatch");
    std::vector<double> curve(thresholds.size());
    std::vector<double> iou(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        iou[i] = quad_iou(pred[i], truth[i]);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::size_t hits = 0;
        for (double v : iou)
            if (v >= thresholds[t]) ++hits;
        curve[t] = double(hits) / double(iou.size());
    }
    return curve;
}

RobustnessReport robustness_histogram(const std::vector<double>& iou_series,
                                      double fail_threshold, int report_length) {
    if (iou_series.empty())
        throw std::invalid_argument("robustness_histogram: empty series");
    RobustnessReport out;
    int run = 0;
    for (double v : iou_series) {
        if (v > fail_threshold) {
            ++run;
        } else if (run > 0) {
            out.run_lengths.push_back(run);
            run = 0;
        }
    }
    if (run > 0) out.run_lengths.push_back(run);
    if (!out.run_lengths.empty()) {
        std::size_t short_runs = 0;
        for (int l : out.run_lengths)
            if (l < report_length) ++short_runs;
        out.short_ratio = double(short_runs) / double(out.run_lengths.size());
    }
    return out;
}

EvalReport evaluate(const std::vector<CornerQuad>& pred,
                    const std::vector<CornerQuad>& truth,
                    const std::vector<Homography>& pred_h,
                    const std::vector<Homography>& truth_h,
                    const CornerQuad& template_box) {
    if (pred.size() != truth.size() || pred_h.size() != truth_h.size() ||
        pred.size() != pred_h.size() || pred.empty())
        throw std::invalid_argument("evaluate: inconsistent inputs");

    EvalReport r;
    r.error_thresholds = default_error_thresholds();
    r.iou_thresholds = default_iou_thresholds();

    std::vector<double> errors(pred.size()), scores(pred.size()), iou(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        errors[i] = alignment_error(pred[i], truth[i]);
        scores[i] = homography_discrepancy(pred_h[i], truth_h[i], template_box);
        iou[i] = quad_iou(pred[i], truth[i]);
    }

    r.precision = precision_curve(errors, r.error_thresholds);
    r.avg_prec = avg_precision(r.precision);
    r.hsr = hsr_curve(scores, r.error_thresholds);
    r.avg_hsr = avg_precision(r.hsr);
    r.cp = centroid_precision_curve(pred, truth, r.error_thresholds);
    r.avg_cp = avg_precision(r.cp);
    r.sr = success_rate_curve(pred, truth, r.iou_thresholds);
    r.avg_sr = avg_precision(r.sr);
    r.robustness = robustness_histogram(iou);
    return r;
}

std::vector<CornerQuad> read_corner_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corner file: " + path);
    std::vector<CornerQuad> quads;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::array<Eigen::Vector2d, 4> pts;
        for (int i = 0; i < 4; ++i)
            if (!(ss >> pts[i].x() >> pts[i].y()))
                throw std::runtime_error("malformed corner line in " + path);
        quads.push_back(CornerQuad::from_points(pts));
    }
    return quads;
}

void write_corner_file(const std::string& path,
                       const std::vector<CornerQuad>& quads) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corner file: " + path);
    char buf[64];
    for (const CornerQuad& q : quads) {
        for (int i = 0; i < 4; ++i) {
            const Eigen::Vector2d c = q.corner(i);
            std::snprintf(buf, sizeof buf, "%.17g %.17g", c.x(), c.y());
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
}

void write_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << "metric,threshold,value\n";
    char buf[96];
    auto emit = [&](const char* name, const std::vector<double>& thr,
                    const std::vector<double>& curve) {
        for (std::size_t i = 0; i < curve.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name, thr[i],
                          curve[i]);
            out << buf;
        }
    };
    emit("precision", report.error_thresholds, report.precision);
    emit("hsr", report.error_thresholds, report.hsr);
    emit("cp", report.error_thresholds, report.cp);
    emit("sr", report.iou_thresholds, report.sr);
    std::snprintf(buf, sizeof buf, "avg_precision,,%.17g\n", report.avg_prec);
    out << buf;
    std::snprintf(buf, sizeof buf, "avg_hsr,,%.17g\n", report.avg_hsr);
    out << buf;
    std::snprintf(buf, sizeof buf, "avg_cp,,%.17g\n", report.avg_cp);
    out << buf;
    std::snprintf(buf, sizeof buf, "avg_sr,,%.17g\n", report.avg_sr);
    out << buf;
    std::snprintf(buf, sizeof buf, "robustness_short_ratio,,%.17g\n",
                  report.robustness.short_ratio);
    out << buf;
    for (int l : report.robustness.run_lengths)
        out << "robustness_run,," << l << '\n';
}

}  // namespace ptk::bench
