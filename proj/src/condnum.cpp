#include "ptk/condnum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>

namespace ptk {

namespace {

// parameter vector order: t1 t2 gamma theta k1 k2 nu1 nu2
constexpr int kNumParams = 8;

double get_param(const TransformParams& x, int i) {
    switch (i) {
        case 0: return x.t1;
        case 1: return x.t2;
        case 2: return x.gamma;
        case 3: return x.theta;
        case 4: return x.k1;
        case 5: return x.k2;
        case 6: return x.nu1;
        default: return x.nu2;
    }
}

void set_param(TransformParams& x, int i, double v) {
    switch (i) {
        case 0: x.t1 = v; break;
        case 1: x.t2 = v; break;
        case 2: x.gamma = v; break;
        case 3: x.theta = v; break;
        case 4: x.k1 = v; break;
        case 5: x.k2 = v; break;
        case 6: x.nu1 = v; break;
        default: x.nu2 = v; break;
    }
}

int first_free_index(Subgroup s) {
    switch (s) {
        case Subgroup::full8: return 0;
        case Subgroup::translation_known: return 2;
        case Subgroup::similarity_known: return 4;
    }
    return 0;
}

// In the sensitivity vector k1 enters as its offset from the identity; the
// sampled ranges are symmetric around that identity.
double vector_component(const TransformParams& x, int i) {
    return i == 4 ? x.k1 - 1.0 : get_param(x, i);
}

Eigen::Vector2d apply(const TransformParams& x, const Eigen::Vector2d& p) {
    const Homography h = build_homography(x);
    const Eigen::Vector3d q = h.m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    if (std::abs(q.z()) < kDefaultWEps)
        throw std::domain_error("delta_p: point mapped to infinity");
    return q.head<2>() / q.z();
}

TransformParams mask_known(const TransformParams& x, Subgroup s) {
    TransformParams m = x;
    const int lo = first_free_index(s);
    for (int i = 0; i < lo; ++i) set_param(m, i, i == 2 ? 1.0 : 0.0);
    return m;
}

}  // namespace

std::string subgroup_name(Subgroup s) {
    switch (s) {
        case Subgroup::full8: return "full8";
        case Subgroup::translation_known: return "translation_known";
        case Subgroup::similarity_known: return "similarity_known";
    }
    return "?";
}

Subgroup parse_subgroup(const std::string& name) {
    if (name == "full8") return Subgroup::full8;
    if (name == "translation_known") return Subgroup::translation_known;
    if (name == "similarity_known") return Subgroup::similarity_known;
    throw std::invalid_argument("unknown subgroup: " + name);
}

void ParamRanges::validate() const {
    auto ok = [](double lo, double hi) { return lo <= hi; };
    if (!ok(t_lo, t_hi) || !ok(gamma_lo, gamma_hi) || !ok(theta_lo, theta_hi) ||
        !ok(k1_lo, k1_hi) || !ok(k2_lo, k2_hi) || !ok(nu_lo, nu_hi))
        throw std::invalid_argument("ParamRanges: lower bound exceeds upper bound");
    if (gamma_lo <= 0.0)
        throw std::invalid_argument("ParamRanges: gamma interval must be positive");
    if (1.0 + k1_lo <= 0.0)
        throw std::invalid_argument("ParamRanges: k1 interval crosses zero");
}

Eigen::Vector2d delta_p(const TransformParams& x, const Eigen::Vector2d& p) {
    if (!p.allFinite() || !x.finite())
        throw std::invalid_argument("delta_p: non-finite input");
    return apply(x, p) - p;
}

Eigen::Vector2d delta_p_free(const TransformParams& x, const Eigen::Vector2d& p,
                             Subgroup subgroup) {
    return apply(mask_known(x, subgroup), p) - p;
}

Eigen::MatrixXd jacobian(const TransformParams& x, const Eigen::Vector2d& p,
                         Subgroup subgroup) {
    const int lo = first_free_index(subgroup);
    const int d = kNumParams - lo;
    Eigen::MatrixXd j(2, d);
    const TransformParams base = mask_known(x, subgroup);
    for (int c = 0; c < d; ++c) {
        const int i = lo + c;
        const double xi = get_param(base, i);
        const double h = std::max(1e-6, 1e-6 * std::abs(xi));
        TransformParams hi = base, lo_p = base;
        set_param(hi, i, xi + h);
        set_param(lo_p, i, xi - h);
        const Eigen::Vector2d diff = (apply(hi, p) - apply(lo_p, p)) / (2.0 * h);
        if (!diff.allFinite())
            throw std::domain_error("jacobian: non-finite difference quotient");
        j.col(c) = diff;
    }
    return j;
}

std::optional<double> condition_number(const TransformParams& x,
                                       const Eigen::Vector2d& p,
                                       Subgroup subgroup, double delta_eps) {
    const Eigen::Vector2d dp = delta_p_free(x, p, subgroup);
    const double nd = dp.norm();
    if (nd < delta_eps) return std::nullopt;
    const Eigen::MatrixXd j = jacobian(x, p, subgroup);
    const int lo = first_free_index(subgroup);
    double xsq = 0.0;
    for (int i = lo; i < kNumParams; ++i) {
        const double c = vector_component(x, i);
        xsq += c * c;
    }
    return j.norm() * std::sqrt(xsq) / nd;
}

double uniform_draw(std::uint64_t raw, double lo, double hi) {
    const double u = double(raw >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

namespace {

TransformParams draw_params(std::mt19937_64& rng, const ParamRanges& r) {
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

}  // namespace

CondStudyResult monte_carlo_study(const StudyConfig& cfg) {
    cfg.ranges.validate();
    if (cfg.n_samples < 1)
        throw std::invalid_argument("monte_carlo_study: n_samples must be >= 1");

    // all parameter vectors drawn up front in index order so the result does
    // not depend on the worker count
    std::mt19937_64 rng(cfg.seed);
    std::vector<TransformParams> xs(cfg.n_samples);
    for (auto& x : xs) x = draw_params(rng, cfg.ranges);

    const double half = cfg.box_edge / 2.0;
    const std::array<Eigen::Vector2d, 4> corners = {
        Eigen::Vector2d(-half, -half), Eigen::Vector2d(half, -half),
        Eigen::Vector2d(half, half), Eigen::Vector2d(-half, half)};

    struct Slot {
        std::array<std::optional<double>, 4> cond;
    };
    std::vector<Slot> slots(cfg.n_samples);

    const int workers = std::max(1, cfg.workers);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t s = begin; s < end; ++s)
            for (int c = 0; c < 4; ++c)
                slots[s].cond[c] =
                    condition_number(xs[s], corners[c], cfg.subgroup, cfg.delta_eps);
    };
    if (workers == 1) {
        work(0, cfg.n_samples);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (cfg.n_samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::uint64_t b = std::min<std::uint64_t>(w * chunk, cfg.n_samples);
            const std::uint64_t e = std::min<std::uint64_t>(b + chunk, cfg.n_samples);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& t : pool) t.join();
    }

    CondStudyResult res;
    res.samples.reserve(cfg.n_samples * 4);
    for (std::uint64_t s = 0; s < cfg.n_samples; ++s)
        for (int c = 0; c < 4; ++c) {
            if (!slots[s].cond[c]) {
                ++res.rejected;
                continue;
            }
            CondSample cs;
            cs.index = s;
            cs.subgroup = cfg.subgroup;
            cs.x = xs[s];
            cs.corner_id = c;
            cs.cond = *slots[s].cond[c];
            res.samples.push_back(cs);
        }

    if (!res.samples.empty()) {
        std::vector<double> vals;
        vals.reserve(res.samples.size());
        for (const auto& s : res.samples) vals.push_back(s.cond);
        std::sort(vals.begin(), vals.end());
        res.max_cond = vals.back();
        res.p99_cond = vals[std::size_t(0.99 * (vals.size() - 1))];
    }
    return res;
}

Histogram log10_histogram(const std::vector<CondSample>& samples, int bins) {
    Histogram h;
    if (samples.empty() || bins < 1) return h;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : samples) {
        const double v = std::log10(std::max(s.cond, 1e-300));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1.0;
    h.bin_left.resize(bins);
    h.bin_right.resize(bins);
    h.count.assign(bins, 0);
    const double w = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        h.bin_left[b] = lo + b * w;
        h.bin_right[b] = lo + (b + 1) * w;
    }
    for (const auto& s : samples) {
        const double v = std::log10(std::max(s.cond, 1e-300));
        int b = int((v - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        ++h.count[b];
    }
    return h;
}

void write_samples_csv(const std::string& path,
                       const std::vector<CondSample>& samples) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fputs("sample_index,subgroup,t1,t2,gamma,theta,k1,k2,nu1,nu2,corner_id,cond\n", f);
    for (const auto& s : samples)
        std::fprintf(f, "%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                     static_cast<unsigned long long>(s.index),
                     subgroup_name(s.subgroup).c_str(), s.x.t1, s.x.t2, s.x.gamma,
                     s.x.theta, s.x.k1, s.x.k2, s.x.nu1, s.x.nu2, s.corner_id, s.cond);
    std::fclose(f);
}

void write_histogram_csv(const std::string& path, const Histogram& hist) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fputs("bin_left,bin_right,count\n", f);
    for (std::size_t b = 0; b < hist.count.size(); ++b)
        std::fprintf(f, "%.17g,%.17g,%llu\n", hist.bin_left[b], hist.bin_right[b],
                     static_cast<unsigned long long>(hist.count[b]));
    std::fclose(f);
}

std::vector<RayPoint> ray_study(const ParamRanges& ranges, int steps,
                                double box_edge, double delta_eps) {
    if (steps < 2) throw std::invalid_argument("ray_study: steps must be >= 2");
    ranges.validate();
    const double half = box_edge / 2.0;
    const Eigen::Vector2d probe(half, half);
    std::vector<RayPoint> out;
    out.reserve(steps);
    for (int s = 0; s < steps; ++s) {
        const double r = double(s) / (steps - 1);
        TransformParams x;
        x.t1 = r * ranges.t_hi;
        x.t2 = r * ranges.t_hi;
        x.gamma = 1.0 + r * (ranges.gamma_hi - 1.0);
        x.theta = r * ranges.theta_hi;
        x.k1 = 1.0 + r * ranges.k1_hi;
        x.k2 = r * ranges.k2_hi;
        x.nu1 = r * ranges.nu_hi;
        x.nu2 = r * ranges.nu_hi;
        RayPoint pt;
        pt.ratio = r;
        pt.cond_full8 = condition_number(x, probe, Subgroup::full8, delta_eps);
        pt.cond_translation_known =
            condition_number(x, probe, Subgroup::translation_known, delta_eps);
        pt.cond_similarity_known =
            condition_number(x, probe, Subgroup::similarity_known, delta_eps);
        out.push_back(pt);
    }
    return out;
}

void write_ray_csv(const std::string& path, const std::vector<RayPoint>& pts) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fputs("ratio,cond_full8,cond_translation_known,cond_similarity_known\n", f);
    auto cell = [](const std::optional<double>& v) {
        char buf[40];
        if (v)
            std::snprintf(buf, sizeof buf, "%.17g", *v);
        else
            std::snprintf(buf, sizeof buf, "rejected");
        return std::string(buf);
    };
    for (const auto& p : pts)
        std::fprintf(f, "%.17g,%s,%s,%s\n", p.ratio, cell(p.cond_full8).c_str(),
                     cell(p.cond_translation_known).c_str(),
                     cell(p.cond_similarity_known).c_str());
    std::fclose(f);
}

}  // namespace ptk
