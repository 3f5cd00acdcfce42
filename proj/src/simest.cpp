#include "ptk/simest.hpp"

#include <cmath>
#include <stdexcept>

#include "ptk/kernels.hpp"

namespace ptk {

namespace {

// 1-D quadratic peak refinement over three equally spaced samples,
// result in (-0.5, 0.5) around the center sample.
double quadratic_offset(double sm, double s0, double sp) {
    const double denom = sm - 2.0 * s0 + sp;
    if (denom >= -1e-12) return 0.0;  // not a proper maximum
    const double d = 0.5 * (sm - sp) / denom;
    return std::clamp(d, -0.5, 0.5);
}

// resamples img under the similarity (gamma, theta) about its own center
Raster similarity_warp(const Raster& img, double gamma, double theta) {
    const double c = (img.width - 1) / 2.0;
    TransformParams x;
    x.gamma = gamma;
    x.theta = theta;
    Eigen::Matrix3d to_c = Eigen::Matrix3d::Identity(), from_c = to_c;
    to_c(0, 2) = c;
    to_c(1, 2) = c;
    from_c(0, 2) = -c;
    from_c(1, 2) = -c;
    Homography s;
    s.m = to_c * build_homography(x).m * from_c;
    return warp_homography(img, invert(s), img.width, img.height, Border::clamp);
}

}  // namespace

ResponseMap correlate(const Raster& templ, const Raster& search, int stride) {
    if (stride < 1) throw std::invalid_argument("correlate: stride must be >= 1");
    if (templ.width > search.width || templ.height > search.height)
        throw std::invalid_argument("correlate: template larger than search");

    const int tw = templ.width, th = templ.height;
    const std::size_t tn = std::size_t(tw) * th;

    // zero-mean template
    const double t_mean = kernels::sum(templ.data) / double(tn);
    std::vector<float> t0(tn);
    for (std::size_t i = 0; i < tn; ++i) t0[i] = float(templ.data[i] - t_mean);
    const double t_norm = std::sqrt(kernels::sum_sq(t0));
    if (t_norm < 1e-9)
        throw std::invalid_argument("correlate: constant template (zero variance)");

    const int mw = (search.width - tw) / stride + 1;
    const int mh = (search.height - th) / stride + 1;
    ResponseMap map;
    map.stride = stride;
    map.template_w = tw;
    map.template_h = th;
    map.search_w = search.width;
    map.search_h = search.height;
    map.scores.setZero(mh, mw);
    map.off_x.setZero(mh, mw);
    map.off_y.setZero(mh, mw);

    for (int i = 0; i < mh; ++i) {
        const int y0 = i * stride;
        for (int j = 0; j < mw; ++j) {
            const int x0 = j * stride;
            double dot = 0.0, psum = 0.0, psq = 0.0;
            for (int r = 0; r < th; ++r) {
                std::span<const float> srow(search.row(y0 + r) + x0, std::size_t(tw));
                std::span<const float> trow(t0.data() + std::size_t(r) * tw, std::size_t(tw));
                dot += kernels::dot(trow, srow);
                psum += kernels::sum(srow);
                psq += kernels::sum_sq(srow);
            }
            const double var = psq - psum * psum / double(tn);
            const double p_norm = var > 0.0 ? std::sqrt(var) : 0.0;
            map.scores(i, j) = p_norm < 1e-9 ? 0.0 : dot / (t_norm * p_norm);
        }
    }

    for (int i = 0; i < mh; ++i)
        for (int j = 0; j < mw; ++j) {
            if (j > 0 && j + 1 < mw)
                map.off_x(i, j) = stride * quadratic_offset(map.scores(i, j - 1),
                                                            map.scores(i, j),
                                                            map.scores(i, j + 1));
            if (i > 0 && i + 1 < mh)
                map.off_y(i, j) = stride * quadratic_offset(map.scores(i - 1, j),
                                                            map.scores(i, j),
                                                            map.scores(i + 1, j));
        }
    return map;
}

std::pair<Eigen::Vector2d, double> estimate_translation(const ResponseMap& map) {
    if (map.scores.size() == 0)
        throw std::invalid_argument("estimate_translation: empty map");
    int bi = 0, bj = 0;
    double best = map.scores(0, 0);
    for (int i = 0; i < map.scores.rows(); ++i)
        for (int j = 0; j < map.scores.cols(); ++j)
            if (map.scores(i, j) > best) {
                best = map.scores(i, j);
                bi = i;
                bj = j;
            }
    // template center position in search coordinates, search-center origin
    const double cx = bj * map.stride + (map.template_w - 1) / 2.0 -
                      (map.search_w - 1) / 2.0 + map.off_x(bi, bj);
    const double cy = bi * map.stride + (map.template_h - 1) / 2.0 -
                      (map.search_h - 1) / 2.0 + map.off_y(bi, bj);
    return {Eigen::Vector2d(cx, cy), best};
}

ScaleRotEstimate estimate_scale_rotation(const Raster& templ, const Raster& search,
                                         const Eigen::Vector2d& t_hat,
                                         const SimestConfig& cfg) {
    const int n = cfg.rsew_n;
    if (n <= 0 || n % 2) throw std::invalid_argument("estimate_scale_rotation: rsew_n must be even");

    const int te = templ.width;
    if (search.width < te || search.height < te)
        throw std::invalid_argument("estimate_scale_rotation: search smaller than template");

    // recenter the object and crop the search to the template support
    Homography shift;
    shift.m(0, 2) = t_hat.x() + (search.width - te) / 2.0;
    shift.m(1, 2) = t_hat.y() + (search.height - te) / 2.0;
    const Raster patch = warp_homography(search, shift, te, te);

    // remove the per-column (angular) mean: the smooth radial profile is
    // shared by every row, carries no rotation information, and its broad
    // autocorrelation along the scale axis otherwise swamps the peak
    auto remove_radial_profile = [n](Raster img) {
        for (int x = 0; x < n; ++x) {
            double s = 0.0;
            for (int y = 0; y < n; ++y) s += img.at(x, y);
            const float m = float(s / n);
            for (int y = 0; y < n; ++y) img.at(x, y) -= m;
        }
        return img;
    };
    const Raster lp_tf = remove_radial_profile(rsew_warp(templ, 0.0, 0.0, n));
    const Raster lp_s = remove_radial_profile(rsew_warp(patch, 0.0, 0.0, n));

    // shift search range from the parameter bounds
    const double log_s = std::log(n / 4.0);
    const int dx = std::min(n / 4,
        int(std::ceil(n * std::log(cfg.scale_search) / (2.0 * log_s))) + 2);
    const int dr = std::min(n / 2,
        int(std::ceil(n * cfg.theta_search / (4.0 * M_PI))) + 2);

    // Only the right half of the scale axis carries information: columns left
    // of n/2 sample sub-pixel radii, i.e. interpolations of the center pixel.
    // Keep template columns [n/2, n - dx) so every scale placement correlates
    // against valid search data (no zero padding, which inflates edge
    // placements).
    const int c0 = n / 2, c1 = n - dx;
    auto crop_cols = [n, c0, c1](const Raster& img, int lo, int hi) {
        Raster out(hi - lo, n);
        for (int y = 0; y < n; ++y)
            std::copy_n(img.row(y) + lo, out.width, out.row(y));
        return out;
    };
    const Raster lp_tu = crop_cols(lp_tf, c0, c1);

    // Hamming-profile roll-off over the crop edges of the scale axis: softens
    // the hard column crop without suppressing the informative outer radii (a
    // full-width window would down-weight exactly the feature-bearing columns)
    Raster lp_t = lp_tu;
    const int taper = std::min(8, lp_t.width / 4);
    for (int x = 0; x < lp_t.width; ++x) {
        const int edge = std::min(x, lp_t.width - 1 - x);
        if (edge >= taper) continue;
        const double w = 0.54 - 0.46 * std::cos(M_PI * edge / taper);
        for (int y = 0; y < n; ++y) lp_t.at(x, y) = float(lp_t.at(x, y) * w);
    }

    // angle axis is circular: take valid rows from the circularly padded image
    const Raster padded = pad_for_correlation(lp_s, 0);
    Raster roi(c1 + dx - (c0 - dx), n + 2 * dr);
    for (int y = 0; y < roi.height; ++y)
        std::copy_n(padded.row(n / 2 - dr + y) + (c0 - dx), roi.width, roi.row(y));

    const ResponseMap map = correlate(lp_t, roi, 1);
    auto [peak, score] = estimate_translation(map);
    // estimate_translation reports center-origin coordinates; the zero-shift
    // placement sits exactly at the roi center by construction
    auto [gamma, theta] = recover_scale_rotation(peak.x(), peak.y(), n);

    // confidence from the unwindowed template at the found placement, so an
    // exact match scores 1 regardless of the localization window
    const int bj = std::clamp(int(std::lround(peak.x())) + dx, 0, roi.width - lp_t.width);
    const int bi = std::clamp(int(std::lround(peak.y())) + dr, 0, roi.height - n);
    Raster window(lp_t.width, n);
    for (int y = 0; y < n; ++y)
        std::copy_n(roi.row(bi + y) + bj, window.width, window.row(y));
    const ResponseMap at_peak = correlate(lp_tu, window, 1);

    ScaleRotEstimate est;
    est.gamma = gamma;
    est.theta = theta;
    est.confidence = at_peak.scores(0, 0);
    return est;
}

SimilarityEstimate estimate_similarity(const Raster& templ, const Raster& search,
                                       const SimestConfig& cfg) {
    if (!templ.square() || !search.square())
        throw std::invalid_argument("estimate_similarity: square rasters expected");

    // stage 1: coarse translation. A plain correlation peak does not survive
    // large in-range scale/rotation, so probe a coarse grid of template
    // pre-warps and keep the best-scoring placement.
    std::vector<std::pair<double, double>> probes;
    const int n_th = int(std::floor(cfg.theta_search / cfg.probe_theta_step));
    const int n_sc =
        int(std::floor(std::log(cfg.scale_search) / std::log(cfg.probe_scale_step)));
    for (int si = -n_sc; si <= n_sc; ++si)
        for (int ti = -n_th; ti <= n_th; ++ti)
            probes.emplace_back(std::pow(cfg.probe_scale_step, si),
                                ti * cfg.probe_theta_step);

    Eigen::Vector2d t_hat = Eigen::Vector2d::Zero();
    double conf_t = -2.0;
    for (const auto& [g, th] : probes) {
        const Raster warped =
            (g == 1.0 && th == 0.0) ? templ : similarity_warp(templ, g, th);
        auto [t, c] = estimate_translation(correlate(warped, search, cfg.stride));
        if (c > conf_t) {
            conf_t = c;
            t_hat = t;
        }
    }

    // stage 2: scale/rotation on the recentered patch
    ScaleRotEstimate sr = estimate_scale_rotation(templ, search, t_hat, cfg);

    // refinement: re-estimate the translation with the template warped by the
    // stage-2 estimate (sharp, unbiased peak), then redo stage 2 there
    const Raster matched = similarity_warp(templ, sr.gamma, sr.theta);
    auto [t_ref, conf_ref] = estimate_translation(correlate(matched, search, 1));
    if (conf_ref >= conf_t) {
        t_hat = t_ref;
        conf_t = conf_ref;
        sr = estimate_scale_rotation(templ, search, t_hat, cfg);
    }

    SimilarityEstimate est;
    est.t = t_hat;
    est.gamma = sr.gamma;
    est.theta = sr.theta;
    est.confidence = std::min(conf_t, sr.confidence);
    return est;
}

}  // namespace ptk
