#include "ptk/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ptk::losses {

namespace {
constexpr double kLogClamp = 1e-12;
}

Eigen::MatrixXd hamming_label(int width, int height, double cx, double cy,
                              double radius) {
    if (radius <= 0.0) throw std::invalid_argument("hamming_label: radius must be > 0");
    Eigen::MatrixXd m(height, width);
    auto profile = [radius](double d) {
        d = std::abs(d);
        if (d > radius) return 0.0;
        return 0.54 + 0.46 * std::cos(M_PI * d / radius);
    };
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            const double v = profile(c - cx) * profile(r - cy);
            m(r, c) = std::clamp(v, 0.0, 1.0);
        }
    return m;
}

LabelSets build_label_sets(const Eigen::MatrixXd& pred,
                           const Eigen::MatrixXd& label, double tau, int k,
                           int pos_cap) {
    if (pred.rows() != label.rows() || pred.cols() != label.cols())
        throw std::invalid_argument("build_label_sets: shape mismatch");
    LabelSets s;
    const int n = int(pred.size());
    std::vector<int> neg_candidates;
    for (int i = 0; i < n; ++i) {
        if (label(i) >= tau)
            s.positives.push_back(i);
        else
            neg_candidates.push_back(i);
    }
    if (pos_cap > 0 && int(s.positives.size()) > pos_cap) {
        std::stable_sort(s.positives.begin(), s.positives.end(),
                         [&](int a, int b) { return pred(a) > pred(b); });
        s.positives.resize(pos_cap);
        std::sort(s.positives.begin(), s.positives.end());
        s.pos_cap_active = true;
    }
    // hard negatives: largest predicted scores among non-positives
    const int take = std::min<int>(k, int(neg_candidates.size()));
    std::stable_sort(neg_candidates.begin(), neg_candidates.end(),
                     [&](int a, int b) { return pred(a) > pred(b); });
    s.negatives.assign(neg_candidates.begin(), neg_candidates.begin() + take);
    std::sort(s.negatives.begin(), s.negatives.end());
    s.k = int(s.negatives.size());
    s.q = int(s.positives.size());
    return s;
}

ScalarGrad loss_cls(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label,
                    const LabelSets& sets) {
    if (sets.k <= 0 || sets.q <= 0)
        throw std::invalid_argument("loss_cls: needs nonempty positive and negative sets");
    ScalarGrad out;
    out.grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
    for (int i : sets.negatives) {
        const double p = std::min(pred(i), 1.0 - kLogClamp);
        out.value += -std::log(1.0 - p) / sets.k;
        out.grad(i) += 1.0 / ((1.0 - p) * sets.k);
    }
    for (int j : sets.positives) {
        const double d = pred(j) - label(j);
        out.value += std::abs(d) / sets.q;
        out.grad(j) += (d >= 0 ? 1.0 : -1.0) / sets.q;
    }
    return out;
}

double smooth_l1(double x) {
    const double a = std::abs(x);
    return a <= 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_grad(double x) {
    if (std::abs(x) <= 1.0) return x;
    return x > 0 ? 1.0 : -1.0;
}

OffsetLoss loss_reg(const Eigen::MatrixXd& pred_x, const Eigen::MatrixXd& pred_y,
                    const Eigen::MatrixXd& label_x, const Eigen::MatrixXd& label_y,
                    const std::vector<int>& eligible, int u) {
    if (u <= 0) throw std::invalid_argument("loss_reg: u must be > 0");
    OffsetLoss out;
    out.grad_x = Eigen::MatrixXd::Zero(pred_x.rows(), pred_x.cols());
    out.grad_y = Eigen::MatrixXd::Zero(pred_y.rows(), pred_y.cols());
    if (eligible.empty()) {
        out.empty_eligible = true;
        return out;
    }
    for (int i : eligible) {
        const double dx = pred_x(i) - label_x(i);
        const double dy = pred_y(i) - label_y(i);
        out.value += (smooth_l1(dx) + smooth_l1(dy)) / u;
        out.grad_x(i) += smooth_l1_grad(dx) / u;
        out.grad_y(i) += smooth_l1_grad(dy) / u;
    }
    return out;
}

ScalarGrad loss_cls2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label) {
    if (pred.rows() != label.rows() || pred.cols() != label.cols())
        throw std::invalid_argument("loss_cls2: shape mismatch");
    ScalarGrad out;
    out.grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
    const double n = double(pred.size());
    for (int i = 0; i < int(pred.size()); ++i) {
        const double p = std::clamp(pred(i), kLogClamp, 1.0 - kLogClamp);
        const double y = label(i);
        out.value += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) / n;
        out.grad(i) = (-(y / p) + (1.0 - y) / (1.0 - p)) / n;
    }
    return out;
}

double loss_similarity(double cls, double reg, double cls2, double reg2) {
    return cls + reg + cls2 + reg2;
}

TripletLoss loss_triplet(const Eigen::MatrixXd& anchor,
                         const Eigen::MatrixXd& positive,
                         const Eigen::MatrixXd& negative, double alpha) {
    if (anchor.rows() != positive.rows() || anchor.rows() != negative.rows() ||
        anchor.cols() != positive.cols() || anchor.cols() != negative.cols())
        throw std::invalid_argument("loss_triplet: shape mismatch");
    TripletLoss out;
    const double m2 = double(anchor.size());
    const double d_ap = (anchor - positive).norm();
    const double d_na = (negative - anchor).norm();
    const double hinge = d_ap - d_na + alpha;
    out.grad_anchor = Eigen::MatrixXd::Zero(anchor.rows(), anchor.cols());
    out.grad_positive = out.grad_anchor;
    out.grad_negative = out.grad_anchor;
    if (hinge <= 0.0) return out;
    out.value = hinge / m2;
    if (d_ap > 0.0) {
        out.grad_anchor += (anchor - positive) / (d_ap * m2);
        out.grad_positive = -(anchor - positive) / (d_ap * m2);
    }
    if (d_na > 0.0) {
        out.grad_anchor += (negative - anchor) / (d_na * m2);
        out.grad_negative = -(negative - anchor) / (d_na * m2);
    }
    return out;
}

double loss_sup_corners(const CornerOffsets& truth, const CornerOffsets& pred) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
        acc += (truth.d[i] - pred.d[i]).lpNorm<1>();
    return acc / 4.0;
}

double loss_neg(const CornerOffsets& pred) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
        acc += smooth_l1(pred.d[i].x()) + smooth_l1(pred.d[i].y());
    return acc / 4.0;
}

double loss_residual_total(double neg, double triplet, double sup,
                           const LossWeights& w) {
    return w.lambda2 * neg + w.lambda3 * triplet + w.lambda4 * sup;
}

double loss_total(double similarity, double residual, double lambda1) {
    if (lambda1 < 0.0) throw std::invalid_argument("loss_total: lambda1 must be >= 0");
    return lambda1 * similarity + residual;
}

}  // namespace ptk::losses
