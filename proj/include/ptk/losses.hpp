#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ptk/geometry.hpp"

// Pure evaluators for the training losses: value plus gradient where the
// loss is differentiable. No training loop lives here.
namespace ptk::losses {

struct LossWeights {
    double lambda1 = 100.0;  // similarity loss weight in the total
    double lambda2 = 1.0;    // negative-sample residual loss
    double lambda3 = 1.0;    // triplet loss
    double lambda4 = 0.25;   // supervised corner loss
    double alpha = 1.0;      // triplet margin
};

// Index sets over a flattened score grid. The negative set is the K largest
// predicted scores among non-positive cells (hard negatives); positives are
// the cells whose label exceeds tau, optionally capped to the top pos_cap
// predictions.
struct LabelSets {
    std::vector<int> positives;
    std::vector<int> negatives;
    int k = 0;                  // |negatives|
    int q = 0;                  // |positives|
    bool pos_cap_active = false;
};

inline constexpr double kDefaultTau = 0.7;
inline constexpr int kDefaultK = 100;

// Separable Hamming bump, 1 at the center, 0 outside the support radius.
Eigen::MatrixXd hamming_label(int width, int height, double cx, double cy,
                              double radius);

LabelSets build_label_sets(const Eigen::MatrixXd& pred,
                           const Eigen::MatrixXd& label,
                           double tau = kDefaultTau, int k = kDefaultK,
                           int pos_cap = 0);

struct ScalarGrad {
    double value = 0.0;
    Eigen::MatrixXd grad;  // same shape as the prediction input
};

// -log(1 - pred) over hard negatives plus l1 over positives.
ScalarGrad loss_cls(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label,
                    const LabelSets& sets);

double smooth_l1(double x);
double smooth_l1_grad(double x);

struct OffsetLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_x;  // d/d pred_x
    Eigen::MatrixXd grad_y;
    bool empty_eligible = false;
};

// Mean component-wise smooth-l1 over the eligible cells.
OffsetLoss loss_reg(const Eigen::MatrixXd& pred_x, const Eigen::MatrixXd& pred_y,
                    const Eigen::MatrixXd& label_x, const Eigen::MatrixXd& label_y,
                    const std::vector<int>& eligible, int u);

// Two-class cross-entropy over probability grids.
ScalarGrad loss_cls2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label);

double loss_similarity(double cls, double reg, double cls2, double reg2);

struct TripletLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_anchor;
    Eigen::MatrixXd grad_positive;
    Eigen::MatrixXd grad_negative;
};

// Hinge on the anchor-positive vs negative-anchor Frobenius distances,
// scaled by 1/m^2 where m is the embedding edge length.
TripletLoss loss_triplet(const Eigen::MatrixXd& anchor,
                         const Eigen::MatrixXd& positive,
                         const Eigen::MatrixXd& negative, double alpha = 1.0);

// Mean per-corner l1 distance between true and predicted offsets.
double loss_sup_corners(const CornerOffsets& truth, const CornerOffsets& pred);

// Mean component-wise smooth-l1 of the predicted offsets against zero.
double loss_neg(const CornerOffsets& pred);

double loss_residual_total(double neg, double triplet, double sup,
                           const LossWeights& w = {});

double loss_total(double similarity, double residual, double lambda1 = 100.0);

}  // namespace ptk::losses
