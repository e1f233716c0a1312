#pragma once

#include "marginlab/dataset.hpp"
#include "marginlab/predictor.hpp"

namespace marginlab {

// Stable per-sample pieces, all in natural-log space.
// log ell(u) for the margin u = y f(theta, x):
double log_loss(LossKind loss, double u);
// log(-ell'(u)), the log of the (positive) negative loss derivative:
double log_neg_dloss(LossKind loss, double u);

/// log((1/n) sum_i w_i ell(u_i)), max-shifted log-sum-exp over the margins.
double log_data_risk(const Vector& margins, const WeightVector& w, LossKind loss);

/// Regularized weighted risk L_lambda = (1/n) sum w_i ell(y_i f) + lambda ||theta||^r,
/// returned in log space so that margins far past double underflow stay usable.
RiskValue weighted_risk(const Predictor& pred, const Vector& theta, const Dataset& data,
                        const WeightVector& w, LossKind loss, double lambda = 0.0, double r = 2.0);

/// Gradient of the regularized weighted risk. Per-sample coefficients are
/// formed in log space then exponentiated, so the result is finite for any
/// finite theta.
Vector weighted_risk_gradient(const Predictor& pred, const Vector& theta, const Dataset& data,
                              const WeightVector& w, LossKind loss, double lambda = 0.0,
                              double r = 2.0);

/// grad(L)/L for the unregularized risk, computed with a shared shift so the
/// ratio survives when both numerator and denominator underflow. Used for the
/// boosting envelope quantities b_t = ||grad L|| / L.
Vector gradient_over_risk(const Predictor& pred, const Vector& theta, const Dataset& data,
                          const WeightVector& w, LossKind loss);

/// D_KL(p || w) = sum_{p_i > 0} p_i log(p_i / w_i), w raw (not normalized),
/// with the 0 log 0 = 0 convention.
double generalized_kl(const Vector& p, const WeightVector& w);

}  // namespace marginlab
