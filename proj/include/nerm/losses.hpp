#ifndef NERM_LOSSES_HPP
#define NERM_LOSSES_HPP

#include <string>
#include <string_view>

#include "nerm/sparse.hpp"

namespace nerm {

enum class LossKind { logistic, squared_hinge, squared };

// "logistic" | "sqhinge" | "squared"
LossKind parse_loss(std::string_view token);
std::string format_loss(LossKind kind);

// Smooth l2 weight (lambda2, also the strong-convexity estimate used by the
// stepsize heuristics) and nonsmooth l1 weight (lambda1, handled only
// through the proximal operator).
struct RegSpec {
  double lambda2 = 0.0;
  double lambda1 = 0.0;
};

// logistic: log(1 + exp(-label*u)), overflow-safe for any |u|.
// squared_hinge: max(0, 1-u)^2, label ignored (u is already a pairwise
// margin). squared: (label - u)^2 with label the regression target.
double loss_value(LossKind kind, double u, double label);

// Derivatives w.r.t. u. At the squared-hinge kink u=1 the value is 0, the
// unique choice keeping the derivative continuous.
double loss_deriv(LossKind kind, double u, double label);

// Gradient of the smooth regularizer: lambda2 * theta.
DenseVector reg_grad(const RegSpec& reg, const DenseVector& theta);

// Soft-thresholding prox of eta*lambda1*|.|_1, coordinatewise
// sign(q)*max(|q| - eta*lambda1, 0); exact identity when lambda1 == 0.
void prox_l1_inplace(const RegSpec& reg, double eta, DenseVector& q);
DenseVector prox(const RegSpec& reg, double eta, const DenseVector& q);

}  // namespace nerm

#endif
