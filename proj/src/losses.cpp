#include "nerm/losses.hpp"

#include <cmath>

#include "nerm/errors.hpp"

namespace nerm {

LossKind parse_loss(std::string_view token) {
  if (token == "logistic") return LossKind::logistic;
  if (token == "sqhinge") return LossKind::squared_hinge;
  if (token == "squared") return LossKind::squared;
  throw ConfigError("unknown loss \"" + std::string(token) + "\"");
}

std::string format_loss(LossKind kind) {
  switch (kind) {
    case LossKind::logistic:
      return "logistic";
    case LossKind::squared_hinge:
      return "sqhinge";
    case LossKind::squared:
      return "squared";
  }
  return "logistic";
}

double loss_value(LossKind kind, double u, double label) {
  switch (kind) {
    case LossKind::logistic: {
      const double z = -label * u;
      // log(1+e^z) split on the sign of z so the exp never overflows
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    case LossKind::squared_hinge: {
      const double h = u < 1.0 ? 1.0 - u : 0.0;
      return h * h;
    }
    case LossKind::squared: {
      const double r = label - u;
      return r * r;
    }
  }
  return 0.0;
}

double loss_deriv(LossKind kind, double u, double label) {
  switch (kind) {
    case LossKind::logistic: {
      const double m = label * u;
      if (m > 0.0) {
        const double e = std::exp(-m);
        return -label * e / (1.0 + e);
      }
      return -label / (1.0 + std::exp(m));
    }
    case LossKind::squared_hinge:
      return u < 1.0 ? -2.0 * (1.0 - u) : 0.0;
    case LossKind::squared:
      return 2.0 * (u - label);
  }
  return 0.0;
}

DenseVector reg_grad(const RegSpec& reg, const DenseVector& theta) {
  DenseVector out(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    out[j] = reg.lambda2 * theta[j];
  return out;
}

void prox_l1_inplace(const RegSpec& reg, double eta, DenseVector& q) {
  const double tau = eta * reg.lambda1;
  if (tau == 0.0) return;
  for (double& v : q) {
    if (v > tau)
      v -= tau;
    else if (v < -tau)
      v += tau;
    else
      v = 0.0;
  }
}

DenseVector prox(const RegSpec& reg, double eta, const DenseVector& q) {
  DenseVector out = q;
  prox_l1_inplace(reg, eta, out);
  return out;
}

}  // namespace nerm
