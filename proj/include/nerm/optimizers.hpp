#ifndef NERM_OPTIMIZERS_HPP
#define NERM_OPTIMIZERS_HPP

#include <cstdint>
#include <vector>

#include "nerm/losses.hpp"
#include "nerm/noise.hpp"
#include "nerm/sparse.hpp"

namespace nerm {

// One draw from a task: a perturbed sample together with its expectation.
// For the pairwise ranking task x_hat/x_bar hold merged pair differences and
// index is unused.
struct Sample {
  std::size_t index = 0;
  SparseVector x_hat;
  double label = 0.0;
  SparseVector x_bar;
};

// eta_t = c / (gamma + t), t >= 1.
struct StepSchedule {
  double c = 1.0;
  double gamma = 1.0;
  double eta(std::int64_t t) const {
    return c / (gamma + static_cast<double>(t));
  }
};

// --- SGD ---------------------------------------------------------------

// theta <- theta - eta_t*(phi'(x_hat^T theta)*x_hat + lambda2*theta),
// as scale-then-sparse-axpy; followed by the l1 prox when lambda1 > 0.
void sgd_step(DenseVector& theta, const Sample& s, LossKind loss,
              const RegSpec& reg, double eta_t);

// --- SSAG --------------------------------------------------------------

// State of the scalar-control-variate stepper: a = a_num/a_den are the
// moving-average ratio coefficient and its numerator/denominator, x_bar_mean
// is the fixed mean of expected samples, beta_t = t^(-beta_exponent).
struct SsagState {
  DenseVector theta;
  DenseVector x_bar_mean;
  double a = 0.0;
  double a_num = 0.0;  // a~_t
  double a_den = 0.0;  // s_t
  std::int64_t t = 1;
  double beta_exponent = 0.75;
  std::int64_t degenerate_steps = 0;  // steps where a_den stayed 0
};

SsagState make_ssag(DenseVector theta0, DenseVector x_bar_mean,
                    double beta_exponent = 0.75);

// v = (phi'(x_hat^T theta) - a)*x_hat + a*x_tilde + lambda2*theta.
// Fills v (resized to theta's dim) and returns the derivative phi'.
double ssag_direction(const DenseVector& theta, SparseView x_hat, double label,
                      double a, const DenseVector& x_tilde, LossKind loss,
                      const RegSpec& reg, DenseVector& v);

// One iteration: direction, theta update (proximal when lambda1 > 0), then
// the moving-average updates of a_num, a_den, a with beta_t = t^(-c2).
void ssag_step(SsagState& st, const Sample& s, LossKind loss,
               const RegSpec& reg, const StepSchedule& sched);

// --- S-SAGA --------------------------------------------------------------

struct SsagaState {
  DenseVector theta;
  std::vector<double> a_table;  // per-sample derivative memory
  DenseVector m;                // (1/n) sum a_i x_bar_i, kept incrementally
  std::int64_t t = 1;
};

// a_i <- phi'_i(x_hat_i^T theta0) with one fresh perturbation per sample;
// m <- (1/n) sum a_i x_bar_i with x_bar_i = expected_sample(x_i).
SsagaState ssaga_init(const SparseDataset& ds, const DenseVector& theta0,
                      LossKind loss, const NoiseSpec& noise, RngStream& rng);

// v = (phi'(x_hat^T theta) - a_i)*x_hat + m + lambda2*theta.
double ssaga_direction(const DenseVector& theta, SparseView x_hat,
                       double label, double a_i, const DenseVector& m,
                       LossKind loss, const RegSpec& reg, DenseVector& v);

// One iteration. Order is fixed: theta update, then the m update
// m += (1/n)(d_t - a_i)*x_bar_i, and only then the overwrite a_i <- d_t.
void ssaga_step(SsagaState& st, const Sample& s, LossKind loss,
                const RegSpec& reg, const StepSchedule& sched);

// Fresh (1/n) sum a_i x_bar_i for drift checks against the incremental m.
DenseVector ssaga_recompute_m(const SsagaState& st, const SparseDataset& ds,
                              const NoiseSpec& noise);

// --- ADAGRAD -------------------------------------------------------------

struct AdagradState {
  DenseVector theta;
  DenseVector accumulator;  // per-coordinate sum of squared gradients
  double base_eta = 0.1;
  double epsilon = 1e-8;
};

AdagradState make_adagrad(DenseVector theta0, double base_eta,
                          double epsilon = 1e-8);

// Dense diagonal update: g = phi'*x_hat + lambda2*theta, acc += g.^2,
// theta_j -= base_eta * g_j / (epsilon + sqrt(acc_j)).
void adagrad_step(AdagradState& st, const Sample& s, LossKind loss,
                  const RegSpec& reg);

// --- iterate averaging -----------------------------------------------------

// Online form of the weighted average
//   theta_bar_T = 2/(T(2*gamma+T-1)) * sum_{t=0}^{T-1} (gamma+t) theta_t
// via theta_bar_t = (1-rho_t) theta_bar_{t-1} + rho_t theta_{t-1} with
// rho_t = 2(gamma+t-1)/(t(2*gamma+t-1)) and theta_bar_0 = 0.
struct AveragerState {
  DenseVector theta_bar;
  std::int64_t t = 0;
  double gamma = 1.0;
};

// Call with theta_{t-1} immediately before the step producing theta_t.
void average_update(AveragerState& st, const DenseVector& theta_prev);

// --- proximal step -----------------------------------------------------------

// theta <- prox_{eta_t * lambda1 |.|_1}(theta_after_grad); called by the
// steppers only when lambda1 > 0.
DenseVector proximal_apply(const RegSpec& reg, double eta_t,
                           const DenseVector& theta_after_grad);

}  // namespace nerm

#endif
