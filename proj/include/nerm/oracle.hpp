#ifndef NERM_ORACLE_HPP
#define NERM_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nerm/losses.hpp"
#include "nerm/noise.hpp"
#include "nerm/optimizers.hpp"
#include "nerm/sparse.hpp"

namespace nerm {

// Brute-force verification substrate: expectations over (sample index,
// dropout mask) are computed by exact enumeration. Noise must be "none" or
// dropout; the weighted term count sum_i 2^nnz_i is capped, larger inputs
// are refused.
struct EnumerableProblem {
  const SparseDataset* data = nullptr;
  NoiseSpec noise;
  LossKind loss = LossKind::logistic;
  RegSpec reg;
};

inline constexpr std::uint64_t kEnumerationBudget = 1ull << 20;

// sum_i 2^nnz_i for dropout, n for "none".
std::uint64_t enumeration_cost(const SparseDataset& ds, const NoiseSpec& noise);

// Calls fn(row, x_hat, p_mask) for every (row, mask) outcome, where p_mask
// multiplies to 1 over the masks of a row. The x_hat view aliases an
// internal scratch buffer valid only during the call.
// Throws OracleError when the budget is exceeded or the noise kind has no
// closed-form enumeration.
void enumerate_outcomes(
    const EnumerableProblem& p,
    const std::function<void(std::size_t, SparseView, double)>& fn);

// (1/n) sum_i sum_masks P(mask) * h(i, x_hat).
double exact_expectation(
    const EnumerableProblem& p,
    const std::function<double(std::size_t, SparseView)>& h);

// Coordinate-wise expectation of a vector-valued h that adds its
// contribution scaled by `weight` into the accumulator.
DenseVector exact_mean_vector(
    const EnumerableProblem& p, std::size_t dim,
    const std::function<void(std::size_t, SparseView, double weight,
                             DenseVector& acc)>& h);

// Exact gradient of F(theta) = (1/n) sum_i E[phi_i(x_hat_i^T theta)]
// + (lambda2/2)||theta||^2, by enumeration.
DenseVector exact_gradient(const EnumerableProblem& p,
                           const DenseVector& theta);

// Exact smooth objective F(theta); add_l1 appends lambda1*||theta||_1 for
// the composite objective.
double exact_objective(const EnumerableProblem& p, const DenseVector& theta,
                       bool add_l1 = false);

// a* = E[phi'(x_hat^T theta) ||x_hat||^2] / E[||x_hat||^2].
// Throws OracleError when the denominator vanishes.
double exact_a_star(const EnumerableProblem& p, const DenseVector& theta);

// --- reference SAGA ---------------------------------------------------------

// Noise-free SAGA over scripted indices: scalar derivative memory, running
// mean of memory gradients, eta_t = c/(gamma+t). Written as a standalone
// code path (plain loops, own state) so it can arbitrate the stepper.
struct SagaTrace {
  std::vector<DenseVector> thetas;      // theta_1 .. theta_T
  std::vector<DenseVector> directions;  // v_1 .. v_T
};

SagaTrace reference_saga(const SparseDataset& ds, const DenseVector& theta0,
                         LossKind loss, const RegSpec& reg,
                         std::span<const std::size_t> index_sequence,
                         const StepSchedule& sched);

// --- running-mean estimator --------------------------------------------------

// The motivating estimator that tracks E[x_hat] with the running average
// x_tilde_t = (1-1/t) x_tilde_{t-1} + (1/t) x_hat_{i_t} instead of the fixed
// mean; kept here purely to verify its bias identity.
struct RunningMeanState {
  DenseVector x_tilde;
  std::int64_t t = 0;
};

void running_xtilde_update(RunningMeanState& st, SparseView x_hat);

// z_t = (phi'(x_hat^T theta) - a_t) x_hat + a_t x_tilde_t + lambda2*theta,
// where x_tilde_t is formed from (x_tilde_prev, x_hat, t) on the fly.
DenseVector running_estimator_direction(const DenseVector& theta,
                                        SparseView x_hat, double label,
                                        double a_t,
                                        const DenseVector& x_tilde_prev,
                                        std::int64_t t, LossKind loss,
                                        const RegSpec& reg);

// --- scalar prox grid oracle --------------------------------------------------

// Independent 1-D minimizer of eta*lambda1*|t| + (t-q)^2/2 by coarse grid
// search plus refinement; accurate to ~1e-8 for |q| <= 100.
double prox_scalar_grid_oracle(double q, double eta, double lambda1);

// --- high-precision minimizer ------------------------------------------------

struct MinimizeResult {
  DenseVector theta;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::int64_t iterations = 0;
};

// Deterministic accelerated full-gradient descent with backtracking on the
// enumeration-exact F, run until ||grad F|| <= grad_tol. Requires
// lambda2 > 0 and lambda1 == 0; throws OracleError on non-convergence.
MinimizeResult high_precision_minimizer(const EnumerableProblem& p,
                                        double grad_tol = 1e-12,
                                        std::int64_t max_iter = 1000000);

}  // namespace nerm

#endif
