#include "nerm/oracle.hpp"

#include <cmath>

#include "nerm/errors.hpp"

namespace nerm {

std::uint64_t enumeration_cost(const SparseDataset& ds,
                               const NoiseSpec& noise) {
  if (noise.kind == NoiseKind::none) return ds.rows();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const std::size_t nnz = ds.row(i).nnz();
    if (nnz >= 63) return UINT64_MAX;
    total += 1ull << nnz;
    if (total > (1ull << 40)) return UINT64_MAX;
  }
  return total;
}

void enumerate_outcomes(
    const EnumerableProblem& p,
    const std::function<void(std::size_t, SparseView, double)>& fn) {
  const SparseDataset& ds = *p.data;
  if (p.noise.kind == NoiseKind::additive_gaussian)
    throw OracleError(
        "enumeration: no closed-form mask enumeration for gaussian noise");
  const std::uint64_t cost = enumeration_cost(ds, p.noise);
  if (cost > kEnumerationBudget)
    throw OracleError("enumeration budget exceeded (" + std::to_string(cost) +
                      " > " + std::to_string(kEnumerationBudget) + " terms)");

  if (p.noise.kind == NoiseKind::none) {
    for (std::size_t i = 0; i < ds.rows(); ++i) fn(i, ds.row(i), 1.0);
    return;
  }

  const double prob_drop = p.noise.param;
  const double prob_keep = 1.0 - prob_drop;
  const double scale = 1.0 / prob_keep;
  SparseVector scratch;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const SparseView row = ds.row(i);
    const std::size_t nnz = row.nnz();
    for (std::uint64_t mask = 0; mask < (1ull << nnz); ++mask) {
      scratch.indices.clear();
      scratch.values.clear();
      double prob = 1.0;
      for (std::size_t k = 0; k < nnz; ++k) {
        if (mask & (1ull << k)) {  // coordinate kept
          scratch.indices.push_back(row.indices[k]);
          scratch.values.push_back(row.values[k] * scale);
          prob *= prob_keep;
        } else {
          prob *= prob_drop;
        }
      }
      fn(i, scratch.view(), prob);
    }
  }
}

double exact_expectation(
    const EnumerableProblem& p,
    const std::function<double(std::size_t, SparseView)>& h) {
  double acc = 0.0;
  enumerate_outcomes(p, [&](std::size_t i, SparseView x_hat, double prob) {
    acc += prob * h(i, x_hat);
  });
  return acc / static_cast<double>(p.data->rows());
}

DenseVector exact_mean_vector(
    const EnumerableProblem& p, std::size_t dim,
    const std::function<void(std::size_t, SparseView, double weight,
                             DenseVector& acc)>& h) {
  DenseVector acc(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(p.data->rows());
  enumerate_outcomes(p, [&](std::size_t i, SparseView x_hat, double prob) {
    h(i, x_hat, prob * inv_n, acc);
  });
  return acc;
}

DenseVector exact_gradient(const EnumerableProblem& p,
                           const DenseVector& theta) {
  const SparseDataset& ds = *p.data;
  DenseVector grad = exact_mean_vector(
      p, ds.dim,
      [&](std::size_t i, SparseView x_hat, double w, DenseVector& acc) {
        const double d =
            loss_deriv(p.loss, dot(x_hat, theta), ds.labels[i]);
        axpy(w * d, x_hat, acc);
      });
  for (std::size_t j = 0; j < theta.size(); ++j)
    grad[j] += p.reg.lambda2 * theta[j];
  return grad;
}

double exact_objective(const EnumerableProblem& p, const DenseVector& theta,
                       bool add_l1) {
  const SparseDataset& ds = *p.data;
  double value = exact_expectation(p, [&](std::size_t i, SparseView x_hat) {
    return loss_value(p.loss, dot(x_hat, theta), ds.labels[i]);
  });
  double sq = 0.0, l1 = 0.0;
  for (double v : theta) {
    sq += v * v;
    l1 += v < 0.0 ? -v : v;
  }
  value += 0.5 * p.reg.lambda2 * sq;
  if (add_l1) value += p.reg.lambda1 * l1;
  return value;
}

double exact_a_star(const EnumerableProblem& p, const DenseVector& theta) {
  const SparseDataset& ds = *p.data;
  const double num = exact_expectation(p, [&](std::size_t i, SparseView x) {
    return loss_deriv(p.loss, dot(x, theta), ds.labels[i]) * sq_norm(x);
  });
  const double den = exact_expectation(
      p, [&](std::size_t, SparseView x) { return sq_norm(x); });
  if (den <= 0.0)
    throw OracleError("exact_a_star: degenerate problem, E||x_hat||^2 = 0");
  return num / den;
}

SagaTrace reference_saga(const SparseDataset& ds, const DenseVector& theta0,
                         LossKind loss, const RegSpec& reg,
                         std::span<const std::size_t> index_sequence,
                         const StepSchedule& sched) {
  const std::size_t n = ds.rows();
  const std::size_t dim = ds.dim;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> memory(n);
  for (std::size_t i = 0; i < n; ++i)
    memory[i] = loss_deriv(loss, dot(ds.row(i), theta0), ds.labels[i]);
  DenseVector mean_grad(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const SparseView r = ds.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k)
      mean_grad[r.indices[k]] += memory[i] * r.values[k];
  }
  for (double& v : mean_grad) v *= inv_n;

  DenseVector theta = theta0;
  SagaTrace trace;
  trace.thetas.reserve(index_sequence.size());
  trace.directions.reserve(index_sequence.size());
  std::int64_t t = 1;
  DenseVector v(dim);
  for (std::size_t i : index_sequence) {
    const SparseView r = ds.row(i);
    const double eta = sched.eta(t);
    const double core = loss_deriv(loss, dot(r, theta), ds.labels[i]);
    const double old = memory[i];
    for (std::size_t j = 0; j < dim; ++j)
      v[j] = mean_grad[j] + reg.lambda2 * theta[j];
    for (std::size_t k = 0; k < r.nnz(); ++k)
      v[r.indices[k]] += (core - old) * r.values[k];
    for (std::size_t j = 0; j < dim; ++j) theta[j] -= eta * v[j];
    for (std::size_t k = 0; k < r.nnz(); ++k)
      mean_grad[r.indices[k]] += (core - old) * r.values[k] * inv_n;
    memory[i] = core;
    trace.directions.push_back(v);
    trace.thetas.push_back(theta);
    ++t;
  }
  return trace;
}

void running_xtilde_update(RunningMeanState& st, SparseView x_hat) {
  ++st.t;
  const double inv_t = 1.0 / static_cast<double>(st.t);
  for (double& v : st.x_tilde) v *= 1.0 - inv_t;  // t=1 wipes the seed value
  axpy(inv_t, x_hat, st.x_tilde);
}

DenseVector running_estimator_direction(const DenseVector& theta,
                                        SparseView x_hat, double label,
                                        double a_t,
                                        const DenseVector& x_tilde_prev,
                                        std::int64_t t, LossKind loss,
                                        const RegSpec& reg) {
  const double d = loss_deriv(loss, dot(x_hat, theta), label);
  const double inv_t = 1.0 / static_cast<double>(t);
  DenseVector z(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double x_tilde_t = (1.0 - inv_t) * x_tilde_prev[j];
    z[j] = a_t * x_tilde_t + reg.lambda2 * theta[j];
  }
  // x_tilde_t picks up x_hat/t, so the sparse term carries d - a + a/t
  axpy(d - a_t + a_t * inv_t, x_hat, z);
  return z;
}

double prox_scalar_grid_oracle(double q, double eta, double lambda1) {
  const auto objective = [&](double t) {
    return eta * lambda1 * std::fabs(t) + 0.5 * (t - q) * (t - q);
  };
  double lo = -std::fabs(q) - 1.0, hi = std::fabs(q) + 1.0;
  double best = 0.0, best_val = objective(0.0);
  for (int round = 0; round < 4; ++round) {
    const int points = 2000;
    const double step = (hi - lo) / points;
    for (int k = 0; k <= points; ++k) {
      const double t = lo + step * k;
      const double val = objective(t);
      if (val < best_val) {
        best_val = val;
        best = t;
      }
    }
    lo = best - 2.0 * step;
    hi = best + 2.0 * step;
  }
  return best;
}

MinimizeResult high_precision_minimizer(const EnumerableProblem& p,
                                        double grad_tol,
                                        std::int64_t max_iter) {
  if (!(p.reg.lambda2 > 0.0))
    throw OracleError("minimizer: requires lambda2 > 0 (strong convexity)");
  if (p.reg.lambda1 != 0.0)
    throw OracleError("minimizer: composite objectives not supported");

  const std::size_t dim = p.data->dim;
  auto norm2 = [](const DenseVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  // Nesterov acceleration with backtracking and gradient-based restart.
  // Near the optimum the true per-step decrease drops below the objective's
  // floating-point noise, so the sufficient-decrease test carries a
  // machine-epsilon slack and the restart rule uses gradients only.
  DenseVector theta(dim, 0.0), y = theta, theta_prev = theta;
  double lipschitz = p.reg.lambda2;  // grown by backtracking as needed
  double momentum_prev = 1.0;
  for (std::int64_t it = 0; it < max_iter; ++it) {
    DenseVector g_theta = exact_gradient(p, theta);
    const double gn_theta = norm2(g_theta);
    if (gn_theta <= grad_tol) {
      MinimizeResult res;
      res.theta = theta;
      res.objective = exact_objective(p, theta);
      res.grad_norm = gn_theta;
      res.iterations = it;
      return res;
    }

    // backtracking on the smoothness upper bound at the extrapolated point;
    // the slack absorbs the objective's summation roundoff, and decreases
    // below that noise are accepted outright so the Lipschitz estimate can
    // never inflate off measurement noise
    DenseVector g = exact_gradient(p, y);
    const double f_y = exact_objective(p, y);
    const double gnorm = norm2(g);
    const double noise = 1e-13 * (1.0 + std::fabs(f_y));
    DenseVector candidate(dim);
    for (;;) {
      const double step = 1.0 / lipschitz;
      for (std::size_t j = 0; j < dim; ++j) candidate[j] = y[j] - step * g[j];
      const double predicted = 0.5 * step * gnorm * gnorm;
      if (predicted <= noise) break;
      if (exact_objective(p, candidate) <= f_y - predicted + noise) break;
      lipschitz *= 2.0;
      if (!std::isfinite(lipschitz))
        throw OracleError("minimizer: backtracking diverged");
    }

    // gradient restart: momentum has overshot when the new displacement
    // points against the gradient at the extrapolation point
    double overshoot = 0.0;
    for (std::size_t j = 0; j < dim; ++j)
      overshoot += g[j] * (candidate[j] - theta[j]);
    if (overshoot > 0.0 && momentum_prev > 1.0) {
      y = theta;
      momentum_prev = 1.0;
      continue;
    }

    const double momentum =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_prev * momentum_prev));
    const double mix = (momentum_prev - 1.0) / momentum;
    theta_prev = theta;
    theta = candidate;
    for (std::size_t j = 0; j < dim; ++j)
      y[j] = theta[j] + mix * (theta[j] - theta_prev[j]);
    momentum_prev = momentum;
  }
  throw OracleError("minimizer: no convergence within iteration budget");
}

}  // namespace nerm
