#include "nerm/optimizers.hpp"

#include <cmath>
#include <stdexcept>

namespace nerm {

void sgd_step(DenseVector& theta, const Sample& s, LossKind loss,
              const RegSpec& reg, double eta_t) {
  const double d = loss_deriv(loss, dot(s.x_hat, theta), s.label);
  const double scale = 1.0 - eta_t * reg.lambda2;
  for (double& v : theta) v *= scale;
  axpy(-eta_t * d, s.x_hat, theta);
  if (reg.lambda1 > 0.0) prox_l1_inplace(reg, eta_t, theta);
}

SsagState make_ssag(DenseVector theta0, DenseVector x_bar_mean,
                    double beta_exponent) {
  SsagState st;
  st.theta = std::move(theta0);
  st.x_bar_mean = std::move(x_bar_mean);
  st.beta_exponent = beta_exponent;
  if (st.x_bar_mean.size() != st.theta.size())
    throw std::invalid_argument("ssag: x_bar_mean/theta dimension mismatch");
  return st;
}

double ssag_direction(const DenseVector& theta, SparseView x_hat, double label,
                      double a, const DenseVector& x_tilde, LossKind loss,
                      const RegSpec& reg, DenseVector& v) {
  const double d = loss_deriv(loss, dot(x_hat, theta), label);
  v.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    v[j] = a * x_tilde[j] + reg.lambda2 * theta[j];
  axpy(d - a, x_hat, v);
  return d;
}

void ssag_step(SsagState& st, const Sample& s, LossKind loss,
               const RegSpec& reg, const StepSchedule& sched) {
  const double eta = sched.eta(st.t);
  DenseVector v;
  const double d = ssag_direction(st.theta, s.x_hat, s.label, st.a,
                                  st.x_bar_mean, loss, reg, v);
  for (std::size_t j = 0; j < st.theta.size(); ++j) st.theta[j] -= eta * v[j];
  if (reg.lambda1 > 0.0) prox_l1_inplace(reg, eta, st.theta);

  const double xsq = sq_norm(s.x_hat);
  const double beta =
      std::pow(static_cast<double>(st.t), -st.beta_exponent);  // beta_1 = 1
  st.a_num = (1.0 - beta) * st.a_num + beta * d * xsq;
  st.a_den = (1.0 - beta) * st.a_den + beta * xsq;
  if (st.a_den > 0.0) {
    st.a = st.a_num / st.a_den;
  } else {
    st.a = 0.0;  // every sampled ||x_hat||^2 so far was 0; fall back to SGD
    ++st.degenerate_steps;
  }
  ++st.t;
}

SsagaState ssaga_init(const SparseDataset& ds, const DenseVector& theta0,
                      LossKind loss, const NoiseSpec& noise, RngStream& rng) {
  if (theta0.size() != ds.dim)
    throw std::invalid_argument("ssaga_init: theta0 dimension mismatch");
  SsagaState st;
  st.theta = theta0;
  st.a_table.resize(ds.rows());
  st.m.assign(ds.dim, 0.0);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const SparseVector x_hat = perturb(ds.row(i), noise, rng);
    st.a_table[i] = loss_deriv(loss, dot(x_hat, theta0), ds.labels[i]);
  }
  // m_0 = (1/n) sum a_i x_bar_i, with x_bar_i = E[x_hat_i] = x_i
  for (std::size_t i = 0; i < ds.rows(); ++i)
    axpy(st.a_table[i], ds.row(i), st.m);
  const double inv_n = 1.0 / static_cast<double>(ds.rows());
  for (double& v : st.m) v *= inv_n;
  return st;
}

double ssaga_direction(const DenseVector& theta, SparseView x_hat,
                       double label, double a_i, const DenseVector& m,
                       LossKind loss, const RegSpec& reg, DenseVector& v) {
  const double d = loss_deriv(loss, dot(x_hat, theta), label);
  v.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    v[j] = m[j] + reg.lambda2 * theta[j];
  axpy(d - a_i, x_hat, v);
  return d;
}

void ssaga_step(SsagaState& st, const Sample& s, LossKind loss,
                const RegSpec& reg, const StepSchedule& sched) {
  const double eta = sched.eta(st.t);
  const double a_old = st.a_table.at(s.index);
  DenseVector v;
  const double d =
      ssaga_direction(st.theta, s.x_hat, s.label, a_old, st.m, loss, reg, v);
  for (std::size_t j = 0; j < st.theta.size(); ++j) st.theta[j] -= eta * v[j];
  if (reg.lambda1 > 0.0) prox_l1_inplace(reg, eta, st.theta);

  // m update strictly before the a_i overwrite
  const double inv_n = 1.0 / static_cast<double>(st.a_table.size());
  const SparseView xb = s.x_bar;
  for (std::size_t k = 0; k < xb.nnz(); ++k)
    st.m[xb.indices[k]] += (d - a_old) * xb.values[k] * inv_n;
  st.a_table[s.index] = d;
  ++st.t;
}

DenseVector ssaga_recompute_m(const SsagaState& st, const SparseDataset& ds,
                              const NoiseSpec& noise) {
  DenseVector fresh(ds.dim, 0.0);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const SparseVector xb = expected_sample(ds.row(i), noise);
    axpy(st.a_table[i], xb, fresh);
  }
  const double inv_n = 1.0 / static_cast<double>(ds.rows());
  for (double& v : fresh) v *= inv_n;
  return fresh;
}

AdagradState make_adagrad(DenseVector theta0, double base_eta,
                          double epsilon) {
  AdagradState st;
  st.accumulator.assign(theta0.size(), 0.0);
  st.theta = std::move(theta0);
  st.base_eta = base_eta;
  st.epsilon = epsilon;
  return st;
}

void adagrad_step(AdagradState& st, const Sample& s, LossKind loss,
                  const RegSpec& reg) {
  const double d = loss_deriv(loss, dot(s.x_hat, st.theta), s.label);
  DenseVector g(st.theta.size());
  for (std::size_t j = 0; j < st.theta.size(); ++j)
    g[j] = reg.lambda2 * st.theta[j];
  axpy(d, s.x_hat, g);
  for (std::size_t j = 0; j < st.theta.size(); ++j) {
    st.accumulator[j] += g[j] * g[j];
    st.theta[j] -=
        st.base_eta * g[j] / (st.epsilon + std::sqrt(st.accumulator[j]));
  }
}

void average_update(AveragerState& st, const DenseVector& theta_prev) {
  if (st.theta_bar.empty()) st.theta_bar.assign(theta_prev.size(), 0.0);
  ++st.t;
  const double t = static_cast<double>(st.t);
  const double rho =
      2.0 * (st.gamma + t - 1.0) / (t * (2.0 * st.gamma + t - 1.0));
  for (std::size_t j = 0; j < st.theta_bar.size(); ++j)
    st.theta_bar[j] = (1.0 - rho) * st.theta_bar[j] + rho * theta_prev[j];
}

DenseVector proximal_apply(const RegSpec& reg, double eta_t,
                           const DenseVector& theta_after_grad) {
  return prox(reg, eta_t, theta_after_grad);
}

}  // namespace nerm
