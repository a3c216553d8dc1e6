#include "nerm/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "nerm/errors.hpp"
#include "nerm/oracle.hpp"
#include "nerm/synth.hpp"
#include "nerm/tasks.hpp"

namespace nerm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

CheckResult make_result(const std::string& name, double err, double tol) {
  return {name, err <= tol, "max err " + fmt(err) + " (tol " + fmt(tol) + ")"};
}

DenseVector mean_row(const SparseDataset& ds) {
  DenseVector acc(ds.dim, 0.0);
  for (std::size_t i = 0; i < ds.rows(); ++i) axpy(1.0, ds.row(i), acc);
  for (double& v : acc) v /= static_cast<double>(ds.rows());
  return acc;
}

DenseVector random_dense(std::size_t dim, RngStream& rng, double scale) {
  DenseVector v(dim);
  for (double& x : v) x = scale * (2.0 * rng.next_double() - 1.0);
  return v;
}

EnumerableProblem toy_problem(const SparseDataset& ds) {
  return EnumerableProblem{&ds, NoiseSpec::dropout(0.3), LossKind::logistic,
                           RegSpec{1e-2, 0.0}};
}

CheckResult check_probability_mass(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  const double total =
      exact_expectation(p, [](std::size_t, SparseView) { return 1.0; });
  return make_result("enumeration probability mass", std::fabs(total - 1.0),
                     1e-14);
}

CheckResult check_sq_norm_closed_form(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  const double enumerated = exact_expectation(
      p, [](std::size_t, SparseView x) { return sq_norm(x); });
  double closed = 0.0;
  for (std::size_t i = 0; i < ds.rows(); ++i)
    closed += expected_sq_norm(ds.row(i), p.noise);
  closed /= static_cast<double>(ds.rows());
  return make_result("expected squared norm: enumeration vs closed form",
                     std::fabs(enumerated - closed) / (1.0 + closed), 1e-12);
}

CheckResult check_expected_sample(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  const DenseVector mean = exact_mean_vector(
      p, ds.dim, [](std::size_t, SparseView x, double w, DenseVector& acc) {
        axpy(w, x, acc);
      });
  const DenseVector expected = mean_row(ds);
  double err = 0.0;
  for (std::size_t j = 0; j < ds.dim; ++j)
    err = std::max(err, std::fabs(mean[j] - expected[j]));
  return make_result("expected sample: enumeration vs E[x_hat] = x", err,
                     1e-12);
}

CheckResult check_mc_moments() {
  const NoiseSpec noise = NoiseSpec::dropout(0.3);
  SparseVector x({0, 3, 7}, {1.0, -2.0, 3.0});
  const int draws = 1000000;
  RngStream rng(2024, 1);
  DenseVector sum(8, 0.0), sum_sq(8, 0.0);
  double sq_sum = 0.0, sq_sum_sq = 0.0;
  for (int it = 0; it < draws; ++it) {
    const SparseVector x_hat = perturb(x, noise, rng);
    for (std::size_t k = 0; k < x_hat.nnz(); ++k) {
      sum[x_hat.indices[k]] += x_hat.values[k];
      sum_sq[x_hat.indices[k]] += x_hat.values[k] * x_hat.values[k];
    }
    const double s = sq_norm(x_hat);
    sq_sum += s;
    sq_sum_sq += s * s;
  }
  const SparseVector expect = expected_sample(x, noise);
  double worst_sigmas = 0.0;
  for (std::size_t k = 0; k < expect.nnz(); ++k) {
    const std::uint32_t j = expect.indices[k];
    const double mean = sum[j] / draws;
    const double var = sum_sq[j] / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    worst_sigmas =
        std::max(worst_sigmas, std::fabs(mean - expect.values[k]) / se);
  }
  const double mean_sq = sq_sum / draws;
  const double var_sq = sq_sum_sq / draws - mean_sq * mean_sq;
  const double se_sq = std::sqrt(var_sq / draws);
  worst_sigmas = std::max(
      worst_sigmas,
      std::fabs(mean_sq - expected_sq_norm(x, noise)) / se_sq);
  return make_result("dropout Monte-Carlo moments (standard errors)",
                     worst_sigmas, 4.0);
}

CheckResult check_ssag_unbiased(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  const DenseVector x_tilde = mean_row(ds);
  RngStream rng(7, 0);
  double err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const DenseVector theta = random_dense(ds.dim, rng, 1.0);
    const double a = 2.0 * rng.next_double() - 1.0;
    const DenseVector grad = exact_gradient(p, theta);
    DenseVector v_buf;
    const DenseVector expectation = exact_mean_vector(
        p, ds.dim,
        [&](std::size_t i, SparseView x_hat, double w, DenseVector& acc) {
          ssag_direction(theta, x_hat, ds.labels[i], a, x_tilde, p.loss, p.reg,
                         v_buf);
          for (std::size_t j = 0; j < acc.size(); ++j)
            acc[j] += w * v_buf[j];
        });
    for (std::size_t j = 0; j < ds.dim; ++j)
      err = std::max(err, std::fabs(expectation[j] - grad[j]));
  }
  return make_result("ssag estimator unbiasedness (exact)", err, 1e-12);
}

CheckResult check_ssaga_unbiased(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  RngStream rng(11, 0);
  double err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const DenseVector theta = random_dense(ds.dim, rng, 1.0);
    std::vector<double> a_table(ds.rows());
    for (double& a : a_table) a = 2.0 * rng.next_double() - 1.0;
    DenseVector m(ds.dim, 0.0);
    for (std::size_t i = 0; i < ds.rows(); ++i)
      axpy(a_table[i], ds.row(i), m);
    for (double& v : m) v /= static_cast<double>(ds.rows());

    const DenseVector grad = exact_gradient(p, theta);
    DenseVector v_buf;
    const DenseVector expectation = exact_mean_vector(
        p, ds.dim,
        [&](std::size_t i, SparseView x_hat, double w, DenseVector& acc) {
          ssaga_direction(theta, x_hat, ds.labels[i], a_table[i], m, p.loss,
                          p.reg, v_buf);
          for (std::size_t j = 0; j < acc.size(); ++j)
            acc[j] += w * v_buf[j];
        });
    for (std::size_t j = 0; j < ds.dim; ++j)
      err = std::max(err, std::fabs(expectation[j] - grad[j]));
  }
  return make_result("ssaga estimator unbiasedness (exact)", err, 1e-12);
}

CheckResult check_bias_identity(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  const DenseVector expected_xhat = mean_row(ds);
  RngStream rng(13, 0);
  double err = 0.0;
  for (std::int64_t t : {std::int64_t(1), std::int64_t(2), std::int64_t(5)}) {
    const DenseVector theta = random_dense(ds.dim, rng, 1.0);
    const DenseVector x_tilde_prev = random_dense(ds.dim, rng, 1.0);
    const double a = 2.0 * rng.next_double() - 1.0;
    const DenseVector grad = exact_gradient(p, theta);
    const DenseVector mean_z = exact_mean_vector(
        p, ds.dim,
        [&](std::size_t i, SparseView x_hat, double w, DenseVector& acc) {
          const DenseVector z = running_estimator_direction(
              theta, x_hat, ds.labels[i], a, x_tilde_prev, t, p.loss, p.reg);
          for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * z[j];
        });
    const double factor = a * (1.0 - 1.0 / static_cast<double>(t));
    for (std::size_t j = 0; j < ds.dim; ++j) {
      const double rhs = factor * (x_tilde_prev[j] - expected_xhat[j]);
      err = std::max(err, std::fabs(mean_z[j] - grad[j] - rhs));
    }
  }
  return make_result("running-mean estimator bias identity", err, 1e-12);
}

CheckResult check_variance_bound(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  RngStream rng(17, 0);
  bool ok = true;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const DenseVector theta = random_dense(ds.dim, rng, 1.0);
    const double a = 2.0 * rng.next_double() - 1.0;
    const auto bound_at = [&](double coeff) {
      return exact_expectation(p, [&](std::size_t i, SparseView x) {
        const double d = loss_deriv(p.loss, dot(x, theta), ds.labels[i]);
        return (d - coeff) * (d - coeff) * sq_norm(x);
      });
    };
    // Var(v) = E||v||^2 - ||E v||^2; the deterministic terms drop out
    const DenseVector mean_dir = exact_mean_vector(
        p, ds.dim,
        [&](std::size_t i, SparseView x, double w, DenseVector& acc) {
          const double d = loss_deriv(p.loss, dot(x, theta), ds.labels[i]);
          axpy(w * (d - a), x, acc);
        });
    const double second_moment =
        exact_expectation(p, [&](std::size_t i, SparseView x) {
          const double d = loss_deriv(p.loss, dot(x, theta), ds.labels[i]);
          return (d - a) * (d - a) * sq_norm(x);
        });
    double mean_norm_sq = 0.0;
    for (double v : mean_dir) mean_norm_sq += v * v;
    const double variance = second_moment - mean_norm_sq;
    const double bound = bound_at(a);
    if (variance > bound + 1e-12 * (1.0 + bound)) ok = false;
    worst_gap = std::max(worst_gap, variance - bound);

    const double a_star = exact_a_star(p, theta);
    const double at_star = bound_at(a_star);
    for (double delta : {0.01, 0.1, 1.0}) {
      if (bound_at(a_star + delta) < at_star - 1e-12 * (1.0 + at_star))
        ok = false;
      if (bound_at(a_star - delta) < at_star - 1e-12 * (1.0 + at_star))
        ok = false;
    }
  }
  return {"variance bound and a* optimality", ok,
          "worst bound gap " + fmt(worst_gap)};
}

CheckResult check_gradient_fd(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  RngStream rng(19, 0);
  const DenseVector theta = random_dense(ds.dim, rng, 0.8);
  const DenseVector grad = exact_gradient(p, theta);
  double err = 0.0;
  const double h = 1e-5;
  for (std::size_t j = 0; j < ds.dim; ++j) {
    DenseVector lo = theta, hi = theta;
    lo[j] -= h;
    hi[j] += h;
    const double fd =
        (exact_objective(p, hi) - exact_objective(p, lo)) / (2.0 * h);
    err = std::max(err, std::fabs(fd - grad[j]) / (1.0 + std::fabs(grad[j])));
  }
  return make_result("exact gradient vs central finite differences", err,
                     1e-7);
}

CheckResult check_estimator_mean_mc(const SparseDataset& ds) {
  // Monte-Carlo cross-check of the enumerated estimator mean: E[v] over
  // one million (index, mask) draws must bracket the exact gradient
  const EnumerableProblem p = toy_problem(ds);
  const DenseVector x_tilde = mean_row(ds);
  RngStream rng(22, 0);
  const DenseVector theta = random_dense(ds.dim, rng, 0.8);
  const double a = 2.0 * rng.next_double() - 1.0;
  const DenseVector grad = exact_gradient(p, theta);

  const int draws = 1000000;
  RngStream mc(22, 1);
  DenseVector sum(ds.dim, 0.0), sum_sq(ds.dim, 0.0), v;
  for (int it = 0; it < draws; ++it) {
    const std::size_t i = mc.next_below(ds.rows());
    const SparseVector x_hat = perturb(ds.row(i), p.noise, mc);
    ssag_direction(theta, x_hat, ds.labels[i], a, x_tilde, p.loss, p.reg, v);
    for (std::size_t j = 0; j < ds.dim; ++j) {
      sum[j] += v[j];
      sum_sq[j] += v[j] * v[j];
    }
  }
  double worst_sigmas = 0.0;
  for (std::size_t j = 0; j < ds.dim; ++j) {
    const double mean = sum[j] / draws;
    const double var = sum_sq[j] / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    if (se > 0.0)
      worst_sigmas = std::max(worst_sigmas, std::fabs(mean - grad[j]) / se);
  }
  return make_result("estimator mean: enumeration vs 1e6-draw Monte Carlo",
                     worst_sigmas, 4.0);
}

CheckResult check_a_star_mc(const SparseDataset& ds) {
  const EnumerableProblem p = toy_problem(ds);
  RngStream rng(23, 0);
  const DenseVector theta = random_dense(ds.dim, rng, 0.5);
  const double exact = exact_a_star(p, theta);

  const int draws = 1000000;
  RngStream mc(23, 1);
  double num = 0.0, num_sq = 0.0, den = 0.0, den_sq = 0.0;
  for (int it = 0; it < draws; ++it) {
    const std::size_t i = mc.next_below(ds.rows());
    const SparseVector x_hat = perturb(ds.row(i), p.noise, mc);
    const double w = sq_norm(x_hat);
    const double f = loss_deriv(p.loss, dot(x_hat, theta), ds.labels[i]) * w;
    num += f;
    num_sq += f * f;
    den += w;
    den_sq += w * w;
  }
  const double num_mean = num / draws, den_mean = den / draws;
  const double num_se =
      std::sqrt((num_sq / draws - num_mean * num_mean) / draws);
  const double den_se =
      std::sqrt((den_sq / draws - den_mean * den_mean) / draws);
  // first-order error propagation for the ratio
  const double ratio = num_mean / den_mean;
  const double ratio_se = std::fabs(ratio) *
                          std::sqrt(std::pow(num_se / num_mean, 2) +
                                    std::pow(den_se / den_mean, 2));
  return make_result("a* enumeration vs Monte Carlo (standard errors)",
                     std::fabs(ratio - exact) / ratio_se, 4.0);
}

CheckResult check_saga_reduction() {
  RngStream data_rng(29, 0);
  const SparseDataset ds =
      make_random_sparse_dataset(20, 10, 2, 5, data_rng, 0.5);
  const RegSpec reg{1e-2, 0.0};
  const StepSchedule sched{2.0 / reg.lambda2, 500.0};
  const NoiseSpec noise = NoiseSpec::none();

  std::vector<std::size_t> sequence(1000);
  RngStream idx_rng(29, 1);
  for (auto& i : sequence) i = idx_rng.next_below(ds.rows());

  const SagaTrace ref = reference_saga(ds, DenseVector(ds.dim, 0.0),
                                       LossKind::logistic, reg, sequence,
                                       sched);

  RngStream init_rng(29, 2);
  SsagaState st = ssaga_init(ds, DenseVector(ds.dim, 0.0), LossKind::logistic,
                             noise, init_rng);
  double err = 0.0;
  for (std::size_t step = 0; step < sequence.size(); ++step) {
    Sample s;
    s.index = sequence[step];
    s.x_hat = expected_sample(ds.row(s.index), noise);
    s.x_bar = expected_sample(ds.row(s.index), noise);
    s.label = ds.labels[s.index];
    ssaga_step(st, s, LossKind::logistic, reg, sched);
    for (std::size_t j = 0; j < ds.dim; ++j) {
      const double ref_v = ref.thetas[step][j];
      err = std::max(err,
                     std::fabs(st.theta[j] - ref_v) / (1.0 + std::fabs(ref_v)));
    }
  }
  return make_result("ssaga with noise none matches reference saga", err,
                     1e-14);
}

CheckResult check_prox_grid() {
  RngStream rng(31, 0);
  double err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double q = 20.0 * rng.next_double() - 10.0;
    const double eta = 0.01 + rng.next_double();
    const double lambda1 = rng.next_double();
    const RegSpec reg{0.0, lambda1};
    const DenseVector out = prox(reg, eta, DenseVector{q});
    const double oracle = prox_scalar_grid_oracle(q, eta, lambda1);
    err = std::max(err, std::fabs(out[0] - oracle));
  }
  return make_result("soft threshold vs grid-search oracle", err, 1e-6);
}

CheckResult check_averaging_closed_form() {
  RngStream rng(37, 0);
  double err = 0.0;
  for (int T : {1, 2, 17, 100}) {
    const double gamma = 3.0;
    std::vector<DenseVector> thetas;
    for (int t = 0; t < T; ++t) thetas.push_back(random_dense(4, rng, 1.0));
    AveragerState st;
    st.gamma = gamma;
    for (int t = 0; t < T; ++t) average_update(st, thetas[t]);
    // closed form: 2/(T(2g+T-1)) sum_{t=0}^{T-1} (g+t) theta_t
    DenseVector closed(4, 0.0);
    for (int t = 0; t < T; ++t)
      for (std::size_t j = 0; j < 4; ++j)
        closed[j] += (gamma + t) * thetas[t][j];
    const double scale = 2.0 / (T * (2.0 * gamma + T - 1.0));
    for (std::size_t j = 0; j < 4; ++j) {
      closed[j] *= scale;
      err = std::max(err, std::fabs(closed[j] - st.theta_bar[j]));
    }
  }
  return make_result("iterate averaging online vs closed form", err, 1e-12);
}

CheckResult check_minimizer() {
  // ridge with two samples in two dims has a closed-form solution
  std::vector<SparseVector> rows;
  rows.push_back(SparseVector({0, 1}, {1.0, 0.5}));
  rows.push_back(SparseVector({0, 1}, {-0.5, 1.0}));
  const std::vector<double> labels{1.0, -1.0};
  const SparseDataset ds = SparseDataset::from_rows(2, rows, labels);
  const double lambda = 0.1;
  const EnumerableProblem p{&ds, NoiseSpec::none(), LossKind::squared,
                            RegSpec{lambda, 0.0}};

  // grad F = (2/n) sum (x_i^T theta - y_i) x_i + lambda theta = 0
  // => (2/n sum x_i x_i^T + lambda I) theta = (2/n) sum y_i x_i
  const double n = 2.0;
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double x1 = rows[i].values[0], x2 = rows[i].values[1];
    a11 += 2.0 / n * x1 * x1;
    a12 += 2.0 / n * x1 * x2;
    a22 += 2.0 / n * x2 * x2;
    b1 += 2.0 / n * labels[i] * x1;
    b2 += 2.0 / n * labels[i] * x2;
  }
  a11 += lambda;
  a22 += lambda;
  const double det = a11 * a22 - a12 * a12;
  const double t1 = (b1 * a22 - b2 * a12) / det;
  const double t2 = (a11 * b2 - a12 * b1) / det;

  const MinimizeResult res = high_precision_minimizer(p);
  double err = std::max(std::fabs(res.theta[0] - t1),
                        std::fabs(res.theta[1] - t2));
  const bool ok = err <= 1e-9 && res.grad_norm <= 1e-12;
  return {"high-precision minimizer vs ridge closed form", ok,
          "theta err " + fmt(err) + ", grad norm " + fmt(res.grad_norm)};
}

CheckResult check_auc_brute_force() {
  RngStream rng(41, 0);
  double err = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_below(48);
    DenseVector scores(n), labels(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::floor(10.0 * rng.next_double()) / 2.0;  // force ties
      labels[i] = rng.next_double() < 0.5 ? 1.0 : -1.0;
      (labels[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1.0;
    if (!has_neg) labels[n - 1] = -1.0;

    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] > 0) continue;
        ++pairs;
        if (scores[i] > scores[j])
          wins += 1.0;
        else if (scores[i] == scores[j])
          wins += 0.5;
      }
    }
    const double brute = wins / static_cast<double>(pairs);
    const double metric = auc_metric(scores, labels);
    err = std::max(err, std::fabs(brute - metric));
    if (brute != metric) ok = ok && std::fabs(brute - metric) < 1e-15;
  }
  return {"rank-based auc vs pairwise counting", ok && err < 1e-15,
          "max err " + fmt(err)};
}

}  // namespace

std::vector<CheckResult> run_verification_suite() {
  RngStream data_rng(1, 0);
  const SparseDataset toy =
      make_random_sparse_dataset(4, 6, 2, 4, data_rng, 0.5);

  std::vector<CheckResult> results;
  results.push_back(check_probability_mass(toy));
  results.push_back(check_sq_norm_closed_form(toy));
  results.push_back(check_expected_sample(toy));
  results.push_back(check_mc_moments());
  results.push_back(check_ssag_unbiased(toy));
  results.push_back(check_ssaga_unbiased(toy));
  results.push_back(check_bias_identity(toy));
  results.push_back(check_variance_bound(toy));
  results.push_back(check_gradient_fd(toy));
  results.push_back(check_estimator_mean_mc(toy));
  results.push_back(check_a_star_mc(toy));
  results.push_back(check_saga_reduction());
  results.push_back(check_prox_grid());
  results.push_back(check_averaging_closed_form());
  results.push_back(check_minimizer());
  results.push_back(check_auc_brute_force());
  return results;
}

int print_verification_table(std::ostream& out) {
  const std::vector<CheckResult> results = run_verification_suite();
  int failures = 0;
  for (const CheckResult& r : results) {
    out << (r.passed ? "[ OK ] " : "[FAIL] ") << r.name << " — " << r.detail
        << "\n";
    if (!r.passed) ++failures;
  }
  out << results.size() - failures << "/" << results.size()
      << " checks passed\n";
  return failures;
}

}  // namespace nerm
