#include "nerm/tasks.hpp"

#include <algorithm>
#include <numeric>

#include "nerm/errors.hpp"

namespace nerm {

namespace {
// Fixed sub-stream id of the evaluation stream (see rng.hpp for the
// seed-derivation scheme).
constexpr std::uint64_t kEvalStreamId = 0x0e7a1u;
}  // namespace

ErmTask make_erm_task(const SparseDataset& ds, LossKind loss, RegSpec reg,
                      NoiseSpec noise) {
  return ErmTask{&ds, loss, reg, noise};
}

AucTask make_auc_task(const SparseDataset& ds, RegSpec reg, NoiseSpec noise) {
  if (ds.pos_ids.empty() || ds.neg_ids.empty())
    throw ConfigError("auc task: both classes must be nonempty");
  auto [mu_pos, mu_neg] = class_means(ds);
  DenseVector x_tilde(ds.dim);
  for (std::size_t j = 0; j < ds.dim; ++j) x_tilde[j] = mu_pos[j] - mu_neg[j];
  return AucTask{&ds, reg, noise, std::move(x_tilde)};
}

SparseVector sparse_diff(SparseView a, SparseView b) {
  SparseVector out;
  out.indices.reserve(a.nnz() + b.nnz());
  out.values.reserve(a.nnz() + b.nnz());
  std::size_t ka = 0, kb = 0;
  auto push = [&out](std::uint32_t idx, double v) {
    if (v != 0.0) {
      out.indices.push_back(idx);
      out.values.push_back(v);
    }
  };
  while (ka < a.nnz() && kb < b.nnz()) {
    if (a.indices[ka] < b.indices[kb]) {
      push(a.indices[ka], a.values[ka]);
      ++ka;
    } else if (a.indices[ka] > b.indices[kb]) {
      push(b.indices[kb], -b.values[kb]);
      ++kb;
    } else {
      push(a.indices[ka], a.values[ka] - b.values[kb]);
      ++ka;
      ++kb;
    }
  }
  for (; ka < a.nnz(); ++ka) push(a.indices[ka], a.values[ka]);
  for (; kb < b.nnz(); ++kb) push(b.indices[kb], -b.values[kb]);
  return out;
}

Sample draw_erm_sample(const ErmTask& task, RngStream& rng) {
  const SparseDataset& ds = *task.data;
  const std::size_t i = rng.next_below(ds.rows());
  Sample s;
  s.index = i;
  s.x_hat = perturb(ds.row(i), task.noise, rng);
  s.label = ds.labels[i];
  s.x_bar = expected_sample(ds.row(i), task.noise);
  return s;
}

Sample draw_auc_sample(const AucTask& task, RngStream& rng) {
  const SparseDataset& ds = *task.data;
  const std::size_t i = ds.pos_ids[rng.next_below(ds.pos_ids.size())];
  const std::size_t j = ds.neg_ids[rng.next_below(ds.neg_ids.size())];
  const SparseVector zi = perturb(ds.row(i), task.noise, rng);
  const SparseVector zj = perturb(ds.row(j), task.noise, rng);
  Sample s;
  s.index = 0;
  s.x_hat = sparse_diff(zi, zj);
  s.label = 1.0;
  s.x_bar = sparse_diff(ds.row(i), ds.row(j));
  return s;
}

DenseVector ssag_xtilde(const ErmTask& task) {
  const SparseDataset& ds = *task.data;
  DenseVector acc(ds.dim, 0.0);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const SparseVector xb = expected_sample(ds.row(i), task.noise);
    axpy(1.0, xb, acc);
  }
  const double inv_n = 1.0 / static_cast<double>(ds.rows());
  for (double& v : acc) v *= inv_n;
  return acc;
}

const DenseVector& ssag_xtilde(const AucTask& task) { return task.x_tilde; }

std::size_t steps_per_epoch(const ErmTask& task) { return task.data->rows(); }

std::size_t steps_per_epoch(const AucTask& task) {
  return std::max(task.n_pos(), task.n_neg());
}

namespace {

double reg_terms(const RegSpec& reg, const DenseVector& theta) {
  double sq = 0.0, l1 = 0.0;
  for (double v : theta) {
    sq += v * v;
    l1 += v < 0.0 ? -v : v;
  }
  return 0.5 * reg.lambda2 * sq + reg.lambda1 * l1;
}

}  // namespace

double estimate_objective(const ErmTask& task, const DenseVector& theta,
                          const EvalSpec& spec) {
  const SparseDataset& ds = *task.data;
  double acc = 0.0;
  if (task.noise.kind == NoiseKind::none) {
    for (std::size_t i = 0; i < ds.rows(); ++i)
      acc += loss_value(task.loss, dot(ds.row(i), theta), ds.labels[i]);
    acc /= static_cast<double>(ds.rows());
  } else {
    RngStream rng(spec.eval_seed, kEvalStreamId);
    const int k = std::max(1, spec.k_perturbations);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
      for (int m = 0; m < k; ++m) {
        const SparseVector x_hat = perturb(ds.row(i), task.noise, rng);
        acc += loss_value(task.loss, dot(x_hat, theta), ds.labels[i]);
      }
    }
    acc /= static_cast<double>(ds.rows()) * k;
  }
  return acc + reg_terms(task.reg, theta);
}

double estimate_objective(const AucTask& task, const DenseVector& theta,
                          const EvalSpec& spec) {
  const SparseDataset& ds = *task.data;
  const std::size_t np = task.n_pos(), nn = task.n_neg();
  const bool enumerate = np * nn <= spec.max_pairs;
  const bool noiseless = task.noise.kind == NoiseKind::none;
  RngStream rng(spec.eval_seed, kEvalStreamId);
  const int k = noiseless ? 1 : std::max(1, spec.k_perturbations);

  // clean per-row scores cover the noiseless case without forming pairs
  DenseVector scores;
  if (noiseless) {
    scores.resize(ds.rows());
    for (std::size_t i = 0; i < ds.rows(); ++i)
      scores[i] = dot(ds.row(i), theta);
  }

  auto pair_term = [&](std::size_t i, std::size_t j) {
    double term = 0.0;
    for (int m = 0; m < k; ++m) {
      double u;
      if (noiseless) {
        u = scores[i] - scores[j];
      } else {
        const SparseVector zi = perturb(ds.row(i), task.noise, rng);
        const SparseVector zj = perturb(ds.row(j), task.noise, rng);
        u = dot(zi, theta) - dot(zj, theta);
      }
      term += loss_value(LossKind::squared_hinge, u, 1.0);
    }
    return term / k;
  };

  double acc = 0.0;
  std::size_t count = 0;
  if (enumerate) {
    for (std::size_t i : ds.pos_ids)
      for (std::size_t j : ds.neg_ids) {
        acc += pair_term(i, j);
        ++count;
      }
  } else {
    for (; count < spec.max_pairs; ++count) {
      const std::size_t i = ds.pos_ids[rng.next_below(np)];
      const std::size_t j = ds.neg_ids[rng.next_below(nn)];
      acc += pair_term(i, j);
    }
  }
  return acc / static_cast<double>(count) + reg_terms(task.reg, theta);
}

double auc_metric(std::span<const double> scores,
                  std::span<const double> labels) {
  if (scores.size() != labels.size())
    throw MetricError("auc: score/label length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0, n_neg = 0;
  for (double y : labels) (y > 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw MetricError("auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // average ranks over tie runs, 1-based
  double pos_rank_sum = 0.0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && scores[order[stop]] == scores[order[start]]) ++stop;
    const double avg_rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t k = start; k < stop; ++k)
      if (labels[order[k]] > 0) pos_rank_sum += avg_rank;
    start = stop;
  }
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) /
         (np * static_cast<double>(n_neg));
}

}  // namespace nerm
