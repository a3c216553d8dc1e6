#ifndef NERM_TASKS_HPP
#define NERM_TASKS_HPP

#include <cstdint>
#include <span>

#include "nerm/losses.hpp"
#include "nerm/noise.hpp"
#include "nerm/optimizers.hpp"
#include "nerm/sparse.hpp"

namespace nerm {

// How end-of-epoch objectives are estimated: k fresh perturbations per
// sample from a dedicated stream that is re-seeded identically on every
// call, so successive epochs see the same evaluation noise. max_pairs caps
// the pair subsample for the pairwise objective; when the full pair grid
// fits under the cap it is enumerated instead (no RNG involved).
struct EvalSpec {
  int k_perturbations = 5;
  std::uint64_t eval_seed = 0;
  std::size_t max_pairs = 100000;
};

// Noisy regularized ERM over a linear model.
struct ErmTask {
  const SparseDataset* data = nullptr;
  LossKind loss = LossKind::logistic;
  RegSpec reg;
  NoiseSpec noise;
};

ErmTask make_erm_task(const SparseDataset& ds, LossKind loss, RegSpec reg,
                      NoiseSpec noise);

// Pairwise AUC surrogate: squared hinge on perturbed positive-negative
// differences; x_tilde caches mu+ - mu- (the mean pair difference).
struct AucTask {
  const SparseDataset* data = nullptr;
  RegSpec reg;
  NoiseSpec noise;
  DenseVector x_tilde;

  std::size_t n_pos() const { return data->pos_ids.size(); }
  std::size_t n_neg() const { return data->neg_ids.size(); }
};

// Throws ConfigError when either class is empty.
AucTask make_auc_task(const SparseDataset& ds, RegSpec reg, NoiseSpec noise);

// Merged difference a - b over the union support; exact cancellations are
// dropped so the result carries no stored zeros.
SparseVector sparse_diff(SparseView a, SparseView b);

// Uniform sample index, one fresh perturbation, x_bar = E[x_hat_i].
Sample draw_erm_sample(const ErmTask& task, RngStream& rng);

// Uniform positive i and negative j, independently perturbed, merged
// difference with label +1 and x_bar = z_i - z_j.
Sample draw_auc_sample(const AucTask& task, RngStream& rng);

// Mean expected sample: ERM (1/n) sum E[x_hat_i]; AUC mu+ - mu-.
DenseVector ssag_xtilde(const ErmTask& task);
const DenseVector& ssag_xtilde(const AucTask& task);

// Steps that make up one epoch: n for ERM, max(n+, n-) for AUC.
std::size_t steps_per_epoch(const ErmTask& task);
std::size_t steps_per_epoch(const AucTask& task);

// Monte-Carlo estimate of the training objective including both
// regularizers. With noise "none" the estimate is exact, deterministic and
// independent of k and eval_seed (for AUC as long as the pair grid is
// enumerated, see EvalSpec).
double estimate_objective(const ErmTask& task, const DenseVector& theta,
                          const EvalSpec& spec);
double estimate_objective(const AucTask& task, const DenseVector& theta,
                          const EvalSpec& spec);

// Rank-based AUC with ties counted 1/2:
// (sum of positive ranks - n+(n+1)/2) / (n+ n-).
// Throws MetricError when a class is missing.
double auc_metric(std::span<const double> scores,
                  std::span<const double> labels);

}  // namespace nerm

#endif
