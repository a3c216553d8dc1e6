#ifndef NERM_NOISE_HPP
#define NERM_NOISE_HPP

#include <string>
#include <string_view>

#include "nerm/rng.hpp"
#include "nerm/sparse.hpp"

namespace nerm {

enum class NoiseKind { none, dropout, additive_gaussian };

// Perturbation model with closed-form first moment E[x_hat] and second
// moment E||x_hat||^2. Dropout multiplies each stored coordinate by an
// independent scaled Bernoulli in {0, 1/(1-p)}; additive noise adds
// independent zero-mean gaussians on the stored support only (sparsity is
// preserved on purpose, and the second moment accounts for nnz, not dim).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double param = 0.0;  // dropout probability p, or gaussian sigma

  static NoiseSpec none() { return {NoiseKind::none, 0.0}; }
  static NoiseSpec dropout(double p);          // requires 0 <= p < 1
  static NoiseSpec additive_gaussian(double sigma);  // requires sigma > 0

  // "none" | "dropout:<p>" | "gauss:<sigma>"
  static NoiseSpec parse(std::string_view token);
  std::string format() const;
};

// One fresh i.i.d. perturbation of x; one Bernoulli (or gaussian) draw per
// stored coordinate per call, never cached. Never introduces coordinates
// outside x's support.
SparseVector perturb(SparseView x, const NoiseSpec& spec, RngStream& rng);

// E[x_hat] = x for every supported kind.
SparseVector expected_sample(SparseView x, const NoiseSpec& spec);

// dropout: ||x||^2/(1-p); gaussian: ||x||^2 + nnz(x)*sigma^2; none: ||x||^2.
double expected_sq_norm(SparseView x, const NoiseSpec& spec);

}  // namespace nerm

#endif
