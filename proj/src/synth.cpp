#include "nerm/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace nerm {

namespace {

SparseVector random_row(std::size_t dim, std::size_t nnz, RngStream& rng,
                        double value_low, double value_high, bool signed_vals) {
  std::vector<std::uint32_t> support;
  support.reserve(nnz);
  while (support.size() < nnz) {
    const auto idx = static_cast<std::uint32_t>(rng.next_below(dim));
    if (std::find(support.begin(), support.end(), idx) == support.end())
      support.push_back(idx);
  }
  std::sort(support.begin(), support.end());
  SparseVector row;
  row.indices = std::move(support);
  row.values.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    double v = value_low + (value_high - value_low) * rng.next_double();
    if (signed_vals && rng.next_double() < 0.5) v = -v;
    row.values.push_back(v);
  }
  return row;
}

}  // namespace

SparseDataset make_random_sparse_dataset(std::size_t n, std::size_t dim,
                                         std::size_t nnz_min,
                                         std::size_t nnz_max, RngStream& rng,
                                         double pos_fraction) {
  if (nnz_min > nnz_max || nnz_max > dim)
    throw std::invalid_argument("make_random_sparse_dataset: bad nnz range");
  std::vector<SparseVector> rows;
  std::vector<double> labels;
  rows.reserve(n);
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t nnz =
        nnz_min + rng.next_below(nnz_max - nnz_min + 1);
    rows.push_back(random_row(dim, nnz, rng, 0.3, 1.5, true));
    labels.push_back(rng.next_double() < pos_fraction ? 1.0 : -1.0);
  }
  return SparseDataset::from_rows(dim, rows, labels);
}

SparseDataset make_separable_auc_dataset(std::size_t n_pos, std::size_t n_neg,
                                         std::size_t dim, RngStream& rng) {
  if (dim < 4)
    throw std::invalid_argument("make_separable_auc_dataset: dim too small");
  const std::size_t half = dim / 2;
  std::vector<SparseVector> rows;
  std::vector<double> labels;
  rows.reserve(n_pos + n_neg);
  labels.reserve(n_pos + n_neg);
  auto block_row = [&](std::size_t lo, std::size_t hi) {
    const std::size_t width = hi - lo;
    const std::size_t nnz = 2 + rng.next_below(std::min<std::size_t>(3, width));
    std::vector<std::uint32_t> support;
    while (support.size() < nnz) {
      const auto idx = static_cast<std::uint32_t>(lo + rng.next_below(width));
      if (std::find(support.begin(), support.end(), idx) == support.end())
        support.push_back(idx);
    }
    std::sort(support.begin(), support.end());
    SparseVector row;
    row.indices = std::move(support);
    for (std::size_t k = 0; k < nnz; ++k)
      row.values.push_back(0.5 + rng.next_double());
    return row;
  };
  for (std::size_t i = 0; i < n_pos; ++i) {
    rows.push_back(block_row(0, half));
    labels.push_back(1.0);
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    rows.push_back(block_row(half, dim));
    labels.push_back(-1.0);
  }
  return SparseDataset::from_rows(dim, rows, labels);
}

}  // namespace nerm
