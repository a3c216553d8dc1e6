#ifndef NERM_SYNTH_HPP
#define NERM_SYNTH_HPP

#include <cstdint>

#include "nerm/rng.hpp"
#include "nerm/sparse.hpp"

namespace nerm {

// Deterministic builders for the synthetic benchmark and verification
// problems. All randomness flows through the passed stream.

// Rows with nnz uniform in [nnz_min, nnz_max], distinct random coordinates,
// signed magnitudes in [0.3, 1.5], labels +1 with probability pos_fraction.
SparseDataset make_random_sparse_dataset(std::size_t n, std::size_t dim,
                                         std::size_t nnz_min,
                                         std::size_t nnz_max, RngStream& rng,
                                         double pos_fraction = 0.5);

// Linearly separable ranking toy: positives live on the low coordinate
// block, negatives on the high block, disjoint supports.
SparseDataset make_separable_auc_dataset(std::size_t n_pos, std::size_t n_neg,
                                         std::size_t dim, RngStream& rng);

}  // namespace nerm

#endif
