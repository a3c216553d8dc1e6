#ifndef NERM_SPARSE_HPP
#define NERM_SPARSE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nerm {

using DenseVector = std::vector<double>;

// Non-owning view of a sparse vector: strictly ascending 0-based indices,
// no stored zeros, equal lengths.
struct SparseView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;
  std::size_t nnz() const { return indices.size(); }
};

struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  SparseVector() = default;
  SparseVector(std::vector<std::uint32_t> idx, std::vector<double> val);

  std::size_t nnz() const { return indices.size(); }
  SparseView view() const { return {indices, values}; }
  operator SparseView() const { return view(); }

  // Throws std::invalid_argument on any structural invariant violation.
  void validate() const;
};

// Row-compressed immutable dataset with ±1 labels and per-class row ids.
struct SparseDataset {
  std::size_t dim = 0;
  std::vector<std::size_t> offsets;  // rows()+1, nondecreasing
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::vector<double> labels;  // each exactly -1.0 or +1.0
  std::vector<std::size_t> pos_ids;
  std::vector<std::size_t> neg_ids;

  std::size_t rows() const { return labels.size(); }
  SparseView row(std::size_t i) const {
    return {std::span(indices).subspan(offsets[i], offsets[i + 1] - offsets[i]),
            std::span(values).subspan(offsets[i], offsets[i + 1] - offsets[i])};
  }

  // Validating builder; throws std::invalid_argument on a bad row (index
  // >= dim, non-ascending support, stored zero) or a label outside {-1,+1}.
  static SparseDataset from_rows(std::size_t dim,
                                 const std::vector<SparseVector>& rows,
                                 const std::vector<double>& labels);
};

// --- kernels ---------------------------------------------------------------

// Sum over a's support of a.values[k] * b[a.indices[k]].
// Throws std::out_of_range if any index of a is >= b.size().
double dot(SparseView a, const DenseVector& b);

// b[j] += alpha * a[j] on a's support only.
void axpy(double alpha, SparseView a, DenseVector& b);

double sq_norm(SparseView a);

DenseVector densify(SparseView a, std::size_t dim);

// Per-class coordinate means (positive mean, negative mean).
// Throws ConfigError if either class is empty.
std::pair<DenseVector, DenseVector> class_means(const SparseDataset& ds);

// --- LIBSVM I/O ------------------------------------------------------------

// Lines "label idx:val idx:val ...", indices 1-based and strictly ascending
// per line. Labels {0,-1} map to -1 and {1,+1} to +1; anything else is a
// ParseError. Duplicate or descending indices, indices beyond expected_dim,
// and malformed tokens raise ParseError with the line number. Explicit zero
// values are dropped. Internally indices become 0-based; dim is expected_dim
// when given, else 1 + the largest index seen.
SparseDataset parse_libsvm(std::istream& in,
                           std::optional<std::size_t> expected_dim = {});

// Reads a LIBSVM file; transparently gunzips when the name ends in ".gz".
SparseDataset load_libsvm(const std::string& path,
                          std::optional<std::size_t> expected_dim = {});

// Canonical form: "label idx:val ..." with 1-based indices, labels "1"/"-1",
// values printed with %.17g (round-trip exact).
void serialize_libsvm(const SparseDataset& ds, std::ostream& out);
std::string serialize_libsvm(const SparseDataset& ds);

}  // namespace nerm

#endif
