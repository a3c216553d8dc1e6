#include "nerm/sparse.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nerm/errors.hpp"

namespace nerm {

SparseVector::SparseVector(std::vector<std::uint32_t> idx,
                           std::vector<double> val)
    : indices(std::move(idx)), values(std::move(val)) {
  validate();
}

void SparseVector::validate() const {
  if (indices.size() != values.size())
    throw std::invalid_argument("sparse vector: index/value length mismatch");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0 && indices[k] <= indices[k - 1])
      throw std::invalid_argument("sparse vector: indices not ascending");
    if (values[k] == 0.0)
      throw std::invalid_argument("sparse vector: stored zero value");
  }
}

SparseDataset SparseDataset::from_rows(std::size_t dim,
                                       const std::vector<SparseVector>& rows,
                                       const std::vector<double>& labels) {
  if (dim == 0) throw std::invalid_argument("dataset: dim must be positive");
  if (rows.empty()) throw std::invalid_argument("dataset: no rows");
  if (rows.size() != labels.size())
    throw std::invalid_argument("dataset: row/label count mismatch");
  SparseDataset ds;
  ds.dim = dim;
  ds.offsets.reserve(rows.size() + 1);
  ds.offsets.push_back(0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].validate();
    if (!rows[i].indices.empty() && rows[i].indices.back() >= dim)
      throw std::invalid_argument("dataset: row " + std::to_string(i) +
                                  " has index >= dim");
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw std::invalid_argument("dataset: label must be -1 or +1");
    ds.indices.insert(ds.indices.end(), rows[i].indices.begin(),
                      rows[i].indices.end());
    ds.values.insert(ds.values.end(), rows[i].values.begin(),
                     rows[i].values.end());
    ds.offsets.push_back(ds.indices.size());
    ds.labels.push_back(labels[i]);
    (labels[i] > 0 ? ds.pos_ids : ds.neg_ids).push_back(i);
  }
  return ds;
}

double dot(SparseView a, const DenseVector& b) {
  if (!a.indices.empty() && a.indices.back() >= b.size())
    throw std::out_of_range("dot: sparse index out of range");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.indices.size(); ++k)
    acc += a.values[k] * b[a.indices[k]];
  return acc;
}

void axpy(double alpha, SparseView a, DenseVector& b) {
  if (!a.indices.empty() && a.indices.back() >= b.size())
    throw std::out_of_range("axpy: sparse index out of range");
  for (std::size_t k = 0; k < a.indices.size(); ++k)
    b[a.indices[k]] += alpha * a.values[k];
}

double sq_norm(SparseView a) {
  double acc = 0.0;
  for (double v : a.values) acc += v * v;
  return acc;
}

DenseVector densify(SparseView a, std::size_t dim) {
  DenseVector out(dim, 0.0);
  axpy(1.0, a, out);
  return out;
}

std::pair<DenseVector, DenseVector> class_means(const SparseDataset& ds) {
  if (ds.pos_ids.empty() || ds.neg_ids.empty())
    throw ConfigError("class_means: both classes must be nonempty");
  DenseVector pos(ds.dim, 0.0), neg(ds.dim, 0.0);
  for (std::size_t i : ds.pos_ids) axpy(1.0, ds.row(i), pos);
  for (std::size_t i : ds.neg_ids) axpy(1.0, ds.row(i), neg);
  for (double& v : pos) v /= static_cast<double>(ds.pos_ids.size());
  for (double& v : neg) v /= static_cast<double>(ds.neg_ids.size());
  return {std::move(pos), std::move(neg)};
}

namespace {

const char* skip_ws(const char* p, const char* end) {
  while (p != end && (*p == ' ' || *p == '\t')) ++p;
  return p;
}

double map_label(double raw, std::size_t lineno) {
  if (raw == 1.0) return 1.0;
  if (raw == 0.0 || raw == -1.0) return -1.0;
  throw ParseError(lineno, "unknown label value");
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in,
                           std::optional<std::size_t> expected_dim) {
  SparseDataset ds;
  ds.offsets.push_back(0);
  std::string line;
  std::size_t lineno = 0;
  std::uint32_t max_index_seen = 0;  // 0-based
  bool any_index = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* p = line.data();
    const char* end = p + line.size();
    p = skip_ws(p, end);
    if (p == end) continue;  // blank line

    double raw_label;
    auto [lp, lec] = std::from_chars(p, end, raw_label);
    if (lec != std::errc() || (lp != end && *lp != ' ' && *lp != '\t'))
      throw ParseError(lineno, "malformed label token");
    const double label = map_label(raw_label, lineno);
    p = lp;

    long long prev_internal = -1;
    for (;;) {
      p = skip_ws(p, end);
      if (p == end) break;
      std::uint64_t idx;
      auto [ip, iec] = std::from_chars(p, end, idx);
      if (iec != std::errc() || ip == end || *ip != ':')
        throw ParseError(lineno, "malformed feature token (expected idx:val)");
      if (idx == 0) throw ParseError(lineno, "feature index must be >= 1");
      double val;
      auto [vp, vec] = std::from_chars(ip + 1, end, val);
      if (vec != std::errc() || (vp != end && *vp != ' ' && *vp != '\t'))
        throw ParseError(lineno, "malformed feature value");
      const std::uint64_t internal = idx - 1;  // 0-based
      if (static_cast<long long>(internal) <= prev_internal)
        throw ParseError(lineno, "feature indices not strictly ascending");
      if (expected_dim && internal >= *expected_dim)
        throw ParseError(lineno, "feature index exceeds expected dimension");
      if (internal > 0xffffffffULL)
        throw ParseError(lineno, "feature index too large");
      if (val != 0.0) {  // explicit zeros are dropped
        ds.indices.push_back(static_cast<std::uint32_t>(internal));
        ds.values.push_back(val);
      }
      any_index = true;
      max_index_seen =
          std::max(max_index_seen, static_cast<std::uint32_t>(internal));
      prev_internal = static_cast<long long>(internal);
      p = vp;
    }
    ds.labels.push_back(label);
    ds.offsets.push_back(ds.indices.size());
    (label > 0 ? ds.pos_ids : ds.neg_ids).push_back(ds.labels.size() - 1);
  }
  if (ds.labels.empty()) throw ParseError(lineno, "no samples in input");
  ds.dim = expected_dim
               ? *expected_dim
               : (any_index ? static_cast<std::size_t>(max_index_seen) + 1 : 1);
  return ds;
}

SparseDataset load_libsvm(const std::string& path,
                          std::optional<std::size_t> expected_dim) {
  std::string text;
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw ConfigError("cannot open " + path);
    char buf[1 << 16];
    int got;
    while ((got = gzread(gz, buf, sizeof(buf))) > 0) text.append(buf, got);
    const bool bad = got < 0;
    gzclose(gz);
    if (bad) throw ConfigError("gzip read error in " + path);
  } else {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw ConfigError("cannot open " + path);
    char buf[1 << 16];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
    std::fclose(f);
  }
  std::istringstream in(text);
  return parse_libsvm(in, expected_dim);
}

void serialize_libsvm(const SparseDataset& ds, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    out << (ds.labels[i] > 0 ? "1" : "-1");
    const SparseView r = ds.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      std::snprintf(buf, sizeof(buf), " %u:%.17g", r.indices[k] + 1,
                    r.values[k]);
      out << buf;
    }
    out << '\n';
  }
}

std::string serialize_libsvm(const SparseDataset& ds) {
  std::ostringstream out;
  serialize_libsvm(ds, out);
  return out.str();
}

}  // namespace nerm
