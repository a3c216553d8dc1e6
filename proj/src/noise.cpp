#include "nerm/noise.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "nerm/errors.hpp"

namespace nerm {

NoiseSpec NoiseSpec::dropout(double p) {
  if (!(p >= 0.0 && p < 1.0))
    throw ConfigError("dropout probability must lie in [0, 1)");
  return {NoiseKind::dropout, p};
}

NoiseSpec NoiseSpec::additive_gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError("gaussian sigma must be positive and finite");
  return {NoiseKind::additive_gaussian, sigma};
}

NoiseSpec NoiseSpec::parse(std::string_view token) {
  if (token == "none") return none();
  auto parse_param = [&](std::string_view text) {
    double v;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw ConfigError("bad noise parameter in \"" + std::string(token) +
                        "\"");
    return v;
  };
  if (token.rfind("dropout:", 0) == 0)
    return dropout(parse_param(token.substr(8)));
  if (token.rfind("gauss:", 0) == 0)
    return additive_gaussian(parse_param(token.substr(6)));
  throw ConfigError("unknown noise spec \"" + std::string(token) + "\"");
}

std::string NoiseSpec::format() const {
  char buf[48];
  switch (kind) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::dropout:
      std::snprintf(buf, sizeof(buf), "dropout:%.17g", param);
      return buf;
    case NoiseKind::additive_gaussian:
      std::snprintf(buf, sizeof(buf), "gauss:%.17g", param);
      return buf;
  }
  return "none";
}

SparseVector perturb(SparseView x, const NoiseSpec& spec, RngStream& rng) {
  SparseVector out;
  switch (spec.kind) {
    case NoiseKind::none:
      out.indices.assign(x.indices.begin(), x.indices.end());
      out.values.assign(x.values.begin(), x.values.end());
      return out;
    case NoiseKind::dropout: {
      const double p = spec.param;
      const double scale = 1.0 / (1.0 - p);
      out.indices.reserve(x.nnz());
      out.values.reserve(x.nnz());
      for (std::size_t k = 0; k < x.nnz(); ++k) {
        if (rng.next_double() >= p) {  // kept with probability 1-p
          out.indices.push_back(x.indices[k]);
          out.values.push_back(x.values[k] * scale);
        }
      }
      return out;
    }
    case NoiseKind::additive_gaussian: {
      out.indices.reserve(x.nnz());
      out.values.reserve(x.nnz());
      for (std::size_t k = 0; k < x.nnz(); ++k) {
        const double v = x.values[k] + spec.param * rng.next_gaussian();
        if (v != 0.0) {
          out.indices.push_back(x.indices[k]);
          out.values.push_back(v);
        }
      }
      return out;
    }
  }
  return out;
}

SparseVector expected_sample(SparseView x, const NoiseSpec&) {
  // Dropout and additive zero-mean noise both have E[x_hat] = x.
  SparseVector out;
  out.indices.assign(x.indices.begin(), x.indices.end());
  out.values.assign(x.values.begin(), x.values.end());
  return out;
}

double expected_sq_norm(SparseView x, const NoiseSpec& spec) {
  const double base = sq_norm(x);
  switch (spec.kind) {
    case NoiseKind::none:
      return base;
    case NoiseKind::dropout:
      return base / (1.0 - spec.param);
    case NoiseKind::additive_gaussian:
      return base +
             static_cast<double>(x.nnz()) * spec.param * spec.param;
  }
  return base;
}

}  // namespace nerm
