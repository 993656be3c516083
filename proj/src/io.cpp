#include "cutlab/io.hpp"

#include <string>

#include "cutlab/errors.hpp"

namespace cutlab {
namespace {

double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> flatten_square(const Json& rows, std::size_t& n) {
  if (!rows.is_array()) throw ConfigError("matrix values must be an array");
  std::vector<double> v;
  if (!rows.empty() && rows[0].is_array()) {
    n = rows.size();
    for (const Json& r : rows) {
      if (!r.is_array() || r.size() != n) throw ConfigError("matrix is not square");
      for (const Json& x : r) v.push_back(x.get<double>());
    }
  } else {
    v = rows.get<std::vector<double>>();
    if (n == 0) {
      while (n * n < v.size()) ++n;
    }
    if (n * n != v.size()) throw ConfigError("matrix value count is not n*n");
  }
  return v;
}

}  // namespace

KernelSpec kernel_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("kernel needs a 'family' field");
  const Family f = family_from_string(j.at("family").get<std::string>());
  switch (f) {
    case Family::PowCorner: return KernelSpec::pow_corner(number(j, "alpha", 0.0), number(j, "c", 1.0));
    case Family::SignedPow: return KernelSpec::signed_pow(number(j, "alpha", 0.0), number(j, "c", 1.0));
    case Family::Checkerboard:
      return KernelSpec::checkerboard(static_cast<int>(number(j, "m", 2)), number(j, "c", 1.0));
    case Family::Step: {
      std::size_t n = static_cast<std::size_t>(number(j, "m", 0));
      if (!j.contains("values")) throw ConfigError("step kernel needs 'values'");
      std::vector<double> v = flatten_square(j.at("values"), n);
      return KernelSpec::step(static_cast<int>(n), std::move(v));
    }
    case Family::Truncated:
      if (!j.contains("source")) throw ConfigError("truncated kernel needs 'source'");
      return KernelSpec::truncated(kernel_from_json(j.at("source")), number(j, "threshold", 0.0));
  }
  throw ConfigError("unknown kernel family");
}

Json to_json(const KernelSpec& U) {
  Json j;
  j["family"] = std::string(to_string(U.family()));
  switch (U.family()) {
    case Family::PowCorner:
    case Family::SignedPow:
      j["alpha"] = U.alpha();
      j["c"] = U.c();
      break;
    case Family::Checkerboard:
      j["m"] = U.m_blocks();
      j["c"] = U.c();
      break;
    case Family::Step:
      j["m"] = U.m_blocks();
      j["values"] = U.step_values();
      break;
    case Family::Truncated:
      j["source"] = to_json(U.source());
      j["threshold"] = U.threshold();
      break;
  }
  return j;
}

StepKernel step_kernel_from_json(const Json& j) {
  if (j.is_array()) {
    std::size_t n = 0;
    std::vector<double> v = flatten_square(j, n);
    return StepKernel(n, std::move(v));
  }
  if (!j.is_object() || !j.contains("values")) throw ConfigError("step kernel needs 'values'");
  std::size_t n = j.contains("n") ? j.at("n").get<std::size_t>() : 0;
  std::vector<double> v = flatten_square(j.at("values"), n);
  return StepKernel(n, std::move(v), j.value("zero_diagonal", false));
}

Json to_json(const StepKernel& W) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < W.n(); ++i) {
    Json r = Json::array();
    for (std::size_t k = 0; k < W.n(); ++k) r.push_back(W(i, k));
    rows.push_back(std::move(r));
  }
  return {{"n", W.n()}, {"values", std::move(rows)}, {"zero_diagonal", W.zero_diagonal()}};
}

VectorStepKernel vector_step_kernel_from_json(const Json& j) {
  const Json& vals = j.is_object() ? j.at("values") : j;
  const std::size_t n = vals.size();
  if (n == 0 || !vals[0].is_array() || vals[0].empty() || !vals[0][0].is_array())
    throw ConfigError("vector kernel values must be an n x n x d array");
  const std::size_t d = vals[0][0].size();
  std::vector<double> v;
  v.reserve(n * n * d);
  for (const Json& row : vals) {
    if (row.size() != n) throw ConfigError("vector kernel is not square");
    for (const Json& cell : row) {
      if (cell.size() != d) throw ConfigError("vector kernel has ragged components");
      for (const Json& x : cell) v.push_back(x.get<double>());
    }
  }
  const bool zd = j.is_object() && j.value("zero_diagonal", false);
  return VectorStepKernel(n, d, std::move(v), zd);
}

Json to_json(const VectorStepKernel& W) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < W.n(); ++i) {
    Json r = Json::array();
    for (std::size_t k = 0; k < W.n(); ++k) {
      Json cell = Json::array();
      for (std::size_t c = 0; c < W.d(); ++c) cell.push_back(W(i, k, c));
      r.push_back(std::move(cell));
    }
    rows.push_back(std::move(r));
  }
  return {{"n", W.n()}, {"d", W.d()}, {"values", std::move(rows)},
          {"zero_diagonal", W.zero_diagonal()}};
}

Json to_json(const CutNormResult& r) {
  return {{"value", r.value},
          {"S", r.S},
          {"T", r.T},
          {"method", std::string(to_string(r.method))},
          {"one_sided", r.one_sided}};
}

Json to_json(const CutDistanceEstimate& e) {
  return {{"upper", e.upper},
          {"lower", e.lower},
          {"estimate", e.estimate},
          {"estimate_exact", e.estimate_exact},
          {"permutation", e.permutation},
          {"method", std::string(to_string(e.method))},
          {"blowup_size", e.blowup_size}};
}

Json to_json(const SamplePoints& X) {
  return {{"k", X.k}, {"seed", X.seed}, {"coords", X.coords}};
}

}  // namespace cutlab
