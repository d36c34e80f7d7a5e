#pragma once

// Text serialization of operator bundles. Complex numbers are [re, im]
// pairs; every loaded bundle is revalidated before use.

#include "rdmlab/models.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace rdmlab {

inline constexpr int kBundleFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json complex_to_json(cd z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::InvalidBundle, "complex entry must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, int d, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw Error(ErrorCode::InvalidBundle, what + " must have " + std::to_string(d) + " rows");
  }
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != d) {
      throw Error(ErrorCode::InvalidBundle, what + " row " + std::to_string(i) + " has wrong length");
    }
    for (int k = 0; k < d; ++k) m(i, k) = complex_from_json(j[i][k]);
  }
  return m;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidBundle, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidBundle, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json bundle_to_json(const OperatorBundle& b) {
  using detail::json;
  json j;
  j["format_version"] = kBundleFormatVersion;
  j["d"] = b.d;
  j["N"] = b.n;
  j["T"] = detail::matrix_to_json(b.t);
  json w = json::array();
  for (const auto& e : b.w.entries) {
    w.push_back({{"p", e.p}, {"q", e.q}, {"r", e.r}, {"s", e.s}, {"value", detail::complex_to_json(e.value)}});
  }
  j["W"] = {{"entries", w}, {"positive", b.w.interaction}};
  if (!b.partition.empty()) {
    j["pvm"] = {{"partition", b.partition}};
  } else if (!b.projections.empty()) {
    json p = json::array();
    for (const Matrix& m : b.projections) p.push_back(detail::matrix_to_json(m));
    j["pvm"] = {{"projections", p}};
  }
  j["weights"] = b.weights;
  if (b.potential) j["potential"] = detail::matrix_to_json(*b.potential);
  if (b.gamma) j["gamma"] = detail::matrix_to_json(*b.gamma);
  j["metadata"] = {{"model", b.metadata.model},
                   {"seed", b.metadata.seed},
                   {"generator", b.metadata.generator},
                   {"parameters", b.metadata.parameters}};
  return j;
}

/// Checks every invariant a bundle promises: Hermitian PSD T, a valid PVM,
/// and (when the sector fits) a Hermitian interaction that is nonnegative if
/// flagged.
inline void validate_bundle(const OperatorBundle& b) {
  try {
    if (b.d < 1) throw Error(ErrorCode::InvalidBundle, "d must be positive");
    if (b.n < 0 || b.n > b.d) throw Error(ErrorCode::InvalidBundle, "N must lie in [0, d]");
    require_square(b.t, b.d, "T");
    (void)b.kinetic();
    (void)b.pvm();
    if (b.potential) {
      require_square(*b.potential, b.d, "potential");
      require_hermitian(*b.potential, "potential");
    }
    if (b.gamma) {
      require_square(*b.gamma, b.d, "gamma");
      require_hermitian(*b.gamma, "gamma");
    }
    if (b.w.d != b.d) throw Error(ErrorCode::InvalidBundle, "W dimension differs from d");
    if (b.d <= kMaxOrbitals) {
      (void)second_quantize_two_body(b.w, SectorLadder(b.d, b.n));
    } else if (!b.w.entries.empty()) {
      throw Error(ErrorCode::DimensionTooLarge, "interaction needs d <= " + std::to_string(kMaxOrbitals));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidBundle) throw;
    throw Error(ErrorCode::InvalidBundle, e.what());
  }
}

inline OperatorBundle bundle_from_json(const nlohmann::json& j) {
  using detail::field;
  using detail::json;
  if (!j.is_object()) throw Error(ErrorCode::InvalidBundle, "bundle must be an object");
  const int version = field<int>(j, "format_version");
  if (version != kBundleFormatVersion) {
    throw Error(ErrorCode::InvalidBundle, "unsupported format_version " + std::to_string(version));
  }
  OperatorBundle b;
  b.d = field<int>(j, "d");
  b.n = field<int>(j, "N");
  if (b.d < 1) throw Error(ErrorCode::InvalidBundle, "d must be positive");
  b.t = detail::matrix_from_json(j.at("T"), b.d, "T");
  b.w.d = b.d;
  if (j.contains("W")) {
    const json& w = j.at("W");
    b.w.interaction = w.value("positive", false);
    for (const json& e : w.value("entries", json::array())) {
      b.w.entries.push_back({field<int>(e, "p"), field<int>(e, "q"), field<int>(e, "r"),
                             field<int>(e, "s"), detail::complex_from_json(e.at("value"))});
    }
  }
  if (j.contains("pvm")) {
    const json& p = j.at("pvm");
    if (p.contains("partition")) {
      b.partition = field<std::vector<std::vector<int>>>(p, "partition");
    } else if (p.contains("projections")) {
      for (const json& m : p.at("projections")) {
        b.projections.push_back(detail::matrix_from_json(m, b.d, "projection"));
      }
    } else {
      throw Error(ErrorCode::InvalidBundle, "pvm needs 'partition' or 'projections'");
    }
  }
  if (j.contains("weights")) b.weights = field<std::vector<double>>(j, "weights");
  if (j.contains("potential")) b.potential = detail::matrix_from_json(j.at("potential"), b.d, "potential");
  if (j.contains("gamma")) b.gamma = detail::matrix_from_json(j.at("gamma"), b.d, "gamma");
  if (j.contains("metadata")) {
    const json& m = j.at("metadata");
    b.metadata.model = m.value("model", "");
    b.metadata.seed = m.value("seed", std::uint64_t{0});
    b.metadata.generator = m.value("generator", "");
    b.metadata.parameters = m.value("parameters", std::map<std::string, double>{});
  }
  validate_bundle(b);
  return b;
}

inline std::string dump_bundle(const OperatorBundle& b) { return bundle_to_json(b).dump(2) + "\n"; }

inline OperatorBundle parse_bundle(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidBundle, std::string("parse error: ") + e.what());
  }
  return bundle_from_json(j);
}

inline void save_bundle(const OperatorBundle& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidBundle, "cannot write " + path);
  out << dump_bundle(b);
}

inline OperatorBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidBundle, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bundle(buffer.str());
}

}  // namespace rdmlab
