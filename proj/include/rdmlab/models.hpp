#pragma once

// Model systems as operator bundles: open Hubbard chains, a grid-discretized
// one-dimensional soft Coulomb problem and seeded random instances.

#include "rdmlab/density.hpp"
#include "rdmlab/fock.hpp"
#include "rdmlab/random.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rdmlab {

inline constexpr const char* kGeneratorName = "rdmlab 0.1.0";

struct BundleMetadata {
  std::string model;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
  std::map<std::string, double> parameters;
};

struct OperatorBundle {
  int d = 0;
  int n = 0;
  Matrix t;
  TwoBodyTensor w;
  /// Either a partition of basis indices or explicit projections.
  std::vector<std::vector<int>> partition;
  std::vector<Matrix> projections;
  std::vector<double> weights;
  std::optional<Matrix> potential;  ///< one-body potential attached to the model
  std::optional<Matrix> gamma;      ///< optional reference density matrix
  BundleMetadata metadata;

  PVM pvm() const {
    if (!partition.empty()) return PVM::from_partition(d, partition, weights);
    if (!projections.empty()) return PVM::from_projections(projections, weights);
    std::vector<std::vector<int>> singletons;
    for (int i = 0; i < d; ++i) singletons.push_back({i});
    return PVM::from_partition(d, singletons, weights);
  }

  KineticOperator kinetic() const { return KineticOperator(t); }

  SystemSpec system() const {
    require_orbital_count(d);
    return make_system(t, w, n, metadata.seed);
  }

  Matrix potential_or_zero() const { return potential ? *potential : Matrix::Zero(d, d); }
};

/// Open chain of L sites with hopping -t and on-site repulsion U. With spin,
/// site i carries spin orbitals 2i (up) and 2i+1 (down).
inline OperatorBundle build_hubbard(int sites, bool spin, double t, double u, int n = -1) {
  const int per_site = spin ? 2 : 1;
  const int d = sites * per_site;
  if (sites < 1) throw Error(ErrorCode::IndexOutOfRange, "need at least one site");
  if (d > kMaxOrbitals) {
    throw Error(ErrorCode::DimensionTooLarge,
                "d = " + std::to_string(d) + " exceeds " + std::to_string(kMaxOrbitals));
  }
  if (u != 0.0 && !spin) throw Error(ErrorCode::SpinRequiredForU, "on-site U needs two spin orbitals per site");
  if (u < 0.0) throw Error(ErrorCode::NotPositive, "U must be nonnegative");

  OperatorBundle out;
  out.d = d;
  out.n = n < 0 ? sites : n;
  out.t = Matrix::Zero(d, d);
  for (int i = 0; i + 1 < sites; ++i) {
    for (int s = 0; s < per_site; ++s) {
      const int a = i * per_site + s;
      const int b = (i + 1) * per_site + s;
      out.t(a, b) = -t;
      out.t(b, a) = -t;
    }
  }
  // -t times the adjacency is indefinite. The kinetic operator gets the
  // smallest shift c making it PSD and the bundle carries the potential -c I,
  // so T + v reproduces the plain hopping matrix.
  const double c = std::max(0.0, -lambda_min(out.t));
  out.t += c * Matrix::Identity(d, d);
  out.potential = Matrix(-c * Matrix::Identity(d, d));
  out.w.d = d;
  out.w.interaction = true;
  if (u != 0.0) {
    for (int i = 0; i < sites; ++i) {
      const int up = 2 * i, down = 2 * i + 1;
      out.w.entries.push_back({up, down, up, down, cd(u)});
      out.w.entries.push_back({down, up, down, up, cd(u)});
    }
  }
  for (int i = 0; i < sites; ++i) {
    std::vector<int> cell;
    for (int s = 0; s < per_site; ++s) cell.push_back(i * per_site + s);
    out.partition.push_back(cell);
  }
  out.weights.assign(sites, 1.0);
  out.metadata.model = "hubbard";
  out.metadata.parameters = {{"sites", sites}, {"spin", spin ? 1.0 : 0.0}, {"t", t}, {"U", u}};
  return out;
}

/// Interior grid points x_i = -L/2 + (i+1) h, h = L/(n+1), with Dirichlet
/// walls. T is the 3-point Laplacian (1/(2h^2)) tridiag(-1, 2, -1) and the
/// potential is -Z / sqrt(x^2 + s^2). Grid cells carry weight h.
inline OperatorBundle build_coulomb1d(int points, double box, double softening, double z,
                                      int n = 1) {
  if (points < 2) throw Error(ErrorCode::IndexOutOfRange, "need at least two grid points");
  if (!(box > 0.0) || !(softening > 0.0)) {
    throw Error(ErrorCode::NotPositive, "box length and softening must be positive");
  }
  const double h = box / (points + 1);
  OperatorBundle out;
  out.d = points;
  out.n = n;
  out.t = Matrix::Zero(points, points);
  Matrix v = Matrix::Zero(points, points);
  const double k = 1.0 / (2.0 * h * h);
  for (int i = 0; i < points; ++i) {
    out.t(i, i) = 2.0 * k;
    if (i + 1 < points) {
      out.t(i, i + 1) = -k;
      out.t(i + 1, i) = -k;
    }
    const double x = -0.5 * box + (i + 1) * h;
    v(i, i) = -z / std::sqrt(x * x + softening * softening);
  }
  out.potential = v;
  out.w.d = points;
  out.w.interaction = true;
  for (int i = 0; i < points; ++i) out.partition.push_back({i});
  out.weights.assign(points, h);
  out.metadata.model = "coulomb1d";
  out.metadata.parameters = {{"points", points}, {"box", box}, {"softening", softening}, {"Z", z}};
  return out;
}

/// Random PSD kinetic operator and nonnegative pair interaction on d
/// orbitals, with the standard-basis PVM.
inline OperatorBundle build_random(int d, int n, std::uint64_t seed, double max_u = 2.0) {
  require_orbital_count(d);
  RandomSource rng(seed);
  OperatorBundle out;
  out.d = d;
  out.n = n;
  out.t = rng.psd(d);
  out.w = rng.pair_interaction(d, max_u);
  for (int i = 0; i < d; ++i) out.partition.push_back({i});
  out.weights.assign(d, 1.0);
  out.metadata.model = "random";
  out.metadata.seed = seed;
  out.metadata.parameters = {{"max_u", max_u}};
  return out;
}

}  // namespace rdmlab
