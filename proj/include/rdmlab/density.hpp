#pragma once

// Finite projection-valued measures, the diagonal map to densities and its
// adjoint, the quotient norm on densities, and the density functional with
// its energy counterpart.

#include "rdmlab/functionals.hpp"
#include "rdmlab/optim.hpp"
#include "rdmlab/xspace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rdmlab {

inline constexpr double kPvmTol = 1e-10;

class PVM {
 public:
  PVM() = default;

  /// Cells given as groups of basis indices; every index in [0, d) must
  /// appear exactly once. Empty groups are allowed and yield P_j = 0.
  static PVM from_partition(int d, const std::vector<std::vector<int>>& cells,
                            std::vector<double> weights = {}) {
    std::vector<int> seen(d, 0);
    std::vector<Matrix> projections;
    for (const auto& cell : cells) {
      Matrix p = Matrix::Zero(d, d);
      for (int i : cell) {
        if (i < 0 || i >= d) {
          throw Error(ErrorCode::InvalidPVM, "cell index " + std::to_string(i) + " outside [0, d)");
        }
        if (seen[i]++) throw Error(ErrorCode::InvalidPVM, "index " + std::to_string(i) + " repeated");
        p(i, i) = 1.0;
      }
      projections.push_back(std::move(p));
    }
    PVM out = from_projections(std::move(projections), std::move(weights));
    out.cells_ = cells;
    return out;
  }

  static PVM from_projections(std::vector<Matrix> projections, std::vector<double> weights = {}) {
    if (weights.empty()) weights.assign(projections.size(), 1.0);
    PVM out;
    out.projections_ = std::move(projections);
    out.weights_ = std::move(weights);
    out.validate();
    return out;
  }

  void validate() const {
    if (projections_.empty()) throw Error(ErrorCode::InvalidPVM, "no cells");
    if (weights_.size() != projections_.size()) {
      throw Error(ErrorCode::InvalidPVM, "weight count differs from cell count");
    }
    const Eigen::Index d = projections_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < projections_.size(); ++j) {
      const Matrix& p = projections_[j];
      if (p.rows() != d || p.cols() != d) throw Error(ErrorCode::InvalidPVM, "cell shapes differ");
      if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j])) {
        throw Error(ErrorCode::InvalidPVM, "weights must be positive");
      }
      if (hermiticity_defect(p) > kPvmTol) throw Error(ErrorCode::InvalidPVM, "cell not Hermitian");
      if ((p * p - p).norm() > kPvmTol) throw Error(ErrorCode::InvalidPVM, "cell not idempotent");
      for (std::size_t k = j + 1; k < projections_.size(); ++k) {
        if ((p * projections_[k]).norm() > kPvmTol) {
          throw Error(ErrorCode::InvalidPVM,
                      "cells " + std::to_string(j) + " and " + std::to_string(k) + " overlap");
        }
      }
      sum += p;
    }
    if ((sum - Matrix::Identity(d, d)).norm() > kPvmTol) {
      throw Error(ErrorCode::InvalidPVM, "cells do not sum to the identity");
    }
  }

  bool faithful() const {
    for (const Matrix& p : projections_) {
      if (p.norm() <= kPvmTol) return false;
    }
    return true;
  }

  void require_faithful() const {
    if (!faithful()) throw Error(ErrorCode::UnfaithfulPVM, "a cell has zero projection");
  }

  int dim() const { return static_cast<int>(projections_.front().rows()); }
  int size() const { return static_cast<int>(projections_.size()); }
  const Matrix& projection(int j) const { return projections_[j]; }
  const std::vector<Matrix>& projections() const { return projections_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int j) const { return weights_[j]; }
  double rank(int j) const { return projections_[j].trace().real(); }
  /// Index groups when built from a partition.
  const std::optional<std::vector<std::vector<int>>>& cells() const { return cells_; }

  /// Orthonormal basis of the range of P_j.
  Matrix range(int j) const {
    const EigenSystem es = eigh(projections_[j]);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
      if (es.values(i) > 0.5) cols.push_back(i);
    }
    Matrix out(dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(i) = es.vectors.col(cols[i]);
    return out;
  }

 private:
  std::vector<Matrix> projections_;
  std::vector<double> weights_;
  std::optional<std::vector<std::vector<int>>> cells_;
};

/// Density values rho_j, the derivative of S -> Tr(P(S) gamma) with respect
/// to the cell weights.
struct Density {
  RealVector values;

  double l1_norm(const PVM& pvm) const {
    double acc = 0.0;
    for (int j = 0; j < pvm.size(); ++j) acc += pvm.weight(j) * std::abs(values(j));
    return acc;
  }
  double integral(const PVM& pvm) const {
    double acc = 0.0;
    for (int j = 0; j < pvm.size(); ++j) acc += pvm.weight(j) * values(j);
    return acc;
  }
  bool positive(double tol = kPvmTol) const { return values.size() == 0 || values.minCoeff() >= -tol; }
};

inline void require_density_shape(const RealVector& v, const PVM& pvm) {
  if (v.size() != pvm.size()) {
    throw Error(ErrorCode::ShapeMismatch, "density has " + std::to_string(v.size()) +
                                              " entries, PVM has " + std::to_string(pvm.size()) +
                                              " cells");
  }
}

inline Density diagonal_map(const Matrix& gamma, const PVM& pvm) {
  require_square(gamma, pvm.dim(), "gamma");
  Density out{RealVector(pvm.size())};
  for (int j = 0; j < pvm.size(); ++j) {
    out.values(j) = trace_product(pvm.projection(j), gamma) / pvm.weight(j);
  }
  return out;
}

/// sum_j v_j P_j.
inline Matrix diagonal_adjoint(const RealVector& v, const PVM& pvm) {
  require_density_shape(v, pvm);
  Matrix out = Matrix::Zero(pvm.dim(), pvm.dim());
  for (int j = 0; j < pvm.size(); ++j) out += v(j) * pvm.projection(j);
  return out;
}

/// Block-averaged preimage: gamma = sum_j (mu_j rho_j / rank P_j) P_j.
inline Matrix positive_preimage(const Density& rho, const PVM& pvm) {
  require_density_shape(rho.values, pvm);
  pvm.require_faithful();
  if (!rho.positive()) throw Error(ErrorCode::NegativeDensity, "density has a negative entry");
  Matrix out = Matrix::Zero(pvm.dim(), pvm.dim());
  for (int j = 0; j < pvm.size(); ++j) {
    out += (pvm.weight(j) * std::max(rho.values(j), 0.0) / pvm.rank(j)) * pvm.projection(j);
  }
  return out;
}

struct XiNormResult {
  double value = 0.0;  ///< feasible primal value ||X||_1
  double lower = 0.0;  ///< certified dual value
  double gap = 0.0;
  Matrix preimage;     ///< gamma with D(gamma) = rho
  RealVector potential;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// ADMM for min f(X) s.t. Tr(Q_j X) = c_j, with the constraint handled by an
// exact Frobenius projection. prox evaluates argmin f(X) + (rho/2)||X - Z||^2
// and certify turns a potential v into a dual lower bound.
template <class Prox, class Value, class Certify>
XiNormResult affine_admm(const std::vector<Matrix>& q, const RealVector& c, Prox prox,
                         Value value, Certify certify, double tol, int max_iter) {
  const Eigen::Index d = q.front().rows();
  const Eigen::Index m = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) gram(i, j) = trace_product(q[i], q[j]);
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> gram_solver(gram);
  auto coordinates = [&](const Matrix& a) {
    RealVector out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = trace_product(q[i], a);
    return out;
  };
  auto combine = [&](const RealVector& w) {
    Matrix out = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < m; ++i) out += w(i) * q[i];
    return out;
  };
  auto project = [&](const Matrix& a) {
    const RealVector w = gram_solver.solve(coordinates(a) - c);
    return Matrix(a - combine(w));
  };

  XiNormResult out;
  Matrix z = project(Matrix::Zero(d, d));
  Matrix u = Matrix::Zero(d, d);
  double rho = 1.0;
  double best_lower = -std::numeric_limits<double>::infinity();
  RealVector best_v = RealVector::Zero(m);
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix x = prox(z - u, rho);
    const Matrix z_old = z;
    z = project(x + u);
    u += x - z;
    const double primal_res = (x - z).norm();
    const double dual_res = rho * (z - z_old).norm();
    out.iterations = it;
    if (it % 10 == 0 || it == max_iter) {
      // rho * u is a subgradient of f at x up to the residuals; its
      // component along span{Q_j} is the candidate potential
      const RealVector v = gram_solver.solve(coordinates(-rho * u));
      const double lower = certify(v, combine(v));
      if (lower > best_lower) {
        best_lower = lower;
        best_v = v;
      }
      const double upper = value(z);
      if (upper - best_lower <= tol) break;
    }
    if (primal_res > 10.0 * dual_res) {
      rho *= 2.0;
      u /= 2.0;
    } else if (dual_res > 10.0 * primal_res) {
      rho /= 2.0;
      u *= 2.0;
    }
  }
  out.value = value(z);
  out.lower = best_lower;
  out.gap = out.value - out.lower;
  out.preimage = z;
  out.potential = best_v;
  out.converged = out.gap <= tol;
  return out;
}

}  // namespace detail

/// inf ||gamma||_X over gamma with D(gamma) = rho. Solved in the variable
/// X = A^{1/2} gamma A^{1/2}, A = I + T, where the problem becomes trace-norm
/// minimization under m linear constraints. The dual bound is c.v for a
/// potential v rescaled so that ||sum v_j Q_j|| <= 1.
inline XiNormResult xi_norm(const Density& rho, const PVM& pvm, const KineticOperator& t,
                            double tol = 1e-6, int max_iter = 200000) {
  require_density_shape(rho.values, pvm);
  pvm.require_faithful();
  require_square(t.matrix(), pvm.dim(), "T");
  const Matrix& s = t.inv_sqrt_shifted();
  std::vector<Matrix> q;
  RealVector c(pvm.size());
  for (int j = 0; j < pvm.size(); ++j) {
    q.push_back(hermitian_part(s * pvm.projection(j) * s));
    c(j) = pvm.weight(j) * rho.values(j);
  }
  auto prox = [](const Matrix& a, double r) {
    return spectral_map(hermitian_part(a), [r](double x) {
      return x > 1.0 / r ? x - 1.0 / r : (x < -1.0 / r ? x + 1.0 / r : 0.0);
    });
  };
  auto value = [](const Matrix& x) { return trace_norm(hermitian_part(x)); };
  auto certify = [&c](const RealVector& v, const Matrix& combo) {
    const double scale = std::max(1.0, operator_norm(hermitian_part(combo)));
    return c.dot(v) / scale;
  };
  XiNormResult out = detail::affine_admm(q, c, prox, value, certify, tol, max_iter);
  out.preimage = hermitian_part(s * out.preimage * s);
  if (!out.converged) {
    throw Error(ErrorCode::SolverStall, "xi norm gap " + std::to_string(out.gap));
  }
  return out;
}

/// The same infimum restricted to gamma >= 0, where ||gamma||_X = Tr(A gamma).
inline XiNormResult xi_norm_positive(const Density& rho, const PVM& pvm,
                                     const KineticOperator& t, double tol = 1e-6,
                                     int max_iter = 200000) {
  require_density_shape(rho.values, pvm);
  pvm.require_faithful();
  if (!rho.positive()) throw Error(ErrorCode::NegativeDensity, "density has a negative entry");
  const Matrix& s = t.inv_sqrt_shifted();
  const Eigen::Index d = pvm.dim();
  std::vector<Matrix> q;
  RealVector c(pvm.size());
  for (int j = 0; j < pvm.size(); ++j) {
    q.push_back(hermitian_part(s * pvm.projection(j) * s));
    c(j) = pvm.weight(j) * rho.values(j);
  }
  auto prox = [d](const Matrix& a, double r) {
    return psd_project(hermitian_part(a) - Matrix::Identity(d, d) / r);
  };
  auto value = [](const Matrix& x) {
    // trace of the PSD part; the projected iterate may carry tiny negative
    // eigenvalues, which are charged at their absolute value
    return trace_norm(hermitian_part(x));
  };
  auto certify = [&c](const RealVector& v, const Matrix& combo) {
    const double top = lambda_max(hermitian_part(combo));
    return c.dot(v) / std::max(1.0, top);
  };
  XiNormResult out = detail::affine_admm(q, c, prox, value, certify, tol, max_iter);
  out.preimage = hermitian_part(s * out.preimage * s);
  if (!out.converged) {
    throw Error(ErrorCode::SolverStall, "positive xi norm gap " + std::to_string(out.gap));
  }
  return out;
}

/// Constraint map Gamma -> (Tr(P^_j Gamma))_j with targets mu_j rho_j,
/// rescaled to sum to exactly N (the cells add up to the number operator).
inline AffineMap density_constraint_map(const Density& rho, const PVM& pvm, const SystemSpec& sys) {
  AffineMap map;
  map.target.resize(pvm.size());
  for (int j = 0; j < pvm.size(); ++j) {
    map.ops.push_back(second_quantize_one_body(pvm.projection(j), *sys.ladder).matrix);
    map.target(j) = pvm.weight(j) * rho.values(j);
  }
  const double total = map.target.sum();
  if (total > 0.0) map.target *= sys.n / total;
  return map;
}

/// Why rho lies outside the domain of F, if it does: negative entries, wrong
/// particle number, or a cell holding more particles than its rank allows.
inline std::optional<std::string> dft_domain_violation(const Density& rho, const PVM& pvm, int n) {
  if (!rho.positive()) return "density has a negative entry";
  const double total = rho.integral(pvm);
  if (std::abs(total - n) > 1e-8) {
    return "density integrates to " + std::to_string(total) + ", expected " + std::to_string(n);
  }
  for (int j = 0; j < pvm.size(); ++j) {
    const double cap = std::min(pvm.rank(j), static_cast<double>(n));
    if (pvm.weight(j) * rho.values(j) > cap + 1e-8) {
      return "cell " + std::to_string(j) + " holds more than " + std::to_string(cap) + " particles";
    }
  }
  return std::nullopt;
}

inline constexpr double kDensityFaceTol = 1e-8;

/// Cells that are empty or saturated pin their orbitals; the rest are active.
inline OrbitalFace density_face(const Density& rho, const PVM& pvm) {
  std::vector<Matrix> core, active;
  for (int j = 0; j < pvm.size(); ++j) {
    const double load = pvm.weight(j) * rho.values(j);
    if (pvm.rank(j) < 0.5 || load <= kDensityFaceTol) continue;
    (load >= pvm.rank(j) - kDensityFaceTol ? core : active).push_back(pvm.range(j));
  }
  auto stack = [&](const std::vector<Matrix>& blocks) {
    Eigen::Index cols = 0;
    for (const Matrix& b : blocks) cols += b.cols();
    Matrix out(pvm.dim(), cols);
    Eigen::Index at = 0;
    for (const Matrix& b : blocks) {
      out.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
    return out;
  };
  return {stack(core), stack(active)};
}

inline bool on_density_boundary(const Density& rho, const PVM& pvm, double tol = 1e-6) {
  for (int j = 0; j < pvm.size(); ++j) {
    const double load = pvm.weight(j) * rho.values(j);
    if (load <= tol || load >= pvm.rank(j) - tol) return true;
  }
  return false;
}

/// F(rho): min Tr((T^ + W^) Gamma) over N-particle states whose density is
/// rho, together with the dual sup over v of E(v) - sum mu_j v_j rho_j
/// computed independently by smoothed ascent. value is the primal value,
/// dual_value the exact dual objective at the ascent's maximizer, and
/// dual_certificate the potential D*(v).
inline FunctionalValue f_dft(const Density& rho, const SystemSpec& sys, const PVM& pvm,
                             const SolverConfig& cfg = {}, double beta_max = kDefaultBetaMax) {
  require_density_shape(rho.values, pvm);
  if (pvm.dim() != sys.d) throw Error(ErrorCode::ShapeMismatch, "PVM dimension differs from d");
  if (const auto why = dft_domain_violation(rho, pvm, sys.n)) return PlusInfinity{*why};

  const Matrix h = sys.t_hat + sys.w_hat;
  const AffineMap map = density_constraint_map(rho, pvm, sys);
  const Matrix init = coleman_preimage(positive_preimage(rho, pvm), *sys.ladder);
  const OrbitalFace face = density_face(rho, pvm);
  const bool reduce = face.active.cols() < sys.d;
  const Matrix isometry = reduce ? face_isometry(face, *sys.ladder) : Matrix();
  FunctionalResult out = constrained_search(h, map, init, cfg, reduce ? &isometry : nullptr);

  const SmoothedDualOutcome dual = smoothed_dual(h, map, cfg, beta_max);
  out.dual_value = dual.value;
  out.multipliers = dual.maximizer;
  out.dual_certificate = diagonal_adjoint(dual.maximizer, pvm);
  out.gap = out.value - dual.value;
  out.iterations += dual.iterations;
  out.wall_time_ms += dual.wall_time_ms;
  out.boundary = on_density_boundary(rho, pvm);
  const double gap_tol = out.boundary ? kBoundaryGapTol : std::max(cfg.tol_gap, 1e-5);
  out.converged = out.feasibility <= cfg.tol_feas && out.gap >= -1e-9 && out.gap <= gap_tol;
  return out;
}

/// E(v) = E_RDM(D*(v)).
inline double e_dft(const RealVector& v, const SystemSpec& sys, const PVM& pvm) {
  return e_rdm(diagonal_adjoint(v, pvm), sys);
}

}  // namespace rdmlab
