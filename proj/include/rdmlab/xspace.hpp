#pragma once

// Kinetic-energy-weighted trace norm and its dual, optimal positive
// decompositions, polarization of quadratic forms, relative form bounds and
// the rank-one trace distance.
//
// With A = I + T, the X-norm is the trace norm of A^{1/2} gamma A^{1/2} and
// the dual norm is the operator norm of A^{-1/2} V A^{-1/2}. The SDP oracle
// below solves the defining minimization directly and is kept independent of
// the congruence.

#include "rdmlab/optim.hpp"

#include <Eigen/Eigenvalues>

#include <functional>
#include <vector>

namespace rdmlab {

/// Positive semidefinite kinetic operator with cached (I+T)^{+-1/2}.
class KineticOperator {
 public:
  explicit KineticOperator(Matrix t) : t_(std::move(t)) {
    require_hermitian(t_, "kinetic operator");
    const EigenSystem es = eigh(t_);
    const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
    if (es.values.size() && es.values(0) < -1e-12 * scale) {
      throw Error(ErrorCode::NonPositiveT,
                  "kinetic operator has eigenvalue " + std::to_string(es.values(0)));
    }
    eigenvalues_ = es.values.cwiseMax(0.0);
    eigenvectors_ = es.vectors;
    sqrt_shifted_ = es.reassemble((1.0 + eigenvalues_.array()).sqrt().matrix());
    inv_sqrt_shifted_ = es.reassemble((1.0 + eigenvalues_.array()).rsqrt().matrix());
  }

  static KineticOperator zero(Eigen::Index d) { return KineticOperator(Matrix::Zero(d, d)); }

  const Matrix& matrix() const { return t_; }
  Eigen::Index dim() const { return t_.rows(); }
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double max_eigenvalue() const { return eigenvalues_.size() ? eigenvalues_.maxCoeff() : 0.0; }
  Matrix shifted() const { return Matrix::Identity(dim(), dim()) + t_; }
  /// (I+T)^{1/2}
  const Matrix& sqrt_shifted() const { return sqrt_shifted_; }
  /// (I+T)^{-1/2}
  const Matrix& inv_sqrt_shifted() const { return inv_sqrt_shifted_; }

 private:
  Matrix t_;
  RealVector eigenvalues_;
  Matrix eigenvectors_;
  Matrix sqrt_shifted_;
  Matrix inv_sqrt_shifted_;
};

struct Decomposition {
  Matrix plus;
  Matrix minus;
};

inline void require_shape(const Matrix& gamma, const KineticOperator& t) {
  require_square(gamma, t.dim(), "operator");
}

/// Tr(T gamma) for Hermitian gamma.
inline double trace_T(const Matrix& gamma, const KineticOperator& t) {
  require_shape(gamma, t);
  return trace_product(t.matrix(), gamma);
}

/// Tr(T gamma+) - Tr(T gamma-) for an explicit decomposition.
inline double trace_T(const Decomposition& parts, const KineticOperator& t) {
  return trace_T(parts.plus, t) - trace_T(parts.minus, t);
}

inline double x_norm(const Matrix& gamma, const KineticOperator& t) {
  require_shape(gamma, t);
  return trace_norm(t.sqrt_shifted() * gamma * t.sqrt_shifted());
}

/// Decomposition attaining the X-norm: the Jordan split of the congruence
/// transform, mapped back.
inline Decomposition optimal_decomposition(const Matrix& gamma, const KineticOperator& t) {
  require_shape(gamma, t);
  const EigenSystem es = eigh(t.sqrt_shifted() * gamma * t.sqrt_shifted());
  const Matrix pos = es.reassemble(es.values.cwiseMax(0.0));
  const Matrix neg = es.reassemble((-es.values).cwiseMax(0.0));
  const Matrix& w = t.inv_sqrt_shifted();
  return {hermitian_part(w * pos * w), hermitian_part(w * neg * w)};
}

/// sup |<psi, V psi>| / (||psi||^2 + ||T^{1/2} psi||^2).
inline double dual_norm(const Matrix& v, const KineticOperator& t) {
  require_shape(v, t);
  return operator_norm(t.inv_sqrt_shifted() * v * t.inv_sqrt_shifted());
}

struct XNormOracleResult {
  double value = 0.0;     ///< certified primal value Tr((I+T) S)
  double gap = 0.0;       ///< primal minus certified dual value
  int iterations = 0;
  bool converged = false;
  Decomposition decomposition;
};

/// Solves min Tr((I+T) S) subject to S >= gamma, S >= -gamma by ADMM on the
/// splitting S - gamma = X >= 0, S + gamma = Y >= 0. Every few iterations a
/// feasible primal point (S shifted by a multiple of I) and a feasible dual
/// point Z with -(I+T) <= Z <= I+T (rescaled multipliers) are formed; the
/// difference of their objectives is the reported gap.
inline XNormOracleResult x_norm_sdp_oracle(const Matrix& gamma, const KineticOperator& t,
                                           double tol = 1e-8, int max_iter = 50000) {
  require_shape(gamma, t);
  if (gamma.rows() > 12) {
    throw Error(ErrorCode::DimensionTooLarge, "SDP oracle is limited to d <= 12");
  }
  require_hermitian(gamma, "gamma");
  const Eigen::Index d = gamma.rows();
  const Matrix a = t.shifted();
  const Matrix id = Matrix::Identity(d, d);
  Matrix s = Matrix::Zero(d, d);
  Matrix x = psd_project(-gamma);
  Matrix y = psd_project(gamma);
  Matrix u1 = Matrix::Zero(d, d);
  Matrix u2 = Matrix::Zero(d, d);
  double rho = 1.0;

  XNormOracleResult out;
  out.value = std::numeric_limits<double>::infinity();
  out.gap = std::numeric_limits<double>::infinity();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil;

  for (int it = 1; it <= max_iter; ++it) {
    s = 0.5 * ((x + gamma - u1) + (y - gamma - u2)) - a / (2.0 * rho);
    s = hermitian_part(s);
    const Matrix x_old = x;
    const Matrix y_old = y;
    x = psd_project(s - gamma + u1);
    y = psd_project(s + gamma + u2);
    const Matrix r1 = s - gamma - x;
    const Matrix r2 = s + gamma - y;
    u1 += r1;
    u2 += r2;
    out.iterations = it;

    if (it % 10 == 0 || it == max_iter) {
      // primal certificate
      const double shift =
          std::max({0.0, -lambda_min(s - gamma), -lambda_min(s + gamma)});
      const Matrix s_feas = s + shift * id;
      const double upper = trace_product(a, s_feas);
      // dual certificate
      const Matrix p = psd_project(-rho * u1);
      const Matrix m = psd_project(-rho * u2);
      Matrix z = hermitian_part(p - m);
      pencil.compute(z, a, Eigen::EigenvaluesOnly);
      const double scale = std::max(1.0, pencil.eigenvalues().cwiseAbs().maxCoeff());
      z /= scale;
      const double lower = trace_product(z, gamma);
      if (upper - lower < out.gap) {
        out.gap = upper - lower;
        out.value = upper;
        out.decomposition = {0.5 * (s_feas + gamma), 0.5 * (s_feas - gamma)};
      }
      if (out.gap <= tol) {
        out.converged = true;
        break;
      }
      // residual balancing
      const double primal_res = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
      const double dual_res = rho * std::sqrt((x - x_old).squaredNorm() + (y - y_old).squaredNorm());
      if (primal_res > 10.0 * dual_res) {
        rho *= 2.0;
        u1 /= 2.0;
        u2 /= 2.0;
      } else if (dual_res > 10.0 * primal_res) {
        rho /= 2.0;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }
  return out;
}

/// Rebuilds the Hermitian matrix of a quadratic form from its diagonal
/// values q(psi) = <psi, V psi> via the four-term polarization identity.
inline Matrix polarization_reconstruct(const std::function<cd(const Vector&)>& q, Eigen::Index d,
                                       double tol = 1e-10) {
  Matrix out(d, d);
  const cd i_unit(0.0, 1.0);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index r = 0; r < d; ++r) {
      cd acc = 0.0;
      cd ik = 1.0;        // i^k
      cd minus_ik = 1.0;  // (-i)^k
      for (int k = 0; k < 4; ++k) {
        Vector x = Vector::Zero(d);
        x(p) += 1.0;
        x(r) += minus_ik;
        acc += ik * q(x);
        ik *= i_unit;
        minus_ik *= -i_unit;
      }
      out(p, r) = 0.25 * acc;
    }
  }
  for (Eigen::Index p = 0; p < d; ++p) {
    if (std::abs(out(p, p).imag()) > tol) {
      throw Error(ErrorCode::NonHermitianReconstruction,
                  "diagonal entry has imaginary part " + std::to_string(out(p, p).imag()));
    }
  }
  if (hermiticity_defect(out) > tol) {
    throw Error(ErrorCode::NonHermitianReconstruction,
                "reconstructed form deviates from Hermitian by " +
                    std::to_string(hermiticity_defect(out)));
  }
  return hermitian_part(out);
}

struct FormBound {
  double a = 0.0;  ///< T-bound
  double b = 0.0;  ///< offset
};

/// a T + b I +- V >= 0 up to the order tolerance.
inline bool certifies(const FormBound& bound, const Matrix& v, const KineticOperator& t,
                      double tol = kOrderTol) {
  const Matrix base =
      bound.a * t.matrix() + bound.b * Matrix::Identity(t.dim(), t.dim());
  return lambda_min(base - v) >= -tol && lambda_min(base + v) >= -tol;
}

/// Offset needed on ker T: sup over the kernel of |<psi,V psi>| / ||psi||^2.
inline double kernel_offset(const Matrix& v, const KineticOperator& t) {
  const double scale = std::max(1.0, t.max_eigenvalue());
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index i = 0; i < t.eigenvalues().size(); ++i) {
    if (t.eigenvalues()(i) <= 1e-12 * scale) kernel.push_back(i);
  }
  if (kernel.empty()) return 0.0;
  Matrix basis(t.dim(), static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = t.eigenvectors().col(kernel[k]);
  }
  return operator_norm(basis.adjoint() * v * basis);
}

/// Minimal a >= 0 with a T + b I +- V >= 0, to 1e-8 absolute.
inline double min_T_bound(const Matrix& v, const KineticOperator& t, double b) {
  require_shape(v, t);
  require_hermitian(v, "potential");
  const double needed = kernel_offset(v, t);
  if (b < needed - kOrderTol) {
    throw Error(ErrorCode::InfeasibleOffset,
                "offset " + std::to_string(b) + " below the kernel requirement " +
                    std::to_string(needed));
  }
  auto feasible = [&](double a) { return certifies({a, b}, v, t); };
  double hi = operator_norm(v) * (1.0 + t.max_eigenvalue());
  if (feasible(0.0)) return 0.0;
  hi = std::max(hi, 1e-8);
  // the nominal bracket can be too short when T has small nonzero eigenvalues
  while (!feasible(hi)) {
    if (hi > 1e15) {
      throw Error(ErrorCode::InfeasibleOffset,
                  "no finite T-bound at offset " + std::to_string(b) +
                      " (kernel requirement " + std::to_string(needed) + ")");
    }
    hi *= 2.0;
  }
  return psd_feasibility_bisect(feasible, 0.0, hi, 1e-8);
}

struct BoundCurve {
  std::vector<FormBound> points;
  bool in_R = false;      ///< some sampled offset certifies a T-bound below 1
  bool in_R_eps = false;  ///< heuristic: a(b) nonincreasing and below 0.05 at the last offset
};

/// a(b) at b = 10^k for k = 0..max_exponent. In finite dimension every V is
/// infinitesimally bounded once b >= ||V||, so the flags only mean something
/// for sweeps over discretizations of a continuum problem.
inline BoundCurve bound_curve(const Matrix& v, const KineticOperator& t, int max_exponent = 6) {
  BoundCurve out;
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (int k = 0; k <= max_exponent; ++k) {
    const double b = std::pow(10.0, k);
    const double a = min_T_bound(v, t, b);
    out.points.push_back({a, b});
    if (a > prev + 1e-8) monotone = false;
    prev = a;
    if (a < 1.0) out.in_R = true;
  }
  out.in_R_eps = monotone && out.points.back().a < 0.05;
  return out;
}

struct FormSum {
  Matrix matrix;
  double lower_bound = 0.0;  ///< lambda_min of T + V
};

inline FormSum form_sum(const KineticOperator& t, const Matrix& v) {
  require_shape(v, t);
  Matrix sum = t.matrix() + v;
  const double low = lambda_min(sum);
  return {std::move(sum), low};
}

/// Tr| |phi><phi| - |psi><psi| | = 2 |b|, b the part of psi orthogonal to phi.
inline double rank_one_trace_distance(const Vector& phi, const Vector& psi) {
  if (phi.size() != psi.size()) throw Error(ErrorCode::ShapeMismatch, "vector lengths differ");
  for (const Vector* w : {&phi, &psi}) {
    if (std::abs(w->norm() - 1.0) > 1e-12) {
      throw Error(ErrorCode::NotUnitVector, "norm " + std::to_string(w->norm()));
    }
  }
  const Vector b = psi - phi.dot(psi) * phi;
  return 2.0 * b.norm();
}

}  // namespace rdmlab
