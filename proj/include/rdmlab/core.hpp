#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rdmlab {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<cd>;

/// Hermiticity tolerance, absolute and measured on the largest entry.
inline constexpr double kHermitianTol = 1e-12;
/// Tolerance for order relations (PSD, 0 <= gamma <= 1) on eigenvalues.
inline constexpr double kOrderTol = 1e-10;

enum class ErrorCode {
  NonIncreasingOrbitals,
  OrbitalOutOfRange,
  LinearlyDependentOrbitals,
  DimensionTooLarge,
  NonHermitianInput,
  IndexOutOfRange,
  NotPositive,
  WrongSectorDimension,
  ShapeMismatch,
  InfeasibleSpectrum,
  NotRepresentable,
  DimensionTooSmallForTelescope,
  NonPositiveT,
  SolverStall,
  NonHermitianReconstruction,
  InfeasibleOffset,
  NotUnitVector,
  BracketInfeasible,
  InvalidPVM,
  UnfaithfulPVM,
  NegativeDensity,
  OutOfDomain,
  DenseLimitExceeded,
  SpinRequiredForU,
  InvalidBundle,
  IdentityCheckFailed,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonIncreasingOrbitals: return "NonIncreasingOrbitals";
    case ErrorCode::OrbitalOutOfRange: return "OrbitalOutOfRange";
    case ErrorCode::LinearlyDependentOrbitals: return "LinearlyDependentOrbitals";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::WrongSectorDimension: return "WrongSectorDimension";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InfeasibleSpectrum: return "InfeasibleSpectrum";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::DimensionTooSmallForTelescope: return "DimensionTooSmallForTelescope";
    case ErrorCode::NonPositiveT: return "NonPositiveT";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::NonHermitianReconstruction: return "NonHermitianReconstruction";
    case ErrorCode::InfeasibleOffset: return "InfeasibleOffset";
    case ErrorCode::NotUnitVector: return "NotUnitVector";
    case ErrorCode::BracketInfeasible: return "BracketInfeasible";
    case ErrorCode::InvalidPVM: return "InvalidPVM";
    case ErrorCode::UnfaithfulPVM: return "UnfaithfulPVM";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DenseLimitExceeded: return "DenseLimitExceeded";
    case ErrorCode::SpinRequiredForU: return "SpinRequiredForU";
    case ErrorCode::InvalidBundle: return "InvalidBundle";
    case ErrorCode::IdentityCheckFailed: return "IdentityCheckFailed";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline double hermiticity_defect(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

inline void require_hermitian(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " is not square");
  }
  if (!is_hermitian(a)) {
    throw Error(ErrorCode::NonHermitianInput,
                std::string(what) + " deviates from Hermitian by " +
                    std::to_string(hermiticity_defect(a)));
  }
}

inline void require_square(const Matrix& a, Eigen::Index n, std::string_view what) {
  if (a.rows() != n || a.cols() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

/// Re Tr(AB), summed entrywise without forming the product.
inline double trace_product(const Matrix& a, const Matrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

inline double trace_product(const SparseMatrix& a, const Matrix& b) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      acc += (it.value() * b(it.col(), it.row())).real();
    }
  }
  return acc;
}

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

inline Matrix outer(const Vector& u) { return u * u.adjoint(); }

}  // namespace rdmlab
