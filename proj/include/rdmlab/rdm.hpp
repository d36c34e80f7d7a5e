#pragma once

// One-body reduced density matrices: the partial trace from an N-particle
// sector, Coleman's representability conditions and two constructive
// preimages (a Slater mixture for representable gamma, and a signed
// projection telescope for arbitrary Hermitian gamma).

#include "rdmlab/fock.hpp"
#include "rdmlab/optim.hpp"

#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace rdmlab {

struct OneBodyRDM {
  Matrix matrix;
  int n = 0;
};

/// gamma_pq = Tr(Gamma a+_q a_p); Tr gamma = N Tr Gamma.
inline Matrix partial_trace(const Matrix& gamma_many, const SectorLadder& ladder) {
  const int d = ladder.orbitals();
  if (gamma_many.rows() != ladder.dim() || gamma_many.cols() != ladder.dim()) {
    throw Error(ErrorCode::WrongSectorDimension,
                "state is " + std::to_string(gamma_many.rows()) + "x" +
                    std::to_string(gamma_many.cols()) + ", sector dimension is " +
                    std::to_string(ladder.dim()));
  }
  Matrix out = Matrix::Zero(d, d);
  if (ladder.particles() == 0) return out;
  std::vector<Matrix> reduced;
  reduced.reserve(d);
  for (int p = 0; p < d; ++p) reduced.emplace_back(ladder.annihilator(p) * gamma_many);
  for (int q = 0; q < d; ++q) {
    const SparseMatrix& aq = ladder.annihilator(q);
    for (Eigen::Index k = 0; k < aq.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(aq, k); it; ++it) {
        const cd c = std::conj(it.value());
        for (int p = 0; p < d; ++p) out(p, q) += reduced[p](it.row(), it.col()) * c;
      }
    }
  }
  return out;
}

/// |Tr(V partial_trace(Gamma)) - Tr(V^ Gamma)|.
inline double adjointness_defect(const Matrix& v, const Matrix& gamma_many,
                                 const SectorLadder& ladder) {
  const Matrix gamma = partial_trace(gamma_many, ladder);
  const ManyBodyOperator v_hat = second_quantize_one_body(v, ladder);
  return std::abs(trace_product(v, gamma) - trace_product(v_hat.matrix, gamma_many));
}

/// Membership of Gamma in the N-particle state set: PSD and unit trace.
inline bool is_many_body_state(const Matrix& gamma_many, double tol = kOrderTol) {
  if (!is_hermitian(gamma_many, 1e-10)) return false;
  return lambda_min(gamma_many) >= -tol && std::abs(gamma_many.trace().real() - 1.0) <= tol;
}

struct RepresentabilityCertificate {
  bool representable = false;
  double trace = 0.0;
  RealVector eigenvalues;
  /// Eigenvalue furthest outside [0, 1] when that condition fails.
  std::optional<double> offending_eigenvalue;
  std::string reason;
};

inline RepresentabilityCertificate check_representability(const Matrix& gamma, int n,
                                                          double tol = kOrderTol) {
  require_hermitian(gamma, "one-body density matrix");
  RepresentabilityCertificate out;
  out.eigenvalues = eigvalsh(gamma);
  out.trace = gamma.trace().real();
  const double low = out.eigenvalues.size() ? out.eigenvalues(0) : 0.0;
  const double high = out.eigenvalues.size() ? out.eigenvalues(out.eigenvalues.size() - 1) : 0.0;
  if (low < -tol || high > 1.0 + tol) {
    out.offending_eigenvalue = (-low > high - 1.0) ? low : high;
    out.reason = "eigenvalue " + std::to_string(*out.offending_eigenvalue) + " outside [0, 1]";
    return out;
  }
  if (std::abs(out.trace - n) > tol) {
    out.reason = "trace " + std::to_string(out.trace) + " != " + std::to_string(n);
    return out;
  }
  out.representable = true;
  return out;
}

struct OccupationMixture {
  struct Term {
    double weight;
    std::vector<int> occupation;  ///< 0/1 per orbital, exactly N ones
  };
  std::vector<Term> terms;

  RealVector resum(int d) const {
    RealVector out = RealVector::Zero(d);
    for (const auto& t : terms) {
      for (int i = 0; i < d; ++i) out(i) += t.weight * t.occupation[i];
    }
    return out;
  }
};

/// Writes a point of {0 <= x <= 1, sum x = N} as a convex combination of 0/1
/// vectors. Each step takes the N largest residual entries (lowest index on
/// ties) with the largest weight that keeps the residual inside the scaled
/// polytope; every step makes one more constraint tight.
inline OccupationMixture occupation_decomposition(const RealVector& spectrum, int n) {
  const int d = static_cast<int>(spectrum.size());
  if (n < 0 || n > d) throw Error(ErrorCode::InfeasibleSpectrum, "N outside [0, d]");
  for (int i = 0; i < d; ++i) {
    if (spectrum(i) < -kOrderTol || spectrum(i) > 1.0 + kOrderTol) {
      throw Error(ErrorCode::InfeasibleSpectrum,
                  "entry " + std::to_string(spectrum(i)) + " outside [0, 1]");
    }
  }
  if (std::abs(spectrum.sum() - n) > 1e-8) {
    throw Error(ErrorCode::InfeasibleSpectrum,
                "entries sum to " + std::to_string(spectrum.sum()) + ", expected " +
                    std::to_string(n));
  }
  RealVector residual = spectrum.cwiseMax(0.0).cwiseMin(1.0);
  double mass = 1.0;
  constexpr double kSnap = 1e-14;
  OccupationMixture out;
  std::vector<int> order(d);
  for (int step = 0; step < 2 * d + 2 && mass > 1e-13; ++step) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return residual(a) > residual(b); });
    std::vector<int> occupation(d, 0);
    double t = mass;
    for (int k = 0; k < n; ++k) {
      occupation[order[k]] = 1;
      t = std::min(t, residual(order[k]));
    }
    if (n < d) t = std::min(t, mass - residual(order[n]));
    t = std::clamp(t, 0.0, mass);
    if (t <= kSnap) t = mass;  // residual has collapsed onto the current vertex
    for (int i = 0; i < d; ++i) {
      if (occupation[i]) residual(i) -= t;
    }
    mass -= t;
    for (int i = 0; i < d; ++i) {
      if (std::abs(residual(i)) <= kSnap) residual(i) = 0.0;
      if (std::abs(residual(i) - mass) <= kSnap) residual(i) = mass;
    }
    out.terms.push_back({t, std::move(occupation)});
  }
  if (mass > 0.0 && !out.terms.empty()) out.terms.back().weight += mass;
  return out;
}

/// Slater projector on the span of the given orthonormal columns.
inline Matrix slater_projector(const Matrix& columns) {
  const WaveFunction psi = build_slater_state(columns);
  return outer(psi.amplitudes);
}

/// Mixed N-particle state with partial trace gamma, built from Slater
/// determinants of gamma's eigenvectors.
inline Matrix coleman_preimage(const Matrix& gamma, const SectorLadder& ladder) {
  const int n = ladder.particles();
  require_square(gamma, ladder.orbitals(), "one-body density matrix");
  const RepresentabilityCertificate cert = check_representability(gamma, n);
  if (!cert.representable) throw Error(ErrorCode::NotRepresentable, cert.reason);
  const EigenSystem es = eigh(gamma);
  const OccupationMixture mixture = occupation_decomposition(es.values, n);
  Matrix out = Matrix::Zero(ladder.dim(), ladder.dim());
  for (const auto& term : mixture.terms) {
    Matrix columns(ladder.orbitals(), n);
    int c = 0;
    for (int i = 0; i < ladder.orbitals(); ++i) {
      if (term.occupation[i]) columns.col(c++) = es.vectors.col(i);
    }
    out += term.weight * slater_projector(columns);
  }
  return out;
}

/// Orbital split for states confined to a face of the N-particle state set:
/// core orbitals are occupied in every determinant, active orbitals carry
/// the remaining particles, and everything orthogonal to both stays empty.
struct OrbitalFace {
  Matrix core;    ///< d x c orthonormal columns
  Matrix active;  ///< d x a orthonormal columns
};

/// Occupation threshold below which an eigenvalue of gamma counts as 0 or 1
/// for face detection.
inline constexpr double kFaceTol = 1e-8;

inline OrbitalFace rdm_face(const EigenSystem& es, double tol = kFaceTol) {
  std::vector<Eigen::Index> core, active;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) >= 1.0 - tol) {
      core.push_back(i);
    } else if (es.values(i) > tol) {
      active.push_back(i);
    }
  }
  OrbitalFace face{Matrix(es.vectors.rows(), static_cast<Eigen::Index>(core.size())),
                   Matrix(es.vectors.rows(), static_cast<Eigen::Index>(active.size()))};
  for (std::size_t i = 0; i < core.size(); ++i) face.core.col(i) = es.vectors.col(core[i]);
  for (std::size_t i = 0; i < active.size(); ++i) face.active.col(i) = es.vectors.col(active[i]);
  return face;
}

/// Isometry (sector dim x face dim) whose columns are the Slater
/// determinants core ^ S for every (N - c)-subset S of the active orbitals.
inline Matrix face_isometry(const OrbitalFace& face, const SectorLadder& ladder) {
  const int n = ladder.particles();
  const int c = static_cast<int>(face.core.cols());
  const int a = static_cast<int>(face.active.cols());
  const int k = n - c;
  if (k < 0 || k > a) {
    throw Error(ErrorCode::InfeasibleSpectrum,
                std::to_string(c) + " core and " + std::to_string(a) +
                    " active orbitals cannot hold " + std::to_string(n) + " particles");
  }
  const std::uint64_t count = binomial(a, k);
  Matrix out(ladder.dim(), static_cast<Eigen::Index>(count));
  Matrix columns(ladder.orbitals(), n);
  columns.leftCols(c) = face.core;
  for (std::uint64_t r = 0; r < count; ++r) {
    const SlaterIndex pick = unrank_slater(r, a, k);
    for (int i = 0; i < k; ++i) columns.col(c + i) = face.active.col(pick.orbitals[i]);
    out.col(static_cast<Eigen::Index>(r)) = build_slater_state(columns).amplitudes;
  }
  return out;
}

/// Orthonormal basis whose first column is psi (up to phase), from a
/// Householder QR of [psi | I].
inline Matrix complete_basis(const Vector& psi) {
  const Eigen::Index d = psi.size();
  Matrix stacked(d, d + 1);
  stacked.col(0) = psi;
  stacked.rightCols(d) = Matrix::Identity(d, d);
  Eigen::HouseholderQR<Matrix> qr(stacked);
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// Index sets of the telescope N|psi><psi| = q_0 + sum_k (q_k - r_k), as
/// 1-based positions in a completed basis psi_1 = psi, psi_2, ...
struct TelescopeSets {
  std::vector<int> q0;
  std::vector<std::vector<int>> q;  ///< k = 1..N-1
  std::vector<std::vector<int>> r;  ///< k = 1..N-1
};

inline TelescopeSets telescope_sets(int n) {
  auto range = [](int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i);
    return v;
  };
  TelescopeSets out;
  out.q0 = range(1, n);
  for (int k = 1; k <= n - 1; ++k) {
    std::vector<int> qk{1};
    for (int i : range(k * (n - 1) + 2, (k + 1) * n - k)) qk.push_back(i);
    out.q.push_back(std::move(qk));
    out.r.push_back(range((k - 1) * n + 2, k * n + 1));
  }
  return out;
}

inline int telescope_min_dimension(int n) { return n * n - n + 1; }

struct TelescopePreimage {
  Matrix state;                  ///< Hermitian, generally indefinite
  double identity_defect = 0.0;  ///< max over eigenvectors of the projection identity defect
};

/// Hermitian N-particle operator whose partial trace is the (possibly
/// signed) gamma. Each eigenvector psi_n of gamma is written as
/// N|psi_n><psi_n| = q_0 + sum_k (q_k - r_k) with rank-N projections lifted
/// to their unique Slater preimages.
inline TelescopePreimage telescope_preimage(const Matrix& gamma, const SectorLadder& ladder) {
  const int n = ladder.particles();
  const int d = ladder.orbitals();
  require_hermitian(gamma, "one-body operator");
  require_square(gamma, d, "one-body operator");
  if (n == 0) throw Error(ErrorCode::IndexOutOfRange, "telescope needs N >= 1");
  if (d < telescope_min_dimension(n)) {
    throw Error(ErrorCode::DimensionTooSmallForTelescope,
                "d = " + std::to_string(d) + " but the telescope needs d >= " +
                    std::to_string(telescope_min_dimension(n)));
  }
  const TelescopeSets sets = telescope_sets(n);
  const EigenSystem es = eigh(gamma);
  TelescopePreimage out{Matrix::Zero(ladder.dim(), ladder.dim()), 0.0};

  for (Eigen::Index e = 0; e < es.values.size(); ++e) {
    const double lambda = es.values(e);
    if (lambda == 0.0) continue;
    const Matrix basis = complete_basis(es.vectors.col(e));
    auto columns = [&](const std::vector<int>& one_based) {
      Matrix c(d, static_cast<Eigen::Index>(one_based.size()));
      for (std::size_t i = 0; i < one_based.size(); ++i) {
        c.col(static_cast<Eigen::Index>(i)) = basis.col(one_based[i] - 1);
      }
      return c;
    };
    auto projection = [&](const std::vector<int>& one_based) {
      const Matrix c = columns(one_based);
      return Matrix(c * c.adjoint());
    };

    Matrix identity = projection(sets.q0);
    Matrix lifted = slater_projector(columns(sets.q0));
    for (std::size_t k = 0; k < sets.q.size(); ++k) {
      identity += projection(sets.q[k]) - projection(sets.r[k]);
      lifted += slater_projector(columns(sets.q[k])) - slater_projector(columns(sets.r[k]));
    }
    const Matrix target = static_cast<double>(n) * outer(es.vectors.col(e));
    const double defect = (identity - target).cwiseAbs().maxCoeff();
    out.identity_defect = std::max(out.identity_defect, defect);
    if (defect > 1e-12) {
      throw Error(ErrorCode::IdentityCheckFailed,
                  "projection telescope identity failed by " + std::to_string(defect));
    }
    out.state += (lambda / n) * lifted;
  }
  return out;
}

}  // namespace rdmlab
