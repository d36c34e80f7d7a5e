#pragma once

// Ground-state energy as a function of the one-body potential, the
// constrained-search functional of the one-body density matrix (primal by
// augmented Lagrangian over N-particle states, dual by smoothed ascent over
// potentials), and probes for the variational principle and convexity.

#include "rdmlab/fock.hpp"
#include "rdmlab/optim.hpp"
#include "rdmlab/rdm.hpp"
#include "rdmlab/xspace.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace rdmlab {

struct SystemSpec {
  int d = 0;
  int n = 0;
  KineticOperator kinetic;
  TwoBodyTensor interaction;
  std::shared_ptr<const SectorLadder> ladder;
  Matrix t_hat;  ///< second-quantized kinetic operator on the sector
  Matrix w_hat;  ///< interaction on the sector
  bool w_positive = false;
  std::uint64_t seed = 0;

  Matrix one_body_hamiltonian(const Matrix& v) const {
    return second_quantize_one_body(v, *ladder).dense();
  }
  /// T^ + W^ + v^ on the sector.
  Matrix hamiltonian(const Matrix& v) const { return t_hat + w_hat + one_body_hamiltonian(v); }
};

inline SystemSpec make_system(const Matrix& t, const TwoBodyTensor& w, int n,
                              std::uint64_t seed = 0) {
  KineticOperator kinetic(t);
  const int d = static_cast<int>(t.rows());
  auto ladder = std::make_shared<const SectorLadder>(d, n);
  TwoBodyTensor tensor = w;
  if (tensor.d == 0 && tensor.entries.empty()) tensor.d = d;
  Matrix t_hat = second_quantize_one_body(t, *ladder).dense();
  Matrix w_hat = second_quantize_two_body(tensor, *ladder).dense();
  const bool positive = tensor.interaction;
  return SystemSpec{d,      n, std::move(kinetic), std::move(tensor), std::move(ladder),
                    std::move(t_hat), std::move(w_hat), positive, seed};
}

struct GroundState {
  double energy = 0.0;
  Vector vector;
  double residual = 0.0;  ///< ||H psi - E psi||
};

inline GroundState ground_energy(const Matrix& h) {
  require_hermitian(h, "Hamiltonian");
  const EigenSystem es = eigh(h);
  GroundState out{es.values(0), es.vectors.col(0), 0.0};
  out.residual = (h * out.vector - out.energy * out.vector).norm();
  return out;
}

inline double e_rdm(const Matrix& v, const SystemSpec& sys) {
  require_square(v, sys.d, "potential");
  require_hermitian(v, "potential");
  return lambda_min(sys.hamiltonian(v));
}

/// One-body density matrix of the ground state of T^ + W^ + v^.
inline Matrix ground_state_rdm(const Matrix& v, const SystemSpec& sys) {
  const GroundState gs = ground_energy(sys.hamiltonian(v));
  return hermitian_part(partial_trace(outer(gs.vector), *sys.ladder));
}

/// Frobenius-orthonormal basis of the real space of Hermitian d x d matrices.
inline std::vector<Matrix> hermitian_basis(int d) {
  std::vector<Matrix> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < d; ++p) {
    Matrix e = Matrix::Zero(d, d);
    e(p, p) = 1.0;
    out.push_back(e);
  }
  for (int p = 0; p < d; ++p) {
    for (int q = p + 1; q < d; ++q) {
      Matrix re = Matrix::Zero(d, d);
      re(p, q) = r;
      re(q, p) = r;
      out.push_back(re);
      Matrix im = Matrix::Zero(d, d);
      im(p, q) = cd(0.0, r);
      im(q, p) = cd(0.0, -r);
      out.push_back(im);
    }
  }
  return out;
}

/// Constraint map Gamma -> coordinates of Pi(Gamma) in the Hermitian basis.
/// The trace of gamma is snapped to N first: the identity direction of the
/// multipliers is flat exactly when the targets integrate to N.
inline AffineMap rdm_constraint_map(const Matrix& gamma_in, const SystemSpec& sys) {
  AffineMap map;
  const Matrix gamma =
      gamma_in + ((sys.n - gamma_in.trace().real()) / sys.d) * Matrix::Identity(sys.d, sys.d);
  const std::vector<Matrix> basis = hermitian_basis(sys.d);
  map.target.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    map.ops.push_back(second_quantize_one_body(basis[i], *sys.ladder).matrix);
    map.target(static_cast<Eigen::Index>(i)) = trace_product(basis[i], gamma);
  }
  return map;
}

inline Matrix from_coordinates(const RealVector& y, int d) {
  const std::vector<Matrix> basis = hermitian_basis(d);
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < basis.size(); ++i) out += y(static_cast<Eigen::Index>(i)) * basis[i];
  return out;
}

struct FunctionalResult {
  double value = 0.0;
  Matrix minimizer;          ///< N-particle state (primal) or Gibbs state (dual)
  Matrix dual_certificate;   ///< potential u (one-body) or diagonal potential
  double dual_value = 0.0;   ///< certified lower bound
  RealVector multipliers;    ///< dual coordinates of the constraints
  double gap = 0.0;
  double feasibility = 0.0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  bool converged = false;
  bool boundary = false;     ///< eigenvalue or density on the edge of the domain
};

/// Value of a functional outside its effective domain.
struct PlusInfinity {
  std::string reason;
};

using FunctionalValue = std::variant<FunctionalResult, PlusInfinity>;

inline bool is_infinite(const FunctionalValue& v) {
  return std::holds_alternative<PlusInfinity>(v);
}
inline const FunctionalResult& finite(const FunctionalValue& v) {
  return std::get<FunctionalResult>(v);
}

/// Gap tolerance applied to boundary instances, where dual attainment can fail.
inline constexpr double kBoundaryGapTol = 1e-4;

inline bool on_rdm_boundary(const RealVector& spectrum, double tol = 1e-6) {
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    if (spectrum(i) <= tol || spectrum(i) >= 1.0 - tol) return true;
  }
  return false;
}

/// Minimizes Tr(H Gamma) over N-particle states satisfying map(Gamma) = b,
/// restricted to the range of the isometry when one is given. The restricted
/// problem is exact whenever every feasible state lives in that range.
inline FunctionalResult constrained_search(const Matrix& h, const AffineMap& map,
                                           const Matrix& init, const SolverConfig& cfg,
                                           const Matrix* isometry = nullptr) {
  FunctionalResult out;
  AugmentedLagrangianResult al;
  if (isometry) {
    const Matrix& e = *isometry;
    const Matrix h_face = hermitian_part(e.adjoint() * h * e);
    const AffineMap map_face = map.compressed(e);
    al = augmented_lagrangian(h_face, map_face, cfg, hermitian_part(e.adjoint() * init * e));
    out.minimizer = hermitian_part(e * al.state * e.adjoint());
  } else {
    al = augmented_lagrangian(h, map, cfg, init);
    out.minimizer = al.state;
  }
  out.value = trace_product(h, out.minimizer);
  out.feasibility = map.size() ? map.residual(out.minimizer).norm() : 0.0;
  out.dual_value = al.dual_value;
  out.multipliers = al.multipliers;
  out.gap = out.value - al.dual_value;
  out.iterations = al.report.iterations;
  out.wall_time_ms = al.report.wall_time_ms;
  out.converged = out.feasibility <= cfg.tol_feas && std::abs(out.gap) <= cfg.tol_gap;
  return out;
}

/// min Tr(W^ Gamma) over N-particle states with Pi(Gamma) = gamma, started
/// from the Slater-mixture preimage. When gamma has eigenvalues at 0 or 1
/// the search runs on the face of determinants that keep those orbitals
/// empty or filled; a rank-N projection leaves a single determinant.
inline FunctionalValue f_rdm_primal(const Matrix& gamma, const SystemSpec& sys,
                                    const SolverConfig& cfg = {}) {
  require_square(gamma, sys.d, "gamma");
  const RepresentabilityCertificate cert = check_representability(gamma, sys.n);
  if (!cert.representable) return PlusInfinity{cert.reason};
  const AffineMap map = rdm_constraint_map(gamma, sys);
  const Matrix init = coleman_preimage(gamma, *sys.ladder);
  const EigenSystem es = eigh(gamma);
  const OrbitalFace face = rdm_face(es);
  const bool reduce = face.active.cols() < sys.d;
  const Matrix isometry = reduce ? face_isometry(face, *sys.ladder) : Matrix();

  FunctionalResult out = constrained_search(sys.w_hat, map, init, cfg, reduce ? &isometry : nullptr);
  out.dual_certificate = from_coordinates(out.multipliers, sys.d);
  out.boundary = on_rdm_boundary(cert.eigenvalues);
  return out;
}

/// Default final inverse temperature of the dual smoothing ramp.
inline constexpr double kDefaultBetaMax = 1e6;

/// The ramp: cfg.beta_schedule truncated at beta_max, then extended by
/// factors of 10 up to beta_max.
inline std::vector<double> beta_ramp(const SolverConfig& cfg, double beta_max) {
  std::vector<double> out;
  for (double b : cfg.beta_schedule) {
    if (b <= beta_max) out.push_back(b);
  }
  double b = out.empty() ? std::min(1e2, beta_max) : out.back();
  if (out.empty()) out.push_back(b);
  while (b < beta_max) {
    b = std::min(b * 10.0, beta_max);
    out.push_back(b);
  }
  return out;
}

/// Maximizes g(y) = lambda_min(H + sum y_i K_i) - y.b through log-partition
/// smoothing. The returned value is the exact (nonsmooth) g at the final
/// maximizer, hence a certified lower bound on the constrained minimum.
struct SmoothedDualOutcome {
  RealVector maximizer;
  double value = 0.0;         ///< exact g at the maximizer
  double smoothed_value = 0.0;
  Matrix gibbs_state;
  double upper = 0.0;         ///< Tr(H rho_beta), an approximate primal value
  double gradient_norm = 0.0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  bool converged = false;
};

/// Gradient tolerance of each smoothing stage. On the boundary of the domain
/// the dual approaches its supremum only as the gradient vanishes, so this
/// sits below the usual 1e-8.
inline constexpr double kDualGradTol = 1e-10;

inline SmoothedDualOutcome smoothed_dual(const Matrix& h, const AffineMap& map,
                                         const SolverConfig& cfg, double beta_max,
                                         RealVector start = {}) {
  detail::Stopwatch clock;
  const Eigen::Index dim = h.rows();
  const SmoothedObjective objective = log_partition_objective(h, map);
  SolverConfig stage_cfg = cfg;
  stage_cfg.beta_schedule = beta_ramp(cfg, beta_max);
  if (start.size() != map.size()) start = RealVector::Zero(map.size());
  const AscentResult ascent = smoothed_concave_ascent(objective, start, stage_cfg, kDualGradTol);

  SmoothedDualOutcome out;
  out.maximizer = ascent.maximizer;
  out.smoothed_value = ascent.report.value;
  out.value = spectraplex_dual_value(h, map, ascent.maximizer);
  const GibbsState g = gibbs(h + map.adjoint(ascent.maximizer, dim), stage_cfg.beta_schedule.back());
  out.gibbs_state = g.state;
  out.upper = trace_product(h, g.state);
  out.gradient_norm = ascent.report.gap;
  out.iterations = ascent.report.iterations;
  out.converged = ascent.report.converged || out.gradient_norm <= 1e-8;
  out.wall_time_ms = clock.elapsed_ms();
  return out;
}

/// sup over u of lambda_min(W^ + u^) - Tr(u gamma), i.e. the conjugate-pair
/// representation with u = T + v.
inline FunctionalValue f_rdm_dual(const Matrix& gamma, const SystemSpec& sys,
                                  const SolverConfig& cfg = {}, double beta_max = kDefaultBetaMax) {
  require_square(gamma, sys.d, "gamma");
  const RepresentabilityCertificate cert = check_representability(gamma, sys.n);
  if (!cert.representable) return PlusInfinity{cert.reason};
  const AffineMap map = rdm_constraint_map(gamma, sys);
  const SmoothedDualOutcome dual = smoothed_dual(sys.w_hat, map, cfg, beta_max);

  FunctionalResult out;
  out.value = dual.value;
  out.dual_value = dual.value;
  out.minimizer = dual.gibbs_state;
  out.dual_certificate = from_coordinates(dual.maximizer, sys.d);
  out.multipliers = dual.maximizer;
  out.gap = dual.upper - dual.value;
  out.feasibility = dual.gradient_norm;
  out.iterations = dual.iterations;
  out.wall_time_ms = dual.wall_time_ms;
  out.boundary = on_rdm_boundary(cert.eigenvalues);
  out.converged = dual.converged;
  return out;
}

/// min over samples of [F_RDM(gamma) + Tr((T + v) gamma)] - E_RDM(v).
/// Nonrepresentable samples are skipped.
inline double variational_residual(const Matrix& v, const SystemSpec& sys,
                                   const std::vector<Matrix>& samples,
                                   const SolverConfig& cfg = {}) {
  const Matrix one_body = sys.kinetic.matrix() + v;
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix& gamma : samples) {
    const FunctionalValue f = f_rdm_primal(gamma, sys, cfg);
    if (is_infinite(f)) continue;
    best = std::min(best, finite(f).value + trace_product(one_body, gamma));
  }
  return best - e_rdm(v, sys);
}

/// f(lambda x1 + (1 - lambda) x2) - lambda f(x1) - (1 - lambda) f(x2):
/// <= 0 for convex f, >= 0 for concave f.
template <class F, class X>
double convexity_probe(F&& f, const X& x1, const X& x2, double lambda) {
  const X mid = lambda * x1 + (1.0 - lambda) * x2;
  return f(mid) - lambda * f(x1) - (1.0 - lambda) * f(x2);
}

}  // namespace rdmlab
