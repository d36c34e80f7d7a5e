#pragma once

// Shared numerical kernels: the Hermitian eigensolver contract, PSD and
// spectraplex projections, Gibbs states, and the first-order solvers used by
// the constrained-search functionals.

#include "rdmlab/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace rdmlab {

struct SolverConfig {
  double tol_gap = 1e-6;
  double tol_feas = 1e-6;
  int max_outer = 8;
  int max_inner = 5000;
  std::vector<double> beta_schedule = {1e2, 1e3, 1e4};
  std::uint64_t seed = 0;

  void validate() const {
    if (!(tol_gap > 0) || !(tol_feas > 0)) {
      throw std::invalid_argument("solver tolerances must be positive");
    }
    if (max_outer < 1 || max_inner < 1) {
      throw std::invalid_argument("iteration caps must be positive");
    }
    if (beta_schedule.empty()) {
      throw std::invalid_argument("beta schedule must not be empty");
    }
    for (std::size_t i = 0; i < beta_schedule.size(); ++i) {
      if (!(beta_schedule[i] > 0) || (i > 0 && beta_schedule[i] <= beta_schedule[i - 1])) {
        throw std::invalid_argument("beta schedule must be positive and increasing");
      }
    }
  }
};

struct SolveReport {
  double value = 0.0;
  double gap = 0.0;
  double feasibility = 0.0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  bool converged = false;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Eigensolver contract
// ---------------------------------------------------------------------------

/// Eigenvalues ascending. Each eigenvector is rotated so that its
/// largest-magnitude component (lowest index among ties) is real positive.
struct EigenSystem {
  RealVector values;
  Matrix vectors;

  Matrix reassemble(const RealVector& mapped) const {
    return vectors * mapped.cast<cd>().asDiagonal() * vectors.adjoint();
  }
};

inline void fix_phases(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) >= peak * (1.0 - 1e-12)) {
        pivot = i;
        break;
      }
    }
    const cd phase = std::conj(col(pivot)) / std::abs(col(pivot));
    col *= phase;
  }
}

inline EigenSystem eigh(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "eigh: matrix is not square");
  if (a.rows() == 0) return {RealVector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a));
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  fix_phases(out.vectors);
  return out;
}

inline RealVector eigvalsh(const Matrix& a) {
  if (a.rows() == 0) return RealVector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double lambda_min(const Matrix& a) { return eigvalsh(a)(0); }
inline double lambda_max(const Matrix& a) {
  const RealVector ev = eigvalsh(a);
  return ev(ev.size() - 1);
}

inline double trace_norm(const Matrix& a) { return eigvalsh(a).cwiseAbs().sum(); }

inline double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return eigvalsh(a).cwiseAbs().maxCoeff();
}

/// Hermitian matrix function via the spectral theorem.
template <class F>
Matrix spectral_map(const Matrix& a, F&& f) {
  const EigenSystem es = eigh(a);
  return es.reassemble(es.values.unaryExpr(std::forward<F>(f)));
}

// ---------------------------------------------------------------------------
// Projections and linear minimization
// ---------------------------------------------------------------------------

/// Frobenius-nearest PSD matrix.
inline Matrix psd_project(const Matrix& a) {
  return spectral_map(a, [](double x) { return std::max(x, 0.0); });
}

/// Euclidean projection of a real vector onto the probability simplex.
inline RealVector simplex_project(const RealVector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

/// Frobenius projection onto {X >= 0, Tr X = 1}.
inline Matrix spectraplex_project(const Matrix& a) {
  const EigenSystem es = eigh(a);
  return es.reassemble(simplex_project(es.values));
}

struct RankOneState {
  Vector vector;
  Matrix state;
  double value = 0.0;
};

/// argmin over the spectraplex of Tr(G X): the projector on a lowest eigenvector.
inline RankOneState spectraplex_lmo(const Matrix& g) {
  const EigenSystem es = eigh(g);
  Vector u = es.vectors.col(0);
  return {u, outer(u), es.values(0)};
}

struct GibbsState {
  double free_energy = 0.0;  ///< -(1/beta) log Tr exp(-beta H)
  Matrix state;
};

inline GibbsState gibbs(const Matrix& h, double beta) {
  const EigenSystem es = eigh(h);
  const double ground = es.values(0);
  RealVector w = (-beta * (es.values.array() - ground)).exp().matrix();
  const double z = w.sum();
  w /= z;
  return {ground - std::log(z) / beta, es.reassemble(w)};
}

// ---------------------------------------------------------------------------
// Affine constraint maps X -> (Tr(K_i X))_i
// ---------------------------------------------------------------------------

struct AffineMap {
  std::vector<SparseMatrix> ops;  ///< Hermitian constraint operators K_i
  RealVector target;              ///< right-hand side b

  Eigen::Index size() const { return static_cast<Eigen::Index>(ops.size()); }

  RealVector apply(const Matrix& x) const {
    RealVector out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out(i) = trace_product(ops[i], x);
    return out;
  }

  RealVector residual(const Matrix& x) const { return apply(x) - target; }

  Matrix adjoint(const RealVector& y, Eigen::Index dim) const {
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (y(i) == 0.0) continue;
      for (Eigen::Index k = 0; k < ops[i].outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(ops[i], k); it; ++it) {
          out(it.row(), it.col()) += y(i) * it.value();
        }
      }
    }
    return out;
  }

  /// The same constraints restricted to the range of an isometry e.
  AffineMap compressed(const Matrix& e) const {
    AffineMap out;
    out.target = target;
    for (const SparseMatrix& k : ops) {
      const Matrix small = hermitian_part(e.adjoint() * (k * e));
      out.ops.push_back(small.sparseView(1.0, 1e-14));
    }
    return out;
  }

  /// Largest eigenvalue of the Gram matrix Tr(K_i K_j), i.e. the squared
  /// operator norm of the map from Frobenius space to R^k.
  double squared_norm() const {
    if (ops.empty()) return 0.0;
    Eigen::MatrixXd gram(size(), size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      for (Eigen::Index j = i; j < size(); ++j) {
        const double g = trace_product(ops[i], Matrix(ops[j]));
        gram(i, j) = g;
        gram(j, i) = g;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }
};

/// Lagrangian dual of min Tr(HX) over the spectraplex subject to map(X) = b.
inline double spectraplex_dual_value(const Matrix& h, const AffineMap& map, const RealVector& y) {
  return lambda_min(h + map.adjoint(y, h.rows())) - y.dot(map.target);
}

// ---------------------------------------------------------------------------
// Conditional gradient with penalty continuation
// ---------------------------------------------------------------------------

struct ConditionalGradientResult {
  SolveReport report;
  Matrix state;
  std::vector<double> feasibility_history;  ///< one entry per outer round
};

/// Minimizes Tr(HX) + (mu/2)||map(X) - b||^2 over the spectraplex with the
/// classic 2/(k+2) step (k counted over the whole run), multiplying mu by 10 per outer round until the
/// residual falls below cfg.tol_feas. When a dual bound is supplied the
/// reported gap is measured against it; otherwise it is the last
/// Frank-Wolfe gap.
inline ConditionalGradientResult conditional_gradient(const Matrix& h, const AffineMap& map,
                                                      const SolverConfig& cfg, Matrix init,
                                                      std::optional<double> dual_bound = {},
                                                      double initial_penalty = 10.0) {
  cfg.validate();
  detail::Stopwatch clock;
  const Eigen::Index dim = h.rows();
  ConditionalGradientResult out;
  Matrix x = std::move(init);
  double mu = initial_penalty;
  int total = 0;
  double fw_gap = 0.0;
  for (int outer_round = 0; outer_round < cfg.max_outer; ++outer_round) {
    for (int k = 0; k < cfg.max_inner; ++k) {
      ++total;
      const RealVector r = map.residual(x);
      const Matrix grad = h + map.adjoint(mu * r, dim);
      const RankOneState s = spectraplex_lmo(grad);
      fw_gap = trace_product(grad, x) - s.value;
      if (fw_gap <= cfg.tol_gap * 1e-2) break;
      // the step counter runs across rounds so a new penalty keeps the warm start
      const double step = 2.0 / (total + 1.0);
      x = (1.0 - step) * x + step * s.state;
    }
    const double feas = map.size() ? map.residual(x).norm() : 0.0;
    out.feasibility_history.push_back(feas);
    if (feas <= cfg.tol_feas) break;
    mu *= 10.0;
  }
  out.report.value = trace_product(h, x);
  out.report.feasibility = out.feasibility_history.back();
  out.report.gap = dual_bound ? out.report.value - *dual_bound : fw_gap;
  out.report.iterations = total;
  out.report.converged =
      out.report.feasibility <= cfg.tol_feas && std::abs(out.report.gap) <= cfg.tol_gap;
  out.report.wall_time_ms = clock.elapsed_ms();
  out.state = std::move(x);
  return out;
}

// ---------------------------------------------------------------------------
// Augmented Lagrangian over the spectraplex
// ---------------------------------------------------------------------------

struct AugmentedLagrangianResult {
  SolveReport report;
  Matrix state;
  RealVector multipliers;
  double dual_value = 0.0;
};

/// Method of multipliers for min Tr(HX) s.t. X in spectraplex, map(X) = b.
/// Inner problems are solved by accelerated projected gradient with
/// function-value restart. The multipliers y are a dual certificate:
/// lambda_min(H + sum y_i K_i) - y.b is a lower bound on the optimum and the
/// reported gap is measured against it.
inline AugmentedLagrangianResult augmented_lagrangian(const Matrix& h, const AffineMap& map,
                                                      const SolverConfig& cfg, Matrix init,
                                                      int max_rounds = 60) {
  cfg.validate();
  detail::Stopwatch clock;
  const Eigen::Index dim = h.rows();
  const double map_norm2 = map.squared_norm();
  const double h_scale = 1.0 + operator_norm(h);

  RealVector y = RealVector::Zero(map.size());
  double mu = 10.0 * h_scale / std::max(map_norm2, 1.0);
  Matrix x = spectraplex_project(init);
  // Internal targets sit below the reported tolerances so the certificate
  // survives roundoff in callers that recompute it.
  const double feas_target = cfg.tol_feas * 1e-4;
  const double gap_target = cfg.tol_gap * 1e-1;

  AugmentedLagrangianResult out;
  int total = 0;
  double prev_feas = std::numeric_limits<double>::infinity();
  double feas = 0.0;
  double dual = 0.0;
  for (int round = 0; round < max_rounds; ++round) {
    const double lip = std::max(mu * map_norm2, 1e-3 * h_scale);
    auto objective = [&](const Matrix& z, const RealVector& r) {
      return trace_product(h, z) + y.dot(r) + 0.5 * mu * r.squaredNorm();
    };
    Matrix z = x;
    Matrix x_prev = x;
    double t = 1.0;
    double f_prev = objective(x, map.residual(x));
    const double inner_tol = std::max(1e-13, 1e-3 * std::min(feas_target, gap_target));
    for (int k = 0; k < cfg.max_inner; ++k) {
      ++total;
      const RealVector rz = map.residual(z);
      const Matrix grad = h + map.adjoint(y + mu * rz, dim);
      Matrix x_new = spectraplex_project(z - grad / lip);
      const double step_norm = (x_new - z).norm() * lip;
      const double f_new = objective(x_new, map.residual(x_new));
      if (f_new > f_prev + 1e-15 * std::abs(f_prev)) {
        if (t == 1.0) break;  // no progress even from a plain gradient step
        t = 1.0;
        z = x;
        continue;
      }
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = x_new + ((t - 1.0) / t_new) * (x_new - x);
      x_prev = x;
      x = std::move(x_new);
      t = t_new;
      f_prev = f_new;
      if (step_norm <= inner_tol) break;
    }
    const RealVector r = map.residual(x);
    feas = map.size() ? r.norm() : 0.0;
    y += mu * r;
    dual = spectraplex_dual_value(h, map, y);
    const double primal = trace_product(h, x);
    out.report.iterations = total;
    if (feas <= feas_target && std::abs(primal - dual) <= gap_target) break;
    if (feas > 0.25 * prev_feas) mu = std::min(mu * 10.0, 1e10);
    prev_feas = feas;
  }
  out.report.value = trace_product(h, x);
  out.report.feasibility = feas;
  out.dual_value = dual;
  out.report.gap = out.report.value - dual;
  out.report.converged = feas <= cfg.tol_feas && std::abs(out.report.gap) <= cfg.tol_gap;
  out.report.wall_time_ms = clock.elapsed_ms();
  out.state = std::move(x);
  out.multipliers = std::move(y);
  return out;
}

// ---------------------------------------------------------------------------
// Smoothed concave ascent
// ---------------------------------------------------------------------------

struct SmoothedEvaluation {
  double value = 0.0;
  RealVector gradient;
  Eigen::MatrixXd hessian;  ///< empty when the objective has no Hessian
};

/// Evaluates the beta-smoothed concave objective at y; the Hessian is only
/// requested when the last argument is true.
using SmoothedObjective =
    std::function<SmoothedEvaluation(const RealVector& y, double beta, bool want_hessian)>;

struct AscentResult {
  SolveReport report;  ///< gap holds the final gradient norm
  RealVector maximizer;
  std::vector<double> stage_values;
};

namespace detail {

struct StageOutcome {
  RealVector x;
  double value;
  RealVector grad;
  int iterations;
  bool converged;
};

// Maximization with L-BFGS directions and Armijo backtracking.
inline StageOutcome lbfgs_maximize(const SmoothedObjective& f, double beta, RealVector x,
                                   double grad_tol, int max_iter, int memory = 12) {
  SmoothedEvaluation cur = f(x, beta, false);
  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int it = 0;
  bool converged = cur.gradient.norm() <= grad_tol;
  while (!converged && it < max_iter) {
    ++it;
    // two-loop recursion on the negated objective
    const RealVector g = -cur.gradient;
    RealVector q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    const double gamma = s_hist.empty()
                             ? 1.0 / std::max(1.0, g.norm())
                             : s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    RealVector d = -gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(d);
      d += s_hist[i] * (-alpha[i] - b);
    }
    if (!(g.dot(d) < 0)) {
      d = -g / std::max(1.0, g.norm());
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    const double slope = -g.dot(d);  // directional derivative of the objective
    double step = 1.0;
    bool accepted = false;
    SmoothedEvaluation next;
    for (int ls = 0; ls < 60; ++ls) {
      next = f(x + step * d, beta, false);
      if (std::isfinite(next.value) && next.value >= cur.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const RealVector s = step * d;
    const RealVector yv = cur.gradient - next.gradient;
    const double sy = s.dot(yv);
    if (sy > 1e-14 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x += s;
    cur = std::move(next);
    converged = cur.gradient.norm() <= grad_tol;
  }
  return {std::move(x), cur.value, std::move(cur.gradient), it, converged};
}

// Newton maximization with Levenberg-Marquardt damping: the step solves
// (N + lambda I) d = g with N the negated Hessian, and lambda adapts to the
// ratio of actual to predicted increase. Directions of vanishing curvature
// would otherwise produce unbounded steps.
inline StageOutcome newton_maximize(const SmoothedObjective& f, double beta, RealVector x,
                                    double grad_tol, int max_iter) {
  SmoothedEvaluation cur = f(x, beta, true);
  int it = 0;
  bool converged = cur.gradient.norm() <= grad_tol;
  double damping = -1.0;
  while (!converged && it < max_iter) {
    ++it;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-cur.hessian);
    const RealVector ev = es.eigenvalues().cwiseMax(0.0);
    const double scale = std::max(ev.maxCoeff(), 1e-300);
    if (damping < 0) damping = 1e-6 * scale;
    const RealVector proj = es.eigenvectors().transpose() * cur.gradient;
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      RealVector scaled(proj.size());
      for (Eigen::Index i = 0; i < proj.size(); ++i) {
        const double denom = ev(i) + damping;
        scaled(i) = denom > 1e-14 * scale ? proj(i) / denom : 0.0;
      }
      const RealVector d = es.eigenvectors() * scaled;
      const double predicted =
          proj.dot(scaled) - 0.5 * (scaled.array().square() * ev.array()).sum();
      if (!(predicted > 1e-16 * (1.0 + std::abs(cur.value)))) {
        // the model promises nothing above roundoff
        if (damping > 1e-12 * scale) {
          damping *= 0.25;
          continue;
        }
        break;
      }
      SmoothedEvaluation next = f(x + d, beta, true);
      const double actual = next.value - cur.value;
      const double ratio = actual / predicted;
      if (std::isfinite(next.value) && ratio > 1e-4) {
        x += d;
        cur = std::move(next);
        accepted = true;
        if (ratio > 0.75) damping *= 0.25;
        if (ratio < 0.25) damping *= 4.0;
      } else {
        damping = std::max(damping * 4.0, 1e-12 * scale);
      }
    }
    if (!accepted) break;
    converged = cur.gradient.norm() <= grad_tol;
  }
  return {std::move(x), cur.value, std::move(cur.gradient), it, converged};
}

}  // namespace detail

/// Maximizes a concave objective through the stages of cfg.beta_schedule,
/// warm-starting each stage from the previous maximizer. Objectives that
/// supply a Hessian get damped Newton steps, others L-BFGS.
inline AscentResult smoothed_concave_ascent(const SmoothedObjective& objective, RealVector start,
                                            const SolverConfig& cfg, double grad_tol = 1e-8) {
  cfg.validate();
  detail::Stopwatch clock;
  AscentResult out;
  RealVector y = std::move(start);
  const bool has_hessian = objective(y, cfg.beta_schedule.front(), true).hessian.size() > 0;
  int total = 0;
  bool converged = true;
  double grad_norm = 0.0;
  double value = 0.0;
  for (double beta : cfg.beta_schedule) {
    detail::StageOutcome stage =
        has_hessian ? detail::newton_maximize(objective, beta, y, grad_tol, cfg.max_inner)
                    : detail::lbfgs_maximize(objective, beta, y, grad_tol, cfg.max_inner);
    total += stage.iterations;
    y = std::move(stage.x);
    value = stage.value;
    grad_norm = stage.grad.norm();
    converged = stage.converged;
    out.stage_values.push_back(value);
  }
  out.report.value = value;
  out.report.gap = grad_norm;
  out.report.iterations = total;
  out.report.converged = converged;
  out.report.wall_time_ms = clock.elapsed_ms();
  out.maximizer = std::move(y);
  return out;
}

/// y -> -(1/beta) log Tr exp(-beta (H + sum y_i K_i)) - y.b with gradient
/// Tr(rho K_i) - b_i and Hessian
///   sum_kl D_kl (K_i)_kl (K_j)_lk + beta g_i g_j
/// in the eigenbasis of the shifted Hamiltonian, where D_kl is the divided
/// difference of exp(-beta x) normalized by the partition function.
inline SmoothedObjective log_partition_objective(const Matrix& h, const AffineMap& map) {
  return [&h, &map](const RealVector& y, double beta, bool want_hessian) {
    const Eigen::Index dim = h.rows();
    const EigenSystem es = eigh(h + map.adjoint(y, dim));
    const RealVector& lam = es.values;
    const RealVector e = (-beta * (lam.array() - lam(0))).exp().matrix();
    const double z = e.sum();
    const RealVector p = e / z;
    const std::size_t m = map.ops.size();

    std::vector<Matrix> rotated;
    rotated.reserve(m);
    RealVector expect(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      rotated.emplace_back(es.vectors.adjoint() * (map.ops[i] * es.vectors));
      expect(static_cast<Eigen::Index>(i)) = (rotated.back().diagonal().real().array() * p.array()).sum();
    }
    SmoothedEvaluation out;
    out.value = lam(0) - std::log(z) / beta - y.dot(map.target);
    out.gradient = expect - map.target;
    if (!want_hessian) return out;

    Eigen::MatrixXd dd(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (Eigen::Index l = 0; l < dim; ++l) {
        const double gap = lam(k) - lam(l);
        if (k == l || std::abs(beta * gap) < 1e-12) {
          dd(k, l) = -beta * 0.5 * (p(k) + p(l));
        } else {
          // expand around the lower level so the exponential never overflows
          const Eigen::Index low = gap > 0 ? l : k;
          dd(k, l) = p(low) * std::expm1(-beta * std::abs(gap)) / std::abs(gap);
        }
      }
    }
    out.hessian.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix weighted = (rotated[i].array() * dd.cast<cd>().array()).matrix();
      for (std::size_t j = i; j < m; ++j) {
        const double v = trace_product(weighted, rotated[j]) +
                         beta * expect(static_cast<Eigen::Index>(i)) * expect(static_cast<Eigen::Index>(j));
        out.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        out.hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
    return out;
  };
}

// ---------------------------------------------------------------------------
// Bisection on a monotone feasibility predicate
// ---------------------------------------------------------------------------

/// Smallest a in [lo, hi] with feasible(a), assuming feasibility is monotone
/// increasing in a. Returns a feasible point within tol of the threshold.
inline double psd_feasibility_bisect(const std::function<bool(double)>& feasible, double lo,
                                     double hi, double tol = 1e-8, int max_iter = 200) {
  if (!feasible(hi)) {
    throw Error(ErrorCode::BracketInfeasible,
                "upper end of bracket " + std::to_string(hi) + " is infeasible");
  }
  if (feasible(lo)) return lo;
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace rdmlab
