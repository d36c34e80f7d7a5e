#pragma once

// Property checks run against a bundle. Each check measures one identity or
// inequality on seeded random samples drawn around the bundle's operators
// and reports the worst defect next to its threshold.

#include "rdmlab/density.hpp"
#include "rdmlab/functionals.hpp"
#include "rdmlab/models.hpp"
#include "rdmlab/random.hpp"
#include "rdmlab/rdm.hpp"
#include "rdmlab/report.hpp"
#include "rdmlab/xspace.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace rdmlab {

struct CheckResult {
  std::string name;
  double defect = 0.0;     ///< worst measured violation, 0 when satisfied exactly
  double threshold = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> results;
  bool all_passed() const {
    for (const auto& r : results) {
      if (!r.passed) return false;
    }
    return true;
  }
};

/// Sector dimension above which the optimization-based checks are skipped.
inline constexpr Eigen::Index kCheckSectorLimit = 120;

namespace detail {

struct CheckContext {
  const OperatorBundle& bundle;
  KineticOperator kinetic;
  PVM pvm;
  std::optional<SystemSpec> sys;
  std::uint64_t seed;
  SolverConfig cfg;
};

using CheckFn = std::function<CheckResult(CheckContext&)>;

inline CheckResult verdict(std::string name, double defect, double threshold, std::string detail = {}) {
  return {std::move(name), defect, threshold, defect <= threshold, false, std::move(detail)};
}

inline CheckResult skip(std::string name, std::string why) {
  return {std::move(name), 0.0, 0.0, true, true, std::move(why)};
}

inline bool solver_sized(const CheckContext& c) {
  return c.sys && c.sys->ladder->dim() <= kCheckSectorLimit && c.sys->n >= 1;
}

inline CheckResult check_adjointness(CheckContext& c) {
  if (!c.sys) return skip("adjointness", "no many-body sector");
  RandomSource rng(c.seed + 1);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix v = rng.hermitian(c.bundle.d);
    const Matrix state = rng.state(c.sys->ladder->dim(), 3);
    worst = std::max(worst, adjointness_defect(v, state, *c.sys->ladder));
  }
  return verdict("adjointness", worst, 1e-10);
}

inline CheckResult check_sandwich(CheckContext& c) {
  RandomSource rng(c.seed + 2);
  const Matrix& t = c.kinetic.matrix();
  double worst = 0.0;
  double equality = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Matrix g = rng.hermitian(c.bundle.d);
    const Matrix abs_g = spectral_map(g, [](double x) { return std::abs(x); });
    const double x = x_norm(g, c.kinetic);
    const double lower = trace_norm(g) + std::abs(trace_product(t, g));
    const double upper = trace_norm(g) + trace_product(t, abs_g);
    worst = std::max({worst, lower - x, x - upper});
    const Matrix p = rng.state(c.bundle.d);
    equality = std::max(equality, std::abs(x_norm(p, c.kinetic) - (1.0 + trace_product(t, p))));
  }
  CheckResult out = verdict("xnorm-sandwich", std::max(worst, 0.0), 1e-8,
                            "positive-case equality defect " + format_double(equality));
  out.passed = out.passed && equality <= 1e-10;
  return out;
}

inline CheckResult check_xnorm_oracle(CheckContext& c) {
  if (c.bundle.d > 12) return skip("xnorm-oracle", "oracle limited to d <= 12");
  RandomSource rng(c.seed + 3);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Matrix g = rng.hermitian(c.bundle.d);
    const XNormOracleResult o = x_norm_sdp_oracle(g, c.kinetic);
    worst = std::max({worst, std::abs(o.value - x_norm(g, c.kinetic)), o.gap});
  }
  return verdict("xnorm-oracle", worst, 1e-7);
}

inline CheckResult check_dual_norm(CheckContext& c) {
  RandomSource rng(c.seed + 4);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix v = rng.hermitian(c.bundle.d);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(v, c.kinetic.shifted(),
                                                            Eigen::EigenvaluesOnly);
    const double reference = pencil.eigenvalues().cwiseAbs().maxCoeff();
    worst = std::max(worst, std::abs(dual_norm(v, c.kinetic) - reference));
  }
  return verdict("dual-norm-isometry", worst, 1e-9);
}

inline CheckResult check_polarization(CheckContext& c) {
  RandomSource rng(c.seed + 5);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix v = rng.hermitian(c.bundle.d);
    const Matrix back = polarization_reconstruct(
        [&](const Vector& psi) { return psi.dot(v * psi); }, c.bundle.d);
    worst = std::max(worst, (back - v).cwiseAbs().maxCoeff());
  }
  return verdict("polarization", worst, 1e-10);
}

inline CheckResult check_telescope(CheckContext& c) {
  if (!c.sys || c.sys->n < 1) return skip("projection-telescope", "no particles");
  if (c.bundle.d < telescope_min_dimension(c.sys->n)) {
    return skip("projection-telescope", "d below N^2 - N + 1");
  }
  RandomSource rng(c.seed + 6);
  const Matrix g = rng.hermitian(c.bundle.d);
  const TelescopePreimage pre = telescope_preimage(g, *c.sys->ladder);
  const double roundtrip = (partial_trace(pre.state, *c.sys->ladder) - g).cwiseAbs().maxCoeff();
  return verdict("projection-telescope", roundtrip, 1e-8,
                 "identity defect " + format_double(pre.identity_defect));
}

inline CheckResult check_coleman(CheckContext& c) {
  if (!c.sys || c.sys->n < 1) return skip("coleman-preimage", "no particles");
  RandomSource rng(c.seed + 7);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Matrix g = rng.representable_rdm(c.bundle.d, c.sys->n);
    const Matrix pre = coleman_preimage(g, *c.sys->ladder);
    worst = std::max({worst, (partial_trace(pre, *c.sys->ladder) - g).cwiseAbs().maxCoeff(),
                      -lambda_min(pre), std::abs(pre.trace().real() - 1.0)});
  }
  return verdict("coleman-preimage", std::max(worst, 0.0), 1e-8);
}

inline CheckResult check_rdm_conjugacy(CheckContext& c) {
  if (!solver_sized(c)) return skip("rdm-conjugacy", "sector too large for the check budget");
  RandomSource rng(c.seed + 8);
  const Matrix g = rng.representable_rdm(c.bundle.d, c.sys->n, 0.05, 0.95);
  const FunctionalValue p = f_rdm_primal(g, *c.sys, c.cfg);
  const FunctionalValue q = f_rdm_dual(g, *c.sys, c.cfg);
  const double diff = finite(p).value - finite(q).value;
  return verdict("rdm-conjugacy", std::abs(diff), 1e-5,
                 "primal " + format_double(finite(p).value) + " dual " + format_double(finite(q).value));
}

inline CheckResult check_variational(CheckContext& c) {
  if (!solver_sized(c)) return skip("variational-principle", "sector too large for the check budget");
  RandomSource rng(c.seed + 9);
  const Matrix v = rng.hermitian(c.bundle.d);
  const Matrix g = ground_state_rdm(v, *c.sys);
  const double r = variational_residual(v, *c.sys, {g}, c.cfg);
  const double defect = std::max({0.0, -1e-6 - r, r - 1e-4});
  return verdict("variational-principle", defect, 0.0, "residual " + format_double(r));
}

inline CheckResult check_energy_shape(CheckContext& c) {
  if (!c.sys) return skip("energy-concavity", "no many-body sector");
  RandomSource rng(c.seed + 10);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix v1 = rng.hermitian(c.bundle.d), v2 = rng.hermitian(c.bundle.d);
    const double defect = convexity_probe([&](const Matrix& v) { return e_rdm(v, *c.sys); }, v1, v2, 0.5);
    worst = std::max(worst, -defect - 1e-6);
    const Matrix up = v1 + rng.psd(c.bundle.d);
    worst = std::max(worst, e_rdm(v1, *c.sys) - e_rdm(up, *c.sys) - 1e-9);
  }
  return verdict("energy-concavity", std::max(worst, 0.0), 0.0);
}

inline CheckResult check_diagonal_map(CheckContext& c) {
  RandomSource rng(c.seed + 11);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix g = rng.hermitian(c.bundle.d);
    const Density rho = diagonal_map(g, c.pvm);
    worst = std::max(worst, rho.l1_norm(c.pvm) - trace_norm(g) - 1e-10);
    worst = std::max(worst, std::abs(rho.integral(c.pvm) - g.trace().real()) - 1e-10);
    const Density pos = diagonal_map(rng.state(c.bundle.d), c.pvm);
    worst = std::max(worst, -pos.values.minCoeff() - 1e-10);
    if (c.pvm.faithful()) {
      const Matrix pre = positive_preimage(pos, c.pvm);
      worst = std::max(worst, (diagonal_map(pre, c.pvm).values - pos.values).cwiseAbs().maxCoeff() - 1e-12);
    }
  }
  return verdict("diagonal-map", std::max(worst, 0.0), 0.0);
}

inline CheckResult check_dft_conjugacy(CheckContext& c) {
  if (!solver_sized(c)) return skip("dft-conjugacy", "sector too large for the check budget");
  RandomSource rng(c.seed + 12);
  RealVector v(c.pvm.size());
  for (int j = 0; j < v.size(); ++j) v(j) = rng.normal();
  const Matrix pot = diagonal_adjoint(v, c.pvm);
  const Density rho = diagonal_map(ground_state_rdm(pot, *c.sys), c.pvm);
  const FunctionalValue f = f_dft(rho, *c.sys, c.pvm, c.cfg);
  if (is_infinite(f)) return verdict("dft-conjugacy", 1.0, 0.0, std::get<PlusInfinity>(f).reason);
  double pairing = 0.0;
  for (int j = 0; j < v.size(); ++j) pairing += c.pvm.weight(j) * v(j) * rho.values(j);
  const double r = finite(f).value + pairing - e_dft(v, *c.sys, c.pvm);
  const double defect = std::max({0.0, -1e-6 - r, r - 1e-4});
  return verdict("dft-conjugacy", defect, 0.0, "residual " + format_double(r));
}

inline CheckResult check_trace_distance(CheckContext& c) {
  RandomSource rng(c.seed + 13);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector phi = rng.unit_vector(c.bundle.d), psi = rng.unit_vector(c.bundle.d);
    const double formula = rank_one_trace_distance(phi, psi);
    const double direct = trace_norm(outer(phi) - outer(psi));
    worst = std::max({worst, std::abs(formula - direct) - 1e-12, formula - 2.0 * (phi - psi).norm()});
  }
  return verdict("rank-one-trace-distance", std::max(worst, 0.0), 0.0);
}

inline CheckResult check_form_sum(CheckContext& c) {
  RandomSource rng(c.seed + 14);
  const Matrix v = c.bundle.potential ? *c.bundle.potential : rng.hermitian(c.bundle.d);
  const double b = std::max(1.0, 2.0 * operator_norm(v));
  const double a = min_T_bound(v, c.kinetic, b);
  if (a >= 1.0) return skip("form-sum-lower-bound", "no T-bound below 1 at the sampled offset");
  const double low = form_sum(c.kinetic, v).lower_bound;
  return verdict("form-sum-lower-bound", std::max(0.0, -b - low - 1e-10), 0.0,
                 "a(b) = " + format_double(a));
}

inline const std::vector<std::pair<std::string, CheckFn>>& check_registry() {
  static const std::vector<std::pair<std::string, CheckFn>> registry = {
      {"adjointness", check_adjointness},
      {"xnorm-sandwich", check_sandwich},
      {"xnorm-oracle", check_xnorm_oracle},
      {"dual-norm-isometry", check_dual_norm},
      {"polarization", check_polarization},
      {"projection-telescope", check_telescope},
      {"coleman-preimage", check_coleman},
      {"rdm-conjugacy", check_rdm_conjugacy},
      {"variational-principle", check_variational},
      {"energy-concavity", check_energy_shape},
      {"diagonal-map", check_diagonal_map},
      {"dft-conjugacy", check_dft_conjugacy},
      {"rank-one-trace-distance", check_trace_distance},
      {"form-sum-lower-bound", check_form_sum},
  };
  return registry;
}

}  // namespace detail

inline std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : detail::check_registry()) out.push_back(name);
  return out;
}

/// Runs the checks named in selector: "all", "fast" (no optimization-based
/// checks) or a comma-separated list of check names.
inline CheckReport run_check_suite(const OperatorBundle& bundle, const std::string& selector = "all",
                                   const SolverConfig& cfg = {}) {
  validate_bundle(bundle);
  std::vector<std::string> wanted;
  if (selector == "all" || selector == "fast") {
    wanted = check_names();
    if (selector == "fast") {
      std::erase_if(wanted, [](const std::string& n) {
        return n == "rdm-conjugacy" || n == "variational-principle" || n == "dft-conjugacy" ||
               n == "xnorm-oracle";
      });
    }
  } else {
    std::stringstream ss(selector);
    for (std::string item; std::getline(ss, item, ',');) {
      const auto names = check_names();
      if (std::find(names.begin(), names.end(), item) == names.end()) {
        throw Error(ErrorCode::IndexOutOfRange, "unknown check '" + item + "'");
      }
      wanted.push_back(item);
    }
  }
  detail::CheckContext ctx{bundle, bundle.kinetic(), bundle.pvm(), std::nullopt,
                           cfg.seed ^ bundle.metadata.seed, cfg};
  if (bundle.d <= kMaxOrbitals) ctx.sys = bundle.system();
  CheckReport report;
  for (const auto& [name, fn] : detail::check_registry()) {
    if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    try {
      report.results.push_back(fn(ctx));
    } catch (const Error& e) {
      report.results.push_back({name, std::numeric_limits<double>::infinity(), 0.0, false, false, e.what()});
    }
  }
  return report;
}

inline nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : report.results) {
    out.push_back({{"name", r.name},
                   {"defect", std::isfinite(r.defect) ? nlohmann::json(r.defect) : nlohmann::json("inf")},
                   {"threshold", r.threshold},
                   {"passed", r.passed},
                   {"skipped", r.skipped},
                   {"detail", r.detail}});
  }
  return out;
}

}  // namespace rdmlab
