#pragma once

// One-parameter sweeps of energies, functionals, norms and form bounds over
// a uniform grid. Grid points run on a small worker pool; rows come back in
// grid order.

#include "rdmlab/density.hpp"
#include "rdmlab/functionals.hpp"
#include "rdmlab/models.hpp"
#include "rdmlab/random.hpp"
#include "rdmlab/report.hpp"
#include "rdmlab/xspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace rdmlab {

enum class SweepQuantity { E, E_RDM, F_RDM, F, XNorm, BoundCurve };

inline std::string to_string(SweepQuantity q) {
  switch (q) {
    case SweepQuantity::E: return "E";
    case SweepQuantity::E_RDM: return "E_RDM";
    case SweepQuantity::F_RDM: return "F_RDM";
    case SweepQuantity::F: return "F";
    case SweepQuantity::XNorm: return "xnorm";
    case SweepQuantity::BoundCurve: return "bound-curve";
  }
  return "?";
}

inline SweepQuantity parse_sweep_quantity(const std::string& s) {
  for (SweepQuantity q : {SweepQuantity::E, SweepQuantity::E_RDM, SweepQuantity::F_RDM,
                          SweepQuantity::F, SweepQuantity::XNorm, SweepQuantity::BoundCurve}) {
    if (s == to_string(q)) return q;
  }
  throw Error(ErrorCode::IndexOutOfRange, "unknown sweep quantity '" + s + "'");
}

/// The swept parameter x enters as follows:
///   E_RDM  e_rdm(x v0)               E      e_dft(x w0)
///   F_RDM  F_RDM((1-x) g0 + x g1)    F      F((1-x) r0 + x r1)
///   xnorm  ||(1-x) g0 + x g1||_X     bound-curve  min a at b = 10^x
/// where v0 is the bundle potential (random if absent), w0 a random cell
/// potential, g0, g1 representable density matrices (g0 from the bundle when
/// present) and r0, r1 their densities.
struct SweepSpec {
  std::string parameter = "x";
  double start = 0.0;
  double stop = 1.0;
  int count = 11;
  SweepQuantity quantity = SweepQuantity::E_RDM;

  void validate() const {
    if (count < 2) throw Error(ErrorCode::IndexOutOfRange, "sweep needs count >= 2");
    if (!std::isfinite(start) || !std::isfinite(stop)) {
      throw Error(ErrorCode::IndexOutOfRange, "sweep grid must be finite");
    }
  }

  double point(int k) const { return start + (stop - start) * k / (count - 1); }
};

struct SweepInputs {
  Matrix v0;
  RealVector w0;
  Matrix g0, g1;
  Density r0, r1;
};

inline SweepInputs sweep_inputs(const OperatorBundle& bundle, std::uint64_t seed) {
  RandomSource rng(seed);
  SweepInputs in;
  const int d = bundle.d;
  in.v0 = bundle.potential ? *bundle.potential : rng.hermitian(d);
  const PVM pvm = bundle.pvm();
  in.w0 = RealVector(pvm.size());
  for (int j = 0; j < pvm.size(); ++j) in.w0(j) = rng.normal();
  const bool own = bundle.gamma && check_representability(*bundle.gamma, bundle.n).representable;
  in.g0 = own ? *bundle.gamma : rng.representable_rdm(d, bundle.n, 0.05, 0.95);
  in.g1 = rng.representable_rdm(d, bundle.n, 0.05, 0.95);
  in.r0 = diagonal_map(in.g0, pvm);
  in.r1 = diagonal_map(in.g1, pvm);
  return in;
}

inline void fill_from(ResultRow& row, const FunctionalValue& f) {
  if (is_infinite(f)) {
    row.value = std::numeric_limits<double>::infinity();
    row.status = "out-of-domain";
    return;
  }
  const FunctionalResult& r = finite(f);
  row.value = r.value;
  row.gap = r.gap;
  row.feasibility = r.feasibility;
  row.iterations = r.iterations;
  row.wall_time_ms = r.wall_time_ms;
  if (!r.converged) row.status = "stall";
}

inline std::vector<ResultRow> run_sweep(const OperatorBundle& bundle, const SweepSpec& spec,
                                        const SolverConfig& cfg, const std::string& input_hash,
                                        unsigned workers = 0) {
  spec.validate();
  const SweepInputs in = sweep_inputs(bundle, cfg.seed);
  const PVM pvm = bundle.pvm();
  const KineticOperator kinetic = bundle.kinetic();
  const bool many_body = spec.quantity != SweepQuantity::XNorm &&
                         spec.quantity != SweepQuantity::BoundCurve;
  std::optional<SystemSpec> sys;
  if (many_body) sys = bundle.system();

  auto evaluate = [&](int k) {
    ResultRow row;
    row.input_hash = input_hash;
    row.quantity = to_string(spec.quantity);
    const double x = spec.point(k);
    row.parameter = format_double(x);
    detail::Stopwatch clock;
    try {
      switch (spec.quantity) {
        case SweepQuantity::E_RDM: row.value = e_rdm(x * in.v0, *sys); break;
        case SweepQuantity::E: row.value = e_dft(x * in.w0, *sys, pvm); break;
        case SweepQuantity::F_RDM:
          fill_from(row, f_rdm_primal(hermitian_part((1.0 - x) * in.g0 + x * in.g1), *sys, cfg));
          break;
        case SweepQuantity::F:
          fill_from(row, f_dft(Density{(1.0 - x) * in.r0.values + x * in.r1.values}, *sys, pvm, cfg));
          break;
        case SweepQuantity::XNorm:
          row.value = x_norm(hermitian_part((1.0 - x) * in.g0 + x * in.g1), kinetic);
          break;
        case SweepQuantity::BoundCurve:
          row.value = min_T_bound(in.v0, kinetic, std::pow(10.0, x));
          break;
      }
    } catch (const Error& e) {
      row.value = std::numeric_limits<double>::quiet_NaN();
      row.status = std::string(to_string(e.code()));
    }
    if (row.wall_time_ms == 0.0) row.wall_time_ms = clock.elapsed_ms();
    return row;
  };

  std::vector<ResultRow> rows(spec.count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(spec.count));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k = next++; k < spec.count; k = next++) rows[k] = evaluate(k);
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

/// Midpoint defects f(x_k) - (f(x_{k-1}) + f(x_{k+1}))/2 over consecutive
/// triples; nonnegative everywhere for a concave curve on a uniform grid.
inline std::vector<double> midpoint_defects(const std::vector<ResultRow>& rows) {
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    out.push_back(rows[k].value - 0.5 * (rows[k - 1].value + rows[k + 1].value));
  }
  return out;
}

}  // namespace rdmlab
