// Command-line front end: builds model bundles, evaluates energies and
// functionals, runs sweeps and the property check suite.

#include "rdmlab/rdmlab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rdmlab;

enum ExitCode { kOk = 0, kValidation = 2, kStall = 3, kInfeasible = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverStall: return kStall;
    case ErrorCode::NotRepresentable:
    case ErrorCode::OutOfDomain:
    case ErrorCode::InfeasibleOffset:
    case ErrorCode::InfeasibleSpectrum:
    case ErrorCode::BracketInfeasible:
    case ErrorCode::NegativeDensity: return kInfeasible;
    default: return kValidation;
  }
}

struct Globals {
  std::string bundle_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double tol_gap = 1e-6;
  double tol_feas = 1e-6;
  bool no_timestamp = false;
  std::string format = "csv";

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.tol_gap = tol_gap;
    cfg.tol_feas = tol_feas;
    cfg.seed = seed;
    return cfg;
  }
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.out_path);
  if (!out) throw Error(ErrorCode::InvalidBundle, "cannot write " + g.out_path);
  out << text;
}

void emit_rows(const Globals& g, std::vector<ResultRow> rows) {
  if (g.no_timestamp) {
    for (auto& r : rows) r.wall_time_ms = 0.0;
  }
  if (g.format == "json") {
    nlohmann::json doc = {{"rows", to_json(rows)}};
    if (!g.no_timestamp) doc["generated"] = timestamp();
    emit(g, doc.dump(2) + "\n");
  } else {
    emit(g, (g.no_timestamp ? std::string() : "# generated " + timestamp() + "\n") + to_csv(rows));
  }
}

OperatorBundle require_bundle(const Globals& g) {
  if (g.bundle_path.empty()) throw Error(ErrorCode::InvalidBundle, "--bundle is required");
  return load_bundle(g.bundle_path);
}

std::string input_hash(const OperatorBundle& b, const Globals& g, const std::string& extra) {
  std::uint64_t h = fnv1a(dump_bundle(b));
  h = fnv1a(extra + "|seed=" + std::to_string(g.seed) + "|tol=" + format_double(g.tol_gap) + "," +
                format_double(g.tol_feas),
            h);
  return hex64(h);
}

ResultRow row_from(const std::string& hash, const std::string& quantity, const FunctionalValue& f) {
  ResultRow row;
  row.input_hash = hash;
  row.quantity = quantity;
  fill_from(row, f);
  return row;
}

int status_exit(const std::vector<ResultRow>& rows) {
  int code = kOk;
  for (const auto& r : rows) {
    if (r.status == "out-of-domain") return kInfeasible;
    if (r.status == "stall") code = kStall;
  }
  return code;
}

/// gamma for the functional commands: the bundle's own, else the ground
/// state of the bundle potential.
Matrix reference_gamma(const OperatorBundle& b, const SystemSpec& sys) {
  if (b.gamma) return *b.gamma;
  return ground_state_rdm(b.potential_or_zero(), sys);
}

RealVector parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
  return Eigen::Map<RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced density matrix functional toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--bundle", g.bundle_path, "Operator bundle (JSON)");
  app.add_option("--out", g.out_path, "Write output here instead of stdout");
  app.add_option("--seed", g.seed, "Seed for random samples");
  app.add_option("--tol-gap", g.tol_gap, "Duality gap tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-feas", g.tol_feas, "Feasibility tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit the timestamp and zero wall times");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  int exit_code = kOk;

  auto* energy = app.add_subcommand("energy", "Ground-state energy for the bundle potential");
  double scale = 1.0;
  energy->add_option("--scale", scale, "Multiply the potential by this factor");
  energy->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const SystemSpec sys = b.system();
    ResultRow row;
    row.input_hash = input_hash(b, g, "energy|" + format_double(scale));
    row.quantity = "E_RDM";
    detail::Stopwatch clock;
    const GroundState gs = ground_energy(sys.hamiltonian(scale * b.potential_or_zero()));
    row.value = gs.energy;
    row.feasibility = gs.residual;
    row.wall_time_ms = clock.elapsed_ms();
    emit_rows(g, {row});
  });

  auto* frdm = app.add_subcommand("frdm", "Density-matrix functional at the reference gamma");
  std::string frdm_method = "both";
  frdm->add_option("--method", frdm_method)->check(CLI::IsMember({"primal", "dual", "both"}));
  frdm->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const SystemSpec sys = b.system();
    const Matrix gamma = reference_gamma(b, sys);
    const std::string hash = input_hash(b, g, "frdm|" + frdm_method);
    std::vector<ResultRow> rows;
    if (frdm_method != "dual") rows.push_back(row_from(hash, "F_RDM_primal", f_rdm_primal(gamma, sys, g.config())));
    if (frdm_method != "primal") rows.push_back(row_from(hash, "F_RDM_dual", f_rdm_dual(gamma, sys, g.config())));
    emit_rows(g, rows);
    exit_code = status_exit(rows);
  });

  auto* fdft = app.add_subcommand("fdft", "Density functional at a density");
  std::string density_text;
  fdft->add_option("--density", density_text, "Comma-separated cell densities (default: ground-state density)");
  fdft->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const SystemSpec sys = b.system();
    const PVM pvm = b.pvm();
    const Density rho = density_text.empty()
                            ? diagonal_map(reference_gamma(b, sys), pvm)
                            : Density{parse_list(density_text)};
    const std::string hash = input_hash(b, g, "fdft|" + density_text);
    std::vector<ResultRow> rows{row_from(hash, "F", f_dft(rho, sys, pvm, g.config()))};
    emit_rows(g, rows);
    exit_code = status_exit(rows);
  });

  auto* xnorm = app.add_subcommand("xnorm", "Kinetic-weighted trace norm of the reference gamma");
  xnorm->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const KineticOperator t = b.kinetic();
    RandomSource rng(g.seed);
    const Matrix gamma = b.gamma ? *b.gamma : rng.hermitian(b.d);
    const std::string hash = input_hash(b, g, "xnorm");
    std::vector<ResultRow> rows;
    ResultRow closed{hash, "xnorm"};
    closed.value = x_norm(gamma, t);
    rows.push_back(closed);
    if (b.d <= 12) {
      const XNormOracleResult o = x_norm_sdp_oracle(gamma, t);
      ResultRow oracle{hash, "xnorm_oracle"};
      oracle.value = o.value;
      oracle.gap = o.gap;
      oracle.iterations = o.iterations;
      if (!o.converged) oracle.status = "stall";
      rows.push_back(oracle);
    }
    emit_rows(g, rows);
    exit_code = status_exit(rows);
  });

  auto* preimage = app.add_subcommand("preimage", "N-particle preimage of the reference gamma");
  std::string preimage_method = "auto";
  preimage->add_option("--method", preimage_method)->check(CLI::IsMember({"auto", "coleman", "telescope"}));
  preimage->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const SystemSpec sys = b.system();
    const Matrix gamma = reference_gamma(b, sys);
    const bool representable = check_representability(gamma, sys.n).representable;
    std::string method = preimage_method;
    if (method == "auto") method = representable ? "coleman" : "telescope";
    const Matrix state = method == "coleman" ? coleman_preimage(gamma, *sys.ladder)
                                             : telescope_preimage(gamma, *sys.ladder).state;
    ResultRow row{input_hash(b, g, "preimage|" + method), "preimage_" + method};
    row.value = (partial_trace(state, *sys.ladder) - gamma).cwiseAbs().maxCoeff();
    row.feasibility = std::max(0.0, -lambda_min(state));
    emit_rows(g, {row});
  });

  auto* bounds = app.add_subcommand("bounds", "Relative form bound a(b) of the bundle potential");
  int max_exponent = 6;
  bounds->add_option("--max-exponent", max_exponent, "Offsets b = 10^0 .. 10^k");
  bounds->callback([&] {
    const OperatorBundle b = require_bundle(g);
    RandomSource rng(g.seed);
    const Matrix v = b.potential ? *b.potential : rng.hermitian(b.d);
    const BoundCurve curve = bound_curve(v, b.kinetic(), max_exponent);
    const std::string hash = input_hash(b, g, "bounds|" + std::to_string(max_exponent));
    std::vector<ResultRow> rows;
    for (const FormBound& p : curve.points) {
      ResultRow row{hash, "a(b)", format_double(p.b)};
      row.value = p.a;
      rows.push_back(row);
    }
    emit_rows(g, rows);
  });

  auto* sweep = app.add_subcommand("sweep", "Evaluate a quantity over a parameter grid");
  SweepSpec spec;
  std::string quantity = "E_RDM";
  unsigned workers = 0;
  sweep->add_option("--quantity", quantity)
      ->check(CLI::IsMember({"E", "E_RDM", "F_RDM", "F", "xnorm", "bound-curve"}));
  sweep->add_option("--parameter", spec.parameter, "Label of the swept parameter");
  sweep->add_option("--start", spec.start);
  sweep->add_option("--stop", spec.stop);
  sweep->add_option("--count", spec.count)->check(CLI::Range(2, 100000));
  sweep->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  sweep->callback([&] {
    const OperatorBundle b = require_bundle(g);
    spec.quantity = parse_sweep_quantity(quantity);
    const std::string hash =
        input_hash(b, g, "sweep|" + quantity + "|" + spec.parameter + "|" + format_double(spec.start) +
                             "|" + format_double(spec.stop) + "|" + std::to_string(spec.count));
    const std::vector<ResultRow> rows = run_sweep(b, spec, g.config(), hash, workers);
    emit_rows(g, rows);
  });

  auto* check = app.add_subcommand("check", "Run the property check suite on the bundle");
  std::string suite = "all";
  check->add_option("--suite", suite, "all, fast, or a comma-separated list of check names");
  check->callback([&] {
    const OperatorBundle b = require_bundle(g);
    const CheckReport report = run_check_suite(b, suite, g.config());
    if (g.format == "json") {
      nlohmann::json doc = {{"checks", to_json(report)}, {"passed", report.all_passed()}};
      if (!g.no_timestamp) doc["generated"] = timestamp();
      emit(g, doc.dump(2) + "\n");
    } else {
      std::string text = g.no_timestamp ? "" : "# generated " + timestamp() + "\n";
      text += "name,defect,threshold,passed,skipped,detail\n";
      for (const auto& r : report.results) {
        text += r.name + "," + format_double(r.defect) + "," + format_double(r.threshold) + "," +
                (r.passed ? "true" : "false") + "," + (r.skipped ? "true" : "false") + "," +
                csv_escape(r.detail) + "\n";
      }
      emit(g, text);
    }
    exit_code = report.all_passed() ? kOk : kValidation;
  });

  auto* build = app.add_subcommand("build", "Write a model bundle");
  std::string model = "hubbard";
  int sites = 2, particles = -1, points = 8, dim = 6;
  bool spin = true;
  double hopping = 1.0, onsite = 0.0, box = 20.0, softening = 0.1, charge = 1.0;
  build->add_option("--model", model)->check(CLI::IsMember({"hubbard", "coulomb1d", "random"}));
  build->add_option("--sites", sites, "Hubbard chain length");
  build->add_flag("--spin,!--no-spin", spin, "Two spin orbitals per site");
  build->add_option("--hopping", hopping, "Hubbard hopping t");
  build->add_option("--U", onsite, "Hubbard on-site repulsion");
  build->add_option("--N", particles, "Particle number (model default if omitted)");
  build->add_option("--points", points, "Coulomb grid points");
  build->add_option("--box", box, "Coulomb box length");
  build->add_option("--softening", softening, "Coulomb softening length");
  build->add_option("--Z", charge, "Coulomb nuclear charge");
  build->add_option("--d", dim, "Orbitals of a random bundle");
  build->callback([&] {
    OperatorBundle b;
    if (model == "hubbard") {
      b = build_hubbard(sites, spin, hopping, onsite, particles);
    } else if (model == "coulomb1d") {
      b = build_coulomb1d(points, box, softening, charge, particles < 0 ? 1 : particles);
    } else {
      b = build_random(dim, particles < 0 ? 2 : particles, g.seed);
    }
    validate_bundle(b);
    emit(g, dump_bundle(b));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return exit_code;
}
