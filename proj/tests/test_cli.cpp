#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace rdmlab;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(RDMLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("rdmlab_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

}  // namespace

TEST(Bundle, RoundTripIsBitExact) {
  OperatorBundle b = build_random(5, 2, 99);
  RandomSource rng(3);
  b.gamma = rng.representable_rdm(5, 2);
  b.potential = rng.hermitian(5);
  const std::string text = dump_bundle(b);
  const OperatorBundle back = parse_bundle(text);
  EXPECT_EQ(dump_bundle(back), text);
  EXPECT_EQ(back.t, b.t);
  EXPECT_EQ(*back.gamma, *b.gamma);
  EXPECT_EQ(back.w.entries.size(), b.w.entries.size());
  EXPECT_EQ(back.metadata.seed, 99u);
  EXPECT_EQ(back.metadata.generator, kGeneratorName);
}

TEST(Bundle, HubbardAndCoulombSurviveRoundTrip) {
  for (const OperatorBundle& b : {build_hubbard(3, true, 1.0, 2.0), build_coulomb1d(16, 20.0, 0.1, 1.0)}) {
    const OperatorBundle back = parse_bundle(dump_bundle(b));
    EXPECT_EQ(back.partition, b.partition);
    EXPECT_EQ(back.weights, b.weights);
    EXPECT_EQ(*back.potential, *b.potential);
  }
}

TEST(Bundle, CorruptInputsAreInvalidBundle) {
  const nlohmann::json good = bundle_to_json(build_hubbard(2, true, 1.0, 1.0));
  auto expect_invalid = [](const std::string& text) {
    try {
      parse_bundle(text);
      ADD_FAILURE() << "accepted: " << text.substr(0, 80);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidBundle);
    }
  };
  nlohmann::json asym = good;
  asym["T"][0][1] = nlohmann::json::array({0.5, 0.0});
  expect_invalid(asym.dump());
  nlohmann::json version = good;
  version["format_version"] = 7;
  expect_invalid(version.dump());
  nlohmann::json missing = good;
  missing.erase("d");
  expect_invalid(missing.dump());
  nlohmann::json pvm = good;
  pvm["pvm"]["partition"] = nlohmann::json::array({nlohmann::json::array({0, 1})});
  expect_invalid(pvm.dump());
  nlohmann::json negative = good;
  negative["W"]["entries"][0]["value"] = nlohmann::json::array({-5.0, 0.0});
  negative["W"]["entries"][1]["value"] = nlohmann::json::array({-5.0, 0.0});
  expect_invalid(negative.dump());
  expect_invalid("{not json");
}

TEST(Models, BuilderErrors) {
  try {
    build_hubbard(2, false, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpinRequiredForU);
  }
  EXPECT_THROW(build_hubbard(8, true, 1.0, 1.0), Error);
  EXPECT_THROW(build_hubbard(2, true, 1.0, -1.0), Error);
  EXPECT_THROW(build_coulomb1d(10, -1.0, 0.1, 1.0), Error);
}

TEST(Models, HubbardShiftIsCompensated) {
  const OperatorBundle b = build_hubbard(4, false, 1.0, 0.0, 2);
  const Matrix hopping = b.t + *b.potential;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double expected = std::abs(i - j) == 1 ? -1.0 : 0.0;
      EXPECT_NEAR(hopping(i, j).real(), expected, 1e-14);
    }
  }
  EXPECT_GE(lambda_min(b.t), -1e-12);
}

TEST(Report, FormatDoubleRoundTrips) {
  RandomSource rng(5);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.normal() * std::pow(10.0, rng.integer(-20, 20));
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Report, CsvLayoutIsStable) {
  ResultRow r;
  r.input_hash = hex64(fnv1a("abc"));
  r.quantity = "F,odd";
  r.value = 1.5;
  const std::string csv = to_csv({r});
  const auto ls = lines(csv);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "input_hash,quantity,parameter,value,gap,feasibility,iterations,wall_time_ms,status");
  EXPECT_EQ(ls[1], "e71fa2190541574b,\"F,odd\",,1.5,0,0,0,0,ok");
  EXPECT_EQ(to_json({r})[0]["value"], 1.5);
}

TEST(Sweep, RowsAreOrderedAndIndependentOfWorkers) {
  const OperatorBundle b = build_random(4, 2, 7);
  SweepSpec spec;
  spec.quantity = SweepQuantity::E_RDM;
  spec.start = -1.0;
  spec.stop = 1.0;
  spec.count = 9;
  const auto one = run_sweep(b, spec, SolverConfig{}, "h", 1);
  const auto three = run_sweep(b, spec, SolverConfig{}, "h", 3);
  ASSERT_EQ(one.size(), 9u);
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].parameter, format_double(spec.point(static_cast<int>(k))));
    EXPECT_EQ(one[k].value, three[k].value);
    EXPECT_EQ(one[k].status, "ok");
  }
  for (double defect : midpoint_defects(one)) EXPECT_GE(defect, -1e-10);
}

TEST(Sweep, ErrorsBecomeRowStatus) {
  const OperatorBundle b = build_coulomb1d(8, 10.0, 0.5, 1.0);
  SweepSpec spec;
  spec.quantity = SweepQuantity::BoundCurve;
  spec.start = 0.0;
  spec.stop = 2.0;
  spec.count = 3;
  const auto rows = run_sweep(b, spec, SolverConfig{}, "h", 1);
  for (const auto& r : rows) EXPECT_EQ(r.status, "ok");
  EXPECT_LE(rows[2].value, rows[0].value);
  spec.count = 1;
  EXPECT_THROW(run_sweep(b, spec, SolverConfig{}, "h", 1), Error);
}

TEST(Checks, FastSuitePassesOnSmallBundle) {
  const CheckReport report = run_check_suite(build_random(5, 2, 3), "fast");
  EXPECT_TRUE(report.all_passed());
  EXPECT_FALSE(report.results.empty());
  EXPECT_THROW(run_check_suite(build_random(5, 2, 3), "no-such-check"), Error);
}

TEST(Cli, BuildEnergyAndDeterministicOutput) {
  const fs::path dir = scratch_dir();
  const std::string bundle = (dir / "dimer.json").string();
  ASSERT_EQ(run_cli("build --model hubbard --sites 2 --U 0 --out " + bundle).code, 0);
  const RunResult first = run_cli("energy --bundle " + bundle + " --no-timestamp");
  const RunResult second = run_cli("energy --bundle " + bundle + " --no-timestamp");
  ASSERT_EQ(first.code, 0);
  EXPECT_EQ(first.out, second.out);
  const auto ls = lines(first.out);
  ASSERT_EQ(ls.size(), 2u);
  const auto fields = split(ls[1]);
  ASSERT_EQ(fields.size(), 9u);
  EXPECT_NEAR(std::stod(fields[3]), -2.0, 1e-12);
  EXPECT_EQ(fields[7], "0");
  const RunResult stamped = run_cli("energy --bundle " + bundle);
  EXPECT_EQ(stamped.out.rfind("# generated ", 0), 0u);
  const RunResult json = run_cli("energy --bundle " + bundle + " --format json --no-timestamp");
  EXPECT_NEAR(nlohmann::json::parse(json.out)["rows"][0]["value"].get<double>(), -2.0, 1e-12);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir();
  const std::string bundle = (dir / "dimer.json").string();
  ASSERT_EQ(run_cli("build --model hubbard --sites 2 --U 4 --out " + bundle).code, 0);
  EXPECT_EQ(run_cli("energy").code, 2);
  EXPECT_EQ(run_cli("no-such-command").code, 2);
  EXPECT_EQ(run_cli("fdft --bundle " + bundle + " --density 1.5,0.2").code, 4);
  EXPECT_EQ(run_cli("fdft --bundle " + bundle + " --density 1.2,0.8 --no-timestamp").code, 0);
  EXPECT_EQ(run_cli("bounds --bundle " + bundle + " --max-exponent 2").code, 0);
  EXPECT_EQ(run_cli("check --bundle " + bundle + " --suite fast").code, 0);
  {
    std::ofstream broken(dir / "broken.json");
    broken << "{\"format_version\": 1}";
  }
  EXPECT_EQ(run_cli("energy --bundle " + (dir / "broken.json").string()).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, SweepMatchesLibrary) {
  const fs::path dir = scratch_dir();
  const std::string bundle = (dir / "r.json").string();
  ASSERT_EQ(run_cli("build --model random --d 4 --N 2 --seed 11 --out " + bundle).code, 0);
  const RunResult r = run_cli("sweep --bundle " + bundle +
                              " --quantity E_RDM --start 0 --stop 1 --count 5 --workers 2 --no-timestamp");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 6u);
  SweepSpec spec;
  spec.start = 0.0;
  spec.stop = 1.0;
  spec.count = 5;
  const auto rows = run_sweep(load_bundle(bundle), spec, SolverConfig{}, "h", 1);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(split(ls[k + 1])[3], format_double(rows[k].value));
  fs::remove_all(dir);
}
