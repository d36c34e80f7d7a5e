#pragma once

// Result rows shared by the command-line tool and the sweep runner, with
// CSV and JSON renderings.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

namespace rdmlab {

/// 64-bit FNV-1a, used to tag rows with the inputs that produced them.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ResultRow {
  std::string input_hash;
  std::string quantity;
  std::string parameter;  ///< grid value for sweeps, empty otherwise
  double value = 0.0;
  double gap = 0.0;
  double feasibility = 0.0;
  long iterations = 0;
  double wall_time_ms = 0.0;
  std::string status = "ok";
};

inline const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {"input_hash", "quantity",   "parameter",
                                                "value",      "gap",        "feasibility",
                                                "iterations", "wall_time_ms", "status"};
  return cols;
}

/// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for nonfinite values.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < result_columns().size(); ++i) {
    out += (i ? "," : "") + result_columns()[i];
  }
  out += "\n";
  for (const ResultRow& r : rows) {
    out += r.input_hash + "," + csv_escape(r.quantity) + "," + csv_escape(r.parameter) + "," +
           format_double(r.value) + "," + format_double(r.gap) + "," +
           format_double(r.feasibility) + "," + std::to_string(r.iterations) + "," +
           format_double(r.wall_time_ms) + "," + csv_escape(r.status) + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<ResultRow>& rows) {
  auto number = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return format_double(x);
  };
  nlohmann::json out = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    out.push_back({{"input_hash", r.input_hash},
                   {"quantity", r.quantity},
                   {"parameter", r.parameter},
                   {"value", number(r.value)},
                   {"gap", number(r.gap)},
                   {"feasibility", number(r.feasibility)},
                   {"iterations", r.iterations},
                   {"wall_time_ms", number(r.wall_time_ms)},
                   {"status", r.status}});
  }
  return out;
}

}  // namespace rdmlab
