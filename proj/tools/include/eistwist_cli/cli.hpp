#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eistwist/eisenstein.hpp"
#include "eistwist/fuchsian.hpp"
#include "eistwist/repjordan.hpp"

namespace eistwist::cli {

struct ScanSpec {
  // "z" or "s".
  std::string variable = "z";
  Complex from{0.0, 1.0};
  Complex to{0.0, 2.0};
  int steps = 10;
};

struct RunConfig {
  std::string command;
  std::string group = "modular";
  std::string twist = "trivial";
  Complex z{0.28, 0.9};
  std::optional<Complex> s;
  // eval sums all cusps when unset; other commands default to cusp 0.
  std::optional<int> cusp;
  std::optional<int> cusp_b;
  EvalConfig eval;
  std::optional<std::filesystem::path> out;
  bool json = false;
  unsigned long long seed = 1;
  ScanSpec scan;
};

using Cell = std::variant<std::string, long long, double, Complex, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// CSV with a header row; complex cells become <name>_re, <name>_im; reals in 17-digit scientific notation.
std::string to_csv(const Table& table);
// Array of objects mirroring the CSV rows, complex values as {"re", "im"}.
std::string to_json(const Table& table);

// Writes to a sibling temporary and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// INI sections [group], [twist], [eval], [output]; throws ConfigError.
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);

// Built-in spec ("trivial", "sym:m", "phase:mu") or a path to a JSON twist file.
Twist load_twist(const FuchsianModel& model, const std::string& spec);

// Default s when none is given: 2.5 for one-dimensional twists, 4 otherwise.
Complex default_s(const Twist& chi);

// Runs one command and returns its table; throws eistwist::Error. Sets *passed for verify.
Table run_command(const RunConfig& cfg, bool* passed = nullptr);

// Full entry point: parses arguments, runs, writes output, reports errors on err as a JSON line.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eistwist::cli
