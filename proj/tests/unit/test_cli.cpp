#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "eistwist/error.hpp"
#include "eistwist_cli/cli.hpp"
#include "json.hpp"

using namespace eistwist;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "eistwist");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.status = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "eistwist_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Csv, Formatting) {
  cli::Table t;
  t.columns = {"name", "n", "x", "w", "ok"};
  t.rows.push_back({std::string("a"), 3LL, 0.1, Complex(1.0, -2.0), true});
  EXPECT_EQ(cli::to_csv(t),
            "name,n,x,w_re,w_im,ok\n"
            "a,3,1.0000000000000001e-01,1.0000000000000000e+00,-2.0000000000000000e+00,true\n");
  const auto doc = nlohmann::json::parse(cli::to_json(t));
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc[0]["n"], 3);
  EXPECT_EQ(doc[0]["w"]["im"], -2.0);
}

TEST(Cli, EvalMatchesLibrary) {
  const CliResult r = run({"eval", "--z", "0.28,0.9", "--s", "2.5", "--radius", "200"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "row,col,value_re,value_im,tail,terms");
  EXPECT_NE(r.out.find("0,0,2.37483"), std::string::npos);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path ini = scratch("run.ini");
  write(ini, "[group]\nname = gamma0:2\n[eval]\nz = 0.1,1.2\ns = 3\nradius = 50\n");
  const CliResult from_file = run({"eval", "--config", ini.string()});
  ASSERT_EQ(from_file.status, 0) << from_file.err;
  const CliResult flags = run({"eval", "--group", "gamma0:2", "--z", "0.1,1.2", "--s", "3", "--radius", "50"});
  EXPECT_EQ(from_file.out, flags.out);
  const CliResult override = run({"eval", "--config", ini.string(), "--radius", "60"});
  const CliResult wider = run({"eval", "--group", "gamma0:2", "--z", "0.1,1.2", "--s", "3", "--radius", "60"});
  EXPECT_EQ(override.out, wider.out);
  EXPECT_NE(override.out, from_file.out);

  cli::RunConfig cfg;
  cli::apply_config_file(ini, cfg);
  EXPECT_EQ(cfg.group, "gamma0:2");
  EXPECT_EQ(cfg.eval.radius, 50.0);
}

TEST(Cli, UnknownConfigKey) {
  const fs::path ini = scratch("bad.ini");
  write(ini, "[eval]\nradiuss = 10\n");
  cli::RunConfig cfg;
  try {
    cli::apply_config_file(ini, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  const CliResult r = run({"eval", "--config", ini.string()});
  EXPECT_EQ(r.status, 2);
  const auto rec = nlohmann::json::parse(r.err);
  EXPECT_EQ(rec["error"], "ConfigError");
  EXPECT_EQ(rec["exit_code"], 2);
}

TEST(Cli, MalformedTwistLeavesNoOutput) {
  const fs::path twist = scratch("twist.json");
  const fs::path out = scratch("out.csv");
  write(twist, "{\"images\": [[[1, 0], [0, 1]], \"oops\"]}");
  const CliResult r = run({"eval", "--twist", twist.string(), "--out", out.string()});
  EXPECT_EQ(r.status, 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(fs::path(out.string() + ".tmp")));
  const CliResult missing = run({"eval", "--twist", "/nonexistent/t.json"});
  EXPECT_EQ(missing.status, 11);
}

TEST(Cli, TwistFileRoundTrip) {
  const fs::path twist = scratch("phase.json");
  // The phase character with mu = 1/6: S -> -1, T -> e(1/6).
  write(twist,
        "{\"label\": \"phase\", \"images\": [[[-1]], [[{\"re\": 0.5, \"im\": 0.8660254037844386}]]]}");
  const CliResult file = run({"eval", "--twist", twist.string(), "--s", "3", "--radius", "80"});
  const CliResult builtin = run({"eval", "--twist", "phase:0.16666666666666666", "--s", "3", "--radius", "80"});
  ASSERT_EQ(file.status, 0) << file.err;
  ASSERT_EQ(builtin.status, 0) << builtin.err;
  auto value = [](const std::string& csv) {
    std::istringstream is(csv.substr(csv.find('\n') + 1));
    std::string cell;
    std::vector<double> v;
    while (std::getline(is, cell, ',')) v.push_back(std::stod(cell));
    return v;
  };
  const auto a = value(file.out), b = value(builtin.out);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_NEAR(a[2], b[2], 1e-12 * std::abs(b[2]));
  EXPECT_NEAR(a[3], b[3], 1e-12 * (1 + std::abs(b[3])));
}

TEST(Cli, UnknownGroupAndBadArguments) {
  EXPECT_EQ(run({"eval", "--group", "hecke"}).status, 3);
  EXPECT_EQ(run({"eval", "--group", "gamma0:40"}).status, 3);
  EXPECT_EQ(run({"eval", "--z", "0.1,-1"}).status, 2);
  EXPECT_EQ(run({"eval", "--s", "0.5"}).status, 7);
  EXPECT_EQ(run({"eval", "--bogus"}).status, 2);
}

TEST(Cli, ThreadCountDeterminism) {
  const std::vector<std::string> base{"compare", "--twist", "sym:1", "--radius", "120", "--cmax", "120"};
  auto with = [&](const char* threads) {
    auto args = base;
    args.insert(args.end(), {"--threads", threads});
    return run(args);
  };
  const CliResult a = with("1"), b = with("8");
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, JsonOutputAndAtomicWrite) {
  const fs::path out = scratch("eval.json");
  const CliResult r = run({"eval", "--radius", "50", "--json", "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(fs::exists(fs::path(out.string() + ".tmp")));
  const auto doc = nlohmann::json::parse(slurp(out));
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_TRUE(doc[0].contains("value"));
}

TEST(Cli, DefaultS) {
  const auto model = builtin_group("modular");
  EXPECT_EQ(cli::default_s(trivial_twist(model)), Complex(2.5));
  EXPECT_EQ(cli::default_s(sym_power_twist(model, 1)), Complex(4.0));
}

TEST(Cli, ScanAlongS) {
  const CliResult r = run({"scan", "--scan", "s", "--from", "3,0", "--to", "4,0", "--steps", "3", "--radius", "60"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}
