#include "eistwist_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>

#include "eistwist/error.hpp"
#include "eistwist/verify.hpp"

namespace eistwist::cli {

namespace {

using nlohmann::json;

std::string format_real(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::scientific << std::setprecision(16) << v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Complex parse_complex(const std::string& text) {
  std::string t = text;
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  double re = 0.0, im = 0.0;
  if (!(is >> re)) fail(ErrorCode::ConfigError, "cannot parse complex value '" + text + "'");
  if (!(is >> im)) im = 0.0;
  std::string rest;
  if (is >> rest) fail(ErrorCode::ConfigError, "trailing input in complex value '" + text + "'");
  return {re, im};
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  T v{};
  std::string rest;
  if (!(is >> v) || (is >> rest)) fail(ErrorCode::ConfigError, "bad value for " + key + ": '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  fail(ErrorCode::ConfigError, "bad boolean for " + key + ": '" + text + "'");
}

Complex json_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  if (v.is_object() && v.contains("re") && v["re"].is_number()) {
    const double im = v.contains("im") && v["im"].is_number() ? v["im"].get<double>() : 0.0;
    return {v["re"].get<double>(), im};
  }
  fail(ErrorCode::ConfigError, "matrix entry must be a number, [re, im] or {re, im}");
}

CMatrix json_matrix(const json& rows) {
  if (!rows.is_array() || rows.empty()) fail(ErrorCode::ConfigError, "matrix must be a nonempty array of rows");
  const std::size_t n = rows.size();
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) fail(ErrorCode::ConfigError, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = json_complex(rows[i][j]);
    }
  }
  return m;
}

const std::vector<std::string>& allowed_keys(const std::string& section) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"group", {"name"}},
      {"twist", {"spec"}},
      {"eval",
       {"z", "s", "radius", "m_max", "t_max", "c_max", "margin", "c1", "c1_radius", "threads", "seed", "cusp",
        "cusp_b"}},
      {"output", {"path", "json"}},
      {"scan", {"variable", "from", "to", "steps"}},
  };
  const auto it = keys.find(section);
  if (it == keys.end()) fail(ErrorCode::ConfigError, "unknown config section [" + section + "]");
  return it->second;
}

void set_key(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& v) {
  const std::string name = section + "." + key;
  if (name == "group.name") cfg.group = v;
  else if (name == "twist.spec") cfg.twist = v;
  else if (name == "eval.z") cfg.z = parse_complex(v);
  else if (name == "eval.s") cfg.s = parse_complex(v);
  else if (name == "eval.radius") cfg.eval.radius = parse_number<double>(name, v);
  else if (name == "eval.m_max") cfg.eval.m_max = parse_number<long long>(name, v);
  else if (name == "eval.t_max") cfg.eval.t_max = parse_number<int>(name, v);
  else if (name == "eval.c_max") cfg.eval.c_max = parse_number<double>(name, v);
  else if (name == "eval.margin") cfg.eval.margin = parse_number<double>(name, v);
  else if (name == "eval.c1") cfg.eval.c1_hat = parse_number<double>(name, v);
  else if (name == "eval.c1_radius") cfg.eval.c1_fit_radius = parse_number<double>(name, v);
  else if (name == "eval.threads") cfg.eval.threads = parse_number<int>(name, v);
  else if (name == "eval.seed") cfg.seed = parse_number<unsigned long long>(name, v);
  else if (name == "eval.cusp") cfg.cusp = parse_number<int>(name, v);
  else if (name == "eval.cusp_b") cfg.cusp_b = parse_number<int>(name, v);
  else if (name == "output.path") cfg.out = std::filesystem::path(v);
  else if (name == "output.json") cfg.json = parse_bool(name, v);
  else if (name == "scan.variable") cfg.scan.variable = v;
  else if (name == "scan.from") cfg.scan.from = parse_complex(v);
  else if (name == "scan.to") cfg.scan.to = parse_complex(v);
  else if (name == "scan.steps") cfg.scan.steps = parse_number<int>(name, v);
}

void validate(const RunConfig& cfg, const FuchsianModel& model) {
  const int nc = static_cast<int>(model.cusps().size());
  if (!(cfg.z.imag() > 0.0)) fail(ErrorCode::ConfigError, "z must lie in the upper half-plane");
  if (cfg.cusp && (*cfg.cusp < 0 || *cfg.cusp >= nc)) fail(ErrorCode::ConfigError, "cusp index out of range");
  if (cfg.cusp_b && (*cfg.cusp_b < 0 || *cfg.cusp_b >= nc)) fail(ErrorCode::ConfigError, "cusp_b index out of range");
  const EvalConfig& e = cfg.eval;
  if (!(e.radius > 0.0) || e.m_max < 1 || e.t_max < 1 || !(e.c_max > 0.0) || !(e.margin >= 0.0) ||
      !(cfg.eval.c1_fit_radius > 0.0) || e.threads < 0) {
    fail(ErrorCode::ConfigError, "evaluation parameters must be positive with t_max >= 1");
  }
  if (cfg.command == "scan") {
    if (cfg.scan.variable != "z" && cfg.scan.variable != "s") fail(ErrorCode::ConfigError, "scan variable must be z or s");
    if (cfg.scan.steps < 1) fail(ErrorCode::ConfigError, "scan steps must be >= 1");
    if (cfg.scan.variable == "z" && !(cfg.scan.from.imag() > 0.0 && cfg.scan.to.imag() > 0.0)) {
      fail(ErrorCode::ConfigError, "scan endpoints must lie in the upper half-plane");
    }
  }
}

double sup_norm(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Point to_point(Complex z) { return make_point(z.real(), z.imag()); }

Table matrix_table(const CMatrix& m, double tail, std::size_t terms) {
  Table t;
  t.columns = {"row", "col", "value", "tail", "terms"};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.rows.push_back({static_cast<long long>(i), static_cast<long long>(j), m(i, j), tail,
                        static_cast<long long>(terms)});
    }
  }
  return t;
}

Table cmd_eval(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s) {
  const OperatorValue v = cfg.cusp ? direct_eval(model, chi, *cfg.cusp, to_point(cfg.z), s, cfg.eval)
                                   : total_eval(model, chi, to_point(cfg.z), s, cfg.eval);
  return matrix_table(v.matrix, v.tail_estimate, v.terms);
}

Table cmd_expand(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s) {
  const int a = cfg.cusp.value_or(0);
  const int b = cfg.cusp_b.value_or(a);
  const ExpansionReport rep = fourier_eval(model, chi, a, b, to_point(cfg.z), s, cfg.eval);
  Table t;
  t.columns = {"part", "index", "row", "col", "value"};
  auto add = [&](const std::string& part, double index, const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        t.rows.push_back({part, index, static_cast<long long>(i), static_cast<long long>(j), m(i, j)});
      }
    }
  };
  auto meta = [&](const std::string& name, double v) {
    t.rows.push_back({name, 0.0, -1LL, -1LL, Complex(v, 0.0)});
  };
  add("total", 0.0, rep.total.matrix);
  add("constant", 0.0, rep.constant_term.matrix);
  for (const auto& p : rep.phi_terms) add("phi", p.q, p.coefficient);
  for (const auto& m : rep.mode_terms) add("mode", m.t, m.contribution);
  add("q_form_total", 0.0, rep.q_form_total);
  meta("q_form_discrepancy", rep.q_form_discrepancy);
  meta("q_form_flagged", rep.q_form_flagged ? 1.0 : 0.0);
  meta("tail", rep.total.tail_estimate);
  meta("c_tail", rep.c_tail);
  meta("mode_tail", rep.mode_tail);
  meta("double_cosets", static_cast<double>(rep.double_cosets));
  meta("near_abscissa", rep.total.near_abscissa ? 1.0 : 0.0);
  return t;
}

struct Comparison {
  CMatrix direct;
  CMatrix fourier;
  double defect = 0.0;
  double direct_tail = 0.0;
  double fourier_tail = 0.0;
};

Comparison compare(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s) {
  const int a = cfg.cusp.value_or(0);
  const int b = cfg.cusp_b.value_or(a);
  const Point z = to_point(cfg.z);
  const Point zb = apply(model.cusps().at(static_cast<std::size_t>(b)).sigma, z);
  Comparison c;
  const OperatorValue d = direct_eval(model, chi, a, zb, s, cfg.eval);
  const ExpansionReport f = fourier_eval(model, chi, a, b, z, s, cfg.eval);
  c.direct = d.matrix;
  c.fourier = f.total.matrix;
  const double scale = sup_norm(c.direct);
  c.defect = sup_norm(c.direct - c.fourier) / (scale > 0.0 ? scale : 1.0);
  c.direct_tail = d.tail_estimate;
  c.fourier_tail = f.total.tail_estimate;
  return c;
}

Table cmd_compare(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s) {
  const Comparison c = compare(cfg, model, chi, s);
  Table t;
  t.columns = {"part", "row", "col", "direct", "fourier", "value"};
  for (Eigen::Index i = 0; i < c.direct.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.direct.cols(); ++j) {
      t.rows.push_back({std::string("entry"), static_cast<long long>(i), static_cast<long long>(j), c.direct(i, j),
                        c.fourier(i, j), std::abs(c.direct(i, j) - c.fourier(i, j))});
    }
  }
  const Complex zero{0.0, 0.0};
  t.rows.push_back({std::string("relative_defect"), -1LL, -1LL, zero, zero, c.defect});
  t.rows.push_back({std::string("direct_tail"), -1LL, -1LL, zero, zero, c.direct_tail});
  t.rows.push_back({std::string("fourier_tail"), -1LL, -1LL, zero, zero, c.fourier_tail});
  return t;
}

Table cmd_estimate(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi) {
  Table t;
  t.columns = {"cusp", "exponent", "scatter", "intercept", "samples"};
  const Point z = to_point(cfg.z);
  GrowthFit best;
  bool any = false;
  for (std::size_t c = 0; c < model.cusps().size(); ++c) {
    if (cfg.cusp && *cfg.cusp != static_cast<int>(c)) continue;
    if (fixed_projection(model, chi, static_cast<int>(c)).rank() == 0) continue;
    const GrowthFit f = estimate_c1(model, chi, static_cast<int>(c), z, cfg.eval.c1_fit_radius);
    t.rows.push_back({model.cusps()[c].label, f.fitted_exponent, f.scatter, f.intercept,
                      static_cast<long long>(f.samples)});
    if (!any || f.fitted_exponent > best.fitted_exponent) best = f;
    any = true;
  }
  if (!any) fail(ErrorCode::InsufficientData, "every cusp projection is zero for this twist");
  t.rows.push_back({std::string("max"), best.fitted_exponent, best.scatter, best.intercept,
                    static_cast<long long>(best.samples)});
  return t;
}

// Reduced word of the given length drawn from rng.
Word random_word(const FuchsianModel& model, int length, std::mt19937_64& rng) {
  const int ngen = static_cast<int>(model.generators().size());
  Word w;
  int last = -1;
  long long last_sign = 0;
  std::uniform_int_distribution<int> gen(0, ngen - 1);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int i = 0; i < length; ++i) {
    int g = gen(rng);
    long long e = sign(rng) == 0 ? 1 : -1;
    if (g == last && e == -last_sign) e = -e;
    w.append(g, e);
    last = g;
    last_sign = e;
  }
  return w;
}

Table cmd_verify(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s, bool* passed) {
  Table t;
  t.columns = {"check", "detail", "value", "threshold", "pass"};
  bool all = true;
  auto record = [&](const std::string& check, const std::string& detail, double value, double threshold, bool ok) {
    t.rows.push_back({check, detail, value, threshold, ok});
    all = all && ok;
  };
  const Point z = to_point(cfg.z);
  const int a = cfg.cusp.value_or(0);
  const int b = cfg.cusp_b.value_or(a);

  const NecmReport necm = check_necm(model, chi, 12);
  record("necm", necm.witnesses.empty() ? "length<=12" : format_word(necm.witnesses.front().word, model.generator_names()),
         necm.max_deviation, 1e-9, necm.ok);

  for (std::size_t c = 0; c < model.cusps().size(); ++c) {
    const std::string& label = model.cusps()[c].label;
    const int ci = static_cast<int>(c);
    const WindowReport win = check_hyperbolic_window(model, ci, 500.0);
    record("hyperbolic_window", label, static_cast<double>(win.violations.size()), 0.0, win.violations.empty());
    const DistanceReport dist = check_distance_bound(model, ci, z, 200.0);
    record("distance_bound", label, static_cast<double>(dist.violations), 0.0, dist.violations == 0);
    if (fixed_projection(model, chi, ci).rank() > 0) {
      const NormBoundReport nb = check_norm_bound(model, chi, ci, z, 100.0);
      record("norm_bound", label, static_cast<double>(nb.violations + nb.route_violations), 0.0, nb.ok());
    }
  }

  if (fixed_projection(model, chi, a).rank() == 0) {
    record("automorphy", "zero projection", 0.0, 0.0, true);
  } else {
    std::vector<Word> words{Word::letter(0)};
    if (model.generators().size() > 1) {
      words.push_back(Word::letter(1));
      words.push_back(Word::letter(0) * Word::letter(1));
    }
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < 2; ++i) words.push_back(random_word(model, 6, rng));
    for (const Word& w : words) {
      const AutomorphyResult ar = automorphy_defect(model, chi, w, a, z, s, cfg.eval);
      const double threshold = std::min(1e-5, ar.tail_bound);
      record("automorphy", format_word(w, model.generator_names()), ar.defect, threshold, ar.defect <= threshold);
    }
  }

  const PeriodicityResult per = periodicity_defect(model, chi, a, b, z, s, cfg.eval);
  record("periodicity", model.cusps()[static_cast<std::size_t>(b)].label, per.defect, 1e-7, per.defect <= 1e-7);

  const Comparison cmp = compare(cfg, model, chi, s);
  record("cross_evaluator", "sup-norm relative", cmp.defect, 1e-5, cmp.defect <= 1e-5);

  if (passed) *passed = all;
  return t;
}

Table cmd_scan(const RunConfig& cfg, const FuchsianModel& model, const Twist& chi, Complex s) {
  Table t;
  t.columns = {"index", "z", "s", "row", "col", "value", "tail"};
  const int n = cfg.scan.steps;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    const Complex p = cfg.scan.from + f * (cfg.scan.to - cfg.scan.from);
    const Complex zi = cfg.scan.variable == "z" ? p : cfg.z;
    const Complex si = cfg.scan.variable == "s" ? p : s;
    const OperatorValue v = cfg.cusp ? direct_eval(model, chi, *cfg.cusp, to_point(zi), si, cfg.eval)
                                     : total_eval(model, chi, to_point(zi), si, cfg.eval);
    for (Eigen::Index r = 0; r < v.matrix.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.matrix.cols(); ++c) {
        t.rows.push_back({static_cast<long long>(i), zi, si, static_cast<long long>(r), static_cast<long long>(c),
                          v.matrix(r, c), v.tail_estimate});
      }
    }
  }
  return t;
}

void error_record(std::ostream& err, const std::string& code, const std::string& message, int status) {
  json rec{{"error", code}, {"message", message}, {"exit_code", status}};
  err << rec.dump() << '\n';
}

}  // namespace

std::string to_csv(const Table& table) {
  std::vector<bool> complex_col(table.columns.size(), false);
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size() && j < complex_col.size(); ++j) {
      if (std::holds_alternative<Complex>(row[j])) complex_col[j] = true;
    }
  }
  std::ostringstream os;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) os << ',';
    if (complex_col[j]) {
      os << csv_escape(table.columns[j] + "_re") << ',' << csv_escape(table.columns[j] + "_im");
    } else {
      os << csv_escape(table.columns[j]);
    }
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::string>) os << csv_escape(v);
            else if constexpr (std::is_same_v<V, long long>) os << v;
            else if constexpr (std::is_same_v<V, double>) os << format_real(v);
            else if constexpr (std::is_same_v<V, Complex>) os << format_real(v.real()) << ',' << format_real(v.imag());
            else os << (v ? "true" : "false");
          },
          row[j]);
    }
    os << '\n';
  }
  return os.str();
}

std::string to_json(const Table& table) {
  json arr = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t j = 0; j < row.size() && j < table.columns.size(); ++j) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Complex>) obj[table.columns[j]] = {{"re", v.real()}, {"im", v.imag()}};
            else obj[table.columns[j]] = v;
          },
          row[j]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move output into place at " + path.string());
  }
}

void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, std::string("config file: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::ConfigError, "config key '" + section + "' outside a section");
    const auto& keys = allowed_keys(section);
    for (const auto& [key, value] : body) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(ErrorCode::ConfigError, "unknown config key " + section + "." + key);
      }
      set_key(cfg, section, key, value.data());
    }
  }
}

Twist load_twist(const FuchsianModel& model, const std::string& spec) {
  const bool is_file = spec.ends_with(".json") || spec.find('/') != std::string::npos;
  if (!is_file) {
    try {
      return builtin_twist(model, spec);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ConfigError, e.what());
      throw;
    }
  }
  std::ifstream is(spec);
  if (!is) fail(ErrorCode::IoError, "cannot read twist file " + spec);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, "twist file " + spec + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    fail(ErrorCode::ConfigError, "twist file needs an object with an \"images\" array");
  }
  std::vector<CMatrix> images;
  for (const auto& m : doc["images"]) images.push_back(json_matrix(m));
  CMatrix inner;
  if (doc.contains("inner_product")) inner = json_matrix(doc["inner_product"]);
  const std::string label = doc.contains("label") && doc["label"].is_string() ? doc["label"].get<std::string>() : spec;
  try {
    return make_twist(model, label, std::move(images), inner);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::IllConditioned) {
      fail(ErrorCode::ConfigError, std::string("twist file ") + spec + ": " + e.what());
    }
    throw;
  }
}

Complex default_s(const Twist& chi) { return chi.dim() == 1 ? Complex(2.5, 0.0) : Complex(4.0, 0.0); }

Table run_command(const RunConfig& cfg, bool* passed) {
  const FuchsianModel model = parse_group(cfg.group);
  validate(cfg, model);
  const Twist chi = load_twist(model, cfg.twist);
  const Complex s = cfg.s.value_or(default_s(chi));
  if (passed) *passed = true;
  if (cfg.command == "eval") return cmd_eval(cfg, model, chi, s);
  if (cfg.command == "expand") return cmd_expand(cfg, model, chi, s);
  if (cfg.command == "compare") return cmd_compare(cfg, model, chi, s);
  if (cfg.command == "estimate-c1") return cmd_estimate(cfg, model, chi);
  if (cfg.command == "verify") return cmd_verify(cfg, model, chi, s, passed);
  if (cfg.command == "scan") return cmd_scan(cfg, model, chi, s);
  fail(ErrorCode::ConfigError, "unknown command '" + cfg.command + "'");
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Twisted non-holomorphic Eisenstein series: evaluation and verification"};
  app.require_subcommand(1);

  struct Flags {
    std::string group, twist, z, s, out, config, scan_var, scan_from, scan_to;
    double radius = 0, cmax = 0, c1_radius = 0;
    long long mmax = 0;
    int tmax = 0, threads = 0, cusp = 0, cusp_b = 0, steps = 0;
    unsigned long long seed = 0;
    bool json = false;
  } f;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"eval", "Direct coset sum (all cusps unless --cusp)"},
      {"expand", "Fourier-type expansion with its parts"},
      {"compare", "Direct sum against the expansion"},
      {"estimate-c1", "Fit the growth exponent per cusp"},
      {"verify", "Run the bound, automorphy and periodicity checks"},
      {"scan", "Direct sums along a segment in z or s"},
  };
  std::vector<CLI::App*> apps;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    apps.push_back(sub);
  }
  // Options are shared by every subcommand; track them by name across subcommands.
  std::multimap<std::string, CLI::Option*> all;
  for (CLI::App* sub : apps) {
    all.emplace("group", sub->add_option("--group", f.group, "modular | gamma2 | gamma0:N"));
    all.emplace("twist", sub->add_option("--twist", f.twist, "trivial | sym:m | phase:mu | path to JSON"));
    all.emplace("z", sub->add_option("--z", f.z, "re,im"));
    all.emplace("s", sub->add_option("--s", f.s, "re,im"));
    all.emplace("radius", sub->add_option("--radius", f.radius, "coset radius"));
    all.emplace("tmax", sub->add_option("--tmax", f.tmax, "Bessel mode cutoff"));
    all.emplace("cmax", sub->add_option("--cmax", f.cmax, "double coset cutoff"));
    all.emplace("mmax", sub->add_option("--mmax", f.mmax, "translate range"));
    all.emplace("c1-radius", sub->add_option("--c1-radius", f.c1_radius, "coset radius for exponent fits"));
    all.emplace("cusp", sub->add_option("--cusp", f.cusp, "cusp index"));
    all.emplace("cusp-b", sub->add_option("--cusp-b", f.cusp_b, "second cusp index"));
    all.emplace("out", sub->add_option("--out", f.out, "output path (stdout if absent)"));
    all.emplace("json", sub->add_flag("--json", f.json, "JSON instead of CSV"));
    all.emplace("threads", sub->add_option("--threads", f.threads, "worker threads (0 = all cores)"));
    all.emplace("seed", sub->add_option("--seed", f.seed, "seed for sampled checks"));
    all.emplace("config", sub->add_option("--config", f.config, "INI config file"));
    if (sub->get_name() == "scan") {
      all.emplace("scan", sub->add_option("--scan", f.scan_var, "z | s"));
      all.emplace("from", sub->add_option("--from", f.scan_from, "re,im"));
      all.emplace("to", sub->add_option("--to", f.scan_to, "re,im"));
      all.emplace("steps", sub->add_option("--steps", f.steps, "number of points"));
    }
  }
  auto given = [&](const std::string& name) {
    auto [lo, hi] = all.equal_range(name);
    for (auto it = lo; it != hi; ++it) {
      if (it->second->count() > 0) return true;
    }
    return false;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int status = exit_code(ErrorCode::ConfigError);
    error_record(err, std::string(to_string(ErrorCode::ConfigError)), e.what(), status);
    return status;
  }

  RunConfig cfg;
  for (CLI::App* sub : apps) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }
  try {
    if (const char* env = std::getenv("EISTWIST_THREADS"); env && *env) {
      cfg.eval.threads = parse_number<int>("EISTWIST_THREADS", env);
    }
    if (given("config")) apply_config_file(f.config, cfg);
    if (given("group")) cfg.group = f.group;
    if (given("twist")) cfg.twist = f.twist;
    if (given("z")) cfg.z = parse_complex(f.z);
    if (given("s")) cfg.s = parse_complex(f.s);
    if (given("radius")) cfg.eval.radius = f.radius;
    if (given("tmax")) cfg.eval.t_max = f.tmax;
    if (given("cmax")) cfg.eval.c_max = f.cmax;
    if (given("mmax")) cfg.eval.m_max = f.mmax;
    if (given("c1-radius")) cfg.eval.c1_fit_radius = f.c1_radius;
    if (given("cusp")) cfg.cusp = f.cusp;
    if (given("cusp-b")) cfg.cusp_b = f.cusp_b;
    if (given("out")) cfg.out = std::filesystem::path(f.out);
    if (given("json")) cfg.json = f.json;
    if (given("threads")) cfg.eval.threads = f.threads;
    if (given("seed")) cfg.seed = f.seed;
    if (given("scan")) cfg.scan.variable = f.scan_var;
    if (given("from")) cfg.scan.from = parse_complex(f.scan_from);
    if (given("to")) cfg.scan.to = parse_complex(f.scan_to);
    if (given("steps")) cfg.scan.steps = f.steps;

    bool passed = true;
    const Table table = run_command(cfg, &passed);
    const std::string text = cfg.json ? to_json(table) : to_csv(table);
    if (cfg.out) {
      write_atomic(*cfg.out, text);
    } else {
      out << text;
    }
    if (!passed) {
      error_record(err, "VerificationFailed", "one or more checks failed", 1);
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    const int status = exit_code(e.code());
    error_record(err, std::string(to_string(e.code())), e.what(), status);
    return status;
  } catch (const std::exception& e) {
    error_record(err, "Internal", e.what(), 1);
    return 1;
  }
}

}  // namespace eistwist::cli
