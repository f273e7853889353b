// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eistwist/eisenstein.hpp"
#include "eistwist/error.hpp"
#include "eistwist/specfun.hpp"
#include "eistwist/verify.hpp"
#include "eistwist_cli/cli.hpp"
#include "oracles.hpp"

using namespace eistwist;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_rel(const CMatrix& got, const CMatrix& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

const Point kZ = make_point(0.28, 0.9);

Outcome constant_anchor() {
  const auto model = builtin_group("modular");
  EvalConfig cfg;
  cfg.c_max = 1e4;
  const double ratio = oracle::zeta3_over_zeta4();
  const double y = 1.3;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<PhiTerm> phis;
  const auto ct = constant_term(model, trivial_twist(model), 0, 0, 2.0, 0.1, y, cfg, &phis);
  const double t = seconds_since(t0);
  const double want = y * y + 0.5 * pi * ratio / y;
  const double err = std::abs(ct.matrix(0, 0) - want) / want;
  const double coef_err =
      phis.size() == 1 ? std::abs(phis[0].coefficient(0, 0) - 0.5 * pi * ratio) / (0.5 * pi * ratio) : 1.0;
  return {err <= 1e-6 && coef_err <= 1e-6 && t <= 10.0,
          fmt("rel err %.2e at y = 1.3, y^-1 coefficient rel err %.2e (tol 1e-06), %.1f s (limit 10 s)", err, coef_err,
              t)};
}

Outcome cross_evaluator(const Twist& chi, const FuchsianModel& model, Complex s, double tol, double limit) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto direct = direct_eval(model, chi, 0, kZ, s);
  const auto fourier = fourier_eval(model, chi, 0, 0, kZ, s);
  const double t = seconds_since(t0);
  const double d = sup_rel(fourier.total.matrix, direct.matrix);
  return {d <= tol && t <= limit,
          fmt("sup rel defect %.2e (tol %.0e), %.1f s (limit %.0f s)", d, tol, t, limit)};
}

Outcome poisson_bridge() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> cdist(1, 40);
  std::uniform_real_distribution<double> xdist(-0.5, 0.5), ydist(0.3, 2.0), sdist(4.0, 6.0), tdist(-3.0, 3.0);
  const auto model = builtin_group("modular");
  const JordanData sym = jordan(cusp_monodromy_inverse(model, sym_power_twist(model, 1), 0));
  double worst = 0.0;
  int checks = 0;
  for (int i = 0; i < 20; ++i) {
    const int c = cdist(rng);
    int d = std::uniform_int_distribution<int>(0, c - 1)(rng);
    while (std::gcd(c, d) != 1) d = (d + 1) % c;
    const Point z = make_point(xdist(rng), ydist(rng));
    const Complex s(sdist(rng), tdist(rng));
    // Trivial twist: one block of size 1; Sym^2: one unipotent block of size 3.
    std::vector<std::pair<int, double>> indices{{0, 0.0}};
    for (const auto& b : sym.blocks) {
      for (int k = 0; k < b.size; ++k) indices.emplace_back(k, b.mu);
    }
    for (const auto& [k, mu] : indices) {
      const NuValue direct = nu_direct(c, d, z, s, k, e2pi(mu), 200000);
      const Complex bessel = nu_bessel(c, d, z, s, k, mu, 30);
      worst = std::max(worst, std::abs(direct.value - bessel) / (1.0 + std::abs(bessel)));
      ++checks;
    }
  }
  return {worst <= 1e-8, fmt("%d checks, worst |diff|/(1+|nu|) %.2e (tol 1e-08)", checks, worst)};
}

Outcome phi_grid() {
  double worst = 0.0;
  bool odd_zero = true;
  int checks = 0;
  for (int r = 0; r <= 4; ++r) {
    for (double a : {0.0, 1.0, -1.0, 0.5, -0.5, 2.3}) {
      for (double y : {0.5, 1.0, 2.0}) {
        for (Complex s : {Complex(3.0), Complex(4.0), Complex(3.5, 2.0)}) {
          const PhiArgs args{r, a, y, s};
          const Complex closed = phi(args);
          const Complex quad = phi_quad(args, 1e-13).value;
          if (a == 0.0 && r % 2 == 1) odd_zero = odd_zero && closed == Complex(0.0) && quad == Complex(0.0);
          worst = std::max(worst, std::abs(closed - quad) / std::max(std::abs(closed), 1e-300));
          ++checks;
        }
      }
    }
  }
  return {worst <= 1e-8 && odd_zero,
          fmt("%d grid points, worst rel diff %.2e (tol 1e-08), odd r at a = 0 exactly zero: %s", checks, worst,
              odd_zero ? "yes" : "no")};
}

Outcome exponent_fits() {
  const auto model = builtin_group("modular");
  const Point z = make_point(0.3, 1.2);
  struct Case {
    int m;
    double lo, hi;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Case& c : {Case{0, -0.05, 0.05}, Case{1, 0.9, 1.1}, Case{2, 1.8, 2.2}}) {
    const Twist chi = sym_power_twist(model, c.m);
    const GrowthFit fit = estimate_c1(model, chi, 0, z, 130.0);
    const NormBoundReport nb = check_norm_bound(model, chi, 0, z, 100.0, 1.05);
    const bool pass = fit.fitted_exponent >= c.lo && fit.fitted_exponent <= c.hi && fit.samples >= 10000 && nb.ok();
    ok = ok && pass;
    os << (c.m == 0 ? "trivial" : c.m == 1 ? "Sym2" : "Sym4")
       << fmt(" c1=%.4f (%zu cosets), norm bound %zu/%zu ok; ", fit.fitted_exponent, fit.samples,
              nb.checked - nb.violations - nb.route_violations, nb.checked);
  }
  return {ok, os.str()};
}

Outcome hyperbolic_window() {
  const WindowReport r = check_hyperbolic_window(builtin_group("modular"), 0, 500.0);
  return {r.violations.empty() && r.window == 10,
          fmt("%zu classes, window %d, longest non-hyperbolic run %lld, violations %zu", r.classes, r.window,
              r.longest_run, r.violations.size())};
}

Outcome distance_bound() {
  const auto model = builtin_group("modular");
  std::size_t violations = 0, checked = 0, exceptional = 0;
  for (const Point z : {make_point(0, 1), make_point(0, 2), make_point(0.3, 1.2)}) {
    const DistanceReport r = check_distance_bound(model, 0, z, 200.0);
    violations += r.violations;
    checked += r.checked;
    exceptional += r.exceptional.size();
  }
  return {violations == 0, fmt("%zu cosets checked, %zu exceptional, violations %zu", checked, exceptional, violations)};
}

Outcome automorphy() {
  const auto model = builtin_group("modular");
  std::vector<Word> words{Word::letter(1), Word::letter(0), Word::letter(1) * Word::letter(0)};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> gen(0, 1), sign(0, 1);
  for (int i = 0; i < 2; ++i) {
    Word w;
    for (int l = 0; l < 6; ++l) w.append(gen(rng), sign(rng) ? 1 : -1);
    words.push_back(w);
  }
  const Point z = make_point(0.3, 1.2);
  bool ok = true;
  double worst = 0.0, worst_ratio = 0.0;
  int checks = 0;
  for (const auto& [chi, s] : {std::pair{trivial_twist(model), Complex(2.5)}, std::pair{sym_power_twist(model, 1), Complex(4.0)}}) {
    for (const Word& w : words) {
      const AutomorphyResult r = automorphy_defect(model, chi, w, 0, z, s);
      ok = ok && r.defect <= r.tail_bound && r.defect <= 1e-5;
      worst = std::max(worst, r.defect);
      worst_ratio = std::max(worst_ratio, r.defect / r.tail_bound);
      ++checks;
    }
  }
  return {ok, fmt("%d (twist, word) pairs, worst defect %.2e (tol 1e-05), worst defect / (10 x tails) %.2f", checks,
                  worst, worst_ratio)};
}

Outcome periodization() {
  const auto modular = builtin_group("modular");
  const PeriodicityResult sym = periodicity_defect(modular, sym_power_twist(modular, 1), 0, 0, kZ, 4.0);
  const auto g2 = builtin_group("gamma2");
  const Twist phase = phase_twist(g2, 0.3);
  EvalConfig cfg;
  cfg.c1_hat = 0.0;
  double worst_f = 0.0, min_plain = std::numeric_limits<double>::infinity();
  for (int b = 0; b < 3; ++b) {
    if (std::abs(cusp_monodromy(g2, phase, b)(0, 0) - 1.0) < 1e-12) continue;
    const PeriodicityResult r = periodicity_defect(g2, phase, 0, b, kZ, 2.5, cfg);
    worst_f = std::max(worst_f, r.defect);
    min_plain = std::min(min_plain, r.plain_defect);
  }
  const bool ok = sym.defect <= 1e-7 && worst_f <= 1e-9 && std::isfinite(min_plain) && min_plain > 1e-3;
  return {ok, fmt("Sym2 F defect %.2e (tol 1e-07); e(0.3) twist: F defect %.2e (tol 1e-09), E defect %.3f", sym.defect,
                  worst_f, min_plain)};
}

Outcome necm() {
  const auto model = builtin_group("modular");
  const NecmReport good = check_necm(model, sym_power_twist(model, 1), 12, 1e-9);
  TwistOptions lax;
  lax.check_relations = false;
  const Twist broken =
      make_twist(model, "T->2", {CMatrix::Identity(1, 1), CMatrix::Constant(1, 1, 2.0)}, CMatrix(), lax);
  const NecmReport bad = check_necm(model, broken, 12, 1e-9);
  const bool witness_t = !bad.witnesses.empty() && bad.witnesses.front().word == Word::letter(1);
  return {good.ok && !bad.ok && witness_t,
          fmt("Sym2: %zu parabolic words, max deviation %.1e; T->2 rejected: %s, first witness %s", good.parabolic_count,
              good.max_deviation, bad.ok ? "no" : "yes",
              bad.witnesses.empty() ? "none" : format_word(bad.witnesses.front().word, model.generator_names()).c_str())};
}

Outcome determinism() {
  auto run = [](const char* threads) {
    const char* argv[] = {"eistwist", "compare", "--threads", threads};
    std::ostringstream out, err;
    const int status = cli::main(4, argv, out, err);
    return std::pair{status, out.str()};
  };
  const auto a = run("1"), b = run("1"), c = run("8");
  const bool ok = a.first == 0 && b.first == 0 && c.first == 0 && a.second == b.second && a.second == c.second;
  return {ok, fmt("repeat identical: %s, 1 vs 8 threads identical: %s (%zu bytes)", a.second == b.second ? "yes" : "no",
                  a.second == c.second ? "yes" : "no", a.second.size())};
}

}  // namespace

int main() {
  const auto modular = builtin_group("modular");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"constant-term anchor", constant_anchor},
      {"cross-evaluator, trivial twist",
       [&] { return cross_evaluator(trivial_twist(modular), modular, 2.5, 1e-6, 30.0); }},
      {"cross-evaluator, Sym2 twist",
       [&] { return cross_evaluator(sym_power_twist(modular, 1), modular, 4.0, 1e-5, 60.0); }},
      {"Poisson bridge", poisson_bridge},
      {"phi closed form vs quadrature", phi_grid},
      {"growth exponent fits and norm bound", exponent_fits},
      {"hyperbolic window", hyperbolic_window},
      {"distance bound", distance_bound},
      {"automorphy", automorphy},
      {"periodization", periodization},
      {"NECM checker", necm},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
