#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "eistwist/eisenstein.hpp"
#include "eistwist/error.hpp"
#include "eistwist/specfun.hpp"
#include "oracles.hpp"

using namespace eistwist;
using std::numbers::pi;

namespace {

EvalConfig small_config(double size = 300.0) {
  EvalConfig cfg;
  cfg.radius = size;
  cfg.c_max = size;
  cfg.m_max = 2000;
  return cfg;
}

double rel(const CMatrix& got, const CMatrix& want) { return (got - want).norm() / std::max(1e-300, want.norm()); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(DirectEval, IdentityCosetOnly) {
  const auto model = builtin_group("modular");
  EvalConfig cfg;
  cfg.radius = 0.5;
  const Point z = make_point(0.28, 0.9);
  const auto v = direct_eval(model, trivial_twist(model), 0, z, 2.5, cfg);
  EXPECT_EQ(v.terms, 1u);
  EXPECT_LT(std::abs(v.matrix(0, 0) - std::pow(0.9, 2.5)), 1e-15);
}

TEST(DirectEval, MatchesCoprimePairSum) {
  const auto model = builtin_group("modular");
  for (const auto& [x, y] : {std::pair{0.0, 1.0}, std::pair{0.28, 0.9}, std::pair{-0.4, 1.7}}) {
    for (Complex s : {Complex(2.0), Complex(2.5, 3.0)}) {
      EvalConfig cfg = small_config(1000.0);
      const auto v = direct_eval(model, trivial_twist(model), 0, make_point(x, y), s, cfg);
      const Complex want = oracle::coprime_pair_sum(x, y, s, 1000.0);
      EXPECT_LT(std::abs(v.matrix(0, 0) - want), 1e-12 * std::abs(want)) << x << "," << y << " s=" << s;
      EXPECT_EQ(v.terms, oracle::coprime_pair_count(x, y, 1000.0));
    }
  }
}

TEST(DirectEval, SymmetriesOfTheTrivialSeries) {
  const auto model = builtin_group("modular");
  const Twist chi = trivial_twist(model);
  const EvalConfig cfg = small_config(600.0);
  const Complex s = 3.0;
  const auto base = direct_eval(model, chi, 0, make_point(0.31, 1.1), s, cfg);
  const auto shifted = direct_eval(model, chi, 0, make_point(1.31, 1.1), s, cfg);
  const auto mirrored = direct_eval(model, chi, 0, make_point(-0.31, 1.1), s, cfg);
  EXPECT_LT(rel(shifted.matrix, base.matrix), 1e-9);
  EXPECT_LT(rel(mirrored.matrix, base.matrix.conjugate()), 1e-9);
  EXPECT_LT(base.tail_estimate, 1e-6);
  // The series at s and conj(s) are conjugate for a real twist.
  const auto a = direct_eval(model, chi, 0, make_point(0.31, 1.1), Complex(3.0, 2.0), cfg);
  const auto b = direct_eval(model, chi, 0, make_point(0.31, 1.1), Complex(3.0, -2.0), cfg);
  EXPECT_LT(rel(a.matrix, b.matrix.conjugate()), 1e-12);
}

TEST(DirectEval, TailShrinksWithRadius) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, 1);
  double last = std::numeric_limits<double>::infinity();
  for (double r : {100.0, 200.0, 400.0}) {
    EvalConfig cfg = small_config(r);
    cfg.c1_hat = 1.0;
    const auto v = direct_eval(model, chi, 0, make_point(0.3, 1.2), 4.0, cfg);
    EXPECT_LT(v.tail_estimate, last);
    last = v.tail_estimate;
  }
}

TEST(TotalEval, SumsCusps) {
  const auto model = parse_group("gamma0:2");
  const Twist chi = trivial_twist(model);
  const EvalConfig cfg = small_config(100.0);
  const Point z = make_point(0.2, 0.8);
  const auto total = total_eval(model, chi, z, 3.0, cfg);
  CMatrix want = CMatrix::Zero(1, 1);
  for (int c = 0; c < 2; ++c) want += direct_eval(model, chi, c, z, 3.0, cfg).matrix;
  EXPECT_LT(rel(total.matrix, want), 1e-15);

  const auto bare = builtin_group("modular").without_cusps();
  const auto zero = total_eval(bare, trivial_twist(bare), z, 3.0, cfg);
  EXPECT_EQ(zero.matrix.rows(), 1);
  EXPECT_EQ(zero.matrix.norm(), 0.0);
  EXPECT_EQ(zero.terms, 0u);
}

TEST(DirectEval, Abscissa) {
  const auto model = builtin_group("modular");
  const Twist chi = trivial_twist(model);
  EvalConfig cfg = small_config(50.0);
  EXPECT_EQ(code_of([&] { direct_eval(model, chi, 0, make_point(0, 1), 0.7, cfg); }),
            ErrorCode::ConvergenceViolated);
  EXPECT_TRUE(direct_eval(model, chi, 0, make_point(0, 1), 0.9, cfg).near_abscissa);
  EXPECT_FALSE(direct_eval(model, chi, 0, make_point(0, 1), 1.5, cfg).near_abscissa);
  cfg.c1_hat = 1.0;
  const Twist sym = sym_power_twist(model, 1);
  EXPECT_EQ(code_of([&] { direct_eval(model, sym, 0, make_point(0, 1), 1.5, cfg); }),
            ErrorCode::ConvergenceViolated);
  EXPECT_TRUE(direct_eval(model, sym, 0, make_point(0, 1), 1.9, cfg).near_abscissa);
}

TEST(Nu, FlatPartDominatesHighUp) {
  // For large y only the l = 0 term survives: c^(-2s) y^(1-s) sqrt(pi) Gamma(s-1/2) / Gamma(s).
  const Complex s(3.0, 0.5);
  const double y = 8.0;
  for (const auto& [c, d] : {std::pair{1.0, 0.0}, std::pair{3.0, 2.0}, std::pair{7.0, 3.0}}) {
    const NuValue v = nu_direct(c, d, make_point(0.2, y), s, 0, 1.0, 100000);
    const Complex want = std::exp(-2.0 * s * std::log(c)) * std::exp((1.0 - s) * std::log(y)) * std::sqrt(pi) *
                         gamma(s - 0.5) / gamma(s);
    EXPECT_LT(std::abs(v.value - want), 1e-12 * std::abs(want)) << c;
  }
}

TEST(Nu, DirectAgreesWithBessel) {
  const Complex s(4.0, 1.0);
  for (int k = 0; k <= 2; ++k) {
    for (double mu : {0.0, 0.25, -1.0 / 3.0}) {
      for (double y : {0.6, 1.3}) {
        const NuValue direct = nu_direct(2.0, 1.0, make_point(0.17, y), s, k, e2pi(mu), 20000);
        const Complex bessel = nu_bessel(2.0, 1.0, make_point(0.17, y), s, k, mu, 30);
        EXPECT_LT(std::abs(direct.value - bessel), 1e-10 * (1 + std::abs(bessel)))
            << "k=" << k << " mu=" << mu << " y=" << y;
      }
    }
  }
  EXPECT_EQ(code_of([] { nu_direct(1.0, 0.0, make_point(0, 1), 1.2, 2, 1.0, 100); }), ErrorCode::ConvergenceViolated);
}

TEST(ConstantTerm, TrivialModularMatchesTotientSeries) {
  const auto model = builtin_group("modular");
  EvalConfig cfg = small_config(500.0);
  for (Complex s : {Complex(2.0), Complex(2.5, 1.5)}) {
    const double y = 1.3;
    std::vector<PhiTerm> phis;
    const auto ct = constant_term(model, trivial_twist(model), 0, 0, s, 0.1, y, cfg, &phis);
    const Complex phi1 = std::sqrt(pi) * gamma(s - 0.5) / gamma(s) * oracle::totient_series(500, s);
    const Complex want = std::exp(s * std::log(y)) + phi1 * std::exp((1.0 - s) * std::log(y));
    EXPECT_LT(std::abs(ct.matrix(0, 0) - want), 1e-12 * std::abs(want)) << s;
    ASSERT_EQ(phis.size(), 1u);
    EXPECT_EQ(phis[0].q, 1);
    EXPECT_LT(std::abs(phis[0].coefficient(0, 0) - phi1), 1e-12 * std::abs(phi1));
  }
}

TEST(ConstantTerm, SymSquaredPowers) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, 1);
  EvalConfig cfg = small_config(200.0);
  cfg.c1_hat = 1.0;
  const Complex s = 4.0;
  const double y = 1.1, x = 0.2;
  std::vector<PhiTerm> phis;
  const auto ct = constant_term(model, chi, 0, 0, s, x, y, cfg, &phis);
  std::map<int, CMatrix> by_q;
  for (const auto& p : phis) by_q[p.q] = p.coefficient;
  ASSERT_EQ(by_q.size(), 2u);
  EXPECT_TRUE(by_q.count(1) && by_q.count(3));
  const Projection proj = fixed_projection(model, chi, 0);
  CMatrix rebuilt = std::pow(y, 4.0) * proj.matrix;
  for (const auto& [q, m] : by_q) rebuilt += std::pow(y, q - 4.0) * m;
  EXPECT_LT(rel(ct.matrix, rebuilt), 1e-13);
}

TEST(ConstantTerm, OffDiagonalHasNoPowerYs) {
  const auto model = parse_group("gamma0:2");
  const Twist chi = trivial_twist(model);
  EvalConfig cfg = small_config(200.0);
  const Complex s = 3.0;
  std::vector<PhiTerm> p1, p2;
  const auto c1 = constant_term(model, chi, 0, 1, s, 0.0, 1.0, cfg, &p1);
  const auto c2 = constant_term(model, chi, 0, 1, s, 0.0, 2.0, cfg, &p2);
  ASSERT_EQ(p1.size(), 1u);
  // Only the y^(1-s) term is present, so the ratio is exactly 2^(1-s).
  EXPECT_LT(std::abs(c2.matrix(0, 0) / c1.matrix(0, 0) - std::pow(2.0, -2.0)), 1e-14);
}

TEST(FourierEval, AgreesWithDirectSum) {
  const auto model = builtin_group("modular");
  EvalConfig cfg = small_config(600.0);
  const Point z = make_point(0.28, 0.9);
  const auto direct = direct_eval(model, trivial_twist(model), 0, z, 3.0, cfg);
  const auto fourier = fourier_eval(model, trivial_twist(model), 0, 0, z, 3.0, cfg);
  EXPECT_LT(rel(fourier.total.matrix, direct.matrix), 1e-9);
  EXPECT_GT(fourier.double_cosets, 0u);
  EXPECT_LT(fourier.c_tail, 1e-6);
}

TEST(FourierEval, CrossCuspGamma0) {
  const auto model = parse_group("gamma0:2");
  const Twist chi = trivial_twist(model);
  EvalConfig cfg = small_config(400.0);
  const Point z = make_point(0.15, 1.1);
  const Point wz = apply(model.cusps()[1].sigma, z);
  const auto direct = direct_eval(model, chi, 0, wz, 3.0, cfg);
  const auto fourier = fourier_eval(model, chi, 0, 1, z, 3.0, cfg);
  EXPECT_LT(rel(fourier.total.matrix, direct.matrix), 1e-7);
}

TEST(FourierEval, ModesFromPsiTerms) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, 1);
  EvalConfig cfg = small_config(150.0);
  cfg.c1_hat = 1.0;
  cfg.t_max = 4;
  const Point z = make_point(0.2, 1.0);
  const Complex s = 4.0;
  const auto rep = fourier_eval(model, chi, 0, 0, z, s, cfg);
  CMatrix sum = rep.constant_term.matrix;
  for (const auto& m : rep.mode_terms) sum += m.contribution;
  EXPECT_LT(rel(rep.total.matrix, sum), 1e-14);
  // Each mode is rebuilt from its psi coefficients and the Bessel kernel.
  for (const auto& m : rep.mode_terms) {
    CMatrix rebuilt = CMatrix::Zero(3, 3);
    for (const auto& p : rep.psi_terms) {
      if (std::abs(p.t - m.t) > 1e-12) continue;
      rebuilt += std::sqrt(z.y) * kernel_deriv(p.n, s, -p.t, z.y) * p.coefficient;
    }
    EXPECT_LT((rebuilt - m.contribution).norm(), 1e-12 * (1 + m.contribution.norm())) << m.t;
  }
  for (std::size_t i = 1; i < rep.mode_terms.size(); ++i) {
    EXPECT_LE(std::abs(rep.mode_terms[i - 1].t), std::abs(rep.mode_terms[i].t) + 1e-12);
  }
}

TEST(GrowthExponent, TrivialAndSym) {
  const auto model = builtin_group("modular");
  const Point z = make_point(0.3, 1.2);
  EXPECT_NEAR(estimate_c1(model, trivial_twist(model), 0, z, 80.0).fitted_exponent, 0.0, 1e-9);
  const auto fit = estimate_c1(model, sym_power_twist(model, 1), 0, z, 80.0);
  EXPECT_NEAR(fit.fitted_exponent, 1.0, 0.05);
  EXPECT_GE(fit.samples, 50u);
  EXPECT_EQ(code_of([&] { estimate_c1(model, trivial_twist(model), 0, z, 3.0); }), ErrorCode::InsufficientData);
}

TEST(Automorphy, IdentityWordAndGenerators) {
  const auto model = builtin_group("modular");
  const Twist chi = trivial_twist(model);
  EvalConfig cfg = small_config(400.0);
  const Point z = make_point(0.3, 1.2);
  const auto id = automorphy_defect(model, chi, Word{}, 0, z, 3.0, cfg);
  // The two sides use different coset radii, so only the tail bound applies.
  EXPECT_LT(id.defect, id.tail_bound);
  for (int g = 0; g < 2; ++g) {
    const auto r = automorphy_defect(model, chi, Word::letter(g), 0, z, 3.0, cfg);
    EXPECT_LT(r.defect, r.tail_bound);
    EXPECT_LT(r.defect, 1e-7);
  }
}

TEST(Periodicity, TwistedPhase) {
  const auto model = builtin_group("gamma2");
  const Twist chi = phase_twist(model, 0.3);
  EvalConfig cfg = small_config(200.0);
  cfg.c1_hat = 0.0;
  const Point z = make_point(0.1, 1.0);
  for (int b = 0; b < 3; ++b) {
    const auto r = periodicity_defect(model, chi, 0, b, z, 3.0, cfg);
    EXPECT_LT(r.defect, 1e-10) << b;
  }
}

TEST(Determinism, ThreadCountDoesNotChangeBits) {
  const auto model = builtin_group("modular");
  const Twist chi = sym_power_twist(model, 1);
  EvalConfig one = small_config(200.0);
  one.c1_hat = 1.0;
  EvalConfig many = one;
  many.threads = 4;
  const Point z = make_point(0.28, 0.9);
  EXPECT_EQ(direct_eval(model, chi, 0, z, 4.0, one).matrix, direct_eval(model, chi, 0, z, 4.0, many).matrix);
  EXPECT_EQ(fourier_eval(model, chi, 0, 0, z, 4.0, one).total.matrix,
            fourier_eval(model, chi, 0, 0, z, 4.0, many).total.matrix);
}
