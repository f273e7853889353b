#include <gtest/gtest.h>

#include <cmath>

#include "eistwist/error.hpp"
#include "eistwist/verify.hpp"

using namespace eistwist;

TEST(BoundConstants, Modular) {
  const auto model = builtin_group("modular");
  const BoundConstants bc = bound_constants(model, 0, make_point(0.3, 1.2));
  EXPECT_EQ(bc.c_inf, 1.0);
  EXPECT_EQ(bc.tau, 10);
  EXPECT_DOUBLE_EQ(bc.c6, 0.6);
  EXPECT_DOUBLE_EQ(bc.c7, 10.0 * std::sqrt(100.0 / 0.36 + 1.0));
  EXPECT_DOUBLE_EQ(bc.c5, 2.0 * std::log(bc.c7));
  EXPECT_EQ(bound_constants(builtin_group("gamma2"), 0, make_point(0, 1)).tau, 4);
  EXPECT_EQ(bound_constants(parse_group("gamma0:6"), 0, make_point(0, 1)).tau, 2);
  EXPECT_THROW(bound_constants(model, 0, make_point(0, 1), 1.5), std::exception);
}

TEST(HyperbolicWindow, Modular) {
  const auto r = check_hyperbolic_window(builtin_group("modular"), 0, 150.0);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_GT(r.classes, 5000u);
  EXPECT_LT(r.longest_run, r.window);
  EXPECT_LE(r.max_nonhyperbolic_k, 4);
}

TEST(HyperbolicWindow, SubgroupsAllCusps) {
  for (const char* g : {"gamma2", "gamma0:6", "gamma0:11"}) {
    const auto model = parse_group(g);
    for (std::size_t c = 0; c < model.cusps().size(); ++c) {
      const auto r = check_hyperbolic_window(model, static_cast<int>(c), 60.0);
      EXPECT_TRUE(r.violations.empty()) << g << " cusp " << c;
      EXPECT_GT(r.classes, 0u);
    }
  }
}

TEST(DistanceBound, ExceptionalSetAndMargins) {
  const auto model = builtin_group("modular");
  const auto at_i = check_distance_bound(model, 0, make_point(0, 1), 60.0);
  EXPECT_EQ(at_i.violations, 0u);
  bool identity = false;
  for (const auto& g : at_i.exceptional) identity = identity || g.element == IntMatrix{};
  EXPECT_TRUE(identity);
  EXPECT_GT(at_i.checked, 1000u);
  EXPECT_GE(at_i.min_margin, 0.0);

  const auto a = check_distance_bound(model, 0, make_point(0.3, 1.2), 60.0);
  const auto b = check_distance_bound(model, 0, make_point(1.3, 1.2), 60.0);
  EXPECT_EQ(a.violations, 0u);
  EXPECT_EQ(a.checked, b.checked);
  EXPECT_NEAR(a.min_margin, b.min_margin, 1e-9);
  EXPECT_NEAR(a.mean_margin, b.mean_margin, 1e-9);
}

TEST(DistanceBound, SubgroupCusps) {
  const auto model = parse_group("gamma0:6");
  for (std::size_t c = 0; c < model.cusps().size(); ++c) {
    const auto r = check_distance_bound(model, static_cast<int>(c), make_point(0.2, 1.1), 40.0);
    EXPECT_EQ(r.violations, 0u) << c;
  }
}

TEST(NormBound, TrivialTwistIsFlat) {
  const auto model = builtin_group("modular");
  const auto r = check_norm_bound(model, trivial_twist(model), 0, make_point(0.3, 1.2), 60.0);
  EXPECT_NEAR(r.c1, 0.0, 1e-12);
  EXPECT_NEAR(r.c2, 1.0, 1e-12);
  EXPECT_TRUE(r.ok());
}

TEST(NormBound, SymPowersGrow) {
  const auto model = builtin_group("modular");
  for (int m : {1, 2}) {
    const auto r = check_norm_bound(model, sym_power_twist(model, m), 0, make_point(0.3, 1.2), 60.0);
    EXPECT_NEAR(r.c1, m, 0.1) << m;
    EXPECT_TRUE(r.ok()) << m << " worst " << r.worst_ratio << " route " << r.worst_route_ratio;
    EXPECT_GT(r.exceptional, 0u);
  }
}

TEST(NormBound, UnitaryPhase) {
  const auto g2 = builtin_group("gamma2");
  const auto r = check_norm_bound(g2, phase_twist(g2, 0.3), 0, make_point(0.3, 1.2), 60.0);
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.c1, 0.0, 1e-9);
  EXPECT_NEAR(r.c2, 1.0, 1e-12);
  // T -> e(1/6) fixes nothing at the cusp, so there is nothing to fit.
  const auto modular = builtin_group("modular");
  EXPECT_THROW(check_norm_bound(modular, phase_twist(modular, 1.0 / 6.0), 0, make_point(0.3, 1.2), 60.0), Error);
}
