#pragma once

#include <string>
#include <vector>

#include "eistwist/fuchsian.hpp"
#include "eistwist/repjordan.hpp"

namespace eistwist {

struct BoundConstants {
  double c_inf = 1.0;
  int tau = 10;
  int window = 10;
  double c6 = 0.5;
  double c7 = 0.0;
  double c5 = 0.0;
};

// tau = 2 floor(4 / c(inf)) + 2, c6 = c6_fraction * Im z, c7 = 10 sqrt(tau^2 / c6^2 + 1), c5 = 2 log c7.
BoundConstants bound_constants(const FuchsianModel& model, int cusp, Point z, double c6_fraction = 0.5);

struct WindowViolation {
  double c = 0.0;
  double d = 0.0;
  long long k_start = 0;
};

struct WindowReport {
  int window = 0;
  std::size_t classes = 0;
  // Longest run of consecutive non-hyperbolic p_k g over all classes.
  long long longest_run = 0;
  // Largest |k| with p_k g not hyperbolic, for classes with c = c(inf).
  long long max_nonhyperbolic_k = 0;
  std::vector<WindowViolation> violations;
};

// Every tau consecutive p_k g, p_k = g_c^k, contain a hyperbolic element; classes are R(c, c) with c <= c_bound.
WindowReport check_hyperbolic_window(const FuchsianModel& model, int cusp, double c_bound);

// One coset in the frame of the cusp: g^ = sigma^{-1} g sigma acting on z' = sigma^{-1} z.
struct CosetGeometry {
  IntMatrix element;
  double c = 0.0;
  double d = 0.0;
  // Im(g^.z') / Im z'.
  double im_ratio = 1.0;
  // inf over hyperbolic p_k g of d(p_k g^.z', z'), and the shift k attaining it.
  double inf_distance = 0.0;
  long long best_k = 0;
  bool has_hyperbolic = false;
  bool exceptional = false;
};

// Cosets with 1 <= c <= c_bound and |c x' + d| <= c_bound, plus the identity coset when present.
std::vector<CosetGeometry> coset_geometry(const FuchsianModel& model, int cusp, Point z, double c_bound,
                                          const BoundConstants& bc);

struct DistanceReport {
  BoundConstants constants;
  std::size_t checked = 0;
  std::vector<CosetGeometry> exceptional;
  std::size_t violations = 0;
  double min_margin = 0.0;
  double mean_margin = 0.0;
  double max_margin = 0.0;
};

// inf_{h in Hyp([g])} d(h.z, z) <= c5 + |log(Im g.z / Im z)| outside the exceptional set.
DistanceReport check_distance_bound(const FuchsianModel& model, int cusp, Point z, double c_bound);

struct NormBoundReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double slack = 1.05;
  std::size_t fitted = 0;
  std::size_t checked = 0;
  std::size_t exceptional = 0;
  std::size_t violations = 0;
  std::size_t route_violations = 0;
  double worst_ratio = 0.0;
  double worst_route_ratio = 0.0;
  bool ok() const { return violations == 0 && route_violations == 0; }
};

// Fits (c1, c2) and (c3, c4) on the cosets inside half the radius and checks
// ||chi(g^{-1}) P|| <= c2 exp(c1 |log(Im g.z / Im z)|) and <= c3 exp(c4 inf d) with slack on all of them.
NormBoundReport check_norm_bound(const FuchsianModel& model, const Twist& chi, int cusp, Point z, double c_bound,
                                 double slack = 1.05);

}  // namespace eistwist
