#include "eistwist/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eistwist/error.hpp"
#include "eistwist/linalg.hpp"

namespace eistwist {

namespace {

IntMatrix stabilizer_power(const CuspData& cd, long long k) {
  const IntMatrix tk{1, k * cd.width, 0, 1};
  return cd.lift * tk * inverse(cd.lift);
}

long long trace(const IntMatrix& g) { return g.a + g.d; }

bool hyperbolic(const IntMatrix& g) { return std::llabs(trace(g)) > 2; }

}  // namespace

BoundConstants bound_constants(const FuchsianModel& model, int cusp, Point z, double c6_fraction) {
  if (!(c6_fraction > 0.0 && c6_fraction < 1.0)) fail(ErrorCode::InvalidArgument, "c6 must lie in (0, Im z)");
  BoundConstants bc;
  bc.c_inf = c_infinity(model, cusp);
  bc.tau = 2 * static_cast<int>(std::floor(4.0 / bc.c_inf + 1e-12)) + 2;
  bc.window = bc.tau;
  const Point zp = apply(invert(model.cusps().at(static_cast<std::size_t>(cusp)).sigma), z);
  bc.c6 = c6_fraction * zp.y;
  bc.c7 = 10.0 * std::sqrt(static_cast<double>(bc.tau) * bc.tau / (bc.c6 * bc.c6) + 1.0);
  bc.c5 = 2.0 * std::log(bc.c7);
  return bc;
}

WindowReport check_hyperbolic_window(const FuchsianModel& model, int cusp, double c_bound) {
  if (!(c_bound >= 1.0)) fail(ErrorCode::InvalidArgument, "window check needs c_bound >= 1");
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  const BoundConstants bc = bound_constants(model, cusp, make_point(0.0, 1.0));
  WindowReport rep;
  rep.window = bc.tau;
  const IntMatrix step = stabilizer_power(cd, 1);
  const IntMatrix step_inv = inverse(step);
  for_each_double_coset(model, cusp, cusp, 1, double_coset_c_bound(model, cusp, cusp, c_bound),
                        [&](const DoubleCosetVisit& v) {
                          ++rep.classes;
                          // tr(p_k g) = tr(g) + k c, so non-hyperbolic k lie within |k| <= (2 + |tr g|)/c.
                          const double t0 = v.omega.trace();
                          const auto reach = static_cast<long long>(std::ceil((2.0 + std::abs(t0)) / v.c)) + rep.window + 1;
                          IntMatrix g = v.element;
                          for (long long k = 0; k < reach; ++k) g = step_inv * g;
                          long long run = 0;
                          for (long long k = -reach; k <= reach; ++k, g = step * g) {
                            if (hyperbolic(g)) {
                              run = 0;
                              continue;
                            }
                            ++run;
                            rep.longest_run = std::max(rep.longest_run, run);
                            if (std::abs(v.c - bc.c_inf) < 1e-9) {
                              rep.max_nonhyperbolic_k = std::max(rep.max_nonhyperbolic_k, std::llabs(k));
                            }
                            if (run == rep.window) rep.violations.push_back({v.c, v.d, k - run + 1});
                          }
                        });
  return rep;
}

std::vector<CosetGeometry> coset_geometry(const FuchsianModel& model, int cusp, Point z, double c_bound,
                                          const BoundConstants& bc) {
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  const Moebius sigma_inv = invert(cd.sigma);
  const Point zp = apply(sigma_inv, z);
  const double radius = c_bound * std::sqrt((1.0 + zp.y * zp.y) * z.y / zp.y) * (1.0 + 1e-9);
  const IntMatrix step = stabilizer_power(cd, 1);
  const IntMatrix step_inv = inverse(step);
  std::vector<CosetGeometry> out;
  for_each_coset(model, cusp, radius, z, 0, coset_c_bound(model, cusp, radius, z), [&](const CosetVisit& v) {
    const Moebius ghat = compose(compose(sigma_inv, to_moebius(v.element)), cd.sigma);
    CosetGeometry geo;
    geo.element = v.element;
    geo.c = ghat.c();
    geo.d = ghat.d();
    const bool identity = std::abs(geo.c) < 1e-9;
    if (!identity && (geo.c > c_bound * (1.0 + 1e-12) || std::abs(geo.c * zp.x + geo.d) > c_bound * (1.0 + 1e-12))) {
      return;
    }
    const Point w = apply(ghat, zp);
    geo.im_ratio = w.y / zp.y;
    if (!identity) {
      const long long k0 = std::llround(zp.x - w.x);
      double best = std::numeric_limits<double>::infinity();
      IntMatrix up = v.element;
      for (long long k = 0; k < k0; ++k) up = step * up;
      for (long long k = 0; k > k0; --k) up = step_inv * up;
      IntMatrix down = up;
      for (long long j = 0; j <= bc.tau + 2; ++j) {
        for (const auto& [cand, k] : {std::pair{up, k0 + j}, std::pair{down, k0 - j}}) {
          if (!hyperbolic(cand)) continue;
          const double dd = dist(make_point(w.x + static_cast<double>(k), w.y), zp);
          if (dd < best) {
            best = dd;
            geo.best_k = k;
          }
          geo.has_hyperbolic = true;
        }
        up = step * up;
        down = step_inv * down;
      }
      geo.inf_distance = best;
    }
    geo.exceptional = identity || !geo.has_hyperbolic || std::abs(w.y - zp.y) <= bc.c6;
    out.push_back(geo);
  });
  return out;
}

DistanceReport check_distance_bound(const FuchsianModel& model, int cusp, Point z, double c_bound) {
  DistanceReport rep;
  rep.constants = bound_constants(model, cusp, z);
  const auto cosets = coset_geometry(model, cusp, z, c_bound, rep.constants);
  double sum = 0.0;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.max_margin = -std::numeric_limits<double>::infinity();
  for (const auto& geo : cosets) {
    if (geo.exceptional) {
      rep.exceptional.push_back(geo);
      continue;
    }
    ++rep.checked;
    const double margin = rep.constants.c5 + std::abs(std::log(geo.im_ratio)) - geo.inf_distance;
    if (margin < 0.0) ++rep.violations;
    rep.min_margin = std::min(rep.min_margin, margin);
    rep.max_margin = std::max(rep.max_margin, margin);
    sum += margin;
  }
  if (rep.checked > 0) rep.mean_margin = sum / static_cast<double>(rep.checked);
  return rep;
}

NormBoundReport check_norm_bound(const FuchsianModel& model, const Twist& chi, int cusp, Point z, double c_bound,
                                 double slack) {
  const Projection proj = fixed_projection(model, chi, cusp);
  const BoundConstants bc = bound_constants(model, cusp, z);
  const auto cosets = coset_geometry(model, cusp, z, c_bound, bc);
  const Point zp = apply(invert(model.cusps().at(static_cast<std::size_t>(cusp)).sigma), z);
  const CMatrix& h = chi.inner_product();

  struct Sample {
    double u, dist, log_norm;
    bool inner;
  };
  std::vector<Sample> samples;
  NormBoundReport rep;
  rep.slack = slack;
  for (const auto& geo : cosets) {
    if (geo.exceptional) {
      ++rep.exceptional;
      continue;
    }
    const double norm = op_norm(chi.evaluate(model.word_for(inverse(geo.element))) * proj.matrix, h);
    if (!(norm > 0.0)) continue;
    const bool inner = geo.c <= 0.5 * c_bound && std::abs(geo.c * zp.x + geo.d) <= 0.5 * c_bound;
    samples.push_back({std::abs(std::log(geo.im_ratio)), geo.inf_distance, std::log(norm), inner});
  }
  for (const auto& smp : samples) rep.fitted += smp.inner ? 1 : 0;
  if (rep.fitted < 50) fail(ErrorCode::InsufficientData, "norm bound fit needs at least 50 cosets");

  // Slope by least squares on the inner cosets, constant as the envelope over the same set.
  auto fit = [&](auto x_of, double& slope, double& constant) {
    double mx = 0.0, mv = 0.0, n = 0.0;
    for (const auto& smp : samples) {
      if (!smp.inner) continue;
      mx += x_of(smp);
      mv += smp.log_norm;
      n += 1.0;
    }
    mx /= n;
    mv /= n;
    double sxx = 0.0, sxv = 0.0;
    for (const auto& smp : samples) {
      if (!smp.inner) continue;
      sxx += (x_of(smp) - mx) * (x_of(smp) - mx);
      sxv += (x_of(smp) - mx) * (smp.log_norm - mv);
    }
    slope = std::max(0.0, sxx > 0.0 ? sxv / sxx : 0.0);
    double env = -std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
      if (smp.inner) env = std::max(env, smp.log_norm - slope * x_of(smp));
    }
    constant = std::exp(env);
  };
  fit([](const Sample& smp) { return smp.u; }, rep.c1, rep.c2);
  fit([](const Sample& smp) { return smp.dist; }, rep.c4, rep.c3);

  for (const auto& smp : samples) {
    ++rep.checked;
    const double bound = std::log(slack * rep.c2) + slack * rep.c1 * smp.u;
    const double route = std::log(slack * rep.c3) + slack * rep.c4 * smp.dist;
    rep.worst_ratio = std::max(rep.worst_ratio, std::exp(smp.log_norm - bound));
    rep.worst_route_ratio = std::max(rep.worst_route_ratio, std::exp(smp.log_norm - route));
    if (smp.log_norm > bound) ++rep.violations;
    if (smp.log_norm > route) ++rep.route_violations;
  }
  return rep;
}

}  // namespace eistwist
