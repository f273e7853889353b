#include "eistwist/eisenstein.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "eistwist/error.hpp"
#include "eistwist/specfun.hpp"

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;
// C values per work unit; fixed so the reduction order does not depend on the thread count.
constexpr long long kChunk = 16;

void validate(const EvalConfig& cfg) {
  if (!(cfg.radius > 0.0) || cfg.m_max < 1 || cfg.t_max < 1 || !(cfg.c_max > 0.0) || !(cfg.margin >= 0.0) ||
      !(cfg.c1_fit_radius > 0.0) || !(cfg.automorphy_enlargement >= 1.0)) {
    fail(ErrorCode::InvalidArgument, "evaluation config must be positive with t_max >= 1");
  }
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs work(lo, hi) over [c_lo, c_hi] in fixed chunks; results come back in chunk order.
template <class Acc, class Work>
std::vector<Acc> run_chunks(long long c_lo, long long c_hi, int threads, Work&& work) {
  if (c_hi < c_lo) return {};
  const long long n = (c_hi - c_lo) / kChunk + 1;
  std::vector<Acc> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<long long> next{0};
  auto loop = [&] {
    for (long long i = next++; i < n; i = next++) {
      const long long lo = c_lo + i * kChunk;
      const long long hi = std::min(c_hi, lo + kChunk - 1);
      try {
        out[static_cast<std::size_t>(i)] = work(lo, hi);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int nt = static_cast<int>(std::min<long long>(worker_count(threads), n));
  if (nt <= 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Complex cpow(double base, Complex s) { return std::exp(s * std::log(base)); }

double growth_exponent(const FuchsianModel& model, const Twist& chi, int cusp, Point z, const EvalConfig& cfg) {
  if (cfg.c1_hat) return *cfg.c1_hat;
  if (chi.is_trivial()) return 0.0;
  return estimate_c1(model, chi, cusp, z, cfg.c1_fit_radius).fitted_exponent;
}

// Returns the near-abscissa flag or throws.
bool check_abscissa(Complex s, double c1, double margin) {
  const double edge = 1.0 + std::max(c1, 0.0);
  if (s.real() < edge - margin) {
    std::ostringstream os;
    os << "Re s = " << s.real() << " is outside the convergent half-plane Re s > " << edge << " (fitted c1 = " << c1
       << ")";
    fail(ErrorCode::ConvergenceViolated, os.str());
  }
  return s.real() <= edge;
}

// Least-squares fit log w = log B - beta log c over the last decade, B taken as the envelope.
double power_tail(const std::vector<DoubleCosetSummary>& per_c, double c_max, double spacing) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : per_c) {
    if (e.c >= c_max / 10.0 && e.weight > 0.0) pts.emplace_back(std::log(e.c), std::log(e.weight));
  }
  if (pts.size() < 3) return per_c.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double beta = sxx > 0.0 ? -sxy / sxx : 0.0;
  if (beta <= 1.0) return std::numeric_limits<double>::infinity();
  double log_b = -std::numeric_limits<double>::infinity();
  for (auto [x, y] : pts) log_b = std::max(log_b, y + beta * x);
  return std::exp(log_b + (1.0 - beta) * std::log(c_max)) / ((beta - 1.0) * spacing);
}

CMatrix embed_rows(const CMatrix& part, Eigen::Index offset, Eigen::Index dim) {
  CMatrix out = CMatrix::Zero(dim, part.cols());
  out.block(offset, 0, part.rows(), part.cols()) = part;
  return out;
}

// N^k x for the nilpotent N with ones on the superdiagonal: rows shift up by k.
CMatrix shift_up(const CMatrix& x, int k) {
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  const Eigen::Index n = x.rows() - k;
  if (n > 0) out.topRows(n) = x.bottomRows(n);
  return out;
}

}  // namespace

OperatorValue direct_eval(const FuchsianModel& model, const Twist& chi, int cusp, Point z, Complex s,
                          const EvalConfig& cfg) {
  validate(cfg);
  const int dim = chi.dim();
  const Projection proj = fixed_projection(model, chi, cusp, cfg.tol_rank);
  OperatorValue out;
  out.matrix = CMatrix::Zero(dim, dim);
  if (proj.rank() == 0) return out;
  const double c1 = growth_exponent(model, chi, cusp, z, cfg);
  out.near_abscissa = check_abscissa(s, c1, cfg.margin);
  const double c1p = std::max(c1, 0.0);

  struct Acc {
    CMatrix sum;
    std::size_t terms = 0;
    double kappa = 0.0;
  };
  const bool trivial = chi.is_trivial();
  const double last_decade = 100.0 * z.y / (cfg.radius * cfg.radius);
  const CMatrix& q = proj.range;
  auto work = [&](long long lo, long long hi) {
    Acc acc;
    acc.sum = CMatrix::Zero(dim, q.cols());
    for_each_coset(model, cusp, cfg.radius, z, lo, hi, [&](const CosetVisit& v) {
      const double u = v.c * z.x + v.d;
      const double w = v.c * z.y;
      const double im = z.y / (u * u + w * w);
      const Complex weight = cpow(im, s);
      double norm = 1.0;
      if (trivial) {
        acc.sum(0, 0) += weight;
      } else {
        CMatrix block = q;
        chi.apply_left(model.word_for(inverse(v.element)), block);
        acc.sum += weight * block;
        norm = block.norm();
      }
      ++acc.terms;
      if (im <= last_decade) acc.kappa = std::max(acc.kappa, norm * std::pow(im, c1p));
    });
    return acc;
  };
  const auto chunks = run_chunks<Acc>(0, coset_c_bound(model, cusp, cfg.radius, z), cfg.threads, work);

  CMatrix total = CMatrix::Zero(dim, q.cols());
  double kappa = 0.0;
  for (const auto& c : chunks) {
    total += c.sum;
    out.terms += c.terms;
    kappa = std::max(kappa, c.kappa);
  }
  out.matrix = total * proj.co_range;

  // Terms beyond the disc: N(rho) ~ A rho^2 cosets of size <= kappa (y / rho^2)^e.
  const double e = s.real() - c1p;
  if (e <= 1.0) {
    out.tail_estimate = std::numeric_limits<double>::infinity();
  } else {
    const double area = static_cast<double>(out.terms) / (cfg.radius * cfg.radius);
    out.tail_estimate = area * kappa * std::pow(z.y, e) * std::pow(cfg.radius, 2.0 - 2.0 * e) / (e - 1.0) *
                        op_norm(proj.co_range);
  }
  return out;
}

OperatorValue total_eval(const FuchsianModel& model, const Twist& chi, Point z, Complex s, const EvalConfig& cfg) {
  OperatorValue out;
  out.matrix = CMatrix::Zero(chi.dim(), chi.dim());
  for (std::size_t c = 0; c < model.cusps().size(); ++c) {
    const OperatorValue part = direct_eval(model, chi, static_cast<int>(c), z, s, cfg);
    out.matrix += part.matrix;
    out.tail_estimate += part.tail_estimate;
    out.near_abscissa = out.near_abscissa || part.near_abscissa;
    out.terms += part.terms;
  }
  return out;
}

NuValue nu_direct(double c, double d, Point z, Complex s, int k, Complex lambda, long long m_max) {
  if (k < 0 || m_max < 1 || !(c > 0.0) || !(z.y > 0.0)) {
    fail(ErrorCode::InvalidArgument, "nu_direct needs k >= 0, m_max >= 1, c > 0 and y > 0");
  }
  const double sigma = s.real();
  if (!(sigma > 0.5 * (k + 1))) {
    std::ostringstream os;
    os << "translate sum diverges: Re s = " << sigma << " <= (k+1)/2 = " << 0.5 * (k + 1);
    fail(ErrorCode::ConvergenceViolated, os.str());
  }
  const double theta = z.x + d / c;
  const double y = z.y;
  const Complex log_lambda = std::log(lambda);
  auto term = [&](long long m) {
    const double u = theta + static_cast<double>(m);
    const double im = y / (c * c * (u * u + y * y));
    return cpow(im, s) * binom_real(static_cast<double>(m), k) * std::exp(static_cast<double>(m - k) * log_lambda);
  };
  NuValue out;
  out.value = term(0);
  for (long long m = 1; m <= m_max; ++m) {
    out.value += term(m);
    out.value += term(-m);
  }
  const double b = std::abs(theta) + k + 1.0;
  const double u0 = std::max(1.0, static_cast<double>(m_max) - std::abs(theta) - 1.0);
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  out.tail = 2.0 * std::pow(y / (c * c), sigma) * std::pow(1.0 + b / u0, k) * std::pow(u0, k + 1.0 - 2.0 * sigma) /
             ((2.0 * sigma - k - 1.0) * kfact) * std::pow(std::abs(lambda), static_cast<double>(m_max));
  return out;
}

NuValue nu_direct(double c, double d, Point z, Complex s, int k, const JordanData& jd, int block, long long m_max) {
  return nu_direct(c, d, z, s, k, jd.blocks.at(static_cast<std::size_t>(block)).lambda, m_max);
}

Complex nu_bessel(double c, double d, Point z, Complex s, int k, double mu, int t_max) {
  if (k < 0 || t_max < 1 || !(c > 0.0) || !(z.y > 0.0)) {
    fail(ErrorCode::InvalidArgument, "nu_bessel needs k >= 0, t_max >= 1, c > 0 and y > 0");
  }
  if (!(s.real() > 0.5 * (k + 1))) fail(ErrorCode::ConvergenceViolated, "translate sum diverges for this k");
  const double theta = z.x + d / c;
  const double y = z.y;
  const std::vector<double> b = stirling_b(theta, k);
  const Complex ys = cpow(y, s);

  std::vector<long long> ells;
  for (auto l = static_cast<long long>(std::ceil(mu - t_max)); l <= static_cast<long long>(std::floor(mu + t_max)); ++l) {
    ells.push_back(l);
  }
  std::stable_sort(ells.begin(), ells.end(), [&](long long l1, long long l2) {
    return std::abs(static_cast<double>(l1) - mu) < std::abs(static_cast<double>(l2) - mu);
  });
  Complex sum = 0.0;
  for (const long long l : ells) {
    const double t = static_cast<double>(l) - mu;
    const bool delta = std::abs(t) < 1e-12;
    Complex mode = 0.0;
    for (int p = 0; p <= k; ++p) {
      if (b[static_cast<std::size_t>(p)] == 0.0) continue;
      mode += b[static_cast<std::size_t>(p)] * phi({p, delta ? 0.0 : -t, y, s});
    }
    sum += (delta ? Complex(1.0) : e2pi(theta * t)) * ys * mode;
  }
  return e2pi(-k * mu) * cpow(c, -2.0 * s) * sum;
}

namespace {

struct ModeSpec {
  long long ell = 0;
  double t = 0.0;
  // y^(1/2) (2 pi^s / ((2 pi i)^n Gamma(s))) kernel_deriv(n, s, -t, y) for n < block size.
  std::vector<Complex> kernel;
};

struct BlockPlan {
  int size = 1;
  int offset = 0;
  double mu = 0.0;
  bool has_delta = false;
  std::vector<ModeSpec> modes;
  // y^(p+1-s) Gamma((p+1)/2) Gamma(s-(p+1)/2) / Gamma(s), zero for odd p.
  std::vector<Complex> delta_factor;
  std::vector<Complex> gamma_ratio;
};

int kn_index(int k, int n) { return k * (k + 1) / 2 + n; }

struct ExpansionAcc {
  // Per block: W[mode][kn] is size x r, flattened; D[k][p] likewise.
  std::vector<std::vector<Complex>> w;
  std::vector<std::vector<Complex>> delta;
  std::vector<DoubleCosetSummary> per_c;
  std::size_t pairs = 0;
};

struct ExpansionCore {
  ExpansionReport report;
  std::vector<BlockPlan> plan;
};

ExpansionCore expand(const FuchsianModel& model, const Twist& chi, int a, int b, Point z, Complex s,
                     const EvalConfig& cfg, bool with_modes) {
  validate(cfg);
  const int nc = static_cast<int>(model.cusps().size());
  if (a < 0 || a >= nc || b < 0 || b >= nc) fail(ErrorCode::InvalidArgument, "cusp index out of range");
  const int dim = chi.dim();
  ExpansionCore core;
  ExpansionReport& rep = core.report;
  rep.total.matrix = CMatrix::Zero(dim, dim);
  rep.constant_term.matrix = CMatrix::Zero(dim, dim);
  rep.q_form_total = CMatrix::Zero(dim, dim);

  rep.jordan = jordan(cusp_monodromy_inverse(model, chi, b), cfg.jordan);
  const JordanData& jd = rep.jordan;
  const Projection proj = fixed_projection(model, chi, a, cfg.tol_rank);
  const int r = proj.rank();
  if (r == 0) return core;

  const double c1 = growth_exponent(model, chi, a, z, cfg);
  const bool near = check_abscissa(s, c1, cfg.margin);
  rep.total.near_abscissa = near;
  rep.constant_term.near_abscissa = near;
  if (!(s.real() > 0.5 * jd.max_chain)) {
    fail(ErrorCode::ConvergenceViolated, "translate sums diverge: Re s <= N/2 for the cusp monodromy");
  }

  const double y = z.y;
  const Complex gs = gamma(s);
  const Complex sqrt_y = std::sqrt(y);
  for (const auto& blk : jd.blocks) {
    if (!blk.unit) fail(ErrorCode::ConvergenceViolated, "cusp monodromy has an eigenvalue off the unit circle");
    BlockPlan bp;
    bp.size = blk.size;
    bp.offset = blk.offset;
    bp.mu = blk.mu;
    bp.has_delta = blk.mu == 0.0;
    bp.delta_factor.assign(static_cast<std::size_t>(blk.size), 0.0);
    bp.gamma_ratio.assign(static_cast<std::size_t>(blk.size), 0.0);
    for (int p = 0; p < blk.size; p += 2) {
      const double h = 0.5 * (p + 1);
      bp.gamma_ratio[static_cast<std::size_t>(p)] = gamma(h) * gamma(s - h) / gs;
      bp.delta_factor[static_cast<std::size_t>(p)] = cpow(y, p + 1.0 - s) * bp.gamma_ratio[static_cast<std::size_t>(p)];
    }
    if (with_modes) {
      for (auto l = static_cast<long long>(std::ceil(blk.mu - cfg.t_max));
           l <= static_cast<long long>(std::floor(blk.mu + cfg.t_max)); ++l) {
        const double t = static_cast<double>(l) - blk.mu;
        if (std::abs(t) < 1e-12) continue;
        ModeSpec m;
        m.ell = l;
        m.t = t;
        for (int n = 0; n < blk.size; ++n) {
          const Complex pref = 2.0 * cpow(pi, s) / (std::pow(Complex(0.0, 2.0 * pi), n) * gs);
          m.kernel.push_back(sqrt_y * pref * kernel_deriv(n, s, -t, y));
        }
        bp.modes.push_back(std::move(m));
      }
      std::stable_sort(bp.modes.begin(), bp.modes.end(),
                       [](const ModeSpec& m1, const ModeSpec& m2) { return std::abs(m1.t) < std::abs(m2.t); });
    }
    core.plan.push_back(std::move(bp));
  }

  const int max_chain = jd.max_chain;
  const bool trivial = chi.is_trivial();
  const CMatrix& q = proj.range;
  const CMatrix& sinv = jd.basis_inverse;
  auto fresh = [&] {
    ExpansionAcc acc;
    for (const auto& bp : core.plan) {
      const std::size_t blk = static_cast<std::size_t>(bp.size) * r;
      const std::size_t nkn = static_cast<std::size_t>(kn_index(bp.size, 0));
      acc.w.emplace_back(bp.modes.size() * nkn * blk, 0.0);
      acc.delta.emplace_back(bp.has_delta ? static_cast<std::size_t>(bp.size * bp.size) * blk : 0, 0.0);
    }
    return acc;
  };

  auto work = [&](long long lo, long long hi) {
    ExpansionAcc acc = fresh();
    std::vector<std::vector<double>> bcoef(static_cast<std::size_t>(max_chain));
    bcoef[0] = {1.0};
    std::vector<Complex> phase;
    CMatrix y_mat(dim, r);
    for_each_double_coset(model, a, b, lo, hi, [&](const DoubleCosetVisit& v) {
      if (trivial) {
        y_mat(0, 0) = 1.0;
      } else {
        CMatrix block = q;
        chi.apply_left(model.word_for(inverse(v.element)), block);
        y_mat.noalias() = sinv * block;
      }
      const double theta = z.x + v.d / v.c;
      const Complex cs = cpow(v.c, -2.0 * s);
      for (int k = 1; k < max_chain; ++k) bcoef[static_cast<std::size_t>(k)] = stirling_b(theta, k);

      for (std::size_t j = 0; j < core.plan.size(); ++j) {
        const BlockPlan& bp = core.plan[j];
        const int nj = bp.size;
        const std::size_t blk = static_cast<std::size_t>(nj) * r;
        // Column-major n_j x r slice of y_mat.
        auto yv = [&](std::size_t idx) {
          return y_mat(bp.offset + static_cast<Eigen::Index>(idx % nj), static_cast<Eigen::Index>(idx / nj));
        };
        const std::size_t nkn = static_cast<std::size_t>(kn_index(nj, 0));
        Complex* w = acc.w[j].data();
        for (std::size_t m = 0; m < bp.modes.size(); ++m) {
          const Complex e = e2pi(theta * bp.modes[m].t) * cs;
          for (int k = 0; k < nj; ++k) {
            for (int n = 0; n <= k; ++n) {
              const double bn = bcoef[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
              if (bn == 0.0) continue;
              const Complex f = e * bn;
              Complex* dst = w + (m * nkn + static_cast<std::size_t>(kn_index(k, n))) * blk;
              for (std::size_t i = 0; i < blk; ++i) dst[i] += f * yv(i);
            }
          }
        }
        if (bp.has_delta) {
          Complex* dl = acc.delta[j].data();
          for (int k = 0; k < nj; ++k) {
            for (int p = 0; p <= k; p += 2) {
              const Complex f = cs * bcoef[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
              Complex* dst = dl + static_cast<std::size_t>(k * nj + p) * blk;
              for (std::size_t i = 0; i < blk; ++i) dst[i] += f * yv(i);
            }
          }
        }
      }
      if (acc.per_c.empty() || acc.per_c.back().c != v.c) acc.per_c.push_back({v.c, 0, 0.0});
      acc.per_c.back().count += 1;
      acc.per_c.back().weight += std::abs(cs) * y_mat.norm();
      ++acc.pairs;
    });
    return acc;
  };
  auto chunks =
      run_chunks<ExpansionAcc>(1, double_coset_c_bound(model, a, b, cfg.c_max), cfg.threads, work);

  ExpansionAcc sum = fresh();
  for (auto& c : chunks) {
    for (std::size_t j = 0; j < sum.w.size(); ++j) {
      for (std::size_t i = 0; i < sum.w[j].size(); ++i) sum.w[j][i] += c.w[j][i];
      for (std::size_t i = 0; i < sum.delta[j].size(); ++i) sum.delta[j][i] += c.delta[j][i];
    }
    sum.per_c.insert(sum.per_c.end(), c.per_c.begin(), c.per_c.end());
    sum.pairs += c.pairs;
  }
  chunks.clear();
  rep.per_c = std::move(sum.per_c);
  rep.double_cosets = sum.pairs;

  const CMatrix& sb = jd.basis;
  const CMatrix& co = proj.co_range;
  auto slice = [&](const std::vector<Complex>& v, std::size_t at, int nj) {
    CMatrix m(nj, r);
    for (Eigen::Index col = 0; col < r; ++col) {
      for (Eigen::Index row = 0; row < nj; ++row) m(row, col) = v[at + static_cast<std::size_t>(col * nj + row)];
    }
    return m;
  };
  auto lift = [&](const CMatrix& part, int offset) { return CMatrix(sb * embed_rows(part, offset, dim) * co); };

  // Z_{j,k}: the full nu_k-weighted sums, kept for the coordinate-functional form.
  std::vector<std::vector<CMatrix>> z_full(core.plan.size());

  // Constant term.
  CMatrix constant = a == b ? CMatrix(cpow(y, s) * proj.matrix) : CMatrix::Zero(dim, dim);
  std::map<int, CMatrix> phi_by_q;
  for (std::size_t j = 0; j < core.plan.size(); ++j) {
    const BlockPlan& bp = core.plan[j];
    const int nj = bp.size;
    const std::size_t blk = static_cast<std::size_t>(nj) * r;
    z_full[j].assign(static_cast<std::size_t>(nj), CMatrix::Zero(nj, r));
    if (!bp.has_delta) continue;
    for (int p = 0; p < nj; p += 2) {
      CMatrix x = CMatrix::Zero(nj, r);
      for (int k = p; k < nj; ++k) {
        const CMatrix dkp = slice(sum.delta[j], static_cast<std::size_t>(k * nj + p) * blk, nj);
        x += shift_up(dkp, k);
        z_full[j][static_cast<std::size_t>(k)] += bp.delta_factor[static_cast<std::size_t>(p)] * dkp;
      }
      const CMatrix phi_q = lift(bp.gamma_ratio[static_cast<std::size_t>(p)] * x, bp.offset);
      auto it = phi_by_q.find(p + 1);
      if (it == phi_by_q.end()) {
        phi_by_q.emplace(p + 1, phi_q);
      } else {
        it->second += phi_q;
      }
    }
  }
  for (auto& [qq, m] : phi_by_q) {
    constant += cpow(y, static_cast<double>(qq) - s) * m;
    rep.phi_terms.push_back({qq, m});
  }
  rep.constant_term.matrix = constant;

  // Modes.
  std::vector<ModeTerm> modes;
  for (std::size_t j = 0; j < core.plan.size(); ++j) {
    const BlockPlan& bp = core.plan[j];
    const int nj = bp.size;
    const std::size_t blk = static_cast<std::size_t>(nj) * r;
    const std::size_t nkn = static_cast<std::size_t>(kn_index(nj, 0));
    for (std::size_t m = 0; m < bp.modes.size(); ++m) {
      const ModeSpec& ms = bp.modes[m];
      CMatrix x = CMatrix::Zero(nj, r);
      for (int k = 0; k < nj; ++k) {
        const Complex ek = e2pi(-k * bp.mu);
        CMatrix zk = CMatrix::Zero(nj, r);
        for (int n = 0; n <= k; ++n) {
          const CMatrix wkn = slice(sum.w[j], (m * nkn + static_cast<std::size_t>(kn_index(k, n))) * blk, nj);
          zk += ms.kernel[static_cast<std::size_t>(n)] * wkn;
          const Complex pref = 2.0 * cpow(pi, s) / (std::pow(Complex(0.0, 2.0 * pi), n) * gs);
          rep.psi_terms.push_back(
              {ms.t, static_cast<int>(j), k, n, lift(ek * pref * shift_up(wkn, k), bp.offset)});
        }
        zk *= ek;
        z_full[j][static_cast<std::size_t>(k)] += zk;
        x += shift_up(zk, k);
      }
      modes.push_back({ms.t, lift(x, bp.offset)});
    }
  }
  std::stable_sort(modes.begin(), modes.end(), [](const ModeTerm& m1, const ModeTerm& m2) {
    const double a1 = std::abs(m1.t), a2 = std::abs(m2.t);
    if (std::abs(a1 - a2) > 1e-12) return a1 < a2;
    return m1.t < m2.t - 1e-12;
  });
  for (auto& m : modes) {
    if (!rep.mode_terms.empty() && std::abs(rep.mode_terms.back().t - m.t) <= 1e-12) {
      rep.mode_terms.back().contribution += m.contribution;
    } else {
      rep.mode_terms.push_back(std::move(m));
    }
  }

  CMatrix total = constant;
  for (const auto& m : rep.mode_terms) total += m.contribution;
  rep.total.matrix = total;
  rep.total.terms = rep.double_cosets;
  rep.constant_term.terms = rep.double_cosets;

  // Coordinate-functional form: nu_k attached to chain position k only.
  CMatrix qx = CMatrix::Zero(dim, r);
  for (std::size_t j = 0; j < core.plan.size(); ++j) {
    for (int k = 0; k < core.plan[j].size; ++k) {
      qx.row(core.plan[j].offset + k) = z_full[j][static_cast<std::size_t>(k)].row(k);
    }
  }
  rep.q_form_total = (a == b ? CMatrix(cpow(y, s) * proj.matrix) : CMatrix::Zero(dim, dim)) + sb * qx * co;
  const double tn = total.norm();
  rep.q_form_discrepancy = tn > 0.0 ? (rep.q_form_total - total).norm() / tn : (rep.q_form_total - total).norm();
  rep.q_form_flagged = rep.q_form_discrepancy > cfg.tol_q_form;

  // Tails: the c-sum beyond c_max through a power-law fit of the per-c weights, scaled by the size of
  // a translate sum per unit c^(-2s); the modes beyond t_max through the Bessel decay e^(-2 pi |t| y).
  const double sigma = s.real();
  const double wa = model.cusps()[static_cast<std::size_t>(a)].width;
  const double wb = model.cusps()[static_cast<std::size_t>(b)].width;
  const double nu_scale = std::pow(y, 1.0 - sigma) * std::sqrt(pi) * std::exp(std::lgamma(sigma - 0.5) - std::lgamma(sigma)) *
                          std::pow(2.0 + std::abs(z.x) + y, max_chain - 1);
  rep.c_tail = power_tail(rep.per_c, cfg.c_max, std::sqrt(wa * wb)) * nu_scale * op_norm(sb) * op_norm(co);
  if (with_modes) {
    double shell = 0.0;
    for (const auto& m : rep.mode_terms) {
      if (std::abs(m.t) > cfg.t_max - 1.0) shell += m.contribution.norm();
    }
    const double ratio = std::exp(-2.0 * pi * y);
    rep.mode_tail = shell * ratio / (1.0 - ratio);
  }
  rep.total.tail_estimate = rep.c_tail + rep.mode_tail;
  rep.constant_term.tail_estimate = rep.c_tail;
  return core;
}

}  // namespace

ExpansionReport fourier_eval(const FuchsianModel& model, const Twist& chi, int a, int b, Point z, Complex s,
                             const EvalConfig& cfg) {
  return expand(model, chi, a, b, z, s, cfg, true).report;
}

OperatorValue constant_term(const FuchsianModel& model, const Twist& chi, int a, int b, Complex s, double x,
                            double y, const EvalConfig& cfg, std::vector<PhiTerm>* phi_terms) {
  ExpansionCore core = expand(model, chi, a, b, make_point(x, y), s, cfg, false);
  if (phi_terms) *phi_terms = std::move(core.report.phi_terms);
  return std::move(core.report.constant_term);
}

GrowthFit estimate_c1(const FuchsianModel& model, const Twist& chi, int cusp, Point z, double radius) {
  const Projection proj = fixed_projection(model, chi, cusp);
  if (proj.rank() == 0) fail(ErrorCode::InsufficientData, "projection at this cusp is zero");
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  const double y0 = im_after(invert(cd.sigma), z);
  const CMatrix& h = chi.inner_product();
  std::vector<double> xs, vs;
  for_each_coset(model, cusp, radius, z, 0, coset_c_bound(model, cusp, radius, z), [&](const CosetVisit& v) {
    const double u = v.c * z.x + v.d;
    const double w = v.c * z.y;
    const double im = z.y / (u * u + w * w);
    const double norm = op_norm(chi.evaluate(model.word_for(inverse(v.element))) * proj.matrix, h);
    if (!(norm > 0.0)) return;
    xs.push_back(std::abs(std::log(im / y0)));
    vs.push_back(std::log(norm));
  });
  if (xs.size() < 50) {
    fail(ErrorCode::InsufficientData, "estimate_c1 needs at least 50 cosets, got " + std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    mv += vs[i];
  }
  mx /= n;
  mv /= n;
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxv += (xs[i] - mx) * (vs[i] - mv);
  }
  GrowthFit fit;
  fit.fitted_exponent = sxx > 0.0 ? sxv / sxx : 0.0;
  fit.intercept = mv - fit.fitted_exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = vs[i] - fit.intercept - fit.fitted_exponent * xs[i];
    ss += res * res;
  }
  fit.scatter = std::sqrt(ss / n);
  fit.samples = xs.size();
  fit.cusp = cusp;
  return fit;
}

GrowthFit estimate_c1_all(const FuchsianModel& model, const Twist& chi, Point z, double radius) {
  GrowthFit best;
  bool any = false;
  for (std::size_t c = 0; c < model.cusps().size(); ++c) {
    if (fixed_projection(model, chi, static_cast<int>(c)).rank() == 0) continue;
    const GrowthFit f = estimate_c1(model, chi, static_cast<int>(c), z, radius);
    if (!any || f.fitted_exponent > best.fitted_exponent) best = f;
    any = true;
  }
  return best;
}

AutomorphyResult automorphy_defect(const FuchsianModel& model, const Twist& chi, const Word& gamma, int cusp,
                                   Point z, Complex s, const EvalConfig& cfg) {
  const Moebius g = model.evaluate(gamma);
  const Point gz = apply(g, z);
  EvalConfig shifted = cfg;
  shifted.radius = cfg.radius * cfg.automorphy_enlargement / std::abs(j_factor(g, z));
  const OperatorValue at_z = direct_eval(model, chi, cusp, z, s, cfg);
  const OperatorValue at_gz = direct_eval(model, chi, cusp, gz, s, shifted);
  const CMatrix chi_g = chi.evaluate(gamma);
  AutomorphyResult out;
  const double base = at_z.matrix.norm();
  const double scale = base > 0.0 ? base : 1.0;
  out.defect = (at_gz.matrix - chi_g * at_z.matrix).norm() / scale;
  out.tail_z = at_z.tail_estimate;
  out.tail_gz = at_gz.tail_estimate;
  out.tail_bound = 10.0 * (op_norm(chi_g) * at_z.tail_estimate + at_gz.tail_estimate) / scale;
  return out;
}

PeriodicityResult periodicity_defect(const FuchsianModel& model, const Twist& chi, int a, int b, Point z,
                                     Complex s, const EvalConfig& cfg) {
  const Point z1 = make_point(z.x + 1.0, z.y);
  const ExpansionReport e0 = fourier_eval(model, chi, a, b, z, s, cfg);
  const ExpansionReport e1 = fourier_eval(model, chi, a, b, z1, s, cfg);
  const CMatrix f0 = real_power(e0.jordan, z.x) * e0.total.matrix;
  const CMatrix f1 = real_power(e0.jordan, z1.x) * e1.total.matrix;
  PeriodicityResult out;
  const double fn = f0.norm();
  const double en = e0.total.matrix.norm();
  out.defect = (f1 - f0).norm() / (fn > 0.0 ? fn : 1.0);
  out.plain_defect = (e1.total.matrix - e0.total.matrix).norm() / (en > 0.0 ? en : 1.0);
  out.tail = (e0.total.tail_estimate + e1.total.tail_estimate) / (fn > 0.0 ? fn : 1.0);
  return out;
}

}  // namespace eistwist
