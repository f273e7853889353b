#include "eistwist/repjordan.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "eistwist/error.hpp"
#include "eistwist/specfun.hpp"

namespace eistwist {

struct Twist::Data {
  std::string label;
  int dim = 1;
  std::vector<CMatrix> images;
  std::vector<CMatrix> inverses;
  CMatrix inner;
  bool trivial = false;
  int cache = 0;
  // powers[g][p + cache] = chi(g)^p
  std::vector<std::vector<CMatrix>> powers;
};

namespace {

CMatrix matrix_power(const CMatrix& m, const CMatrix& minv, long long p) {
  CMatrix base = p >= 0 ? m : minv;
  unsigned long long e = static_cast<unsigned long long>(p >= 0 ? p : -p);
  CMatrix r = CMatrix::Identity(m.rows(), m.cols());
  while (e > 0) {
    if (e & 1ULL) r = r * base;
    e >>= 1ULL;
    if (e > 0) base = base * base;
  }
  return r;
}

using LdComplex = std::complex<long double>;
using LdMatrix = Eigen::Matrix<LdComplex, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<Complex> eigenvalues_ld(const CMatrix& m) {
  LdMatrix a = m.cast<LdComplex>();
  Eigen::ComplexEigenSolver<LdMatrix> es(a, false);
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const LdComplex v = es.eigenvalues()(i);
    out.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  }
  return out;
}

struct Cluster {
  Complex mean;
  int count = 0;
};

// Single-linkage clustering; the radius adapts to the perturbation of a defective
// eigenvalue, which scales like (eps * ||M||)^(1/multiplicity).
std::vector<Cluster> cluster_eigenvalues(const std::vector<Complex>& ev, double norm, double tol_cluster) {
  const auto n = ev.size();
  const double eps = std::numeric_limits<long double>::epsilon();
  const double radius = std::max(tol_cluster, 10.0 * std::pow(eps * std::max(1.0, norm), 1.0 / static_cast<double>(std::max<std::size_t>(n, 1))));
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    label[i] = next;
    std::vector<std::size_t> stack{i};
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (label[j] < 0 && std::abs(ev[j] - ev[k]) <= radius) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  std::vector<Cluster> out(static_cast<std::size_t>(next));
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = out[static_cast<std::size_t>(label[i])];
    c.mean += ev[i];
    ++c.count;
  }
  for (auto& c : out) c.mean /= static_cast<double>(c.count);
  return out;
}

double phase_of(Complex lambda) {
  double mu = std::arg(lambda) / (2.0 * std::numbers::pi);
  if (mu < 0.0) mu += 1.0;
  if (mu >= 1.0) mu -= 1.0;
  return mu;
}

double snap_phase(double mu, int max_den, double tol, bool& snapped) {
  snapped = false;
  for (int q = 1; q <= max_den; ++q) {
    const double p = std::nearbyint(mu * q);
    if (std::abs(mu - p / q) <= tol) {
      snapped = true;
      double r = p / q;
      if (r >= 1.0) r -= 1.0;
      return r;
    }
  }
  return mu;
}

const Twist::Data& checked_data(const std::shared_ptr<const Twist::Data>& d) {
  if (!d) fail(ErrorCode::InvalidArgument, "twist is empty");
  return *d;
}

}  // namespace

const std::string& Twist::label() const { return checked_data(data_).label; }
int Twist::dim() const { return checked_data(data_).dim; }
const std::vector<CMatrix>& Twist::images() const { return checked_data(data_).images; }
const CMatrix& Twist::inner_product() const { return checked_data(data_).inner; }
bool Twist::is_trivial() const { return checked_data(data_).trivial; }

CMatrix Twist::power(int generator, long long p) const {
  const Data& d = checked_data(data_);
  const auto g = static_cast<std::size_t>(generator);
  if (p >= -d.cache && p <= d.cache) return d.powers[g][static_cast<std::size_t>(p + d.cache)];
  return matrix_power(d.images[g], d.inverses[g], p);
}

CMatrix Twist::evaluate(const Word& w) const {
  CMatrix r = CMatrix::Identity(dim(), dim());
  for (const auto& s : w.syllables()) r = r * power(s.generator, s.power);
  return r;
}

void Twist::apply_left(const Word& w, CMatrix& block) const {
  const Data& d = checked_data(data_);
  if (d.trivial) return;
  const auto& syl = w.syllables();
  CMatrix tmp;
  for (auto it = syl.rbegin(); it != syl.rend(); ++it) {
    const auto g = static_cast<std::size_t>(it->generator);
    const long long p = it->power;
    if (p >= -d.cache && p <= d.cache) {
      tmp.noalias() = d.powers[g][static_cast<std::size_t>(p + d.cache)] * block;
    } else {
      tmp.noalias() = matrix_power(d.images[g], d.inverses[g], p) * block;
    }
    block.swap(tmp);
  }
}

double Twist::relation_defect(const FuchsianModel& model) const {
  double worst = 0.0;
  for (const Word& r : model.relators()) {
    // Rounding in the product scales with the product of the factor norms, not with the result.
    CMatrix v = CMatrix::Identity(dim(), dim());
    double scale = 1.0;
    for (const auto& syl : r.syllables()) {
      const CMatrix f = power(syl.generator, syl.power);
      v = v * f;
      scale *= std::max(1.0, op_norm(f));
    }
    worst = std::max(worst, max_abs(v - CMatrix::Identity(dim(), dim())) / scale);
  }
  return worst;
}

Twist make_twist(const FuchsianModel& model, std::string label, std::vector<CMatrix> images,
                 CMatrix inner_product, TwistOptions options) {
  const std::size_t ngen = model.generators().size();
  if (images.size() != ngen) {
    std::ostringstream os;
    os << "twist '" << label << "' has " << images.size() << " images, model " << model.name() << " has " << ngen
       << " generators";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  const Eigen::Index dim = images.empty() ? 1 : images.front().rows();
  if (dim < 1) fail(ErrorCode::InvalidArgument, "twist dimension must be positive");
  auto data = std::make_shared<Twist::Data>();
  data->label = std::move(label);
  data->dim = static_cast<int>(dim);
  for (std::size_t g = 0; g < images.size(); ++g) {
    const CMatrix& m = images[g];
    if (m.rows() != dim || m.cols() != dim)
      fail(ErrorCode::InvalidArgument, "image of generator " + model.generator_names()[g] + " has wrong shape");
    const double cond = condition_number(m);
    if (!std::isfinite(cond)) {
      fail(ErrorCode::InvalidArgument, "image of generator " + model.generator_names()[g] + " is not invertible");
    }
    if (cond > 1e14) {
      std::ostringstream os;
      os << "image of generator " << model.generator_names()[g] << " has condition number " << cond;
      fail(ErrorCode::IllConditioned, os.str());
    }
    data->inverses.push_back(m.inverse());
  }
  data->images = std::move(images);
  if (inner_product.size() == 0) inner_product = CMatrix::Identity(dim, dim);
  if (inner_product.rows() != dim || inner_product.cols() != dim)
    fail(ErrorCode::InvalidArgument, "inner product has wrong shape");
  if (max_abs(inner_product - inner_product.adjoint()) > 1e-12 * std::max(1.0, max_abs(inner_product)))
    fail(ErrorCode::InvalidArgument, "inner product is not Hermitian");
  Eigen::LLT<CMatrix> llt(inner_product);
  if (llt.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "inner product is not positive definite");
  data->inner = std::move(inner_product);

  data->trivial = dim == 1 && data->inner.isIdentity(0.0);
  for (const auto& m : data->images) data->trivial = data->trivial && m(0, 0) == Complex(1.0, 0.0);

  data->cache = std::max(0, options.power_cache);
  data->powers.resize(ngen);
  for (std::size_t g = 0; g < ngen; ++g) {
    auto& pw = data->powers[g];
    pw.assign(static_cast<std::size_t>(2 * data->cache + 1), CMatrix::Identity(dim, dim));
    for (int p = 1; p <= data->cache; ++p) {
      pw[static_cast<std::size_t>(data->cache + p)] = pw[static_cast<std::size_t>(data->cache + p - 1)] * data->images[g];
      pw[static_cast<std::size_t>(data->cache - p)] = pw[static_cast<std::size_t>(data->cache - p + 1)] * data->inverses[g];
    }
  }

  Twist t;
  t.data_ = std::move(data);
  if (options.check_relations) {
    const double defect = t.relation_defect(model);
    if (defect > options.tol_rel) {
      std::ostringstream os;
      os << "twist '" << t.label() << "' violates a relation of " << model.name() << " (defect " << defect << ")";
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
  return t;
}

Twist trivial_twist(const FuchsianModel& model) {
  std::vector<CMatrix> images(model.generators().size(), CMatrix::Identity(1, 1));
  return make_twist(model, "trivial", std::move(images));
}

CMatrix sym_power_matrix(const Moebius& g, int n) {
  // Column i holds the coefficients of (a e1 + c e2)^(n-i) (b e1 + d e2)^i in the basis e1^(n-j) e2^j.
  const auto sz = static_cast<Eigen::Index>(n + 1);
  CMatrix out = CMatrix::Zero(sz, sz);
  for (int i = 0; i <= n; ++i) {
    std::vector<double> poly{1.0};  // coefficients in powers of e2
    auto mul = [&poly](double x1, double x2) {
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k] += poly[k] * x1;
        next[k + 1] += poly[k] * x2;
      }
      poly = std::move(next);
    };
    for (int k = 0; k < n - i; ++k) mul(g.a(), g.c());
    for (int k = 0; k < i; ++k) mul(g.b(), g.d());
    for (int j = 0; j <= n; ++j) out(j, i) = poly[static_cast<std::size_t>(j)];
  }
  return out;
}

Twist sym_power_twist(const FuchsianModel& model, int m) {
  if (m < 0) fail(ErrorCode::InvalidArgument, "sym power must be nonnegative");
  if (m == 0) return trivial_twist(model);
  std::vector<CMatrix> images;
  for (const auto& g : model.generators()) images.push_back(sym_power_matrix(g, 2 * m));
  return make_twist(model, "sym:" + std::to_string(m), std::move(images));
}

Twist phase_twist(const FuchsianModel& model, double mu) {
  std::vector<CMatrix> images;
  auto scalar = [](Complex v) { return CMatrix::Constant(1, 1, v); };
  switch (model.kind()) {
    case GroupKind::Modular:
      images = {scalar(e2pi(-3.0 * mu)), scalar(e2pi(mu))};
      break;
    case GroupKind::Gamma2:
      images = {scalar(1.0), scalar(e2pi(mu))};
      break;
    case GroupKind::Gamma0:
      fail(ErrorCode::InvalidArgument, "phase twist is only built in for modular and gamma2");
  }
  std::ostringstream os;
  os.precision(17);
  os << "phase:" << mu;
  return make_twist(model, os.str(), std::move(images));
}

Twist builtin_twist(const FuchsianModel& model, std::string_view spec) {
  auto parse_number = [&](std::string_view text, auto& out) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      fail(ErrorCode::ConfigError, "malformed twist '" + std::string(spec) + "'");
  };
  if (spec == "trivial") return trivial_twist(model);
  if (spec.substr(0, 4) == "sym:") {
    int m = 0;
    parse_number(spec.substr(4), m);
    return sym_power_twist(model, m);
  }
  if (spec.substr(0, 6) == "phase:") {
    double mu = 0.0;
    parse_number(spec.substr(6), mu);
    return phase_twist(model, mu);
  }
  fail(ErrorCode::ConfigError, "unknown twist '" + std::string(spec) + "'");
}

NecmReport check_necm(const FuchsianModel& model, const Twist& chi, int word_length_bound, double tol_necm,
                      std::size_t max_witnesses) {
  struct Node {
    Word word;
    IntMatrix value;
    CMatrix image;
    int last_gen;
    int last_sign;
  };
  NecmReport report;
  const int ngen = static_cast<int>(model.generators().size());
  std::vector<IntMatrix> letters_exact;
  std::unordered_set<Moebius, MoebiusHash> seen{Moebius{}};
  std::vector<Node> frontier{{Word{}, IntMatrix{}, CMatrix::Identity(chi.dim(), chi.dim()), -1, 0}};
  for (int len = 1; len <= word_length_bound; ++len) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      for (int g = 0; g < ngen; ++g) {
        for (int sign : {1, -1}) {
          if (g == node.last_gen && sign == -node.last_sign) continue;
          const IntMatrix value = node.value * model.evaluate_exact(Word::letter(g, sign));
          const Moebius mv = to_moebius(value);
          if (!seen.insert(mv).second) continue;
          ++report.element_count;
          Node child{node.word, value, node.image * chi.power(g, sign), g, sign};
          child.word.append(g, sign);
          if (classify(mv) == ElementKind::Parabolic) {
            ++report.parabolic_count;
            const auto ev = eigenvalues_ld(child.image);
            const auto clusters = cluster_eigenvalues(ev, op_norm(child.image), 1e-7);
            double dev = 0.0;
            for (const auto& c : clusters) dev = std::max(dev, std::abs(std::abs(c.mean) - 1.0));
            report.max_deviation = std::max(report.max_deviation, dev);
            if (dev > tol_necm && report.witnesses.size() < max_witnesses)
              report.witnesses.push_back({child.word, mv, dev});
          }
          next.push_back(std::move(child));
        }
      }
    }
    frontier = std::move(next);
  }
  report.ok = report.max_deviation <= tol_necm;
  return report;
}

CMatrix cusp_monodromy(const FuchsianModel& model, const Twist& chi, int cusp) {
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  return chi.evaluate(model.word_for(cd.stabilizer_exact));
}

CMatrix cusp_monodromy_inverse(const FuchsianModel& model, const Twist& chi, int cusp) {
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  return chi.evaluate(model.word_for(inverse(cd.stabilizer_exact)));
}

Projection fixed_projection(const FuchsianModel& model, const Twist& chi, int cusp, double tol_rank) {
  const CMatrix m = cusp_monodromy(model, chi, cusp);
  const Eigen::Index n = m.rows();
  const CMatrix k = null_space(CMatrix::Identity(n, n) - m, tol_rank);
  Projection p;
  p.range = k;
  if (k.cols() == 0) {
    p.matrix = CMatrix::Zero(n, n);
    p.co_range = CMatrix(0, n);
    return p;
  }
  const CMatrix& h = chi.inner_product();
  const CMatrix gram = k.adjoint() * h * k;
  p.co_range = gram.inverse() * k.adjoint() * h;
  p.matrix = p.range * p.co_range;
  return p;
}

CMatrix JordanData::nilpotent(int size) {
  CMatrix n = CMatrix::Zero(size, size);
  for (int i = 0; i + 1 < size; ++i) n(i, i + 1) = 1.0;
  return n;
}

CMatrix JordanData::block_matrix() const {
  const Eigen::Index dim = basis.rows();
  CMatrix j = CMatrix::Zero(dim, dim);
  for (const auto& b : blocks) {
    j.block(b.offset, b.offset, b.size, b.size) =
        b.lambda * CMatrix::Identity(b.size, b.size) + nilpotent(b.size);
  }
  return j;
}

JordanData jordan(const CMatrix& m, const JordanOptions& opt) {
  const Eigen::Index dim = m.rows();
  if (dim == 0 || m.cols() != dim) fail(ErrorCode::InvalidArgument, "jordan needs a nonempty square matrix");
  const double norm = op_norm(m);
  const auto ev = eigenvalues_ld(m);
  auto clusters = cluster_eigenvalues(ev, norm, opt.tol_cluster);

  struct Resolved {
    Complex lambda;
    double mu;
    bool unit;
    int count;
  };
  std::vector<Resolved> resolved;
  for (const auto& c : clusters) {
    if (std::abs(c.mean) == 0.0) fail(ErrorCode::InvalidArgument, "jordan needs an invertible matrix");
    Resolved r{c.mean, phase_of(c.mean), false, c.count};
    if (std::abs(std::abs(c.mean) - 1.0) <= opt.unit_tol) {
      bool snapped = false;
      r.mu = snap_phase(r.mu, opt.snap_denominator, opt.snap_tol, snapped);
      r.unit = true;
      r.lambda = e2pi(r.mu);
    }
    resolved.push_back(r);
  }
  std::stable_sort(resolved.begin(), resolved.end(), [](const Resolved& a, const Resolved& b) {
    if (a.mu != b.mu) return a.mu < b.mu;
    return std::abs(a.lambda) < std::abs(b.lambda);
  });

  JordanData jd;
  jd.basis = CMatrix::Zero(dim, dim);
  int offset = 0;
  const CMatrix id = CMatrix::Identity(dim, dim);
  for (const auto& r : resolved) {
    const CMatrix a = m - r.lambda * id;
    const int mult = r.count;
    std::vector<CMatrix> ker(static_cast<std::size_t>(mult) + 2);
    std::vector<int> dims(static_cast<std::size_t>(mult) + 2, 0);
    ker[0] = CMatrix(dim, 0);
    CMatrix apow = id;
    int q = 0;
    for (int k = 1; k <= mult; ++k) {
      apow = apow * a;
      ker[static_cast<std::size_t>(k)] = null_space(apow, opt.tol_rank);
      dims[static_cast<std::size_t>(k)] = static_cast<int>(ker[static_cast<std::size_t>(k)].cols());
      if (dims[static_cast<std::size_t>(k)] >= mult) {
        q = k;
        break;
      }
    }
    if (q == 0 || dims[static_cast<std::size_t>(q)] != mult) {
      std::ostringstream os;
      os << "generalized eigenspace of " << r.lambda << " has dimension " << dims[static_cast<std::size_t>(std::max(q, mult))]
         << ", expected " << mult;
      fail(ErrorCode::IllConditioned, os.str());
    }
    dims[static_cast<std::size_t>(q) + 1] = dims[static_cast<std::size_t>(q)];

    std::vector<std::vector<CVector>> chains;  // chain[i] = e_{i+1}
    for (int k = q; k >= 1; --k) {
      const auto ku = static_cast<std::size_t>(k);
      const int ge_k = dims[ku] - dims[ku - 1];
      const int ge_k1 = dims[ku + 1] - dims[ku];
      const int need = ge_k - ge_k1;
      if (need <= 0) continue;
      CMatrix w(dim, ker[ku - 1].cols() + static_cast<Eigen::Index>(chains.size()));
      w.leftCols(ker[ku - 1].cols()) = ker[ku - 1];
      Eigen::Index col = ker[ku - 1].cols();
      for (const auto& ch : chains) w.col(col++) = ch[ku - 1];
      const CMatrix wb = column_space(w, 1e-10);
      const CMatrix resid = ker[ku] - wb * (wb.adjoint() * ker[ku]);
      Eigen::JacobiSVD<CMatrix> svd(resid, Eigen::ComputeThinU);
      for (int t = 0; t < need; ++t) {
        std::vector<CVector> chain(ku);
        chain[ku - 1] = svd.matrixU().col(t);
        for (int i = k - 1; i >= 1; --i) chain[static_cast<std::size_t>(i) - 1] = a * chain[static_cast<std::size_t>(i)];
        chains.push_back(std::move(chain));
      }
    }
    for (const auto& ch : chains) {
      JordanBlock b;
      b.lambda = r.lambda;
      b.size = static_cast<int>(ch.size());
      b.mu = r.mu;
      b.unit = r.unit;
      b.offset = offset;
      for (std::size_t i = 0; i < ch.size(); ++i) jd.basis.col(offset + static_cast<Eigen::Index>(i)) = ch[i];
      offset += b.size;
      jd.max_chain = std::max(jd.max_chain, b.size);
      jd.blocks.push_back(b);
    }
  }
  if (offset != dim) fail(ErrorCode::IllConditioned, "Jordan chains do not span the space");
  const double cond = condition_number(jd.basis);
  if (!(cond <= opt.max_condition)) {
    std::ostringstream os;
    os << "Jordan basis condition number " << cond << " exceeds " << opt.max_condition;
    fail(ErrorCode::IllConditioned, os.str());
  }
  jd.basis_inverse = jd.basis.inverse();
  const double resid = max_abs(jd.basis * jd.block_matrix() * jd.basis_inverse - m) / std::max(1.0, max_abs(m));
  if (!(resid <= opt.tol_jordan)) {
    std::ostringstream os;
    os << "Jordan reconstruction residual " << resid << " exceeds " << opt.tol_jordan;
    fail(ErrorCode::IllConditioned, os.str());
  }
  return jd;
}

CMatrix real_power(const JordanData& jd, double x) {
  const Eigen::Index dim = jd.basis.rows();
  CMatrix inner = CMatrix::Zero(dim, dim);
  for (const auto& b : jd.blocks) {
    if (!b.unit) fail(ErrorCode::InvalidArgument, "real_power needs eigenvalues of modulus 1");
    const CMatrix n = JordanData::nilpotent(b.size);
    CMatrix acc = CMatrix::Zero(b.size, b.size);
    CMatrix npow = CMatrix::Identity(b.size, b.size);
    Complex lam_inv_pow = 1.0;
    for (int k = 0; k < b.size; ++k) {
      acc += binom_real(x, k) * lam_inv_pow * npow;
      npow = npow * n;
      lam_inv_pow /= b.lambda;
    }
    inner.block(b.offset, b.offset, b.size, b.size) = e2pi(x * b.mu) * acc;
  }
  return jd.basis * inner * jd.basis_inverse;
}

CMatrix real_power(const FuchsianModel& model, const Twist& chi, int cusp, double x) {
  return real_power(jordan(cusp_monodromy_inverse(model, chi, cusp)), x);
}

}  // namespace eistwist
