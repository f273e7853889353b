#include "eistwist/fuchsian.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "eistwist/error.hpp"

namespace eistwist {

namespace {

constexpr IntMatrix kS{0, -1, 1, 0};
constexpr IntMatrix kT{1, 1, 0, 1};
constexpr int kGenS = 0;
constexpr int kGenT = 1;

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Nearest integer to a / b.
long long round_div(long long a, long long b) {
  if (b < 0) {
    a = -a;
    b = -b;
  }
  return floor_div(2 * a + b, 2 * b);
}

long long mod_pos(long long a, long long m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

struct ExtGcd {
  long long g, x, y;
};

// x*a + y*b = g >= 0.
ExtGcd ext_gcd(long long a, long long b) {
  long long old_r = a, r = b, old_x = 1, x = 0, old_y = 0, y = 1;
  while (r != 0) {
    const long long q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_x, x) = std::make_pair(x, old_x - q * x);
    std::tie(old_y, y) = std::make_pair(y, old_y - q * y);
  }
  if (old_r < 0) return {-old_r, -old_x, -old_y};
  return {old_r, old_x, old_y};
}

// [alpha beta; c d] in SL2(Z) for coprime (c, d).
IntMatrix complete_bottom_row(long long c, long long d) {
  const ExtGcd e = ext_gcd(d, c);  // x*d + y*c = 1
  return {e.x, -e.y, c, d};
}

IntMatrix t_power(long long k) { return {1, k, 0, 1}; }

bool is_plus_minus_identity(const IntMatrix& g) {
  return g.b == 0 && g.c == 0 && ((g.a == 1 && g.d == 1) || (g.a == -1 && g.d == -1));
}

IntMatrix int_power(IntMatrix g, long long p) {
  if (p < 0) {
    g = inverse(g);
    p = -p;
  }
  IntMatrix r;
  while (p > 0) {
    if (p & 1) r = r * g;
    g = g * g;
    p >>= 1;
  }
  return r;
}

// Word in S (generator 0) and T (generator 1) for g in SL2(Z), via the
// nearest-integer continued fraction of a/c.
Word sl2z_word(IntMatrix g) {
  Word out;
  while (g.c != 0) {
    const long long q = round_div(g.a, g.c);
    if (q != 0) {
      out.append(kGenT, q);
      g = {g.a - q * g.c, g.b - q * g.d, g.c, g.d};
    }
    out.append(kGenS, 1);
    g = {g.c, g.d, -g.a, -g.b};
  }
  out.append(kGenT, g.a == 1 ? g.b : -g.b);
  return out;
}

// Word in A = [1 2; 0 1] and B = [1 0; 2 1] for g in Γ(2).
Word gamma2_word(IntMatrix g) {
  Word out;
  while (g.c != 0) {
    if (std::llabs(g.a) > std::llabs(g.c)) {
      const long long q = round_div(g.a, 2 * g.c);
      out.append(0, q);
      g.a -= 2 * q * g.c;
      g.b -= 2 * q * g.d;
    } else {
      const long long q = round_div(g.c, 2 * g.a);
      out.append(1, q);
      g.c -= 2 * q * g.a;
      g.d -= 2 * q * g.b;
    }
  }
  const long long b = g.a == 1 ? g.b : -g.b;
  out.append(0, b / 2);
  return out;
}

struct SchreierEdge {
  int generator = -1;
  int sign = 1;
};

}  // namespace

IntMatrix operator*(const IntMatrix& g, const IntMatrix& h) {
  return {g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d, g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
}

IntMatrix inverse(const IntMatrix& g) { return {g.d, -g.b, -g.c, g.a}; }

Moebius to_moebius(const IntMatrix& g) {
  return {static_cast<double>(g.a), static_cast<double>(g.b), static_cast<double>(g.c),
          static_cast<double>(g.d)};
}

std::optional<IntMatrix> to_int_matrix(const Moebius& g) {
  long long e[4];
  const double v[4] = {g.a(), g.b(), g.c(), g.d()};
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(v[i]) || std::abs(v[i]) > 9.0e15) return std::nullopt;
    const double r = std::nearbyint(v[i]);
    if (std::abs(v[i] - r) > 1e-9) return std::nullopt;
    e[i] = static_cast<long long>(r);
  }
  IntMatrix m{e[0], e[1], e[2], e[3]};
  if (m.a * m.d - m.b * m.c != 1) return std::nullopt;
  return m;
}

Word::Word(const std::vector<Syllable>& syllables) {
  for (const auto& s : syllables) append(s.generator, s.power);
}

Word Word::letter(int generator, long long power) {
  Word w;
  w.append(generator, power);
  return w;
}

void Word::append(int generator, long long power) {
  if (power == 0) return;
  if (!syl_.empty() && syl_.back().generator == generator) {
    syl_.back().power += power;
    if (syl_.back().power == 0) syl_.pop_back();
    return;
  }
  syl_.push_back({generator, power});
}

void Word::append(const Word& w) {
  for (const auto& s : w.syl_) append(s.generator, s.power);
}

Word Word::inverse() const {
  Word w;
  for (auto it = syl_.rbegin(); it != syl_.rend(); ++it) w.append(it->generator, -it->power);
  return w;
}

long long Word::length() const {
  long long n = 0;
  for (const auto& s : syl_) n += std::llabs(s.power);
  return n;
}

std::string format_word(const Word& w, const std::vector<std::string>& names) {
  if (w.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (const auto& s : w.syllables()) {
    if (!first) os << '*';
    first = false;
    os << names.at(static_cast<std::size_t>(s.generator));
    if (s.power != 1) os << '^' << s.power;
  }
  return os.str();
}

struct FuchsianModel::Impl {
  std::string name;
  GroupKind kind = GroupKind::Modular;
  int level = 1;

  std::vector<Moebius> gens;
  std::vector<IntMatrix> gens_exact;
  std::vector<std::string> gen_names;
  std::vector<CuspData> cusps;
  std::vector<Word> relators;

  // Right action of S and T on Γ \ PSL2(Z).
  int index = 1;
  std::vector<int> act_s, act_t, act_tinv;
  std::vector<IntMatrix> transversal;
  std::vector<int> key_to_coset;
  std::vector<int> canon;  // gamma0: canonical code of (c mod N, d mod N)

  std::vector<int> orbit_id;
  std::vector<int> coset_cusp;
  std::vector<int> coset_pos;

  // gamma0: Schreier generators.
  std::vector<std::array<SchreierEdge, 2>> schreier;
  std::vector<Word> t_cycle;

  int key(const IntMatrix& g) const {
    switch (kind) {
      case GroupKind::Modular: return 0;
      case GroupKind::Gamma0: {
        const long long n = level;
        return canon[static_cast<std::size_t>(mod_pos(g.c, n) * n + mod_pos(g.d, n))];
      }
      case GroupKind::Gamma2:
        return static_cast<int>(mod_pos(g.a, 2) * 8 + mod_pos(g.b, 2) * 4 + mod_pos(g.c, 2) * 2 +
                                mod_pos(g.d, 2));
    }
    return 0;
  }

  int coset_of(const IntMatrix& g) const { return key_to_coset[static_cast<std::size_t>(key(g))]; }

  bool contains(const IntMatrix& g) const {
    switch (kind) {
      case GroupKind::Modular: return true;
      case GroupKind::Gamma0: return mod_pos(g.c, level) == 0;
      case GroupKind::Gamma2: return mod_pos(g.b, 2) == 0 && mod_pos(g.c, 2) == 0;
    }
    return false;
  }

  void push_edge(Word& out, int coset, int x) const {
    const SchreierEdge& e = schreier[static_cast<std::size_t>(coset)][static_cast<std::size_t>(x)];
    if (e.generator >= 0) out.append(e.generator, e.sign);
  }

  // Reidemeister-Schreier rewriting of a word in S, T read from coset `start`.
  Word rewrite(const Word& st, int& coset) const {
    Word out;
    for (const auto& syl : st.syllables()) {
      if (syl.generator == kGenS) {
        for (long long r = 0; r < std::llabs(syl.power); ++r) {
          push_edge(out, coset, 0);
          coset = act_s[static_cast<std::size_t>(coset)];
        }
        continue;
      }
      long long q = syl.power;
      const auto& cycle = t_cycle[static_cast<std::size_t>(coset)];
      const long long w = cusps_width_of(coset);
      const long long n = std::llabs(q);
      const long long full = n / w;
      const long long rem = n % w;
      if (full > 0 && !cycle.empty()) {
        const Word unit = q > 0 ? cycle : cycle.inverse();
        if (unit.syllables().size() == 1) {
          out.append(unit.syllables()[0].generator, unit.syllables()[0].power * full);
        } else {
          for (long long r = 0; r < full; ++r) out.append(unit);
        }
      }
      for (long long r = 0; r < rem; ++r) {
        if (q > 0) {
          push_edge(out, coset, 1);
          coset = act_t[static_cast<std::size_t>(coset)];
        } else {
          const int j = act_tinv[static_cast<std::size_t>(coset)];
          const SchreierEdge& e = schreier[static_cast<std::size_t>(j)][1];
          if (e.generator >= 0) out.append(e.generator, -e.sign);
          coset = j;
        }
      }
    }
    return out;
  }

  long long cusps_width_of(int coset) const {
    return cusps[static_cast<std::size_t>(coset_cusp[static_cast<std::size_t>(coset)])].width;
  }

  Word word_for(const IntMatrix& g) const {
    switch (kind) {
      case GroupKind::Modular: return sl2z_word(g);
      case GroupKind::Gamma2: return gamma2_word(g);
      case GroupKind::Gamma0: {
        int coset = 0;
        Word w = rewrite(sl2z_word(g), coset);
        if (coset != 0) fail(ErrorCode::NotInGroup, "Schreier rewriting did not return to the identity coset");
        return w;
      }
    }
    return {};
  }
};

namespace {

void build_coset_action(FuchsianModel::Impl& m, int key_space) {
  m.key_to_coset.assign(static_cast<std::size_t>(key_space), -1);
  m.transversal.clear();
  std::vector<IntMatrix> queue{IntMatrix{}};
  m.key_to_coset[static_cast<std::size_t>(m.key(IntMatrix{}))] = 0;
  m.transversal.push_back(IntMatrix{});
  for (std::size_t head = 0; head < m.transversal.size(); ++head) {
    for (const IntMatrix& x : {kS, kT}) {
      const IntMatrix g = m.transversal[head] * x;
      const int k = m.key(g);
      if (m.key_to_coset[static_cast<std::size_t>(k)] < 0) {
        m.key_to_coset[static_cast<std::size_t>(k)] = static_cast<int>(m.transversal.size());
        m.transversal.push_back(g);
      }
    }
  }
  m.index = static_cast<int>(m.transversal.size());
  m.act_s.resize(static_cast<std::size_t>(m.index));
  m.act_t.resize(static_cast<std::size_t>(m.index));
  m.act_tinv.resize(static_cast<std::size_t>(m.index));
  for (int i = 0; i < m.index; ++i) {
    const auto& t = m.transversal[static_cast<std::size_t>(i)];
    m.act_s[static_cast<std::size_t>(i)] = m.coset_of(t * kS);
    m.act_t[static_cast<std::size_t>(i)] = m.coset_of(t * kT);
    m.act_tinv[static_cast<std::size_t>(i)] = m.coset_of(t * inverse(kT));
  }
}

std::string cusp_label(long long a, long long c) {
  if (c == 0) return "inf";
  if (c == 1) return std::to_string(a);
  return std::to_string(a) + "/" + std::to_string(c);
}

void build_cusps(FuchsianModel::Impl& m) {
  const auto n = static_cast<std::size_t>(m.index);
  m.orbit_id.assign(n, -1);
  int orbits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.orbit_id[i] >= 0) continue;
    int j = static_cast<int>(i);
    while (m.orbit_id[static_cast<std::size_t>(j)] < 0) {
      m.orbit_id[static_cast<std::size_t>(j)] = orbits;
      j = m.act_t[static_cast<std::size_t>(j)];
    }
    ++orbits;
  }
  m.coset_cusp.assign(n, -1);
  m.coset_pos.assign(n, -1);
  std::vector<bool> taken(static_cast<std::size_t>(orbits), false);

  auto add_candidate = [&](long long a, long long c) {
    IntMatrix h;
    if (c == 0) {
      h = IntMatrix{};
    } else {
      const long long d = mod_pos(ext_gcd(a, c).x, c);
      h = {a, (a * d - 1) / c, c, d};
    }
    const int start = m.coset_of(h);
    const int orbit = m.orbit_id[static_cast<std::size_t>(start)];
    if (taken[static_cast<std::size_t>(orbit)]) return;
    taken[static_cast<std::size_t>(orbit)] = true;
    const int cusp_index = static_cast<int>(m.cusps.size());
    int width = 0;
    for (int j = start; m.coset_cusp[static_cast<std::size_t>(j)] < 0; j = m.act_t[static_cast<std::size_t>(j)]) {
      m.coset_cusp[static_cast<std::size_t>(j)] = cusp_index;
      m.coset_pos[static_cast<std::size_t>(j)] = width++;
    }
    CuspData cd;
    cd.label = cusp_label(a, c);
    cd.representative = c == 0 ? BoundaryPoint{1.0, 0.0}
                               : BoundaryPoint{static_cast<double>(a), static_cast<double>(c)};
    cd.width = width;
    cd.lift = h;
    cd.stabilizer_exact = h * t_power(width) * inverse(h);
    cd.stabilizer_generator = to_moebius(cd.stabilizer_exact);
    const double sw = std::sqrt(static_cast<double>(width));
    cd.sigma = Moebius(static_cast<double>(h.a) * sw, static_cast<double>(h.b) / sw,
                       static_cast<double>(h.c) * sw, static_cast<double>(h.d) / sw);
    m.cusps.push_back(cd);
  };

  add_candidate(1, 0);
  int found = 1;
  for (long long c = 1; found < orbits; ++c) {
    for (long long a = 0; a <= c && found < orbits; ++a) {
      if (c > 1 && (a == 0 || a == c)) continue;
      if (std::gcd(a, c) != 1) continue;
      const std::size_t before = m.cusps.size();
      add_candidate(a, c);
      if (m.cusps.size() > before) ++found;
    }
  }
}

void build_schreier(FuchsianModel::Impl& m) {
  const auto n = static_cast<std::size_t>(m.index);
  m.schreier.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (int x = 0; x < 2; ++x) {
      const IntMatrix letter = x == 0 ? kS : kT;
      const int j = x == 0 ? m.act_s[i] : m.act_t[i];
      const IntMatrix e = m.transversal[i] * letter * inverse(m.transversal[static_cast<std::size_t>(j)]);
      if (is_plus_minus_identity(e)) continue;
      const Moebius em = to_moebius(e);
      const Moebius einv = em.inverse();
      SchreierEdge edge;
      for (std::size_t g = 0; g < m.gens.size(); ++g) {
        if (m.gens[g] == em) {
          edge = {static_cast<int>(g), 1};
          break;
        }
        if (m.gens[g] == einv) {
          edge = {static_cast<int>(g), -1};
          break;
        }
      }
      if (edge.generator < 0) {
        edge = {static_cast<int>(m.gens.size()), 1};
        m.gens.push_back(em);
        m.gens_exact.push_back(e);
        m.gen_names.push_back("g" + std::to_string(m.gens.size()));
      }
      m.schreier[i][static_cast<std::size_t>(x)] = edge;
    }
  }
}

void build_t_cycles(FuchsianModel::Impl& m) {
  const auto n = static_cast<std::size_t>(m.index);
  m.t_cycle.assign(n, Word{});
  for (std::size_t i = 0; i < n; ++i) {
    Word w;
    int j = static_cast<int>(i);
    const long long width = m.cusps_width_of(static_cast<int>(i));
    for (long long k = 0; k < width; ++k) {
      m.push_edge(w, j, 1);
      j = m.act_t[static_cast<std::size_t>(j)];
    }
    m.t_cycle[i] = w;
  }
}

void build_gamma0_relators(FuchsianModel::Impl& m) {
  const Word s2 = Word::letter(kGenS, 2);
  Word st3;
  for (int r = 0; r < 3; ++r) {
    st3.append(kGenS, 1);
    st3.append(kGenT, 1);
  }
  for (int i = 0; i < m.index; ++i) {
    for (const Word* rel : {&s2, static_cast<const Word*>(&st3)}) {
      // Rewrite letter by letter so S^2 is not collapsed before rewriting.
      Word out;
      int coset = i;
      for (const auto& syl : rel->syllables()) {
        for (long long r = 0; r < syl.power; ++r) out.append(m.rewrite(Word::letter(syl.generator, 1), coset));
      }
      if (!out.empty() && std::find(m.relators.begin(), m.relators.end(), out) == m.relators.end())
        m.relators.push_back(out);
    }
  }
}

}  // namespace

FuchsianModel builtin_group(std::string_view name, std::optional<int> parameter) {
  auto impl = std::make_shared<FuchsianModel::Impl>();
  if (name == "modular") {
    impl->name = "modular";
    impl->kind = GroupKind::Modular;
    impl->gens_exact = {kS, kT};
    impl->gen_names = {"S", "T"};
    build_coset_action(*impl, 1);
  } else if (name == "gamma2") {
    impl->name = "gamma2";
    impl->kind = GroupKind::Gamma2;
    impl->level = 2;
    impl->gens_exact = {IntMatrix{1, 2, 0, 1}, IntMatrix{1, 0, 2, 1}};
    impl->gen_names = {"A", "B"};
    build_coset_action(*impl, 16);
  } else if (name == "gamma0") {
    if (!parameter) fail(ErrorCode::UnsupportedLevel, "gamma0 requires a level");
    const int n = *parameter;
    if (n < 2 || n > 25) fail(ErrorCode::UnsupportedLevel, "gamma0 level must lie in [2, 25], got " + std::to_string(n));
    impl->name = "gamma0:" + std::to_string(n);
    impl->kind = GroupKind::Gamma0;
    impl->level = n;
    impl->canon.assign(static_cast<std::size_t>(n * n), 0);
    for (int c = 0; c < n; ++c) {
      for (int d = 0; d < n; ++d) {
        int best = c * n + d;
        for (int u = 1; u < n; ++u) {
          if (std::gcd(u, n) != 1) continue;
          best = std::min(best, ((u * c) % n) * n + (u * d) % n);
        }
        impl->canon[static_cast<std::size_t>(c * n + d)] = best;
      }
    }
    build_coset_action(*impl, n * n);
  } else {
    fail(ErrorCode::UnknownGroup, "unknown group '" + std::string(name) + "'");
  }

  for (const auto& g : impl->gens_exact) impl->gens.push_back(to_moebius(g));
  build_cusps(*impl);

  switch (impl->kind) {
    case GroupKind::Modular: {
      Word st3;
      for (int r = 0; r < 3; ++r) {
        st3.append(kGenS, 1);
        st3.append(kGenT, 1);
      }
      impl->relators = {Word::letter(kGenS, 2), st3};
      break;
    }
    case GroupKind::Gamma2: break;  // free on A, B
    case GroupKind::Gamma0:
      build_schreier(*impl);
      build_t_cycles(*impl);
      build_gamma0_relators(*impl);
      break;
  }

  FuchsianModel model;
  model.impl_ = std::move(impl);
  return model;
}

FuchsianModel parse_group(std::string_view spec) {
  if (spec == "modular" || spec == "gamma2") return builtin_group(spec);
  constexpr std::string_view prefix = "gamma0:";
  if (spec.substr(0, prefix.size()) == prefix) {
    const std::string_view num = spec.substr(prefix.size());
    int n = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
    if (ec != std::errc{} || ptr != num.data() + num.size())
      fail(ErrorCode::ConfigError, "malformed gamma0 level in '" + std::string(spec) + "'");
    return builtin_group("gamma0", n);
  }
  if (spec == "gamma0") return builtin_group("gamma0");
  fail(ErrorCode::UnknownGroup, "unknown group '" + std::string(spec) + "'");
}

const std::string& FuchsianModel::name() const { return impl_->name; }
GroupKind FuchsianModel::kind() const { return impl_->kind; }
int FuchsianModel::level() const { return impl_->level; }
const std::vector<Moebius>& FuchsianModel::generators() const { return impl_->gens; }
const std::vector<std::string>& FuchsianModel::generator_names() const { return impl_->gen_names; }
const std::vector<CuspData>& FuchsianModel::cusps() const { return impl_->cusps; }
const std::vector<Word>& FuchsianModel::relators() const { return impl_->relators; }
int FuchsianModel::index() const { return impl_->index; }

bool FuchsianModel::contains(const IntMatrix& g) const {
  return g.a * g.d - g.b * g.c == 1 && impl_->contains(g);
}

bool FuchsianModel::contains(const Moebius& g) const {
  const auto m = to_int_matrix(g);
  return m && contains(*m);
}

Word FuchsianModel::word_for(const IntMatrix& g) const {
  if (!contains(g)) fail(ErrorCode::NotInGroup, "element is not in " + impl_->name);
  return impl_->word_for(g);
}

Word FuchsianModel::word_for(const Moebius& g) const {
  const auto m = to_int_matrix(g);
  if (!m) {
    std::ostringstream os;
    os << "element " << g << " is not an integral unimodular matrix";
    fail(ErrorCode::NotInGroup, os.str());
  }
  return word_for(*m);
}

IntMatrix FuchsianModel::evaluate_exact(const Word& w) const {
  IntMatrix r;
  for (const auto& s : w.syllables()) r = r * int_power(impl_->gens_exact.at(static_cast<std::size_t>(s.generator)), s.power);
  return r;
}

Moebius FuchsianModel::evaluate(const Word& w) const { return to_moebius(evaluate_exact(w)); }

FuchsianModel FuchsianModel::without_cusps() const {
  auto copy = std::make_shared<Impl>(*impl_);
  copy->cusps.clear();
  copy->name += "/nocusps";
  FuchsianModel m;
  m.impl_ = std::move(copy);
  return m;
}

int FuchsianModel::coset_of(const IntMatrix& g) const { return impl_->coset_of(g); }
int FuchsianModel::cusp_of_coset(int coset) const { return impl_->coset_cusp.at(static_cast<std::size_t>(coset)); }
int FuchsianModel::orbit_position(int coset) const { return impl_->coset_pos.at(static_cast<std::size_t>(coset)); }

long long coset_c_bound(const FuchsianModel& model, int cusp, double radius, Point z) {
  const double w = model.cusps().at(static_cast<std::size_t>(cusp)).width;
  return static_cast<long long>(std::floor(radius / std::sqrt(w) / z.y));
}

void for_each_coset(const FuchsianModel& model, int cusp, double radius, Point z, long long c_lo,
                    long long c_hi, const std::function<void(const CosetVisit&)>& visit) {
  const CuspData& cd = model.cusps().at(static_cast<std::size_t>(cusp));
  const double sw = std::sqrt(static_cast<double>(cd.width));
  const double r = radius / sw;
  const double r2 = r * r;
  const bool modular = model.kind() == GroupKind::Modular;
  c_lo = std::max(c_lo, 0LL);
  c_hi = std::min(c_hi, coset_c_bound(model, cusp, radius, z));
  for (long long C = c_lo; C <= c_hi; ++C) {
    if (C == 0) {
      if (model.cusp_of_coset(0) != cusp) continue;
      const long long k = model.orbit_position(0);
      visit({cd.lift * t_power(k), 0.0, sw});
      continue;
    }
    const double cx = static_cast<double>(C) * z.x;
    const double cy = static_cast<double>(C) * z.y;
    const double rem = r2 - cy * cy;
    if (rem < 0.0) continue;
    const double s = std::sqrt(rem);
    const auto d_lo = static_cast<long long>(std::ceil(-cx - s)) - 1;
    const auto d_hi = static_cast<long long>(std::floor(-cx + s)) + 1;
    for (long long D = d_lo; D <= d_hi; ++D) {
      const double u = cx + static_cast<double>(D);
      if (u * u + cy * cy > r2) continue;
      if (std::gcd(C, D) != 1) continue;
      const IntMatrix g0 = complete_bottom_row(C, D);
      if (modular) {
        visit({g0, static_cast<double>(C), static_cast<double>(D)});
        continue;
      }
      const int coset = model.coset_of(inverse(g0));
      if (model.cusp_of_coset(coset) != cusp) continue;
      const long long k = model.orbit_position(coset);
      visit({cd.lift * t_power(k) * g0, sw * static_cast<double>(C), sw * static_cast<double>(D)});
    }
  }
}

std::vector<CosetRep> coset_stream(const FuchsianModel& model, int cusp, double radius, Point z) {
  std::vector<CosetRep> out;
  for_each_coset(model, cusp, radius, z, 0, coset_c_bound(model, cusp, radius, z),
                 [&](const CosetVisit& v) { out.push_back({to_moebius(v.element), v.c, v.d}); });
  return out;
}

long long double_coset_c_bound(const FuchsianModel& model, int a, int b, double c_max) {
  const double wa = model.cusps().at(static_cast<std::size_t>(a)).width;
  const double wb = model.cusps().at(static_cast<std::size_t>(b)).width;
  return static_cast<long long>(std::floor(c_max / std::sqrt(wa * wb) * (1.0 + 1e-15)));
}

void for_each_double_coset(const FuchsianModel& model, int a, int b, long long c_lo, long long c_hi,
                           const std::function<void(const DoubleCosetVisit&)>& visit) {
  const CuspData& ca = model.cusps().at(static_cast<std::size_t>(a));
  const CuspData& cb = model.cusps().at(static_cast<std::size_t>(b));
  const long long wa = ca.width;
  const long long wb = cb.width;
  const double swa = std::sqrt(static_cast<double>(wa));
  const double swb = std::sqrt(static_cast<double>(wb));
  const IntMatrix hb_inv = inverse(cb.lift);
  const bool modular = model.kind() == GroupKind::Modular;
  for (long long C = std::max(c_lo, 1LL); C <= c_hi; ++C) {
    for (long long D = 0; D < wb * C; ++D) {
      if (std::gcd(C, D) != 1) continue;
      const IntMatrix g0 = complete_bottom_row(C, D);
      long long k = 0;
      if (!modular) {
        const int coset = model.coset_of(cb.lift * inverse(g0));
        if (model.cusp_of_coset(coset) != a) continue;
        k = model.orbit_position(coset);
      }
      // T^k' g0 with k' = k mod wa and top-left entry in [0, wa*C).
      const long long p0 = g0.a + k * C;
      const long long m = -floor_div(p0, wa * C);
      const long long kk = k + m * wa;
      const IntMatrix mat{g0.a + kk * C, g0.b + kk * D, C, D};
      DoubleCosetVisit v;
      v.element = ca.lift * mat * hb_inv;
      v.c = static_cast<double>(C) * swa * swb;
      v.d = static_cast<double>(D) * swa / swb;
      v.omega = Moebius(static_cast<double>(mat.a) * swb / swa, static_cast<double>(mat.b) / (swa * swb), v.c, v.d);
      visit(v);
    }
  }
}

std::vector<DoubleCosetRep> double_cosets(const FuchsianModel& model, int a, int b, double c_max) {
  std::vector<DoubleCosetRep> out;
  for_each_double_coset(model, a, b, 1, double_coset_c_bound(model, a, b, c_max),
                        [&](const DoubleCosetVisit& v) { out.push_back({v.c, v.d, v.omega, to_moebius(v.element)}); });
  return out;
}

double c_infinity(const FuchsianModel& model, int cusp) {
  double best = 0.0;
  for (long long C = 1; C <= 4096 && best == 0.0; ++C) {
    for_each_double_coset(model, cusp, cusp, C, C, [&](const DoubleCosetVisit& v) {
      if (best == 0.0) best = v.c;
    });
  }
  if (best == 0.0) fail(ErrorCode::InsufficientData, "no non-stabilizer element found");
  return std::max(1.0, best);
}

std::vector<std::pair<Word, Moebius>> word_enumerate(const FuchsianModel& model, int max_length) {
  struct Node {
    Word word;
    IntMatrix value;
    int last_gen;
    int last_sign;
  };
  std::vector<std::pair<Word, Moebius>> out;
  std::unordered_set<Moebius, MoebiusHash> seen{Moebius{}};
  std::vector<Node> frontier{{Word{}, IntMatrix{}, -1, 0}};
  const int ngen = static_cast<int>(model.generators().size());
  for (int len = 1; len <= max_length; ++len) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      for (int g = 0; g < ngen; ++g) {
        for (int sign : {1, -1}) {
          if (g == node.last_gen && sign == -node.last_sign) continue;
          IntMatrix gm = model.evaluate_exact(Word::letter(g, sign));
          IntMatrix value = node.value * gm;
          const Moebius mv = to_moebius(value);
          if (!seen.insert(mv).second) continue;
          Word w = node.word;
          w.append(g, sign);
          out.emplace_back(w, mv);
          next.push_back({std::move(w), value, g, sign});
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace eistwist
