#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eistwist/moebius.hpp"

namespace eistwist {

// Exact element of SL2(Z); the sign is not normalized.
struct IntMatrix {
  long long a = 1, b = 0, c = 0, d = 1;

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

IntMatrix operator*(const IntMatrix& g, const IntMatrix& h);
IntMatrix inverse(const IntMatrix& g);
Moebius to_moebius(const IntMatrix& g);
// Rounds the entries of g; empty if they are not integers or det != 1.
std::optional<IntMatrix> to_int_matrix(const Moebius& g);

struct Syllable {
  int generator = 0;
  long long power = 0;

  friend bool operator==(const Syllable&, const Syllable&) = default;
};

// A word in the generators of a model, stored as maximal syllables g^k.
class Word {
 public:
  Word() = default;
  explicit Word(const std::vector<Syllable>& syllables);

  static Word letter(int generator, long long power = 1);

  // Appends g^power, merging with the last syllable.
  void append(int generator, long long power);
  void append(const Word& w);

  Word inverse() const;
  const std::vector<Syllable>& syllables() const { return syl_; }
  bool empty() const { return syl_.empty(); }
  // Sum of |power| over syllables.
  long long length() const;

  friend Word operator*(Word lhs, const Word& rhs) {
    lhs.append(rhs);
    return lhs;
  }
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Syllable> syl_;
};

std::string format_word(const Word& w, const std::vector<std::string>& names);

struct CuspData {
  std::string label;
  BoundaryPoint representative;
  Moebius sigma;
  Moebius stabilizer_generator;
  int width = 1;
  // h in PSL2(Z) with h.∞ = representative; sigma = h * diag(sqrt(width), 1/sqrt(width)).
  IntMatrix lift;
  IntMatrix stabilizer_exact;
};

// One representative of Γ_c \ Γ. (c, d) is the bottom row of sigma^{-1} * element.
struct CosetRep {
  Moebius element;
  double c = 0.0;
  double d = 1.0;
};

struct DoubleCosetRep {
  double c = 0.0;
  double d = 0.0;
  Moebius omega;
  // The element of Γ with omega = sigma_a^{-1} * element * sigma_b.
  Moebius element;
};

enum class GroupKind { Modular, Gamma0, Gamma2 };

class FuchsianModel {
 public:
  const std::string& name() const;
  GroupKind kind() const;
  int level() const;

  const std::vector<Moebius>& generators() const;
  const std::vector<std::string>& generator_names() const;
  const std::vector<CuspData>& cusps() const;
  // Defining relations used to validate twists.
  const std::vector<Word>& relators() const;
  // Index in PSL2(Z).
  int index() const;

  bool contains(const Moebius& g) const;
  bool contains(const IntMatrix& g) const;

  // Throws NotInGroup.
  Word word_for(const Moebius& g) const;
  Word word_for(const IntMatrix& g) const;
  Moebius evaluate(const Word& w) const;
  IntMatrix evaluate_exact(const Word& w) const;

  // Same group with an empty cusp list.
  FuchsianModel without_cusps() const;

  // Coset action of PSL2(Z) on Γ \ PSL2(Z); index 0 is Γ itself.
  int coset_of(const IntMatrix& g) const;
  // Cusp whose T-orbit contains the coset, and the k with coset(lift * T^k) = coset.
  int cusp_of_coset(int coset) const;
  int orbit_position(int coset) const;

  struct Impl;

 private:
  friend FuchsianModel builtin_group(std::string_view, std::optional<int>);
  std::shared_ptr<const Impl> impl_;
};

// name in {modular, gamma0, gamma2}; parameter is the level for gamma0.
FuchsianModel builtin_group(std::string_view name, std::optional<int> parameter = std::nullopt);
// "modular", "gamma0:N", "gamma2".
FuchsianModel parse_group(std::string_view spec);

// Exact data of one coset visited by the streaming enumerators.
struct CosetVisit {
  IntMatrix element;
  double c = 0.0;
  double d = 1.0;
};

struct DoubleCosetVisit {
  IntMatrix element;
  double c = 0.0;
  double d = 0.0;
  Moebius omega;
};

// Largest integer C visited by for_each_coset at this radius.
long long coset_c_bound(const FuchsianModel& model, int cusp, double radius, Point z);

// Visits cosets with |c z + d| <= radius whose unnormalized bottom-left entry lies in
// [c_lo, c_hi], in lexicographic order. C = 0 is the identity coset.
void for_each_coset(const FuchsianModel& model, int cusp, double radius, Point z, long long c_lo,
                    long long c_hi, const std::function<void(const CosetVisit&)>& visit);

std::vector<CosetRep> coset_stream(const FuchsianModel& model, int cusp, double radius, Point z);

long long double_coset_c_bound(const FuchsianModel& model, int a, int b, double c_max);

// Visits R(a, b) ordered by (c, d) with unnormalized C in [c_lo, c_hi].
void for_each_double_coset(const FuchsianModel& model, int a, int b, long long c_lo, long long c_hi,
                           const std::function<void(const DoubleCosetVisit&)>& visit);

std::vector<DoubleCosetRep> double_cosets(const FuchsianModel& model, int a, int b, double c_max);

// Smallest |c| > 0 over sigma^{-1} Γ sigma, clamped below by 1.
double c_infinity(const FuchsianModel& model, int cusp);

// Reduced words up to max_length with their values, duplicates and the identity removed.
std::vector<std::pair<Word, Moebius>> word_enumerate(const FuchsianModel& model, int max_length);

}  // namespace eistwist
