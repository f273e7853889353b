#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "eistwist/fuchsian.hpp"
#include "eistwist/linalg.hpp"

namespace eistwist {

struct TwistOptions {
  double tol_rel = 1e-10;
  bool check_relations = true;
  // Cached powers chi(g)^p for |p| <= power_cache.
  int power_cache = 128;
};

class Twist {
 public:
  Twist() = default;

  const std::string& label() const;
  int dim() const;
  const std::vector<CMatrix>& images() const;
  const CMatrix& inner_product() const;
  bool is_trivial() const;

  CMatrix evaluate(const Word& w) const;
  // block <- chi(w) * block.
  void apply_left(const Word& w, CMatrix& block) const;
  CMatrix power(int generator, long long p) const;

  // max over relators r = g1^p1 ... gk^pk of ||chi(r) - I|| / prod max(1, ||chi(gi^pi)||).
  double relation_defect(const FuchsianModel& model) const;

  struct Data;

 private:
  friend Twist make_twist(const FuchsianModel&, std::string, std::vector<CMatrix>, CMatrix, TwistOptions);
  std::shared_ptr<const Data> data_;
};

// Validates dimensions, invertibility, the inner product and (optionally) the relations.
Twist make_twist(const FuchsianModel& model, std::string label, std::vector<CMatrix> images,
                 CMatrix inner_product = CMatrix(), TwistOptions options = {});

Twist trivial_twist(const FuchsianModel& model);

// Image of g on homogeneous polynomials of degree n in (e1, e2).
CMatrix sym_power_matrix(const Moebius& g, int n);

// The 2m-th symmetric power of the defining representation; m = 0 is the trivial twist.
Twist sym_power_twist(const FuchsianModel& model, int m);

// One-dimensional unitary character. modular: T -> e(mu), S -> e(-3 mu) (mu in Z/6);
// gamma2: A -> 1, B -> e(mu).
Twist phase_twist(const FuchsianModel& model, double mu);

// "trivial", "sym:m", "phase:mu".
Twist builtin_twist(const FuchsianModel& model, std::string_view spec);

struct NecmWitness {
  Word word;
  Moebius element;
  double deviation = 0.0;
};

struct NecmReport {
  double max_deviation = 0.0;
  std::vector<NecmWitness> witnesses;
  std::size_t parabolic_count = 0;
  std::size_t element_count = 0;
  bool ok = true;
};

NecmReport check_necm(const FuchsianModel& model, const Twist& chi, int word_length_bound,
                      double tol_necm = 1e-9, std::size_t max_witnesses = 16);

struct Projection {
  CMatrix matrix;
  // matrix = range * co_range; range has rank() columns.
  CMatrix range;
  CMatrix co_range;

  int rank() const { return static_cast<int>(range.cols()); }
};

CMatrix cusp_monodromy(const FuchsianModel& model, const Twist& chi, int cusp);
// chi(g_c^{-1}).
CMatrix cusp_monodromy_inverse(const FuchsianModel& model, const Twist& chi, int cusp);

Projection fixed_projection(const FuchsianModel& model, const Twist& chi, int cusp, double tol_rank = 1e-9);

struct JordanOptions {
  double tol_cluster = 1e-7;
  double tol_rank = 1e-7;
  double tol_jordan = 1e-8;
  double max_condition = 1e12;
  int snap_denominator = 24;
  double snap_tol = 1e-9;
  double unit_tol = 1e-8;
};

struct JordanBlock {
  Complex lambda;
  int size = 1;
  // lambda = e(mu) when unit.
  double mu = 0.0;
  bool unit = true;
  // Column offset of the block in the basis.
  int offset = 0;
};

struct JordanData {
  CMatrix basis;
  CMatrix basis_inverse;
  std::vector<JordanBlock> blocks;
  int max_chain = 1;

  CMatrix block_matrix() const;
  // Nilpotent part of block j (size n_j, ones on the superdiagonal).
  static CMatrix nilpotent(int size);
};

JordanData jordan(const CMatrix& m, const JordanOptions& options = {});

// B(x) = S (+)_j e(x mu_j) sum_k binom(x, k) lambda_j^{-k} N_j^k S^{-1}, the real power of
// the decomposed operator.
CMatrix real_power(const JordanData& jd, double x);
CMatrix real_power(const FuchsianModel& model, const Twist& chi, int cusp, double x);

}  // namespace eistwist
