#pragma once

#include <optional>
#include <vector>

#include "eistwist/fuchsian.hpp"
#include "eistwist/linalg.hpp"
#include "eistwist/repjordan.hpp"

namespace eistwist {

struct EvalConfig {
  double radius = 2000.0;
  long long m_max = 2000;
  int t_max = 15;
  double c_max = 2000.0;
  // Re s below 1 + c1 - margin is rejected, Re s in [1 + c1 - margin, 1 + c1] is flagged.
  double margin = 0.25;
  // Growth exponent; fitted with estimate_c1 at c1_fit_radius when absent.
  std::optional<double> c1_hat;
  double c1_fit_radius = 80.0;
  // Coset radius factor applied to the shifted evaluation in automorphy_defect.
  double automorphy_enlargement = 1.25;
  int threads = 1;
  double tol_rank = 1e-9;
  double tol_q_form = 1e-8;
  JordanOptions jordan;
};

struct OperatorValue {
  CMatrix matrix;
  double tail_estimate = 0.0;
  bool near_abscissa = false;
  std::size_t terms = 0;
};

OperatorValue direct_eval(const FuchsianModel& model, const Twist& chi, int cusp, Point z, Complex s,
                          const EvalConfig& cfg = {});

OperatorValue total_eval(const FuchsianModel& model, const Twist& chi, Point z, Complex s,
                         const EvalConfig& cfg = {});

struct NuValue {
  Complex value;
  double tail = 0.0;
};

// sum_{|m| <= m_max} (Im w.(z+m))^s binom(m, k) lambda^(m-k) for a double coset with bottom row (c, d).
NuValue nu_direct(double c, double d, Point z, Complex s, int k, Complex lambda, long long m_max);
NuValue nu_direct(double c, double d, Point z, Complex s, int k, const JordanData& jd, int block, long long m_max);

// Poisson-summed form of nu_direct with Bessel modes |l - mu| <= t_max.
Complex nu_bessel(double c, double d, Point z, Complex s, int k, double mu, int t_max);

struct ModeTerm {
  double t = 0.0;
  CMatrix contribution;
};

// Coefficient of y^(1/2) * kernel_deriv(n, s, -t, y) in the mode t, from block j and power N_j^k.
struct PsiTerm {
  double t = 0.0;
  int block = 0;
  int k = 0;
  int n = 0;
  CMatrix coefficient;
};

// phi_q(s, x), the coefficient of y^(q - s) in the constant term (q odd).
struct PhiTerm {
  int q = 1;
  CMatrix coefficient;
};

struct DoubleCosetSummary {
  double c = 0.0;
  std::size_t count = 0;
  double weight = 0.0;
};

struct ExpansionReport {
  OperatorValue total;
  OperatorValue constant_term;
  std::vector<ModeTerm> mode_terms;
  std::vector<PhiTerm> phi_terms;
  std::vector<PsiTerm> psi_terms;
  std::vector<DoubleCosetSummary> per_c;
  JordanData jordan;
  // Coordinate-functional form, each nu_k attached to chain position k only; kept for comparison.
  CMatrix q_form_total;
  double q_form_discrepancy = 0.0;
  bool q_form_flagged = false;
  double c_tail = 0.0;
  double mode_tail = 0.0;
  std::size_t double_cosets = 0;
};

// E_{a,chi}(sigma_b z, s) through the expansion over R(a, b) with c <= c_max.
ExpansionReport fourier_eval(const FuchsianModel& model, const Twist& chi, int a, int b, Point z, Complex s,
                             const EvalConfig& cfg = {});

// Power-law part delta_ab y^s P_a + sum_q phi_q(s, x) y^(q - s) of the expansion.
OperatorValue constant_term(const FuchsianModel& model, const Twist& chi, int a, int b, Complex s, double x,
                            double y, const EvalConfig& cfg = {}, std::vector<PhiTerm>* phi_terms = nullptr);

struct GrowthFit {
  double fitted_exponent = 0.0;
  double scatter = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
  int cusp = 0;
};

GrowthFit estimate_c1(const FuchsianModel& model, const Twist& chi, int cusp, Point z, double radius);
// Maximum over the cusps with nonzero projection.
GrowthFit estimate_c1_all(const FuchsianModel& model, const Twist& chi, Point z, double radius);

struct AutomorphyResult {
  double defect = 0.0;
  double tail_bound = 0.0;
  double tail_z = 0.0;
  double tail_gz = 0.0;
};

// ||E(gamma z) - chi(gamma) E(z)|| / ||E(z)|| for the series at one cusp.
AutomorphyResult automorphy_defect(const FuchsianModel& model, const Twist& chi, const Word& gamma, int cusp,
                                   Point z, Complex s, const EvalConfig& cfg = {});

struct PeriodicityResult {
  // ||F(z+1) - F(z)|| / ||F(z)|| with F(z) = B_b(x) E_a(sigma_b z).
  double defect = 0.0;
  // ||E(sigma_b (z+1)) - E(sigma_b z)|| / ||E(sigma_b z)||.
  double plain_defect = 0.0;
  double tail = 0.0;
};

PeriodicityResult periodicity_defect(const FuchsianModel& model, const Twist& chi, int a, int b, Point z,
                                     Complex s, const EvalConfig& cfg = {});

}  // namespace eistwist
