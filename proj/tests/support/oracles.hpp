#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// evaluators it is compared against.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

inline long long totient(long long n) {
  long long result = n;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    result -= result / p;
  }
  if (n > 1) result -= result / n;
  return result;
}

// sum_{c <= c_max} phi(c) c^(-2s)
inline Complex totient_series(long long c_max, Complex s) {
  Complex sum = 0.0;
  for (long long c = 1; c <= c_max; ++c) {
    sum += static_cast<double>(totient(c)) * std::exp(-2.0 * s * std::log(static_cast<double>(c)));
  }
  return sum;
}

// Classical series over coprime (c, d) with c > 0 or (c, d) = (0, 1), restricted to |cz + d| <= radius.
inline Complex coprime_pair_sum(double x, double y, Complex s, double radius) {
  Complex sum = std::exp(s * std::log(y));
  const auto c_hi = static_cast<long long>(std::floor(radius / y));
  for (long long c = 1; c <= c_hi; ++c) {
    const double span = std::sqrt(std::max(0.0, radius * radius - (c * y) * (c * y)));
    const auto d_lo = static_cast<long long>(std::floor(-c * x - span)) - 1;
    const auto d_hi = static_cast<long long>(std::ceil(-c * x + span)) + 1;
    for (long long d = d_lo; d <= d_hi; ++d) {
      if (std::gcd(c, d) != 1) continue;
      const double u = c * x + d;
      const double n2 = u * u + (c * y) * (c * y);
      if (n2 > radius * radius) continue;
      sum += std::exp(s * std::log(y / n2));
    }
  }
  return sum;
}

// Number of coprime (c, d), c >= 1, with |c z + d| <= radius, plus the identity coset.
inline std::size_t coprime_pair_count(double x, double y, double radius) {
  std::size_t n = 1;
  const auto c_hi = static_cast<long long>(std::floor(radius / y));
  for (long long c = 1; c <= c_hi; ++c) {
    const auto d_lo = static_cast<long long>(std::floor(-c * x - radius)) - 1;
    const auto d_hi = static_cast<long long>(std::ceil(-c * x + radius)) + 1;
    for (long long d = d_lo; d <= d_hi; ++d) {
      if (std::gcd(c, d) != 1) continue;
      const double u = c * x + d;
      if (u * u + (c * y) * (c * y) <= radius * radius) ++n;
    }
  }
  return n;
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoid rule, which converges
// geometrically for this doubly exponentially decaying integrand.
inline Complex bessel_k_integral(Complex nu, double x) {
  const double h = 0.005;
  const double growth = std::abs(nu.real());
  Complex sum = 0.5 * std::exp(-x);
  for (int i = 1;; ++i) {
    const double t = i * h;
    const double log_mag = -x * std::cosh(t) + growth * t;
    if (log_mag < -800.0 || (t > 1.0 && log_mag < std::log(1e-300))) break;
    sum += std::exp(Complex(-x * std::cosh(t), 0.0)) * std::cosh(nu * t);
  }
  return h * sum;
}

inline double binom_product(double u, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= (u - j) / (j + 1);
  return r;
}

// Dirichlet-series value of zeta(3) / zeta(4) through the totient series.
inline double zeta3_over_zeta4(long long terms = 200000) { return totient_series(terms, 2.0).real(); }

}  // namespace oracle
