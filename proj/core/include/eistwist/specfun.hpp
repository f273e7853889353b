#pragma once

#include <complex>
#include <vector>

namespace eistwist {

using Complex = std::complex<double>;

// e(z) = exp(2 pi i z).
Complex e2pi(Complex z);
Complex e2pi(double x);

// Coefficients b_0..b_k of u -> binom(u - a, k) in powers of u.
std::vector<double> stirling_b(double a, int k);

// Generalized binomial x (x-1) ... (x-k+1) / k!.
double binom_real(double x, int k);
Complex binom_real(Complex x, int k);

Complex gamma(Complex s);
Complex log_gamma(Complex s);
// 1/Gamma, entire; zero at the poles of Gamma.
Complex rgamma(Complex s);

// Modified Bessel function of the second kind for complex order and real x > 0.
Complex bessel_k(Complex nu, double x);

// n-th derivative in a of |a|^(s-1/2) K_(s-1/2)(2 pi |a| y) at a = t (t != 0).
Complex kernel_deriv(int n, Complex s, double t, double y);

struct PhiArgs {
  int r = 0;
  double a = 0.0;
  double y = 1.0;
  Complex s = 2.0;
};

// Closed form of  integral over R of x^r e(a x) / (x^2 + y^2)^s dx.
Complex phi(const PhiArgs& args);

struct PhiQuadResult {
  Complex value;
  double error = 0.0;
};

// Quadrature of the same integral (a Gaussian-moment t-integral for a != 0); used as an oracle for phi.
PhiQuadResult phi_quad(const PhiArgs& args, double abs_tol = 1e-10);

}  // namespace eistwist
