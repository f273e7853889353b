#include "eistwist/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eistwist/error.hpp"
#include "eistwist/quadrature.hpp"

namespace eistwist {

namespace {

using std::numbers::pi;

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
constexpr std::array<double, 30> kRecipGamma = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
};

bool is_pole(Complex s) {
  return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

// log Gamma(z) for Re z >= 1/2.
Complex log_gamma_lanczos(Complex z) {
  z -= 1.0;
  Complex x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[static_cast<std::size_t>(i)] / (z + static_cast<double>(i));
  const Complex t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// Temme's auxiliary functions for |mu| <= 1/2 (complex):
// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
void temme_gammas(Complex mu, Complex& gam1, Complex& gam2, Complex& gampl, Complex& gammi) {
  if (std::abs(mu) <= 0.6) {
    // 1/Gamma(1+z) = sum_k c_{k+1} z^k.
    Complex even = 0.0, odd = 0.0, pw = 1.0;
    for (std::size_t k = 0; k < kRecipGamma.size(); ++k) {
      if (k % 2 == 0) {
        even += kRecipGamma[k] * pw;
      } else {
        odd += kRecipGamma[k] * pw;
      }
      if (k % 2 == 1) pw *= mu * mu;
    }
    // even = sum_{k even} c_{k+1} mu^k, odd = sum_{k odd} c_{k+1} mu^{k-1}
    gam2 = even;
    gam1 = -odd;
    gampl = gam2 - mu * gam1;
    gammi = gam2 + mu * gam1;
    return;
  }
  gampl = rgamma(1.0 + mu);
  gammi = rgamma(1.0 - mu);
  gam1 = (gammi - gampl) / (2.0 * mu);
  gam2 = 0.5 * (gammi + gampl);
}

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 200000;

// K_mu and K_{mu+1} for |Re mu| <= 1/2 and x <= 2 (Temme's series).
void bessel_k_temme(Complex mu, double x, Complex& kmu, Complex& kmu1) {
  const double x2 = 0.5 * x;
  const Complex pimu = pi * mu;
  const Complex fact = std::abs(pimu) < 1e-12 ? Complex(1.0) : pimu / std::sin(pimu);
  const double d = -std::log(x2);
  const Complex e = mu * d;
  const Complex fact2 = std::abs(e) < 1e-12 ? Complex(1.0) : std::sinh(e) / e;
  Complex gam1, gam2, gampl, gammi;
  temme_gammas(mu, gam1, gam2, gampl, gammi);
  Complex ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  Complex sum = ff;
  const Complex ee = std::exp(e);
  Complex p = 0.5 * ee / gampl;
  Complex q = 0.5 / (ee * gammi);
  double c = 1.0;
  const double dd = x2 * x2;
  Complex sum1 = p;
  const Complex mu2 = mu * mu;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double di = i;
    ff = (di * ff + p + q) / (di * di - mu2);
    c *= dd / di;
    p /= (di - mu);
    q /= (di + mu);
    const Complex del = c * ff;
    sum += del;
    const Complex del1 = c * (p - di * ff);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * kEps && std::abs(del1) < std::abs(sum1) * kEps) break;
  }
  kmu = sum;
  kmu1 = sum1 * (2.0 / x);
}

// K_mu and K_{mu+1} for |Re mu| <= 1/2 and x > 2 (Steed's continued fraction with Temme's normalization).
void bessel_k_cf2(Complex mu, double x, Complex& kmu, Complex& kmu1) {
  const Complex mu2 = mu * mu;
  Complex b = 2.0 * (1.0 + x);
  Complex d = 1.0 / b;
  Complex h = d;
  Complex delh = d;
  Complex q1 = 0.0;
  Complex q2 = 1.0;
  const Complex a1 = 0.25 - mu2;
  Complex q = a1;
  Complex c = a1;
  Complex a = -a1;
  Complex s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / static_cast<double>(i);
    const Complex qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    // c grows and q_k shrinks geometrically; rescale to keep both representable.
    if (std::abs(c) > 1e100) {
      c *= 1e-100;
      q1 *= 1e100;
      q2 *= 1e100;
    }
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const Complex dels = q * delh;
    s += dels;
    if (std::abs(dels) < std::abs(s) * kEps && std::abs(delh) < std::abs(h) * kEps) break;
  }
  h = a1 * h;
  kmu = std::sqrt(pi / (2.0 * x)) * std::exp(-x) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

}  // namespace

Complex e2pi(Complex z) { return std::exp(Complex(0.0, 2.0 * pi) * z); }

Complex e2pi(double x) {
  // Reduce first so large arguments keep full precision in the phase.
  const double f = x - std::nearbyint(x);
  return {std::cos(2.0 * pi * f), std::sin(2.0 * pi * f)};
}

std::vector<double> stirling_b(double a, int k) {
  std::vector<double> coef{1.0};
  for (int j = 0; j < k; ++j) {
    // multiply by (u - a - j) / (j + 1)
    const double root = a + j;
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t p = 0; p < coef.size(); ++p) {
      next[p + 1] += coef[p];
      next[p] -= root * coef[p];
    }
    for (double& v : next) v /= static_cast<double>(j + 1);
    coef = std::move(next);
  }
  return coef;
}

double binom_real(double x, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= (x - j) / static_cast<double>(j + 1);
  return r;
}

Complex binom_real(Complex x, int k) {
  Complex r = 1.0;
  for (int j = 0; j < k; ++j) r *= (x - static_cast<double>(j)) / static_cast<double>(j + 1);
  return r;
}

Complex log_gamma(Complex s) {
  if (is_pole(s)) fail(ErrorCode::PoleAt, "log_gamma pole at " + std::to_string(s.real()));
  if (s.real() >= 0.5) return log_gamma_lanczos(s);
  return std::log(pi) - std::log(std::sin(pi * s)) - log_gamma_lanczos(1.0 - s);
}

Complex gamma(Complex s) {
  if (is_pole(s)) fail(ErrorCode::PoleAt, "gamma pole at " + std::to_string(s.real()));
  if (s.real() >= 0.5) return std::exp(log_gamma_lanczos(s));
  return pi / (std::sin(pi * s) * std::exp(log_gamma_lanczos(1.0 - s)));
}

Complex rgamma(Complex s) {
  if (is_pole(s)) return 0.0;
  if (s.real() >= 0.5) return std::exp(-log_gamma_lanczos(s));
  return std::sin(pi * s) * std::exp(log_gamma_lanczos(1.0 - s)) / pi;
}

Complex bessel_k(Complex nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::InvalidArgument, "bessel_k needs x > 0");
  if (nu.real() < 0.0) nu = -nu;
  const long n = std::lround(nu.real());
  const Complex mu = nu - static_cast<double>(n);
  Complex k0, k1;
  if (x <= 2.0) {
    bessel_k_temme(mu, x, k0, k1);
  } else {
    bessel_k_cf2(mu, x, k0, k1);
  }
  Complex result = k0;
  if (n >= 1) {
    for (long k = 1; k < n; ++k) {
      const Complex next = k0 + 2.0 * (mu + static_cast<double>(k)) / x * k1;
      k0 = k1;
      k1 = next;
    }
    result = k1;
  }
  if (!std::isfinite(result.real()) || !std::isfinite(result.imag())) {
    std::ostringstream os;
    os << "K_nu(x) overflows for nu = " << nu << ", x = " << x;
    fail(ErrorCode::Overflow, os.str());
  }
  if (result == 0.0) {
    std::ostringstream os;
    os << "K_nu(x) underflows for nu = " << nu << ", x = " << x;
    fail(ErrorCode::Underflow, os.str());
  }
  return result;
}

Complex kernel_deriv(int n, Complex s, double t, double y) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "kernel_deriv order must be nonnegative");
  if (t == 0.0) fail(ErrorCode::InvalidArgument, "kernel_deriv is undefined at t = 0");
  const Complex nu = s - 0.5;
  const double beta = 2.0 * pi * y;
  const double a = std::abs(t);
  const double w = beta * a;

  // d^n/dw^n [w^nu K_nu(w)] = sum coef[p][j] w^p h_{nu-j}(w), h_m(w) = w^m K_m(w),
  // from h_m' = -w h_{m-1}.
  const auto size = static_cast<std::size_t>(n + 2);
  std::vector<std::vector<double>> coef(size, std::vector<double>(size, 0.0));
  coef[0][0] = 1.0;
  for (int step = 0; step < n; ++step) {
    std::vector<std::vector<double>> next(size, std::vector<double>(size, 0.0));
    for (std::size_t p = 0; p < size; ++p) {
      for (std::size_t j = 0; j < size; ++j) {
        const double c = coef[p][j];
        if (c == 0.0) continue;
        if (p > 0) next[p - 1][j] += static_cast<double>(p) * c;
        if (p + 1 < size && j + 1 < size) next[p + 1][j + 1] -= c;
      }
    }
    coef = std::move(next);
  }

  Complex sum = 0.0;
  for (std::size_t j = 0; j < size; ++j) {
    Complex kj;
    bool have = false;
    for (std::size_t p = 0; p < size; ++p) {
      const double c = coef[p][j];
      if (c == 0.0) continue;
      if (!have) {
        kj = bessel_k(nu - static_cast<double>(j), w);
        have = true;
      }
      sum += c * std::pow(w, static_cast<double>(p) - static_cast<double>(j)) * kj;
    }
  }
  Complex result = std::pow(beta, n) * std::exp(nu * std::log(a)) * sum;
  if (t < 0.0 && (n % 2 == 1)) result = -result;
  return result;
}

Complex phi(const PhiArgs& args) {
  const int r = args.r;
  const Complex s = args.s;
  if (r < 0 || !(args.y > 0.0)) fail(ErrorCode::InvalidArgument, "phi needs r >= 0 and y > 0");
  if (!(s.real() > 0.5 * (r + 1))) {
    std::ostringstream os;
    os << "phi diverges: Re s = " << s.real() << " <= (r+1)/2 = " << 0.5 * (r + 1);
    fail(ErrorCode::ConvergenceViolated, os.str());
  }
  if (args.a == 0.0) {
    if (r % 2 == 1) return 0.0;
    const double q = 0.5 * (r + 1);
    return std::exp((1.0 + r - 2.0 * s) * std::log(args.y)) * gamma(q) * gamma(s - q) / gamma(s);
  }
  const Complex pref = 2.0 * std::exp(s * std::log(pi)) / (std::pow(Complex(0.0, 2.0 * pi), r) * gamma(s));
  return pref * std::exp((0.5 - s) * std::log(args.y)) * kernel_deriv(r, s, args.a, args.y);
}

PhiQuadResult phi_quad(const PhiArgs& args, double abs_tol) {
  const int r = args.r;
  const Complex s = args.s;
  const double y = args.y;
  if (!(s.real() > 0.5 * (r + 1))) {
    std::ostringstream os;
    os << "phi diverges: Re s = " << s.real() << " <= (r+1)/2 = " << 0.5 * (r + 1);
    fail(ErrorCode::ConvergenceViolated, os.str());
  }
  const bool odd = r % 2 == 1;
  if (args.a == 0.0) {
    if (odd) return {0.0, 0.0};
    // x = y tan(theta) on [0, pi/2), doubled for the even integrand.
    auto f = [&](double th) -> Complex {
      const double c = std::cos(th);
      if (c <= 0.0) return 0.0;
      return std::pow(std::sin(th), r) * std::exp((2.0 * s - 2.0 - static_cast<double>(r)) * std::log(c));
    };
    const auto res = quad::gauss_kronrod<Complex>(f, 0.0, 0.5 * pi, abs_tol * 0.1, 1e-14);
    const Complex scale = 2.0 * std::exp((1.0 + r - 2.0 * s) * std::log(y));
    return {scale * res.value, std::abs(scale) * res.error};
  }

  // 1/(x^2+y^2)^s = int_0^inf t^(s-1) e^(-t(x^2+y^2)) dt / Gamma(s). The x-integral is a Gaussian moment,
  // sqrt(pi/t) (i/(2 sqrt t))^r H_r(pi a / sqrt t) e^(-pi^2 a^2 / t), which leaves a positive t-integral with
  // no cancellation. t = t0 e^v with t0 = pi |a| / y puts the peak of the Gaussian part at v = 0.
  const double a = args.a;
  const double lam = pi * std::abs(a) * y;
  const double t0 = pi * std::abs(a) / y;
  auto hermite = [r](double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (r == 0) return h0;
    for (int n = 1; n < r; ++n) {
      const double h2 = 2.0 * x * h1 - 2.0 * n * h0;
      h0 = h1;
      h1 = h2;
    }
    return h1;
  };
  const Complex ir = std::pow(Complex(0.0, 1.0), r);
  auto g = [&](double v) -> Complex {
    const double t = t0 * std::exp(v);
    const Complex expo = s * std::log(t) - t * y * y - pi * pi * a * a / t;
    return std::exp(expo) * std::sqrt(pi / t) * ir * std::pow(0.5 / std::sqrt(t), r) * hermite(pi * a / std::sqrt(t));
  };
  // Both ends decay like exp(-2 lam cosh v) against polynomial growth of order |s| + r in e^|v|.
  double v_max = 1.0;
  while (v_max < 60.0 && 2.0 * lam * (std::cosh(v_max) - 1.0) < 80.0 + (std::abs(s) + r + 1.0) * v_max) v_max += 0.5;
  const auto res = quad::gauss_kronrod<Complex>(g, -v_max, v_max, 0.0, 1e-14, 20000);
  const Complex rg = rgamma(s);
  return {res.value * rg, res.error * std::abs(rg)};
}

}  // namespace eistwist
