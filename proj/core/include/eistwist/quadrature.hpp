#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace eistwist::quad {

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
void gk15(F& f, double a, double b, T& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T resk = fc * kWgk[7];
  T resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    resk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
  }
  kronrod = resk * h;
  err = magnitude((resk - resg) * h);
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7, 15) on [a, b].
template <class T, class F>
Result<T> gauss_kronrod(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                        std::size_t max_intervals = 4000) {
  struct Piece {
    double a, b;
    T value;
    double error;
  };
  std::vector<Piece> pieces;
  Result<T> out;
  {
    Piece p{a, b, T{}, 0.0};
    detail::gk15<T>(f, a, b, p.value, p.error);
    out.evaluations += 15;
    pieces.push_back(p);
  }
  auto worst = [](const Piece& x, const Piece& y) { return x.error < y.error; };
  while (true) {
    T total{};
    double err = 0.0;
    for (const auto& p : pieces) {
      total += p.value;
      err += p.error;
    }
    out.value = total;
    out.error = err;
    if (err <= std::max(abs_tol, rel_tol * detail::magnitude(total)) || pieces.size() >= max_intervals) break;
    std::pop_heap(pieces.begin(), pieces.end(), worst);
    Piece p = pieces.back();
    pieces.pop_back();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      pieces.push_back(p);
      std::push_heap(pieces.begin(), pieces.end(), worst);
      break;
    }
    Piece l{p.a, m, T{}, 0.0};
    Piece r{m, p.b, T{}, 0.0};
    detail::gk15<T>(f, l.a, l.b, l.value, l.error);
    detail::gk15<T>(f, r.a, r.b, r.value, r.error);
    out.evaluations += 30;
    pieces.push_back(l);
    std::push_heap(pieces.begin(), pieces.end(), worst);
    pieces.push_back(r);
    std::push_heap(pieces.begin(), pieces.end(), worst);
  }
  return out;
}

// Wynn's epsilon algorithm on a sequence of partial sums. Picks the even-order
// column whose last two entries agree best; their difference is the error.
template <class T>
Result<T> wynn_epsilon(const std::vector<T>& partial) {
  Result<T> out;
  const std::size_t n = partial.size();
  if (n == 0) return out;
  if (n < 3) {
    out.value = partial.back();
    out.error = n == 2 ? detail::magnitude(partial[1] - partial[0]) : std::numeric_limits<double>::infinity();
    return out;
  }
  // e[k][j]: column k, row j.
  std::vector<std::vector<T>> e(n + 1);
  e[0].assign(n + 1, T{});
  e[1] = partial;
  T best = partial.back();
  double best_err = detail::magnitude(partial[n - 1] - partial[n - 2]);
  for (std::size_t k = 2; k <= n; ++k) {
    const std::size_t rows = n - k + 1;
    e[k].resize(rows);
    bool ok = true;
    for (std::size_t j = 0; j < rows; ++j) {
      const T diff = e[k - 1][j + 1] - e[k - 1][j];
      if (detail::magnitude(diff) == 0.0) {
        ok = false;
        break;
      }
      e[k][j] = e[k - 2][j + 1] + T(1.0) / diff;
    }
    if (!ok) break;
    // Odd k holds the even-order epsilon estimates.
    if (k % 2 == 1 && rows >= 2) {
      const double err = detail::magnitude(e[k][rows - 1] - e[k][rows - 2]);
      if (err < best_err) {
        best_err = err;
        best = e[k][rows - 1];
      }
    }
  }
  out.value = best;
  out.error = best_err;
  return out;
}

}  // namespace eistwist::quad
