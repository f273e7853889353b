#include "eistwist/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "eistwist/error.hpp"

namespace eistwist {

Point make_point(double x, double y) {
  if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") is not in the upper half-plane";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  return {x, y};
}

Point make_point(Complex z) { return make_point(z.real(), z.imag()); }

Moebius::Moebius(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
  const double lead = c != 0.0 ? c : (d != 0.0 ? d : a);
  if (lead < 0.0) {
    a_ = -a_;
    b_ = -b_;
    c_ = -c_;
    d_ = -d_;
  }
  // Normalize negative zeros so that equality and hashing agree.
  a_ += 0.0;
  b_ += 0.0;
  c_ += 0.0;
  d_ += 0.0;
}

Moebius Moebius::checked(double a, double b, double c, double d, double tol_det) {
  const double det = a * d - b * c;
  if (!(std::abs(det - 1.0) <= tol_det)) {
    std::ostringstream os;
    os << "determinant " << det << " differs from 1";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  return {a, b, c, d};
}

bool Moebius::is_identity(double tol) const {
  return std::abs(a_ - 1.0) <= tol && std::abs(b_) <= tol && std::abs(c_) <= tol &&
         std::abs(d_ - 1.0) <= tol;
}

Moebius operator*(const Moebius& g, const Moebius& h) {
  return {g.a_ * h.a_ + g.b_ * h.c_, g.a_ * h.b_ + g.b_ * h.d_, g.c_ * h.a_ + g.d_ * h.c_,
          g.c_ * h.b_ + g.d_ * h.d_};
}

std::ostream& operator<<(std::ostream& os, const Moebius& g) {
  return os << "[" << g.a() << " " << g.b() << "; " << g.c() << " " << g.d() << "]";
}

std::size_t MoebiusHash::operator()(const Moebius& g) const noexcept {
  std::hash<double> h;
  std::size_t seed = h(g.a());
  for (double v : {g.b(), g.c(), g.d()}) seed ^= h(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Identity: return "identity";
    case ElementKind::Elliptic: return "elliptic";
    case ElementKind::Parabolic: return "parabolic";
    case ElementKind::Hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

Moebius compose(const Moebius& g, const Moebius& h) { return g * h; }
Moebius invert(const Moebius& g) { return g.inverse(); }

bool approx_equal(const Moebius& g, const Moebius& h, double tol) {
  return std::abs(g.a() - h.a()) <= tol && std::abs(g.b() - h.b()) <= tol &&
         std::abs(g.c() - h.c()) <= tol && std::abs(g.d() - h.d()) <= tol;
}

Point apply(const Moebius& g, Point z) {
  const Complex w = z.z();
  const Complex num = g.a() * w + g.b();
  const Complex den = g.c() * w + g.d();
  const Complex r = num / den;
  return {r.real(), im_after(g, z)};
}

BoundaryPoint apply(const Moebius& g, BoundaryPoint p) {
  return {g.a() * p.num + g.b() * p.den, g.c() * p.num + g.d() * p.den};
}

double im_after(const Moebius& g, Point z) {
  const double u = g.c() * z.x + g.d();
  const double v = g.c() * z.y;
  return z.y / (u * u + v * v);
}

Complex j_factor(const Moebius& g, Point z) { return {g.c() * z.x + g.d(), g.c() * z.y}; }

double dist(Point z, Point w) {
  const double dx = z.x - w.x;
  const double dy = z.y - w.y;
  const double delta = (dx * dx + dy * dy) / (2.0 * z.y * w.y);
  // arcosh(1 + delta) without cancellation for small delta.
  return std::log1p(delta + std::sqrt(delta * (delta + 2.0)));
}

ElementKind classify(const Moebius& g, double tol_tr) {
  const double t = std::abs(g.trace());
  if (std::abs(t - 2.0) <= tol_tr) {
    const double scale = std::max({1.0, std::abs(g.a()), std::abs(g.d())});
    if (std::abs(g.b()) <= tol_tr * scale && std::abs(g.c()) <= tol_tr * scale) return ElementKind::Identity;
    return ElementKind::Parabolic;
  }
  return t > 2.0 ? ElementKind::Hyperbolic : ElementKind::Elliptic;
}

}  // namespace eistwist
