#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>

namespace eistwist {

using Complex = std::complex<double>;

inline constexpr double kDefaultTolDet = 1e-12;
inline constexpr double kDefaultTolTrace = 1e-10;

// A point of the upper half-plane.
struct Point {
  double x = 0.0;
  double y = 1.0;

  Complex z() const { return {x, y}; }
};

// Throws InvalidArgument unless y > 0.
Point make_point(double x, double y);
Point make_point(Complex z);

// A point of R ∪ {∞} stored projectively as num/den.
struct BoundaryPoint {
  double num = 1.0;
  double den = 0.0;

  bool is_infinity() const { return den == 0.0; }
  double value() const { return num / den; }
};

// Element of PSL2(R). The representing matrix is stored with a canonical sign:
// the first nonzero entry among (c, d, a) is positive.
class Moebius {
 public:
  Moebius() = default;
  Moebius(double a, double b, double c, double d);

  // Same as the constructor but rejects |ad - bc - 1| > tol_det.
  static Moebius checked(double a, double b, double c, double d, double tol_det = kDefaultTolDet);

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }

  double det() const { return a_ * d_ - b_ * c_; }
  double trace() const { return a_ + d_; }
  bool is_identity(double tol = 0.0) const;

  Moebius inverse() const { return {d_, -b_, -c_, a_}; }

  friend Moebius operator*(const Moebius& g, const Moebius& h);
  friend bool operator==(const Moebius& g, const Moebius& h) {
    return g.a_ == h.a_ && g.b_ == h.b_ && g.c_ == h.c_ && g.d_ == h.d_;
  }

 private:
  double a_ = 1.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double d_ = 1.0;
};

std::ostream& operator<<(std::ostream& os, const Moebius& g);

struct MoebiusHash {
  std::size_t operator()(const Moebius& g) const noexcept;
};

enum class ElementKind { Identity, Elliptic, Parabolic, Hyperbolic };

const char* to_string(ElementKind kind);

Moebius compose(const Moebius& g, const Moebius& h);
Moebius invert(const Moebius& g);
bool approx_equal(const Moebius& g, const Moebius& h, double tol);

Point apply(const Moebius& g, Point z);
BoundaryPoint apply(const Moebius& g, BoundaryPoint p);

// Im(g.z) = y / ((cx+d)^2 + (cy)^2).
double im_after(const Moebius& g, Point z);

// The automorphy factor cz + d.
Complex j_factor(const Moebius& g, Point z);

double dist(Point z, Point w);

ElementKind classify(const Moebius& g, double tol_tr = kDefaultTolTrace);

}  // namespace eistwist
