#pragma once

// Period-space geometry: period points, twistor curves, Cauchy divisors,
// Fujiki polarization, the explicit BBF formula and a rank estimator for
// families of positive planes.
//
// Twistor parametrization. For a q-orthonormal frame (f1, f2, f3) of a
// positive 3-space U,
//   w(z) = (1 - z^2) f1 - i (1 + z^2) f2 - 2 z f3
// is a holomorphic family of positive null vectors. The plane it defines
// has unit normal s(z) = (2 Re z, -2 Im z, 1 - |z|^2) / (1 + |z|^2) in the
// frame, with (s, plane) positively oriented. z = 0 is span(f1, f2) and
// z = infinity the same plane reversed.

#include "hkperiod/core.hpp"
#include "hkperiod/exact.hpp"
#include "hkperiod/polynomial.hpp"
#include "hkperiod/posgrass.hpp"
#include "hkperiod/quadspace.hpp"

#include <Eigen/SVD>

#include <functional>
#include <optional>
#include <vector>

namespace hkp {

/// True iff q(v, v) = 0 and q(v, conj v) > 0 within tolerance.
inline bool is_period_point(const QuadraticSpace& space, const CVector& v) {
  require(v.size() == space.dim(), "period point has the wrong dimension");
  const NullDiagnostics d = null_diagnostics(space, v);
  const double tol = space.tolerance() * space.scale() * v.squaredNorm();
  return std::abs(d.self) <= tol && d.hermitian.real() > tol;
}

// ---------------------------------------------------------------------------
// Twistor curves.

/// A point of CP^1; nullopt is infinity.
using SpherePoint = std::optional<Complex>;

class TwistorCurve {
 public:
  /// `basis` spans U; its Gram-Schmidt frame fixes the parametrization.
  TwistorCurve(QuadraticSpace ambient, const Matrix& basis) : ambient_(std::move(ambient)) {
    require(basis.rows() == ambient_.dim() && basis.cols() == 3,
            "a twistor curve needs three vectors of the ambient dimension");
    require(is_positive_definite(Matrix(basis.transpose() * ambient_.gram() * basis), ambient_.tolerance()),
            "twistor curve needs a positive 3-space");
    frame_ = orthonormalize_positive(ambient_, basis);
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  /// q-orthonormal (f1, f2, f3).
  const Matrix& frame() const { return frame_; }
  Vector f(int k) const { return frame_.col(k); }

  /// q-projection onto U expressed in the frame.
  Vector frame_coordinates(const Vector& x) const { return frame_.transpose() * ambient_.gram() * x; }

 private:
  QuadraticSpace ambient_;
  Matrix frame_;
};

/// w(z), holomorphic in z.
inline CVector twistor_null(const TwistorCurve& curve, Complex z) {
  const Complex i(0.0, 1.0);
  return (1.0 - z * z) * curve.f(0).cast<Complex>() - i * (1.0 + z * z) * curve.f(1).cast<Complex>() -
         2.0 * z * curve.f(2).cast<Complex>();
}

/// w(1/u) u^2, the representative near infinity.
inline CVector twistor_null_at_inverse(const TwistorCurve& curve, Complex u) {
  const Complex i(0.0, 1.0);
  return (u * u - 1.0) * curve.f(0).cast<Complex>() - i * (u * u + 1.0) * curve.f(1).cast<Complex>() -
         2.0 * u * curve.f(2).cast<Complex>();
}

inline OrientedPositivePlane twistor_point(const TwistorCurve& curve, SpherePoint z) {
  CVector w = !z                 ? twistor_null_at_inverse(curve, 0.0)
              : std::abs(*z) <= 1 ? twistor_null(curve, *z)
                                  : twistor_null_at_inverse(curve, 1.0 / *z);
  return null_to_plane(PositiveNullVector(curve.ambient(), normalize_null(curve.ambient(), std::move(w))));
}

/// s(z) in frame coordinates.
inline Eigen::Vector3d twistor_normal(SpherePoint z) {
  if (!z) return {0.0, 0.0, -1.0};
  const double r2 = std::norm(*z);
  return Eigen::Vector3d(2.0 * z->real(), -2.0 * z->imag(), 1.0 - r2) / (1.0 + r2);
}

/// Inverse of twistor_normal for a unit vector s.
inline SpherePoint twistor_parameter(const Eigen::Vector3d& s) {
  if (s(2) >= 0.0) return Complex(s(0), -s(1)) / (1.0 + s(2));
  const Complex u = Complex(s(0), s(1)) / (1.0 - s(2));
  if (u == Complex(0.0)) return std::nullopt;
  return 1.0 / u;
}

// ---------------------------------------------------------------------------
// Cauchy divisors.

class CauchyDivisor {
 public:
  CauchyDivisor(QuadraticSpace ambient, Vector v) : ambient_(std::move(ambient)), v_(std::move(v)) {
    require(v_.size() == ambient_.dim(), "divisor vector has the wrong dimension");
    require(ambient_.norm2(v_) > ambient_.tolerance() * ambient_.scale() * v_.squaredNorm(),
            "Cauchy divisor needs q(v,v) > 0");
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  const Vector& v() const { return v_; }

 private:
  QuadraticSpace ambient_;
  Vector v_;
};

inline bool cauchy_contains(const CauchyDivisor& d, const OrientedPositivePlane& w) {
  const QuadraticSpace& s = d.ambient();
  const double tol = 1e3 * s.tolerance() * s.scale() * d.v().norm();
  return std::abs(s.dot(d.v(), w.b1())) <= tol * w.b1().norm() &&
         std::abs(s.dot(d.v(), w.b2())) <= tol * w.b2().norm();
}

/// Null-vector form of the same test: q(v, w) = 0 (then also for conj w).
inline bool cauchy_contains(const CauchyDivisor& d, const PositiveNullVector& w) {
  const QuadraticSpace& s = d.ambient();
  const double tol = 1e3 * s.tolerance() * s.scale() * d.v().norm() * w.value().norm();
  return std::abs(s.cdot(d.v().cast<Complex>(), w.value())) <= tol;
}

enum class IntersectionKind { Hits, ContainedIn };

struct TwistorCauchyIntersection {
  IntersectionKind kind = IntersectionKind::Hits;
  /// Both orientations of the one plane U cap p^perp; empty when ContainedIn.
  std::vector<OrientedPositivePlane> planes;
  std::vector<SpherePoint> parameters;
  /// |proj_U v| in the frame.
  double projection_norm = 0.0;

  int count_oriented() const { return static_cast<int>(planes.size()); }
  int count_unoriented() const { return static_cast<int>(planes.size()) / 2; }
};

inline TwistorCauchyIntersection twistor_cauchy_intersection(const TwistorCurve& curve,
                                                             const CauchyDivisor& d) {
  require(curve.ambient().dim() == d.ambient().dim(), "curve and divisor live in different spaces");
  TwistorCauchyIntersection out;
  const Eigen::Vector3d p = curve.frame_coordinates(d.v());
  out.projection_norm = p.norm();
  const double tol = 1e3 * curve.ambient().tolerance() * curve.ambient().scale() * d.v().norm();
  if (p.norm() <= tol) {
    out.kind = IntersectionKind::ContainedIn;
    return out;
  }
  const Eigen::Vector3d s = p / p.norm();
  for (const Eigen::Vector3d& n : {Eigen::Vector3d(s), Eigen::Vector3d(-s)}) {
    const SpherePoint z = twistor_parameter(n);
    out.parameters.push_back(z);
    out.planes.push_back(twistor_point(curve, z));
  }
  return out;
}

/// W^perp with a q-orthonormal basis (positive vectors first); the divisors
/// through W are the positive vectors of this space.
class CauchyPencil {
 public:
  explicit CauchyPencil(const OrientedPositivePlane& w) : frame_(make_chart_frame(w)) {
    const Vector& eta = frame_.eta();
    positive_ = static_cast<int>((eta.array() > 0).count());
  }

  const Matrix& basis() const { return frame_.normal(); }
  Signature signature() const {
    return {positive_, static_cast<int>(frame_.eta().size()) - positive_, 0};
  }

  bool contains(const Vector& v) const {
    const QuadraticSpace& s = frame_.ambient();
    const double tol = 1e3 * s.tolerance() * s.scale() * v.squaredNorm();
    const Matrix& w = frame_.base();
    return std::abs(s.dot(v, w.col(0))) <= tol && std::abs(s.dot(v, w.col(1))) <= tol &&
           s.norm2(v) > tol;
  }

  /// Positive vector of W^perp: unit positive part plus a negative part of
  /// norm below 0.9.
  Vector sample(Rng& rng) const {
    require(positive_ > 0, "W^perp has no positive vectors");
    const int m = static_cast<int>(frame_.eta().size());
    Vector x = rng.normal_vector(positive_);
    x /= x.norm();
    Vector y = rng.normal_vector(m - positive_);
    if (y.size() > 0) y *= 0.9 * rng.uniform() / std::max(y.norm(), 1e-300);
    Vector coeff(m);
    coeff << x, y;
    return frame_.normal() * coeff;
  }

 private:
  ChartFrame frame_;
  int positive_ = 0;
};

inline CauchyPencil cauchy_through(const OrientedPositivePlane& w) { return CauchyPencil(w); }

/// Twistor curve of U = span(W, u) for a positive u in W^perp; W is z = 0.
inline TwistorCurve twistor_curve_through(const OrientedPositivePlane& w, const Vector& u) {
  Matrix b(w.ambient().dim(), 3);
  b << orthonormalize_positive(w.ambient(), w.basis()), u;
  return TwistorCurve(w.ambient(), b);
}

// ---------------------------------------------------------------------------
// Fujiki polarization.

/// F homogeneous of degree 2n, given as a callback on R^dim.
struct FujikiForm {
  int n = 1;
  int dim = 0;
  std::function<double(const Vector&)> f;
};

enum class FujikiNormalization {
  UnitLeadingEntry,  // first nonzero entry (row-major) equals 1
  UnitLargestEntry,  // entry of largest modulus equals 1
};

struct FujikiOptions {
  FujikiNormalization normalization = FujikiNormalization::UnitLeadingEntry;
  double tolerance = 1e-8;
  int probes = 32;
  std::uint64_t seed = 1;
};

struct FujikiResult {
  Matrix q;
  double c = 0.0;
  double residual = 0.0;
  Vector reference;
};

struct ExactFujikiResult {
  RationalMatrix q;
  Rational c;
};

namespace detail {

/// Richardson-extrapolated central difference of order 1 or 2 of g at 0.
inline double richardson_derivative(const std::function<double(double)>& g, int order, double h0,
                                    int levels) {
  std::vector<std::vector<double>> t(static_cast<std::size_t>(levels));
  const double g0 = order == 2 ? g(0.0) : 0.0;
  double h = h0;
  for (int k = 0; k < levels; ++k, h *= 0.5) {
    const double a = order == 1 ? (g(h) - g(-h)) / (2.0 * h) : (g(h) - 2.0 * g0 + g(-h)) / (h * h);
    auto& row = t[static_cast<std::size_t>(k)];
    row.push_back(a);
    double f = 1.0;
    for (int m = 1; m <= k; ++m) {
      f *= 4.0;
      row.push_back((f * row[static_cast<std::size_t>(m - 1)] -
                     t[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(m - 1)]) /
                    (f - 1.0));
    }
  }
  return t.back().back();
}

template <class M, class Abs>
auto normalizing_entry(const M& q, int n, FujikiNormalization mode, Abs abs, double leading_floor) {
  using S = std::decay_t<decltype(q(0, 0))>;
  S best = S(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const S x = q(i, j);
      if (mode == FujikiNormalization::UnitLeadingEntry) {
        if (abs(x) > leading_floor) return x;
      } else if (abs(x) > abs(best)) {
        best = x;
      }
    }
  return best;
}

}  // namespace detail

inline FujikiResult fujiki_polarize(const FujikiForm& form, const FujikiOptions& opt = {}) {
  require(form.n >= 1, "Fujiki form needs n >= 1");
  require(form.dim >= 1 && form.f, "Fujiki form needs a dimension and a callback");
  const int d = form.dim;
  const int n = form.n;
  const auto& F = form.f;
  Rng rng(opt.seed);

  std::vector<Vector> candidates;
  for (int i = 0; i < d; ++i) {
    candidates.push_back(Vector::Unit(d, i));
    for (int j = i + 1; j < d; ++j) {
      candidates.push_back((Vector::Unit(d, i) + Vector::Unit(d, j)) / std::sqrt(2.0));
      candidates.push_back((Vector::Unit(d, i) - Vector::Unit(d, j)) / std::sqrt(2.0));
    }
  }
  for (int k = 0; k < 8; ++k) {
    Vector x = rng.normal_vector(d);
    candidates.push_back(x / x.norm());
  }
  std::vector<Vector> probes;
  for (int k = 0; k < opt.probes; ++k) probes.push_back(rng.normal_vector(d));

  double fmax = 0.0;
  for (const Vector& x : probes) fmax = std::max(fmax, std::abs(F(x)) / std::pow(x.squaredNorm(), n));
  for (const Vector& x : probes) {
    const double ratio = std::abs(F(2.0 * x)) / std::pow(4.0, n);
    require(std::abs(ratio - std::abs(F(x))) <= 1e-8 * std::max(1.0, fmax) * std::pow(x.squaredNorm(), n),
            "F is not homogeneous of degree 2n");
  }

  Vector r = candidates.front();
  double fr = F(r);
  for (const Vector& x : candidates)
    if (const double v = F(x); std::abs(v) > std::abs(fr)) {
      r = x;
      fr = v;
    }
  require(fr != 0.0, "F vanishes on every probe");

  const double h0 = 0.25;
  const int levels = n + 2;
  auto along = [&](const Vector& u) { return [&F, &r, u](double t) { return F(r + t * u); }; };
  Vector grad(d);
  Vector second(d);
  for (int i = 0; i < d; ++i) {
    grad(i) = detail::richardson_derivative(along(Vector::Unit(d, i)), 1, h0, levels);
    second(i) = detail::richardson_derivative(along(Vector::Unit(d, i)), 2, h0, levels);
  }
  Matrix hess(d, d);
  for (int i = 0; i < d; ++i) {
    hess(i, i) = second(i);
    for (int j = i + 1; j < d; ++j) {
      const double dij = detail::richardson_derivative(along(Vector::Unit(d, i) + Vector::Unit(d, j)), 2, h0, levels);
      hess(i, j) = hess(j, i) = 0.5 * (dij - second(i) - second(j));
    }
  }
  Matrix q = hess - (double(n - 1) / n) * grad * grad.transpose() / fr;
  const double qmax = max_abs(q);
  require(qmax > 0.0, "not of Fujiki type (q vanishes)");
  const double s = detail::normalizing_entry(q, d, opt.normalization, [](double x) { return std::abs(x); },
                                             1e-6 * qmax);
  q /= s;
  q = 0.5 * (q + q.transpose()).eval();
  require(signature(q, 1e-8).zero == 0, "not of Fujiki type (degenerate q)");

  FujikiResult out;
  out.q = q;
  out.reference = r;
  out.c = fr / std::pow(r.dot(q * r), n);
  const double qn = q.norm();
  for (const Vector& x : probes) {
    const double scale = std::max(std::abs(F(x)), std::abs(out.c) * std::pow(qn * x.squaredNorm(), n));
    out.residual = std::max(out.residual, std::abs(F(x) - out.c * std::pow(x.dot(q * x), n)) / scale);
  }
  require(out.residual <= opt.tolerance, "not of Fujiki type (residual " + std::to_string(out.residual) + ")");
  return out;
}

/// Exact polarization of a rational polynomial F = c q^n.
inline ExactFujikiResult fujiki_polarize(const Polynomial& F,
                                         FujikiNormalization mode = FujikiNormalization::UnitLeadingEntry) {
  require(!F.is_zero(), "F is the zero polynomial");
  require(F.is_homogeneous(), "F is not homogeneous");
  const int deg = F.degree();
  require(deg >= 2 && deg % 2 == 0, "F must have even positive degree");
  const int n = deg / 2;
  const int d = F.variables();

  auto unit = [d](int i) {
    std::vector<Rational> e(static_cast<std::size_t>(d), Rational(0));
    e[static_cast<std::size_t>(i)] = 1;
    return e;
  };
  std::vector<std::vector<Rational>> candidates;
  for (int i = 0; i < d; ++i) candidates.push_back(unit(i));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      auto a = unit(i), b = unit(i);
      a[static_cast<std::size_t>(j)] = 1;
      b[static_cast<std::size_t>(j)] = -1;
      candidates.push_back(a);
      candidates.push_back(b);
    }
  std::optional<std::vector<Rational>> ref;
  for (const auto& x : candidates)
    if (F.evaluate(x) != 0) {
      ref = x;
      break;
    }
  for (int k = 0; !ref && k < 4096; ++k) {
    // base-5 digits of k in {-2..2}
    std::vector<Rational> x(static_cast<std::size_t>(d));
    int m = k + 1;
    for (int i = 0; i < d; ++i, m /= 5) x[static_cast<std::size_t>(i)] = m % 5 - 2;
    if (F.evaluate(x) != 0) ref = x;
  }
  require(ref.has_value(), "no reference vector with F != 0 found");
  const std::vector<Rational>& r = *ref;
  const Rational fr = F.evaluate(r);

  std::vector<Polynomial> dF;
  for (int i = 0; i < d; ++i) dF.push_back(F.derivative(i));
  RationalMatrix q(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const Rational hij = dF[static_cast<std::size_t>(i)].derivative(j).evaluate(r);
      const Rational gij = dF[static_cast<std::size_t>(i)].evaluate(r) * dF[static_cast<std::size_t>(j)].evaluate(r);
      q(i, j) = q(j, i) = hij - Rational(n - 1, n) * gij / fr;
    }
  const Rational s = detail::normalizing_entry(q, d, mode, [](const Rational& x) { return detail::magnitude(x); },
                                               0.0);
  require(s != 0, "not of Fujiki type (q vanishes)");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) q(i, j) /= s;
  require(determinant(q) != 0, "not of Fujiki type (degenerate q)");

  const Polynomial qp = Polynomial::quadratic_form(q);
  const Rational qr = qp.evaluate(r);
  Rational qrn = 1;
  for (int k = 0; k < n; ++k) qrn *= qr;
  const Rational c = fr / qrn;
  require(c * qp.pow(n) == F, "not of Fujiki type (F != c q^n)");
  return {q, c};
}

// ---------------------------------------------------------------------------
// Explicit BBF formula.

/// Symmetric multilinear functional of 2n complex vectors.
using CupProduct = std::function<Complex(const std::vector<CVector>&)>;

/// Weight of the second term that makes the formula proportional to q.
inline double bbf_weight(int n) { return 4.0 * (n - 1) / n; }

/// A multiple of q(a, b), evaluated as
///   2 cup(a, b, W^(n-1), Wbar^(n-1))
///   - weight Re[cup(a, W^(n-1), Wbar^n) cup(b, W^n, Wbar^(n-1))] / cup(W^n, Wbar^n)
inline double bbf_explicit(const CupProduct& cup, int n, const CVector& omega, const Vector& alpha,
                           const Vector& beta, std::optional<double> weight = std::nullopt) {
  require(n >= 1, "bbf_explicit needs n >= 1");
  require(alpha.size() == omega.size() && beta.size() == omega.size(), "dimension mismatch");
  const CVector bar = omega.conjugate();
  auto args = [&](std::vector<CVector> head, int k, int kbar) {
    for (int i = 0; i < k; ++i) head.push_back(omega);
    for (int i = 0; i < kbar; ++i) head.push_back(bar);
    return head;
  };
  const CVector a = alpha.cast<Complex>();
  const CVector b = beta.cast<Complex>();
  const Complex den = cup(args({}, n, n));
  require(std::abs(den) > 1e-12 * std::max(1.0, std::pow(omega.squaredNorm(), n)),
          "vanishing denominator cup(W^n, conj W^n)");
  const Complex first = cup(args({a, b}, n - 1, n - 1));
  if (n == 1) return 2.0 * first.real();
  const Complex ta = cup(args({a}, n - 1, n));
  const Complex tb = cup(args({b}, n, n - 1));
  const double w = weight.value_or(bbf_weight(n));
  return 2.0 * first.real() - w * (ta * tb).real() / den.real();
}

/// cup(x_1..x_2n) = c / (2n-1)!! * sum over perfect matchings of prod q(x_a, x_b).
inline CupProduct polarized_power_cup(const Matrix& q, double c, int n) {
  require(q.rows() == q.cols(), "q must be square");
  require(n >= 1, "n must be >= 1");
  double pairings = 1.0;
  for (int k = 2 * n - 1; k > 1; k -= 2) pairings *= k;
  const Matrix qc = q;
  const double scale = c / pairings;
  return [qc, scale, n](const std::vector<CVector>& x) {
    require(static_cast<int>(x.size()) == 2 * n, "cup expects 2n arguments");
    const CMatrix g = qc.cast<Complex>();
    std::function<Complex(std::vector<int>&)> sum = [&](std::vector<int>& rest) -> Complex {
      if (rest.empty()) return 1.0;
      const int a = rest.back();
      rest.pop_back();
      Complex total = 0.0;
      for (std::size_t k = 0; k < rest.size(); ++k) {
        const int b = rest[k];
        rest.erase(rest.begin() + static_cast<long>(k));
        total += (x[static_cast<std::size_t>(a)].transpose() * g * x[static_cast<std::size_t>(b)])(0, 0) * sum(rest);
        rest.insert(rest.begin() + static_cast<long>(k), b);
      }
      rest.push_back(a);
      return total;
    };
    std::vector<int> idx(x.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    return scale * sum(idx);
  };
}

// ---------------------------------------------------------------------------
// Period-rank estimator.

/// A family of positive planes, returned as d x 2 bases depending smoothly
/// on real parameters.
using PlaneFamily = std::function<Matrix(const Vector&)>;

struct RankOptions {
  double step = 1e-5;
  double rank_tolerance = 1e-6;
};

/// Numeric real rank of the differential of the family at one parameter
/// value, read off in the graph chart at the image plane.
inline int differential_rank(const QuadraticSpace& space, const PlaneFamily& phi, const Vector& b,
                             const RankOptions& opt = {}) {
  const double h = opt.step * std::max(1.0, b.cwiseAbs().maxCoeff());
  require(h > 0.0, "step must be positive");
  if (h < 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw NumericalError("step size underflow");
  const Matrix base = phi(b);
  const ChartFrame frame = make_chart_frame(OrientedPositivePlane(space, base));
  const int m = static_cast<int>(b.size());
  if (m == 0) return 0;
  Matrix jac(frame.chart_dim(), m);
  for (int k = 0; k < m; ++k) {
    const Vector e = Vector::Unit(m, k) * h;
    const Matrix variation = (phi(b + e) - phi(b - e)) / (2.0 * h);
    jac.col(k) = tangent_coordinates(frame, base, variation).reshaped();
  }
  const Eigen::JacobiSVD<Matrix> svd(jac);
  const Vector& sv = svd.singularValues();
  const double floor = opt.rank_tolerance * std::max(1.0, sv.size() ? sv(0) : 0.0);
  return static_cast<int>((sv.array() > floor).count());
}

inline int period_image_rank(const QuadraticSpace& space, const PlaneFamily& phi,
                             const std::vector<Vector>& base_points, const RankOptions& opt = {}) {
  require(!base_points.empty(), "period_image_rank needs at least one base point");
  int rank = 0;
  for (const Vector& b : base_points) rank = std::max(rank, differential_rank(space, phi, b, opt));
  return rank;
}

}  // namespace hkp
