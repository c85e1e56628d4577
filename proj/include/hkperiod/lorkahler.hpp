#pragma once

// The invariant metric g and 2-form omega on Gr++(V).
//
// A tangent vector at a plane with basis B is represented by a variation dB
// of that basis; the associated map W -> W^perp sends b_j to the
// q-orthogonal projection of dB_j onto W^perp. With T = pi_perp dB,
// Gp = B^T G B and the +90 degree rotation of W written in basis
// coordinates as J = sqrt(det Gp) Gp^-1 S^T, S = [[0, 1], [-1, 0]]:
//   g(X, Y)     = tr(T_X^T G T_Y Gp^-1)
//   omega(X, Y) = g(X o J, Y) = tr(J^T T_X^T G T_Y Gp^-1)
// For a q-orthonormal basis this is sum_i q(A e_i, B e_i) and omega(A, B) =
// g(rotate90(A), B). No further normalization constant is applied.

#include "hkperiod/core.hpp"
#include "hkperiod/perigeo.hpp"
#include "hkperiod/posgrass.hpp"
#include "hkperiod/quadspace.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <vector>

namespace hkp {

/// Precomputed data of a plane basis for evaluating g and omega.
class PlaneMetricData {
 public:
  PlaneMetricData(const QuadraticSpace& space, const Matrix& basis) : space_(space), basis_(basis) {
    require(basis.rows() == space.dim() && basis.cols() == 2, "plane basis has the wrong shape");
    const Matrix gp = basis.transpose() * space.gram() * basis;
    require(gp(0, 0) > 0 && gp.determinant() > 0, "chart point leaves the positive region");
    gp_inv_ = gp.inverse();
    Eigen::Matrix2d st;
    st << 0, -1, 1, 0;
    j_ = std::sqrt(gp.determinant()) * gp_inv_ * st;
  }

  /// pi_perp applied to a basis variation.
  Matrix normal_part(const Matrix& variation) const {
    const Matrix& g = space_.gram();
    return variation - basis_ * (gp_inv_ * (basis_.transpose() * g * variation));
  }

  double metric(const Matrix& dx, const Matrix& dy) const {
    const Matrix tx = normal_part(dx), ty = normal_part(dy);
    return (tx.transpose() * space_.gram() * ty * gp_inv_).trace();
  }

  double omega(const Matrix& dx, const Matrix& dy) const {
    const Matrix tx = normal_part(dx), ty = normal_part(dy);
    return (j_.transpose() * tx.transpose() * space_.gram() * ty * gp_inv_).trace();
  }

 private:
  QuadraticSpace space_;
  Matrix basis_;
  Matrix gp_inv_;
  Matrix j_;
};

// ---------------------------------------------------------------------------
// Values at a chart base point.

/// A tangent vector at frame.base(), as chart coordinates A : W -> W^perp.
struct TangentVector {
  ChartFrame at;
  Matrix a;
};

/// g at the base plane of `frame`: sum_i q(A e_i, B e_i) = tr(A^T eta B).
inline double metric_at(const ChartFrame& frame, const Matrix& a, const Matrix& b) {
  require(a.rows() == frame.dim() - 2 && a.cols() == 2 && b.rows() == a.rows() && b.cols() == 2,
          "tangent matrices have the wrong shape");
  return (a.transpose() * frame.eta().asDiagonal() * b).trace();
}

inline double omega_at(const ChartFrame& frame, const Matrix& a, const Matrix& b) {
  return metric_at(frame, rotate90(a), b);
}

namespace detail {
inline void require_same_base(const TangentVector& x, const TangentVector& y) {
  require(x.at.base() == y.at.base() && x.at.normal() == y.at.normal(),
          "tangent vectors are attached to different base points");
}
}  // namespace detail

inline double metric_at(const TangentVector& x, const TangentVector& y) {
  detail::require_same_base(x, y);
  return metric_at(x.at, x.a, y.a);
}

inline double omega_at(const TangentVector& x, const TangentVector& y) {
  detail::require_same_base(x, y);
  return omega_at(x.at, x.a, y.a);
}

/// Matrix of g (or omega) on the coordinate basis E_k of Hom(W, W^perp),
/// k running over the entries of A in column-major order.
inline Matrix metric_matrix(const ChartFrame& frame) {
  const int m = frame.dim() - 2;
  Matrix out(2 * m, 2 * m);
  for (int k = 0; k < 2 * m; ++k)
    for (int l = 0; l < 2 * m; ++l)
      out(k, l) = metric_at(frame, unit_matrix(m, 2, k % m, k / m), unit_matrix(m, 2, l % m, l / m));
  return out;
}

inline Matrix omega_matrix(const ChartFrame& frame) {
  const int m = frame.dim() - 2;
  Matrix out(2 * m, 2 * m);
  for (int k = 0; k < 2 * m; ++k)
    for (int l = 0; l < 2 * m; ++l)
      out(k, l) = omega_at(frame, unit_matrix(m, 2, k % m, k / m), unit_matrix(m, 2, l % m, l / m));
  return out;
}

// ---------------------------------------------------------------------------
// Closedness in a graph chart.

/// A 2-form on the chart: value at chart point X on directions U, V.
using ChartForm = std::function<double(const Matrix& x, const Matrix& u, const Matrix& v)>;

/// omega pulled back to the graph chart of `frame`.
inline ChartForm chart_omega(const ChartFrame& frame) {
  return [frame](const Matrix& x, const Matrix& u, const Matrix& v) {
    const PlaneMetricData data(frame.ambient(), graph_basis(frame, x));
    return data.omega(frame.normal() * u, frame.normal() * v);
  };
}

/// exp(<c, X>) omega: a non-closed comparison form.
inline ChartForm scaled_chart_omega(const ChartFrame& frame, const Matrix& c) {
  ChartForm base = chart_omega(frame);
  return [base, c](const Matrix& x, const Matrix& u, const Matrix& v) {
    return std::exp((c.array() * x.array()).sum()) * base(x, u, v);
  };
}

/// dform(U, V, W) at X for constant coordinate fields, by central differences:
/// U omega(V, W) - V omega(U, W) + W omega(U, V).
inline double exterior_derivative(const ChartForm& form, const Matrix& x, const Matrix& u, const Matrix& v,
                                  const Matrix& w, double h) {
  require(h > 0.0, "step must be positive");
  auto deriv = [&](const Matrix& dir, const Matrix& a, const Matrix& b) {
    return (form(x + h * dir, a, b) - form(x - h * dir, a, b)) / (2.0 * h);
  };
  return deriv(u, v, w) - deriv(v, u, w) + deriv(w, u, v);
}

inline double closedness_residual(const ChartFrame& frame, const Matrix& x, const Matrix& u, const Matrix& v,
                                  const Matrix& w, double h) {
  return std::abs(exterior_derivative(chart_omega(frame), x, u, v, w, h));
}

struct ClosednessReport {
  double residual_max = 0.0;
  double residual_mean = 0.0;
  /// log2(mean r(h) / mean r(h/2)).
  double order_estimate = 0.0;
  double control_min = 0.0;
  int samples = 0;
};

struct ClosednessOptions {
  int samples = 100;
  double step = 1e-3;
  /// column norm of the random chart point, about
  double point_scale = 0.2;
  std::uint64_t seed = 1;
};

/// Random base planes, chart points and unit direction triples; the control is the
/// same computation for scaled_chart_omega.
inline ClosednessReport closedness_sweep(const QuadraticSpace& space, const ClosednessOptions& opt = {}) {
  require(opt.samples > 0, "need at least one sample");
  Rng rng(opt.seed);
  const PositiveSampler sampler(space);
  const int m = space.dim() - 2;
  ClosednessReport rep;
  rep.samples = opt.samples;
  rep.control_min = std::numeric_limits<double>::infinity();
  double sum_h = 0.0, sum_h2 = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const ChartFrame frame = make_chart_frame(sampler.plane(rng));
    const Matrix x = opt.point_scale / std::sqrt(double(m)) * rng.normal_matrix(m, 2);
    auto direction = [&] {
      const Matrix d = rng.normal_matrix(m, 2);
      return Matrix(d / d.norm());
    };
    const Matrix u = direction(), v = direction(), w = direction();
    const double r = closedness_residual(frame, x, u, v, w, opt.step);
    const double r2 = closedness_residual(frame, x, u, v, w, opt.step / 2);
    rep.residual_max = std::max(rep.residual_max, r);
    sum_h += r;
    sum_h2 += r2;
    const Matrix c = rng.normal_matrix(m, 2);
    const double ctrl = std::abs(exterior_derivative(scaled_chart_omega(frame, c), x, u, v, w, opt.step));
    rep.control_min = std::min(rep.control_min, ctrl);
  }
  rep.residual_mean = sum_h / opt.samples;
  rep.order_estimate = std::log2(sum_h / sum_h2);
  return rep;
}

// ---------------------------------------------------------------------------
// Twistor curves.

/// omega(d/dx, d/dy) along the twistor parametrization times (1 + |z|^2)^2.
inline double fubini_study_ratio(const TwistorCurve& curve, Complex z) {
  require(std::isfinite(z.real()) && std::isfinite(z.imag()), "z must be finite");
  const CVector w = twistor_null(curve, z);
  const CVector dw = -2.0 * z * curve.f(0).cast<Complex>() - Complex(0.0, 2.0) * z * curve.f(1).cast<Complex>() -
                     2.0 * curve.f(2).cast<Complex>();
  auto basis = [](const CVector& v) {
    Matrix b(v.size(), 2);
    b << 2.0 * v.real(), -2.0 * v.imag();
    return b;
  };
  const PlaneMetricData data(curve.ambient(), basis(w));
  const double f = data.omega(basis(dw), basis(Complex(0.0, 1.0) * dw));
  const double r2 = std::norm(z);
  return f * (1.0 + r2) * (1.0 + r2);
}

// ---------------------------------------------------------------------------
// Isometries.

class Isometry {
 public:
  Isometry(const QuadraticSpace& space, Matrix q, double tolerance = 1e-10) : q_(std::move(q)) {
    require(q_.rows() == space.dim() && q_.cols() == space.dim(), "isometry has the wrong shape");
    const double res = (q_.transpose() * space.gram() * q_ - space.gram()).cwiseAbs().maxCoeff();
    require(res <= tolerance * space.scale(), "matrix is not an isometry: Q^T G Q != G");
  }

  const Matrix& matrix() const { return q_; }

 private:
  Matrix q_;
};

/// exp of a Taylor series with scaling and squaring.
inline Matrix matrix_exponential(const Matrix& s) {
  const double norm = s.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix a = s / std::ldexp(1.0, squarings);
  Matrix result = Matrix::Identity(s.rows(), s.cols());
  Matrix term = result;
  for (int k = 1; k < 40; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

/// exp(G^-1 K) with K antisymmetric, entries uniform in [-scale, scale].
inline Isometry random_isometry(const QuadraticSpace& space, std::uint64_t seed, double scale = 0.5) {
  require(scale >= 0.0, "scale must be non-negative");
  Rng rng(seed);
  const int d = space.dim();
  Matrix k = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      k(i, j) = rng.uniform(-scale, scale);
      k(j, i) = -k(i, j);
    }
  const Matrix s = space.gram().lu().solve(k);
  return Isometry(space, matrix_exponential(s), 1e-12);
}

struct InvarianceSample {
  OrientedPositivePlane plane;
  Matrix a;
  Matrix b;
};

struct InvarianceResidual {
  double omega = 0.0;
  double metric = 0.0;
};

inline std::vector<InvarianceSample> random_invariance_samples(const QuadraticSpace& space, int count,
                                                               std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  std::vector<InvarianceSample> out;
  for (int k = 0; k < count; ++k) {
    OrientedPositivePlane w = sampler.plane(rng);
    const int m = space.dim() - 2;
    Matrix a = rng.normal_matrix(m, 2);
    Matrix b = rng.normal_matrix(m, 2);
    out.push_back({std::move(w), std::move(a), std::move(b)});
  }
  return out;
}

/// max |omega_{QW}(QA, QB) - omega_W(A, B)| and the same for g.
inline InvarianceResidual invariance_residual(const QuadraticSpace& space, const Isometry& iso,
                                              const std::vector<InvarianceSample>& samples) {
  const Matrix& q = iso.matrix();
  InvarianceResidual r;
  for (const InvarianceSample& s : samples) {
    const ChartFrame frame = make_chart_frame(s.plane);
    const Matrix da = frame.normal() * s.a, db = frame.normal() * s.b;
    const double w0 = omega_at(frame, s.a, s.b), g0 = metric_at(frame, s.a, s.b);
    const PlaneMetricData moved(space, q * frame.base());
    r.omega = std::max(r.omega, std::abs(moved.omega(q * da, q * db) - w0));
    r.metric = std::max(r.metric, std::abs(moved.metric(q * da, q * db) - g0));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pullback along a family.

struct PullbackValue {
  double value = 0.0;
  /// false when d phi is rank deficient at b
  bool immersion = false;
};

/// omega(d phi x, d phi y) at phi(b), by central differences.
inline PullbackValue pullback_form(const QuadraticSpace& space, const PlaneFamily& phi, const Vector& b,
                                   const Vector& x, const Vector& y, const RankOptions& opt = {}) {
  require(x.size() == b.size() && y.size() == b.size(), "tangent vectors have the wrong dimension");
  const double h = opt.step * std::max(1.0, b.cwiseAbs().maxCoeff());
  auto dphi = [&](const Vector& t) { return Matrix((phi(b + h * t) - phi(b - h * t)) / (2.0 * h)); };
  const PlaneMetricData data(space, phi(b));
  PullbackValue out;
  out.value = data.omega(dphi(x), dphi(y));
  out.immersion = differential_rank(space, phi, b, opt) == b.size();
  return out;
}

}  // namespace hkp
