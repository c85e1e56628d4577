#pragma once

// The positive Grassmannian Gr++(V) of oriented 2-planes on which q is
// positive definite.
//
// Orientation convention. A plane carries an ordered basis (b1, b2); the
// order is the orientation. Its null vector is w = e1 - i e2 for any
// q-orthonormal oriented basis (e1, e2), so that {w + conj(w), i(w - conj(w))}
// = {2 e1, 2 e2} is positively oriented. Conversely a positive null vector v
// gives the plane with ordered basis (v + conj(v), i(v - conj(v))).
// The tangent complex structure rotates W by +90 degrees: (A o R)(e1) = A(e2),
// (A o R)(e2) = -A(e1). Under the null-vector correspondence this is
// multiplication by i on the variation of w.

#include "hkperiod/core.hpp"
#include "hkperiod/quadspace.hpp"

#include <optional>

namespace hkp {

class OrientedPositivePlane {
 public:
  OrientedPositivePlane(QuadraticSpace ambient, Matrix basis)
      : ambient_(std::move(ambient)), basis_(std::move(basis)) {
    require(basis_.rows() == ambient_.dim() && basis_.cols() == 2,
            "a plane needs two vectors of the ambient dimension");
    require(is_positive_definite(gram2(), ambient_.tolerance()), "non-positive plane");
  }

  OrientedPositivePlane(QuadraticSpace ambient, const Vector& b1, const Vector& b2)
      : OrientedPositivePlane(std::move(ambient), stack(b1, b2)) {}

  const QuadraticSpace& ambient() const { return ambient_; }
  const Matrix& basis() const { return basis_; }
  Vector b1() const { return basis_.col(0); }
  Vector b2() const { return basis_.col(1); }

  /// Restriction of q to the ordered basis.
  Matrix gram2() const { return basis_.transpose() * ambient_.gram() * basis_; }

  OrientedPositivePlane reversed() const {
    return OrientedPositivePlane(ambient_, b2(), b1());
  }

  /// Same plane and orientation with a q-orthonormal basis.
  OrientedPositivePlane orthonormalized() const {
    return OrientedPositivePlane(ambient_, orthonormalize_positive(ambient_, basis_));
  }

  /// Euclidean orthogonal projector onto the span (basis independent).
  Matrix projector() const {
    const Eigen::HouseholderQR<Matrix> qr(basis_);
    const Matrix q = qr.householderQ() * Matrix::Identity(basis_.rows(), 2);
    return q * q.transpose();
  }

 private:
  static Matrix stack(const Vector& b1, const Vector& b2) {
    Matrix m(b1.size(), 2);
    m << b1, b2;
    return m;
  }

  QuadraticSpace ambient_;
  Matrix basis_;
};

/// Frobenius distance between span projectors; ignores orientation.
inline double plane_distance(const OrientedPositivePlane& a, const OrientedPositivePlane& b) {
  return (a.projector() - b.projector()).norm();
}

/// True when b's basis is a positive-determinant recombination of a's.
/// Only meaningful when the spans agree.
inline bool same_orientation(const OrientedPositivePlane& a, const OrientedPositivePlane& b) {
  const Matrix change = a.basis().colPivHouseholderQr().solve(b.basis());
  return change.determinant() > 0.0;
}

inline bool same_oriented_plane(const OrientedPositivePlane& a, const OrientedPositivePlane& b,
                                double tolerance = kDefaultTolerance) {
  return plane_distance(a, b) < tolerance && same_orientation(a, b);
}

/// A vector of V (x) C with q(v, v) = 0 and q(v, conj v) > 0, up to scale.
class PositiveNullVector {
 public:
  PositiveNullVector(QuadraticSpace ambient, CVector v)
      : ambient_(std::move(ambient)), v_(std::move(v)) {
    require(v_.size() == ambient_.dim(), "null vector has the wrong dimension");
    const double tol = ambient_.tolerance() * ambient_.scale() * v_.squaredNorm();
    require(std::abs(ambient_.cdot(v_, v_)) <= tol, "vector is not null: q(v,v) != 0");
    require(ambient_.cdot(v_, CVector(v_.conjugate())).real() > tol,
            "null vector is not positive: q(v, conj v) <= 0");
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  const CVector& value() const { return v_; }
  PositiveNullVector conjugate() const { return PositiveNullVector(ambient_, v_.conjugate()); }

 private:
  QuadraticSpace ambient_;
  CVector v_;
};

/// q(v, v) and q(v, conj v) for an arbitrary complex vector.
struct NullDiagnostics {
  Complex self;        // q(v, v)
  Complex hermitian;   // q(v, conj v)
};

inline NullDiagnostics null_diagnostics(const QuadraticSpace& space, const CVector& v) {
  return {space.cdot(v, v), space.cdot(v, CVector(v.conjugate()))};
}

/// Normalizes a null representative: q(w, conj w) = 2, and the first
/// coordinate with modulus at least half the largest made real positive.
inline CVector normalize_null(const QuadraticSpace& space, CVector w) {
  const double h = space.cdot(w, CVector(w.conjugate())).real();
  require(h > 0.0, "cannot normalize a non-positive null vector");
  w *= std::sqrt(2.0 / h);
  const double top = w.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (std::abs(w(k)) >= 0.5 * top) {
      w *= std::conj(w(k)) / std::abs(w(k));
      w(k) = Complex(w(k).real(), 0.0);
      break;
    }
  return w;
}

/// 1 - |<a, b>|^2 / (|a|^2 |b|^2): zero iff the complex lines coincide.
inline double null_line_distance(const CVector& a, const CVector& b) {
  const double c = std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
  return std::max(0.0, 1.0 - c);
}

inline PositiveNullVector plane_to_null(const OrientedPositivePlane& plane) {
  const Matrix e = orthonormalize_positive(plane.ambient(), plane.basis());
  CVector w = e.col(0).cast<Complex>() - Complex(0.0, 1.0) * e.col(1).cast<Complex>();
  return PositiveNullVector(plane.ambient(), normalize_null(plane.ambient(), std::move(w)));
}

inline OrientedPositivePlane null_to_plane(const PositiveNullVector& v) {
  const CVector& z = v.value();
  // v + conj v = 2 Re v,  i (v - conj v) = -2 Im v
  return OrientedPositivePlane(v.ambient(), Vector(2.0 * z.real()), Vector(-2.0 * z.imag()));
}

// ---------------------------------------------------------------------------
// Signature (2,1): the disc model.

/// Orthogonal frame with q(v,v) = q(w,w) = 1 and q(u,u) = -1.
struct DiscFrame {
  Vector u;
  Vector v;
  Vector w;
};

inline void validate_disc_frame(const QuadraticSpace& space, const DiscFrame& f) {
  const double tol = 1e3 * space.tolerance() * space.scale();
  require(f.u.size() == space.dim() && f.v.size() == space.dim() && f.w.size() == space.dim(),
          "disc frame has the wrong dimension");
  require(std::abs(space.norm2(f.u) + 1.0) < tol && std::abs(space.norm2(f.v) - 1.0) < tol &&
              std::abs(space.norm2(f.w) - 1.0) < tol,
          "disc frame must satisfy |v|^2 = |w|^2 = 1, |u|^2 = -1");
  require(std::abs(space.dot(f.u, f.v)) < tol && std::abs(space.dot(f.u, f.w)) < tol &&
              std::abs(space.dot(f.v, f.w)) < tol,
          "disc frame must be orthogonal");
}

/// Frame of a signature (2,1) space built from its orthonormal frame.
inline DiscFrame disc_frame(const QuadraticSpace& space) {
  require(signature(space) == Signature{2, 1, 0}, "disc model needs signature (2,1)");
  const OrthonormalFrame f = orthonormal_frame(space);
  return DiscFrame{f.basis.col(2), f.basis.col(0), f.basis.col(1)};
}

/// The plane <v + a u, w + b u>.
inline OrientedPositivePlane disc_embed(const QuadraticSpace& space, const DiscFrame& frame,
                                        double a, double b) {
  validate_disc_frame(space, frame);
  require(a * a + b * b < 1.0, "non-positive plane: a^2 + b^2 >= 1");
  return OrientedPositivePlane(space, Vector(frame.v + a * frame.u), Vector(frame.w + b * frame.u));
}

struct DiscCoords {
  double a = 0.0;
  double b = 0.0;
  /// The plane's orientation is opposite to that of disc_embed(a, b).
  bool reversed = false;
};

/// Inverse of disc_embed: projects W along u onto <v, w>.
inline DiscCoords disc_coords(const OrientedPositivePlane& plane, const DiscFrame& frame) {
  const QuadraticSpace& space = plane.ambient();
  require(signature(space) == Signature{2, 1, 0}, "disc coordinates need signature (2,1)");
  validate_disc_frame(space, frame);
  Eigen::Matrix2d m;
  Eigen::RowVector2d z;
  for (int i = 0; i < 2; ++i) {
    const Vector b = plane.basis().col(i);
    m(0, i) = space.dot(b, frame.v);
    m(1, i) = space.dot(b, frame.w);
    z(i) = -space.dot(b, frame.u);
  }
  const Eigen::RowVector2d ab = z * m.inverse();
  return DiscCoords{ab(0), ab(1), m.determinant() < 0.0};
}

// ---------------------------------------------------------------------------
// Retraction along a negative line.

inline OrientedPositivePlane retract(const OrientedPositivePlane& plane, const Vector& line) {
  const QuadraticSpace& space = plane.ambient();
  require(space.norm2(line) < -space.tolerance() * space.scale() * line.squaredNorm(),
          "retraction needs a negative line");
  return OrientedPositivePlane(space, project_along(space, line, plane.b1()),
                               project_along(space, line, plane.b2()));
}

// ---------------------------------------------------------------------------
// Graph charts: Hom(W, W^perp) as (dim - 2) x 2 matrices.

/// q-orthonormal oriented basis of W and a q-orthonormal basis of W^perp,
/// positive vectors first. eta(k) = q(normal_k, normal_k) = +-1.
class ChartFrame {
 public:
  ChartFrame(QuadraticSpace ambient, Matrix base, Matrix normal)
      : ambient_(std::move(ambient)), base_(std::move(base)), normal_(std::move(normal)) {
    const int d = ambient_.dim();
    require(base_.rows() == d && base_.cols() == 2 && normal_.rows() == d && normal_.cols() == d - 2,
            "chart frame has the wrong shape");
    Matrix full(d, d);
    full << base_, normal_;
    const Matrix g = full.transpose() * ambient_.gram() * full;
    eta_ = g.diagonal().tail(d - 2);
    const double tol = 1e3 * ambient_.tolerance() * ambient_.scale();
    Matrix expected = Matrix::Zero(d, d);
    expected(0, 0) = expected(1, 1) = 1.0;
    for (int k = 0; k < d - 2; ++k) eta_(k) = eta_(k) > 0 ? 1.0 : -1.0;
    expected.bottomRightCorner(d - 2, d - 2) = eta_.asDiagonal();
    require((g - expected).cwiseAbs().maxCoeff() < tol, "chart frame is not q-orthonormal");
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  const Matrix& base() const { return base_; }
  const Matrix& normal() const { return normal_; }
  const Vector& eta() const { return eta_; }
  int dim() const { return ambient_.dim(); }
  /// Real dimension of the chart, 2 (dim - 2).
  int chart_dim() const { return 2 * (ambient_.dim() - 2); }

  OrientedPositivePlane base_plane() const { return OrientedPositivePlane(ambient_, base_); }

 private:
  QuadraticSpace ambient_;
  Matrix base_;
  Matrix normal_;
  Vector eta_;
};

inline ChartFrame make_chart_frame(const OrientedPositivePlane& plane) {
  const QuadraticSpace& space = plane.ambient();
  const Matrix base = orthonormalize_positive(space, plane.basis());
  const Complement perp = orthogonal_complement(Subspace(space, base));
  const Matrix& c = perp.subspace.basis();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c.transpose() * space.gram() * c);
  const int m = static_cast<int>(c.cols());
  Matrix normal(space.dim(), m);
  int col = 0;
  for (int i = m - 1; i >= 0; --i)
    if (eig.eigenvalues()(i) > 0)
      normal.col(col++) = c * eig.eigenvectors().col(i) / std::sqrt(eig.eigenvalues()(i));
  for (int i = 0; i < m; ++i)
    if (eig.eigenvalues()(i) <= 0)
      normal.col(col++) = c * eig.eigenvectors().col(i) / std::sqrt(-eig.eigenvalues()(i));
  return ChartFrame(space, base, normal);
}

/// Basis (e1 + A e1, e2 + A e2) of the graph of A : W -> W^perp.
inline Matrix graph_basis(const ChartFrame& frame, const Matrix& a) {
  require(a.rows() == frame.dim() - 2 && a.cols() == 2, "chart coordinates have the wrong shape");
  return frame.base() + frame.normal() * a;
}

inline OrientedPositivePlane graph_plane(const ChartFrame& frame, const Matrix& a) {
  const Matrix basis = graph_basis(frame, a);
  require(is_positive_definite(Matrix(basis.transpose() * frame.ambient().gram() * basis),
                               frame.ambient().tolerance()),
          "non-positive graph");
  return OrientedPositivePlane(frame.ambient(), basis);
}

/// A o R, R the +90 degree rotation of the oriented plane.
inline Matrix rotate90(const Matrix& a) {
  require(a.cols() == 2, "tangent matrices have two columns");
  Matrix r(a.rows(), 2);
  r.col(0) = a.col(1);
  r.col(1) = -a.col(0);
  return r;
}

/// Chart coordinates at frame.base() of the tangent vector represented by
/// a variation `variation` of a basis `basis` of the same plane.
inline Matrix tangent_coordinates(const ChartFrame& frame, const Matrix& basis,
                                  const Matrix& variation) {
  const Matrix& g = frame.ambient().gram();
  const Matrix gb = basis.transpose() * g * basis;
  const Matrix coeffs = gb.ldlt().solve(basis.transpose() * g * frame.base());
  require((basis * coeffs - frame.base()).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + max_abs(basis)),
          "basis does not span the chart's base plane");
  return frame.eta().asDiagonal() * (frame.normal().transpose() * g * variation * coeffs);
}

// ---------------------------------------------------------------------------
// Samplers.

/// Draws positive subspaces as graphs over the positive part of a fixed
/// orthonormal frame: X orthonormal in the positive block, C a map into
/// the negative block with operator norm below `max_tilt`.
class PositiveSampler {
 public:
  explicit PositiveSampler(QuadraticSpace space, double max_tilt = 0.9)
      : space_(std::move(space)), frame_(orthonormal_frame(space_)), max_tilt_(max_tilt) {
    require(max_tilt_ > 0.0 && max_tilt_ < 1.0, "max_tilt must lie in (0, 1)");
  }

  const QuadraticSpace& space() const { return space_; }
  const OrthonormalFrame& frame() const { return frame_; }

  /// q-orthonormal-up-to-tilt basis of a random positive k-subspace.
  Matrix positive_subspace_basis(Rng& rng, int k) const {
    require(k <= frame_.positive, "not enough positive directions");
    const Matrix x = random_orthonormal(rng, frame_.positive, k);
    Matrix basis = frame_.positive_part() * x;
    if (frame_.negative > 0) {
      Matrix c = rng.normal_matrix(frame_.negative, k);
      const double top = Eigen::JacobiSVD<Matrix>(c).singularValues()(0);
      if (top > 0.0) c *= rng.uniform(0.0, max_tilt_) / top;
      basis += frame_.negative_part() * c;
    }
    return basis;
  }

  /// Random positive plane with a random (non-orthonormal) ordered basis.
  OrientedPositivePlane plane(Rng& rng) const {
    const Matrix basis = positive_subspace_basis(rng, 2);
    return OrientedPositivePlane(space_, basis * random_mixing(rng));
  }

  Vector negative_vector(Rng& rng) const {
    require(frame_.negative > 0, "space has no negative directions");
    const Vector n = frame_.negative_part() * unit(rng, frame_.negative);
    const Vector p = frame_.positive_part() * unit(rng, frame_.positive);
    return rng.uniform(0.5, 2.0) * (n + rng.uniform(0.0, max_tilt_) * p);
  }

  Vector positive_vector(Rng& rng) const {
    const Vector p = frame_.positive_part() * unit(rng, frame_.positive);
    Vector v = p;
    if (frame_.negative > 0)
      v += rng.uniform(0.0, max_tilt_) * (frame_.negative_part() * unit(rng, frame_.negative));
    return rng.uniform(0.5, 2.0) * v;
  }

 private:
  static Vector unit(Rng& rng, int n) {
    Vector v = rng.normal_vector(n);
    return v / v.norm();
  }

  static Matrix random_orthonormal(Rng& rng, int n, int k) {
    const Matrix g = rng.normal_matrix(n, k);
    const Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    return q;
  }

  /// 2x2 change of basis with singular values in [0.5, 2] and random sign
  /// of determinant.
  static Matrix random_mixing(Rng& rng) {
    auto rot = [](double t) {
      Matrix r(2, 2);
      r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      return r;
    };
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = rng.uniform(0.5, 2.0);
    s(1, 1) = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    return rot(rng.uniform(0.0, 2.0 * std::numbers::pi)) * s *
           rot(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }

  QuadraticSpace space_;
  OrthonormalFrame frame_;
  double max_tilt_;
};

// ---------------------------------------------------------------------------
// Text serialization: "plane <dim>" then dim rows "x1 x2" (full precision).

inline void write_plane(std::ostream& out, const OrientedPositivePlane& plane) {
  out << "plane " << plane.ambient().dim() << '\n';
  out.precision(17);
  for (int i = 0; i < plane.ambient().dim(); ++i)
    out << plane.basis()(i, 0) << ' ' << plane.basis()(i, 1) << '\n';
}

inline OrientedPositivePlane read_plane(std::istream& in, const QuadraticSpace& ambient) {
  std::string tag;
  int dim = 0;
  require(static_cast<bool>(in >> tag >> dim) && tag == "plane", "expected 'plane <dim>' header");
  require(dim == ambient.dim(), "plane dimension does not match the ambient space");
  Matrix basis(dim, 2);
  for (int i = 0; i < dim; ++i)
    require(static_cast<bool>(in >> basis(i, 0) >> basis(i, 1)), "truncated plane record");
  return OrientedPositivePlane(ambient, basis);
}

}  // namespace hkp
