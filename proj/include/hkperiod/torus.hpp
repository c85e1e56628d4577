#pragma once

// Linear complex structures on R^2n: the orthogonal locus of a metric, the
// locus Cau of a symplectic form, reconstruction of J from (g, psi),
// tangent dimensions of the three loci and Siegel coordinates.
//
// Conventions: J0 = [[0, -I], [I, 0]], standard Psi0 = [[0, I], [-I, 0]],
// so Psi0 J0 = Id; psi(u, v) = u^T Psi v and psi_J(u, v) = psi(u, J v).

#include "hkperiod/exact.hpp"
#include "hkperiod/lorkahler.hpp"
#include "hkperiod/quadspace.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

namespace hkp {

inline constexpr double kTorusTolerance = 1e-10;

namespace detail {

inline int half_dimension(Eigen::Index rows, Eigen::Index cols) {
  require(rows == cols && rows > 0 && rows % 2 == 0, "expected a square matrix of even size");
  return static_cast<int>(rows / 2);
}

inline double entry_scale(const Matrix& m) { return std::max(1.0, max_abs(m)); }

template <class M>
M zero_matrix(int rows, int cols) {
  if constexpr (std::is_same_v<M, Matrix>) {
    return Matrix::Zero(rows, cols);
  } else {
    return M(rows, cols);
  }
}

template <class M>
M block_structure(int n, int upper_right, int lower_left) {
  M m = zero_matrix<M>(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    m(i, n + i) = upper_right;
    m(n + i, i) = lower_left;
  }
  return m;
}

}  // namespace detail

inline Matrix standard_complex_structure(int n) { return detail::block_structure<Matrix>(n, -1, 1); }
inline Matrix standard_symplectic_form(int n) { return detail::block_structure<Matrix>(n, 1, -1); }
inline RationalMatrix standard_complex_structure_exact(int n) {
  return detail::block_structure<RationalMatrix>(n, -1, 1);
}
inline RationalMatrix standard_symplectic_form_exact(int n) {
  return detail::block_structure<RationalMatrix>(n, 1, -1);
}

inline bool is_complex_structure(const Matrix& j, double tolerance = kTorusTolerance) {
  if (j.rows() != j.cols() || j.rows() == 0 || j.rows() % 2 != 0) return false;
  const double s = detail::entry_scale(j);
  return max_abs(j * j + Matrix::Identity(j.rows(), j.cols())) <= tolerance * s * s;
}

inline bool is_complex_structure(const RationalMatrix& j) {
  if (j.rows() != j.cols() || j.rows() == 0 || j.rows() % 2 != 0) return false;
  return j * j == Rational(-1) * RationalMatrix::identity(j.rows());
}

inline bool is_orthogonal_structure(const Matrix& g, const Matrix& j, double tolerance = kTorusTolerance) {
  if (!is_complex_structure(j, tolerance) || g.rows() != j.rows() || g.cols() != j.cols()) return false;
  if (max_abs(g - g.transpose()) > tolerance * detail::entry_scale(g) || !is_positive_definite(g)) return false;
  const double s = detail::entry_scale(j);
  return max_abs(j.transpose() * g * j - g) <= tolerance * detail::entry_scale(g) * s * s;
}

inline bool is_orthogonal_structure(const RationalMatrix& g, const RationalMatrix& j) {
  if (!is_complex_structure(j) || g.rows() != j.rows() || !g.is_symmetric()) return false;
  return is_positive_definite(g) && j.transpose() * g * j == g;
}

inline bool is_symplectic_form(const Matrix& psi, double tolerance = kTorusTolerance) {
  if (psi.rows() != psi.cols() || psi.rows() == 0 || psi.rows() % 2 != 0) return false;
  if (max_abs(psi + psi.transpose()) > tolerance * detail::entry_scale(psi)) return false;
  const Eigen::JacobiSVD<Matrix> svd(psi);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 1e-12 * s(0);
}

inline bool is_symplectic_form(const RationalMatrix& psi) {
  if (psi.rows() != psi.cols() || psi.rows() == 0 || psi.rows() % 2 != 0) return false;
  return psi.transpose() == Rational(-1) * psi && determinant(psi) != 0;
}

/// Psi J symmetric and positive definite.
inline bool is_cau_member(const Matrix& psi, const Matrix& j, double tolerance = kTorusTolerance) {
  if (!is_complex_structure(j, tolerance) || !is_symplectic_form(psi, tolerance) || psi.rows() != j.rows())
    return false;
  const Matrix s = psi * j;
  if (max_abs(s - s.transpose()) > tolerance * detail::entry_scale(psi) * detail::entry_scale(j)) return false;
  return is_positive_definite(Matrix(0.5 * (s + s.transpose())));
}

inline bool is_cau_member(const RationalMatrix& psi, const RationalMatrix& j) {
  if (!is_complex_structure(j) || !is_symplectic_form(psi) || psi.rows() != j.rows()) return false;
  const RationalMatrix s = psi * j;
  return s.is_symmetric() && is_positive_definite(s);
}

/// Real vectors u_1..u_n with (u_1, Ju_1, ..., u_n, Ju_n) a real basis,
/// chosen greedily from the standard basis.
inline Matrix complex_basis(const Matrix& j) {
  const int n = detail::half_dimension(j.rows(), j.cols());
  Matrix u(2 * n, 0);
  Matrix span(2 * n, 0);
  for (int k = 0; k < 2 * n && u.cols() < n; ++k) {
    Matrix trial(2 * n, span.cols() + 2);
    trial << span, Vector::Unit(2 * n, k), j.col(k);
    Eigen::FullPivLU<Matrix> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() != trial.cols()) continue;
    span = trial;
    u.conservativeResize(Eigen::NoChange, u.cols() + 1);
    u.col(u.cols() - 1) = Vector::Unit(2 * n, k);
  }
  require(u.cols() == n, "not a complex structure");
  return u;
}

/// Sign of det(u_1..u_n, Ju_1..Ju_n) for a complex basis; J0 gives +1.
inline int orientation_class(const Matrix& j) {
  const Matrix u = complex_basis(j);
  Matrix frame(j.rows(), j.cols());
  frame << u, j * u;
  return frame.determinant() > 0 ? 1 : -1;
}

class LinearComplexStructure {
 public:
  explicit LinearComplexStructure(Matrix j, double tolerance = kTorusTolerance) : j_(std::move(j)) {
    n_ = detail::half_dimension(j_.rows(), j_.cols());
    require(is_complex_structure(j_, tolerance), "J^2 != -Id");
    orientation_ = orientation_class(j_);
  }

  int n() const { return n_; }
  const Matrix& matrix() const { return j_; }
  int orientation() const { return orientation_; }

 private:
  int n_ = 0;
  Matrix j_;
  int orientation_ = 1;
};

class SymplecticForm {
 public:
  explicit SymplecticForm(Matrix psi, double tolerance = kTorusTolerance) : psi_(std::move(psi)) {
    detail::half_dimension(psi_.rows(), psi_.cols());
    require(is_symplectic_form(psi_, tolerance), "symplectic form is degenerate or not antisymmetric");
  }
  const Matrix& matrix() const { return psi_; }
  int n() const { return static_cast<int>(psi_.rows() / 2); }

 private:
  Matrix psi_;
};

class EuclideanMetric {
 public:
  explicit EuclideanMetric(Matrix g, double tolerance = kTorusTolerance) : g_(std::move(g)) {
    detail::half_dimension(g_.rows(), g_.cols());
    require(max_abs(g_ - g_.transpose()) <= tolerance * detail::entry_scale(g_) && is_positive_definite(g_),
            "metric is not symmetric positive definite");
  }
  const Matrix& matrix() const { return g_; }
  int n() const { return static_cast<int>(g_.rows() / 2); }

 private:
  Matrix g_;
};

/// J = A (-A^2)^(-1/2) with g(Au, v) = psi(u, v), computed in a
/// g-orthonormal frame where A becomes antisymmetric.
inline LinearComplexStructure two_out_of_three(const EuclideanMetric& g, const SymplecticForm& psi) {
  require(g.n() == psi.n(), "metric and symplectic form have different sizes");
  const Eigen::LLT<Matrix> llt(g.matrix());
  const Matrix l = llt.matrixL();
  const Matrix lt = l.transpose();
  // B = -L^-1 Psi L^-T
  const Matrix tmp = l.triangularView<Eigen::Lower>().solve(psi.matrix());
  Matrix b = -l.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
  b = 0.5 * (b - b.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(b.transpose() * b);
  const Vector lambda = es.eigenvalues();
  if (!(lambda.minCoeff() > 1e-24 * lambda.maxCoeff())) throw PreconditionError("symplectic form is degenerate");
  const Matrix inv_sqrt = es.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  Matrix u = b * inv_sqrt;
  u = 0.5 * (u - u.transpose());
  const Matrix id = Matrix::Identity(u.rows(), u.cols());
  double unitarity = max_abs(u.transpose() * u - id);
  for (int it = 0; it < 4 && unitarity > 1e-15; ++it) {
    // Newton step of the polar iteration; antisymmetry is preserved
    u = 0.5 * (u + u.inverse().transpose());
    unitarity = max_abs(u.transpose() * u - id);
  }
  if (unitarity > 1e-12 * static_cast<double>(u.rows())) throw NumericalError("polar factor is not orthogonal");
  // J = L^-T U L^T
  const Matrix j = lt.triangularView<Eigen::Upper>().solve(u * lt);
  return LinearComplexStructure(j);
}

struct ReconstructionResiduals {
  double square;       // max |J^2 + Id|
  double orthogonal;   // max |J^T G J - G|
  double symmetric;    // max |Psi J - (Psi J)^T|
  double min_eigen;    // smallest eigenvalue of sym(Psi J)
};

inline ReconstructionResiduals reconstruction_residuals(const Matrix& g, const Matrix& psi, const Matrix& j) {
  const Matrix s = psi * j;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (s + s.transpose())), Eigen::EigenvaluesOnly);
  return {max_abs(j * j + Matrix::Identity(j.rows(), j.cols())), max_abs(j.transpose() * g * j - g),
          max_abs(s - s.transpose()), es.eigenvalues().minCoeff()};
}

enum class Locus { All, Orthogonal, Cau };

namespace detail {

inline int entry_index(int n2, int i, int j) { return i * n2 + j; }

/// Rows of X -> XJ + JX; X flattened row-major.
template <class M>
void append_all_constraints(M& sys, int& row, const M& j) {
  const int d = static_cast<int>(j.rows());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b, ++row)
      for (int c = 0; c < d; ++c) {
        sys(row, entry_index(d, a, c)) += j(c, b);
        sys(row, entry_index(d, c, b)) += j(a, c);
      }
}

/// Rows of X -> X^T G J + J^T G X.
template <class M>
void append_orthogonal_constraints(M& sys, int& row, const M& j, const M& g) {
  const int d = static_cast<int>(j.rows());
  const M gj = g * j;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b, ++row)
      for (int c = 0; c < d; ++c) {
        sys(row, entry_index(d, c, a)) += gj(c, b);
        sys(row, entry_index(d, c, b)) += gj(c, a);
      }
}

/// Rows of X -> Psi X - (Psi X)^T.
template <class M>
void append_cau_constraints(M& sys, int& row, const M& psi) {
  const int d = static_cast<int>(psi.rows());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b, ++row)
      for (int c = 0; c < d; ++c) {
        sys(row, entry_index(d, c, b)) += psi(a, c);
        sys(row, entry_index(d, c, a)) -= psi(b, c);
      }
}

template <class M>
M tangent_system(const M& j, const M* g, const M* psi) {
  const int d = static_cast<int>(j.rows());
  const int blocks = 1 + (g != nullptr) + (psi != nullptr);
  M sys = zero_matrix<M>(blocks * d * d, d * d);
  int row = 0;
  append_all_constraints(sys, row, j);
  if (g) append_orthogonal_constraints(sys, row, j, *g);
  if (psi) append_cau_constraints(sys, row, *psi);
  return sys;
}

inline int numerical_rank(const Matrix& m, double gap = 1e-8) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > gap * s(0)) ++r;
  return r;
}

inline int nullity(const Matrix& sys) { return static_cast<int>(sys.cols()) - numerical_rank(sys); }
inline int nullity(const RationalMatrix& sys) { return sys.cols() - rank(sys); }

}  // namespace detail

/// Real dimension of the tangent space at J of the chosen locus. `form` is
/// the metric G for Orthogonal, Psi for Cau, and ignored for All.
inline int tangent_dimension(Locus locus, const Matrix& j, const Matrix& form = Matrix(),
                             double tolerance = kTorusTolerance) {
  switch (locus) {
    case Locus::All:
      require(is_complex_structure(j, tolerance), "J not in locus");
      return detail::nullity(detail::tangent_system<Matrix>(j, nullptr, nullptr));
    case Locus::Orthogonal:
      require(is_orthogonal_structure(form, j, tolerance), "J not in locus");
      return detail::nullity(detail::tangent_system<Matrix>(j, &form, nullptr));
    case Locus::Cau:
      require(is_cau_member(form, j, tolerance), "J not in locus");
      return detail::nullity(detail::tangent_system<Matrix>(j, nullptr, &form));
  }
  return -1;
}

inline int tangent_dimension(Locus locus, const RationalMatrix& j, const RationalMatrix& form = RationalMatrix()) {
  switch (locus) {
    case Locus::All:
      require(is_complex_structure(j), "J not in locus");
      return detail::nullity(detail::tangent_system<RationalMatrix>(j, nullptr, nullptr));
    case Locus::Orthogonal:
      require(is_orthogonal_structure(form, j), "J not in locus");
      return detail::nullity(detail::tangent_system<RationalMatrix>(j, &form, nullptr));
    case Locus::Cau:
      require(is_cau_member(form, j), "J not in locus");
      return detail::nullity(detail::tangent_system<RationalMatrix>(j, nullptr, &form));
  }
  return -1;
}

/// dim(T orthogonal(G) ∩ T Cau(Psi)) at J.
inline int transversality_defect(const Matrix& g, const Matrix& psi, const Matrix& j,
                                 double tolerance = kTorusTolerance) {
  require(is_orthogonal_structure(g, j, tolerance) && is_cau_member(psi, j, tolerance), "J not in both loci");
  return detail::nullity(detail::tangent_system<Matrix>(j, &g, &psi));
}

inline int transversality_defect(const RationalMatrix& g, const RationalMatrix& psi, const RationalMatrix& j) {
  require(is_orthogonal_structure(g, j) && is_cau_member(psi, j), "J not in both loci");
  return detail::nullity(detail::tangent_system<RationalMatrix>(j, &g, &psi));
}

inline int transversality_defect(const EuclideanMetric& g, const SymplecticForm& psi) {
  return transversality_defect(g.matrix(), psi.matrix(), two_out_of_three(g, psi).matrix());
}

/// Columns (a_1..a_n, b_1..b_n) with S^T Psi S = Psi0, by symplectic
/// Gram-Schmidt with largest-pairing pivoting.
inline Matrix darboux_basis(const Matrix& psi) {
  const int n = detail::half_dimension(psi.rows(), psi.cols());
  std::vector<Vector> rest;
  for (int k = 0; k < 2 * n; ++k) rest.push_back(Vector::Unit(2 * n, k));
  Matrix s(2 * n, 2 * n);
  auto pair = [&](const Vector& u, const Vector& v) { return u.dot(psi * v); };
  for (int k = 0; k < n; ++k) {
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < rest.size(); ++i)
      for (std::size_t j = i + 1; j < rest.size(); ++j) {
        const double p = std::abs(pair(rest[i], rest[j]));
        if (p > best) {
          best = p;
          bi = i;
          bj = j;
        }
      }
    if (!(best > 1e-13)) throw PreconditionError("symplectic form is degenerate");
    const Vector a = rest[bi];
    const Vector b = rest[bj] / pair(rest[bi], rest[bj]);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(bj));
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(bi));
    for (Vector& v : rest) v = v - pair(v, b) * a + pair(v, a) * b;
    s.col(k) = a;
    s.col(n + k) = b;
  }
  return s;
}

/// Writes the +i eigenspace of J in a Darboux basis as columns [X; Y] and
/// returns Z = X Y^-1.
inline CMatrix siegel_point(const Matrix& psi, const Matrix& j, double tolerance = kTorusTolerance) {
  require(is_cau_member(psi, j, tolerance), "J is not in Cau(psi)");
  const int n = detail::half_dimension(j.rows(), j.cols());
  const Matrix s = darboux_basis(psi);
  const Matrix jd = s.lu().solve(j * s);
  const Matrix u = complex_basis(jd);
  const CMatrix w = u.cast<Complex>() - Complex(0.0, 1.0) * (jd * u).cast<Complex>();
  const CMatrix x = w.topRows(n);
  const CMatrix y = w.bottomRows(n);
  const Eigen::FullPivLU<CMatrix> lu(y);
  if (!lu.isInvertible()) throw NumericalError("eigenspace is not a graph over the b-span");
  return x * lu.inverse();
}

inline Matrix random_metric(int n, Rng& rng) {
  const Matrix a = rng.normal_matrix(2 * n, 2 * n);
  return a.transpose() * a / (2.0 * n) + 0.5 * Matrix::Identity(2 * n, 2 * n);
}

/// Random symplectic form whose Cau locus lies in the J0 orientation class
/// and whose condition number is at most 1e3.
inline Matrix random_symplectic_form(int n, Rng& rng) {
  for (;;) {
    const Matrix k = rng.normal_matrix(2 * n, 2 * n);
    Matrix psi = k - k.transpose();
    const Eigen::JacobiSVD<Matrix> svd(psi);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-3 * sv(0)) continue;
    if (darboux_basis(psi).determinant() < 0) {
      psi.row(0).swap(psi.row(1));
      psi.col(0).swap(psi.col(1));
    }
    return psi;
  }
}

/// exp(Psi^-1 H) with H symmetric, entries uniform in [-scale, scale].
inline Matrix random_symplectomorphism(const Matrix& psi, Rng& rng, double scale = 0.3) {
  const int d = static_cast<int>(psi.rows());
  Matrix h(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) h(i, j) = h(j, i) = rng.uniform(-scale, scale);
  return matrix_exponential(psi.lu().solve(h));
}

struct UniquenessReport {
  int samples = 0;
  int converged = 0;        // candidates satisfying both loci and psi-positivity to 1e-8
  double max_distance = 0;  // max |J' - J| over converged candidates
};

/// Perturbs J, projects back onto orthogonal(G) ∩ Cau(Psi) by Gauss-Newton
/// and measures how far the candidate lands from J.
inline UniquenessReport uniqueness_probe(const Matrix& g, const Matrix& psi, const Matrix& j, std::uint64_t seed,
                                         int samples = 100, double perturbation = 1e-3) {
  Rng rng(seed);
  const int d = static_cast<int>(j.rows());
  const Matrix id = Matrix::Identity(d, d);
  UniquenessReport report;
  report.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const Matrix e = rng.normal_matrix(d, d);
    Matrix jp = j + perturbation * e / e.norm();
    for (int it = 0; it < 30; ++it) {
      const Matrix sq = jp * jp + id;
      const Matrix orth = jp.transpose() * g * jp - g;
      const Matrix sym = psi * jp - (psi * jp).transpose();
      Vector f(3 * d * d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          f(a * d + b) = sq(a, b);
          f(d * d + a * d + b) = orth(a, b);
          f(2 * d * d + a * d + b) = sym(a, b);
        }
      if (f.cwiseAbs().maxCoeff() < 1e-14) break;
      const Matrix jac = detail::tangent_system<Matrix>(jp, &g, &psi);
      const Vector step = jac.completeOrthogonalDecomposition().solve(f);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) jp(a, b) -= step(a * d + b);
    }
    if (is_orthogonal_structure(g, jp, 1e-8) && is_cau_member(psi, jp, 1e-8)) {
      ++report.converged;
      report.max_distance = std::max(report.max_distance, max_abs(jp - j));
    }
  }
  return report;
}

}  // namespace hkp
