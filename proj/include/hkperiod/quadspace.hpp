#pragma once

// Real quadratic spaces of arbitrary signature: signatures, subspaces,
// orthogonal complements, projections and definiteness tests, in 64-bit
// floating point and in exact rational arithmetic.

#include "hkperiod/core.hpp"
#include "hkperiod/exact.hpp"

#include <istream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace hkp {

struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;

  int dim() const { return positive + negative + zero; }
  friend bool operator==(const Signature&, const Signature&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Signature& s) {
    return os << '(' << s.positive << ',' << s.negative << ',' << s.zero << ')';
  }
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline Rational magnitude(const Rational& x) { return x < 0 ? Rational(-x) : x; }

/// Inertia of a symmetric matrix by congruence (LDL^T with symmetric
/// Bunch-Kaufman pivoting). Only field operations are used, so with
/// Rational scalars and an exact zero test the count is exact.
template <class S, class IsZero>
Signature ldlt_inertia(std::vector<S> a, int n, IsZero is_zero) {
  auto at = [&](int i, int j) -> S& { return a[static_cast<std::size_t>(i) * n + j]; };
  // Bunch-Kaufman growth constant, rounded to a rational.
  const S alpha = S(64) / S(100);
  std::vector<int> active(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = i;
  Signature sig;

  while (!active.empty()) {
    int diag_idx = active.front();
    S diag_max = magnitude(at(diag_idx, diag_idx));
    int off_i = -1, off_j = -1;
    S off_max = S(0);
    for (std::size_t x = 0; x < active.size(); ++x) {
      const int i = active[x];
      if (magnitude(at(i, i)) > diag_max) {
        diag_max = magnitude(at(i, i));
        diag_idx = i;
      }
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const int j = active[y];
        if (magnitude(at(i, j)) > off_max) {
          off_max = magnitude(at(i, j));
          off_i = i;
          off_j = j;
        }
      }
    }
    const bool diag_zero = is_zero(diag_max);
    if (diag_zero && (off_i < 0 || is_zero(off_max))) {
      sig.zero += static_cast<int>(active.size());
      break;
    }
    auto remove = [&](int idx) {
      active.erase(std::find(active.begin(), active.end(), idx));
    };
    if (!diag_zero && diag_max >= alpha * off_max) {
      const S pivot = at(diag_idx, diag_idx);
      (pivot > S(0) ? sig.positive : sig.negative) += 1;
      remove(diag_idx);
      for (int k : active) {
        const S f = at(k, diag_idx) / pivot;
        if (f == S(0)) continue;
        for (int l : active) at(k, l) -= f * at(diag_idx, l);
      }
    } else {
      // 2x2 pivot block: det = a_ii a_jj - a_ij^2 < 0, one of each sign.
      const int i = off_i, j = off_j;
      const S aii = at(i, i), ajj = at(j, j), aij = at(i, j);
      const S det = aii * ajj - aij * aij;
      sig.positive += 1;
      sig.negative += 1;
      remove(i);
      remove(j);
      for (int k : active) {
        const S ki = at(k, i), kj = at(k, j);
        // row k of the multiplier [a_ki a_kj] E^{-1}
        const S mi = (ki * ajj - kj * aij) / det;
        const S mj = (kj * aii - ki * aij) / det;
        for (int l : active) at(k, l) -= mi * at(i, l) + mj * at(j, l);
      }
    }
  }
  return sig;
}

}  // namespace detail

/// Real vector space with a symmetric bilinear form, floating-point mode.
/// The Gram matrix is shared and immutable, so copies are cheap.
class QuadraticSpace {
 public:
  explicit QuadraticSpace(Matrix gram, double tolerance = kDefaultTolerance)
      : gram_(std::make_shared<const Matrix>(std::move(gram))), tolerance_(tolerance) {
    require(gram_->rows() == gram_->cols() && gram_->rows() > 0,
            "Gram matrix must be square and non-empty");
    const double scale = std::max(1.0, max_abs(*gram_));
    require((*gram_ - gram_->transpose()).cwiseAbs().maxCoeff() <= tolerance_ * scale,
            "Gram matrix is not symmetric");
  }

  /// diag(1, ..., 1, -1, ..., -1) with `positive` plus signs.
  static QuadraticSpace diagonal(int positive, int negative,
                                 double tolerance = kDefaultTolerance) {
    Vector d(positive + negative);
    d.head(positive).setOnes();
    d.tail(negative).setConstant(-1.0);
    return QuadraticSpace(d.asDiagonal().toDenseMatrix(), tolerance);
  }

  int dim() const { return static_cast<int>(gram_->rows()); }
  const Matrix& gram() const { return *gram_; }
  double tolerance() const { return tolerance_; }
  double scale() const { return std::max(1.0, max_abs(*gram_)); }

  double dot(const Vector& x, const Vector& y) const { return x.dot(*gram_ * y); }
  double norm2(const Vector& x) const { return dot(x, x); }
  /// Complex-bilinear extension (no conjugation).
  Complex cdot(const CVector& x, const CVector& y) const {
    return (x.transpose() * gram_->cast<Complex>() * y)(0, 0);
  }

  bool is_nondegenerate() const;

 private:
  std::shared_ptr<const Matrix> gram_;
  double tolerance_;
};

/// Exact counterpart of QuadraticSpace.
class RationalQuadraticSpace {
 public:
  explicit RationalQuadraticSpace(RationalMatrix gram)
      : gram_(std::make_shared<const RationalMatrix>(std::move(gram))) {
    require(gram_->rows() == gram_->cols() && gram_->rows() > 0,
            "Gram matrix must be square and non-empty");
    require(gram_->is_symmetric(), "Gram matrix is not symmetric");
  }

  int dim() const { return gram_->rows(); }
  const RationalMatrix& gram() const { return *gram_; }

  Rational dot(const RationalMatrix& x, const RationalMatrix& y) const {
    return (x.transpose() * (*gram_) * y)(0, 0);
  }

  QuadraticSpace to_float(double tolerance = kDefaultTolerance) const {
    return QuadraticSpace(gram_->to_double(), tolerance);
  }

 private:
  std::shared_ptr<const RationalMatrix> gram_;
};

inline Signature signature(const Matrix& gram, double tolerance = kDefaultTolerance) {
  require(gram.rows() == gram.cols(), "signature of a non-square matrix");
  const int n = static_cast<int>(gram.rows());
  const double scale = std::max(1.0, max_abs(gram));
  require((gram - gram.transpose()).cwiseAbs().maxCoeff() <= tolerance * scale,
          "signature of a non-symmetric matrix");
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = 0.5 * (gram(i, j) + gram(j, i));
  return detail::ldlt_inertia(std::move(a), n,
                              [&](double x) { return std::abs(x) <= tolerance * scale; });
}

inline Signature signature(const QuadraticSpace& space) {
  return signature(space.gram(), space.tolerance());
}

inline Signature signature(const RationalMatrix& gram) {
  require(gram.is_symmetric(), "signature of a non-symmetric matrix");
  const int n = gram.rows();
  std::vector<Rational> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = gram(i, j);
  return detail::ldlt_inertia(std::move(a), n, [](const Rational& x) { return x == 0; });
}

inline Signature signature(const RationalQuadraticSpace& space) {
  return signature(space.gram());
}

inline bool QuadraticSpace::is_nondegenerate() const { return signature(*this).zero == 0; }

/// Span of explicit basis columns inside an ambient quadratic space.
class Subspace {
 public:
  Subspace(QuadraticSpace ambient, Matrix basis)
      : ambient_(std::move(ambient)), basis_(std::move(basis)) {
    require(basis_.rows() == ambient_.dim(), "subspace basis has the wrong ambient dimension");
    if (basis_.cols() > 0) {
      Eigen::FullPivLU<Matrix> lu(basis_);
      lu.setThreshold(1e-12);
      require(lu.rank() == basis_.cols(), "subspace basis is linearly dependent");
    }
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  const Matrix& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }

 private:
  QuadraticSpace ambient_;
  Matrix basis_;
};

class RationalSubspace {
 public:
  RationalSubspace(RationalQuadraticSpace ambient, RationalMatrix basis)
      : ambient_(std::move(ambient)), basis_(std::move(basis)) {
    require(basis_.rows() == ambient_.dim(), "subspace basis has the wrong ambient dimension");
    require(rank(basis_) == basis_.cols(), "subspace basis is linearly dependent");
  }

  const RationalQuadraticSpace& ambient() const { return ambient_; }
  const RationalMatrix& basis() const { return basis_; }
  int dim() const { return basis_.cols(); }

 private:
  RationalQuadraticSpace ambient_;
  RationalMatrix basis_;
};

/// Gram matrix of q on the basis of `sub`.
inline QuadraticSpace restrict_form(const Subspace& sub) {
  const Matrix& b = sub.basis();
  Matrix g = b.transpose() * sub.ambient().gram() * b;
  g = 0.5 * (g + g.transpose());
  return QuadraticSpace(std::move(g), sub.ambient().tolerance());
}

inline RationalQuadraticSpace restrict_form(const RationalSubspace& sub) {
  const RationalMatrix& b = sub.basis();
  return RationalQuadraticSpace(b.transpose() * sub.ambient().gram() * b);
}

struct Complement {
  Subspace subspace;
  /// q restricted to the input is degenerate, so the complement meets it.
  bool degenerate = false;
};

struct RationalComplement {
  RationalSubspace subspace;
  bool degenerate = false;
};

/// {x : q(x, s) = 0 for all s in sub}. The returned basis is orthonormal
/// for the Euclidean structure of the coordinates.
inline Complement orthogonal_complement(const Subspace& sub) {
  const QuadraticSpace& v = sub.ambient();
  require(v.is_nondegenerate(), "orthogonal complement needs a nondegenerate ambient form");
  const int d = v.dim(), k = sub.dim();
  Matrix basis;
  if (k == 0) {
    basis = Matrix::Identity(d, d);
  } else {
    const Matrix m = v.gram() * sub.basis();
    Eigen::HouseholderQR<Matrix> qr(m);
    const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    basis = q.rightCols(d - k);
  }
  const bool degenerate = k > 0 && signature(restrict_form(sub)).zero > 0;
  return Complement{Subspace(v, std::move(basis)), degenerate};
}

inline RationalComplement orthogonal_complement(const RationalSubspace& sub) {
  const RationalMatrix constraints = (sub.ambient().gram() * sub.basis()).transpose();
  require(signature(sub.ambient()).zero == 0,
          "orthogonal complement needs a nondegenerate ambient form");
  RationalMatrix basis = sub.dim() == 0 ? RationalMatrix::identity(sub.ambient().dim())
                                        : null_space(constraints);
  const bool degenerate = sub.dim() > 0 && signature(restrict_form(sub)).zero > 0;
  return RationalComplement{RationalSubspace(sub.ambient(), std::move(basis)), degenerate};
}

/// q-orthogonal projection of x into line^perp along the line.
inline Vector project_along(const QuadraticSpace& space, const Vector& line, const Vector& x) {
  const double ll = space.norm2(line);
  require(std::abs(ll) > space.tolerance() * space.scale() * line.squaredNorm(),
          "cannot project along a null line");
  return x - (space.dot(x, line) / ll) * line;
}

inline Vector project_along(const Subspace& line, const Vector& x) {
  require(line.dim() == 1, "project_along expects a line");
  return project_along(line.ambient(), line.basis().col(0), x);
}

inline RationalMatrix project_along(const RationalSubspace& line, const RationalMatrix& x) {
  require(line.dim() == 1, "project_along expects a line");
  const RationalMatrix l = line.basis().col(0);
  const Rational ll = line.ambient().dot(l, l);
  require(ll != 0, "cannot project along a null line");
  return x - (line.ambient().dot(x, l) / ll) * l;
}

/// Cholesky with a pivot floor of tolerance * scale.
inline bool is_positive_definite(const Matrix& gram, double tolerance = kDefaultTolerance) {
  const Eigen::Index n = gram.rows();
  const double floor = tolerance * std::max(1.0, max_abs(gram));
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = gram(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > floor)) return false;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i)
      l(i, j) = (gram(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  return true;
}

inline bool is_positive_definite(const QuadraticSpace& space) {
  return is_positive_definite(space.gram(), space.tolerance());
}

/// Exact: every LDL^T pivot (ratio of consecutive leading minors) positive.
inline bool is_positive_definite(const RationalMatrix& gram) {
  require(gram.is_symmetric(), "definiteness test of a non-symmetric matrix");
  RationalMatrix a = gram;
  const int n = a.rows();
  for (int k = 0; k < n; ++k) {
    if (a(k, k) <= 0) return false;
    for (int i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      const Rational f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return true;
}

inline bool is_positive_definite(const RationalQuadraticSpace& space) {
  return is_positive_definite(space.gram());
}

/// q-orthonormal basis of the whole space: positive vectors first, then
/// negative ones, q(e_i, e_j) = +-delta_ij.
struct OrthonormalFrame {
  Matrix basis;
  int positive = 0;
  int negative = 0;

  Matrix positive_part() const { return basis.leftCols(positive); }
  Matrix negative_part() const { return basis.rightCols(negative); }
};

inline OrthonormalFrame orthonormal_frame(const QuadraticSpace& space) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(space.gram());
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double floor = space.tolerance() * space.scale();
  const int d = space.dim();
  OrthonormalFrame frame;
  frame.basis.resize(d, d);
  int col = 0;
  for (int i = d - 1; i >= 0; --i)
    if (lambda(i) > floor) {
      frame.basis.col(col++) = eig.eigenvectors().col(i) / std::sqrt(lambda(i));
      ++frame.positive;
    }
  for (int i = 0; i < d; ++i)
    if (lambda(i) < -floor) {
      frame.basis.col(col++) = eig.eigenvectors().col(i) / std::sqrt(-lambda(i));
      ++frame.negative;
    }
  require(col == d, "orthonormal frame needs a nondegenerate form");
  return frame;
}

/// Orientation-preserving Gram-Schmidt for columns spanning a positive
/// definite subspace: returns a q-orthonormal basis with the same flag.
inline Matrix orthonormalize_positive(const QuadraticSpace& space, const Matrix& basis) {
  Matrix e = basis;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) e.col(j) -= space.dot(e.col(i), e.col(j)) * e.col(i);
    const double n2 = space.norm2(e.col(j));
    require(n2 > space.tolerance() * space.scale() * e.col(j).squaredNorm(),
            "basis does not span a positive subspace");
    e.col(j) /= std::sqrt(n2);
  }
  return e;
}

/// Plain-text Gram matrix: first token `dim`, then dim rows of
/// whitespace-separated rationals (p/q) or decimals.
inline RationalMatrix read_gram(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
  }
  require(!tokens.empty(), "empty Gram matrix file");
  const int dim = std::stoi(tokens.front());
  require(dim > 0, "Gram matrix dimension must be positive");
  require(static_cast<int>(tokens.size()) == 1 + dim * dim,
          "Gram matrix file: expected " + std::to_string(dim * dim) + " entries");
  RationalMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      g(i, j) = parse_rational(tokens[static_cast<std::size_t>(1 + i * dim + j)]);
  require(g.is_symmetric(), "Gram matrix is not symmetric");
  return g;
}

inline void write_gram(std::ostream& out, const RationalMatrix& g) {
  out << g.rows() << '\n' << g;
}

}  // namespace hkp
