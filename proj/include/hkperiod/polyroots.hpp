#pragma once

// Roots of complex polynomials: closed forms up to degree 2, companion
// matrix eigenvalues above, Newton polishing in all cases.

#include "hkperiod/core.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace hkp {

/// Coefficients in ascending order: p(t) = sum_k c[k] t^k.
using ComplexPolynomial = std::vector<Complex>;

inline Complex evaluate(const ComplexPolynomial& p, Complex t) {
  Complex acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
  return acc;
}

inline Complex evaluate_derivative(const ComplexPolynomial& p, Complex t) {
  Complex acc = 0.0;
  for (std::size_t k = p.size(); k-- > 1;) acc = acc * t + static_cast<double>(k) * p[k];
  return acc;
}

/// sum_k |c_k| |t|^k, the natural scale of p(t) for rounding error.
inline double evaluation_scale(const ComplexPolynomial& p, Complex t) {
  double acc = 0.0;
  const double r = std::abs(t);
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

/// Drops leading coefficients below rel * max |c_k|.
inline ComplexPolynomial trim(ComplexPolynomial p, double rel = 1e-14) {
  double top = 0.0;
  for (const Complex& c : p) top = std::max(top, std::abs(c));
  while (!p.empty() && std::abs(p.back()) <= rel * top) p.pop_back();
  return p;
}

inline Complex newton_polish(const ComplexPolynomial& p, Complex t, int iterations = 8) {
  double best = std::abs(evaluate(p, t));
  for (int k = 0; k < iterations && best > 0.0; ++k) {
    const Complex d = evaluate_derivative(p, t);
    if (d == Complex(0.0)) break;
    const Complex next = t - evaluate(p, t) / d;
    const double r = std::abs(evaluate(p, next));
    if (!(r < best)) break;
    t = next;
    best = r;
  }
  return t;
}

/// All roots with multiplicity; p must have nonzero leading coefficient.
inline std::vector<Complex> polynomial_roots(const ComplexPolynomial& p) {
  require(!p.empty() && p.back() != Complex(0.0), "polynomial needs a nonzero leading coefficient");
  const std::size_t n = p.size() - 1;
  std::vector<Complex> roots;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-p[0] / p[1]);
  } else if (n == 2) {
    const Complex a = p[2], b = p[1], c = p[0];
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    // q = -(b + sign disc) / 2 avoids cancellation
    const Complex q = -0.5 * (std::real(std::conj(b) * disc) >= 0 ? b + disc : b - disc);
    if (q == Complex(0.0)) {
      roots = {0.0, 0.0};
    } else {
      roots = {q / a, c / q};
    }
  } else {
    CMatrix companion = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -p[i] / p[n];
    const Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
    require(es.info() == Eigen::Success, "companion eigenvalue solver failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) roots.push_back(es.eigenvalues()(i));
  }
  for (Complex& r : roots) r = newton_polish(p, r);
  return roots;
}

}  // namespace hkp
