#pragma once

// Sparse multivariate polynomials with rational coefficients.
//
// Text format: first token is the number of variables d; every following
// line holds d non-negative exponents and a rational coefficient.
// '#' starts a comment.

#include "hkperiod/core.hpp"
#include "hkperiod/exact.hpp"

#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

namespace hkp {

class Polynomial {
 public:
  using Exponent = std::vector<int>;

  explicit Polynomial(int variables = 0) : variables_(variables) {}

  /// sum_ij q_ij x_i x_j
  static Polynomial quadratic_form(const RationalMatrix& q) {
    require(q.rows() == q.cols(), "quadratic form needs a square matrix");
    Polynomial p(q.rows());
    for (int i = 0; i < q.rows(); ++i)
      for (int j = 0; j < q.cols(); ++j) {
        Exponent e(static_cast<std::size_t>(q.rows()), 0);
        e[static_cast<std::size_t>(i)] += 1;
        e[static_cast<std::size_t>(j)] += 1;
        p.add_term(e, q(i, j));
      }
    return p;
  }

  int variables() const { return variables_; }
  const std::map<Exponent, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponent& e, const Rational& c) {
    require(static_cast<int>(e.size()) == variables_, "monomial has the wrong number of variables");
    for (int k : e) require(k >= 0, "negative exponent");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  /// Total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
  }

  bool is_homogeneous() const {
    const int d = degree();
    for (const auto& [e, c] : terms_)
      if (std::accumulate(e.begin(), e.end(), 0) != d) return false;
    return true;
  }

  Polynomial derivative(int var) const {
    require(var >= 0 && var < variables_, "derivative variable out of range");
    Polynomial out(variables_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<std::size_t>(var)];
      if (k == 0) continue;
      Exponent f = e;
      f[static_cast<std::size_t>(var)] -= 1;
      out.add_term(f, c * k);
    }
    return out;
  }

  Rational evaluate(const std::vector<Rational>& x) const {
    require(static_cast<int>(x.size()) == variables_, "evaluation point has the wrong dimension");
    Rational sum = 0;
    for (const auto& [e, c] : terms_) {
      Rational m = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) m *= x[i];
      sum += m;
    }
    return sum;
  }

  double evaluate(const Vector& x) const {
    require(x.size() == variables_, "evaluation point has the wrong dimension");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double m = to_double(c);
      for (std::size_t i = 0; i < e.size(); ++i) m *= std::pow(x(static_cast<Eigen::Index>(i)), e[i]);
      sum += m;
    }
    return sum;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    require(a.variables_ == b.variables_, "polynomial sum: variable mismatch");
    for (const auto& [e, c] : b.terms_) a.add_term(e, c);
    return a;
  }

  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    require(a.variables_ == b.variables_, "polynomial difference: variable mismatch");
    for (const auto& [e, c] : b.terms_) a.add_term(e, -c);
    return a;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require(a.variables_ == b.variables_, "polynomial product: variable mismatch");
    Polynomial out(a.variables_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponent e = ea;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        out.add_term(e, ca * cb);
      }
    return out;
  }

  friend Polynomial operator*(const Rational& s, Polynomial a) {
    if (s == 0) return Polynomial(a.variables_);
    for (auto& [e, c] : a.terms_) c *= s;
    return a;
  }

  Polynomial pow(int k) const {
    require(k >= 0, "negative polynomial power");
    Polynomial out(variables_);
    out.add_term(Exponent(static_cast<std::size_t>(variables_), 0), 1);
    for (int i = 0; i < k; ++i) out = out * (*this);
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.variables_ == b.variables_ && a.terms_ == b.terms_;
  }

 private:
  int variables_;
  std::map<Exponent, Rational> terms_;
};

inline Polynomial read_polynomial(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  require(!rows.empty() && rows.front().size() == 1, "polynomial file must start with the variable count");
  const int d = std::stoi(rows.front().front());
  require(d > 0, "polynomial needs at least one variable");
  Polynomial p(d);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(static_cast<int>(rows[r].size()) == d + 1,
            "each monomial line needs " + std::to_string(d) + " exponents and a coefficient");
    Polynomial::Exponent e(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) e[static_cast<std::size_t>(i)] = std::stoi(rows[r][static_cast<std::size_t>(i)]);
    p.add_term(e, parse_rational(rows[r].back()));
  }
  return p;
}

inline void write_polynomial(std::ostream& out, const Polynomial& p) {
  out << p.variables() << '\n';
  for (const auto& [e, c] : p.terms()) {
    for (int k : e) out << k << ' ';
    out << c << '\n';
  }
}

}  // namespace hkp
