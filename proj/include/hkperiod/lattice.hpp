#pragma once

// Integral lattices, primitive vector enumeration by height, holomorphic
// discs given by polynomial null lifts, and the Cauchy-divisor density
// experiment.
//
// Height of v is max |v_i|. Enumeration sweeps the box of that radius,
// keeping one representative per line (first nonzero coordinate positive).
//
// Disc text format: first token the lift degree d; then one row per ambient
// coordinate with d + 1 complex coefficients, each written "re im", in
// ascending powers of t.

#include "hkperiod/core.hpp"
#include "hkperiod/exact.hpp"
#include "hkperiod/perigeo.hpp"
#include "hkperiod/polyroots.hpp"
#include "hkperiod/posgrass.hpp"
#include "hkperiod/quadspace.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace hkp {

using IntVector = std::vector<long long>;

class IntegralLattice {
 public:
  IntegralLattice(std::string name, const RationalMatrix& gram) : name_(std::move(name)) {
    require(gram.rows() == gram.cols() && gram.rows() > 0, "lattice Gram must be square and nonempty");
    require(gram.is_symmetric(), "lattice Gram must be symmetric");
    const int d = gram.rows();
    gram_ = std::vector<long long>(static_cast<std::size_t>(d * d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const Rational& x = gram(i, j);
        require(denominator(x) == 1, "lattice Gram must be integral");
        gram_[static_cast<std::size_t>(i * d + j)] = static_cast<long long>(numerator(x));
      }
    signature_ = hkp::signature(gram);
    require(signature_.zero == 0, "lattice Gram must be nondegenerate");
    exact_ = gram;
    space_ = QuadraticSpace(gram.to_double());
  }

  const std::string& name() const { return name_; }
  int dim() const { return exact_.rows(); }
  const RationalMatrix& gram() const { return exact_; }
  const QuadraticSpace& space() const { return space_; }
  const Signature& signature() const { return signature_; }

  long long entry(int i, int j) const { return gram_[static_cast<std::size_t>(i * dim() + j)]; }

  long long norm(const IntVector& v) const {
    const int d = dim();
    long long s = 0;
    for (int i = 0; i < d; ++i) {
      if (v[static_cast<std::size_t>(i)] == 0) continue;
      long long row = 0;
      for (int j = 0; j < d; ++j) row += entry(i, j) * v[static_cast<std::size_t>(j)];
      s += v[static_cast<std::size_t>(i)] * row;
    }
    return s;
  }

 private:
  std::string name_;
  std::vector<long long> gram_;
  RationalMatrix exact_;
  QuadraticSpace space_{Matrix::Identity(1, 1)};
  Signature signature_;
};

namespace detail {

inline RationalMatrix direct_sum(const std::vector<RationalMatrix>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.rows();
  RationalMatrix g(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) g(off + i, off + j) = b(i, j);
    off += b.rows();
  }
  return g;
}

inline RationalMatrix hyperbolic_plane() {
  RationalMatrix u(2, 2);
  u(0, 1) = u(1, 0) = 1;
  return u;
}

/// Negated E8 Cartan matrix; chain 0..6 with node 7 attached to node 4.
inline RationalMatrix e8_minus() {
  RationalMatrix g(8, 8);
  for (int i = 0; i < 8; ++i) g(i, i) = -2;
  for (int i = 0; i + 1 < 7; ++i) g(i, i + 1) = g(i + 1, i) = 1;
  g(4, 7) = g(7, 4) = 1;
  return g;
}

}  // namespace detail

/// "U", "E8minus", "K3" or "diag:p,m".
inline IntegralLattice standard_lattice(const std::string& name) {
  using namespace detail;
  if (name == "U") return IntegralLattice(name, hyperbolic_plane());
  if (name == "E8minus") return IntegralLattice(name, e8_minus());
  if (name == "K3")
    return IntegralLattice(name, direct_sum({hyperbolic_plane(), hyperbolic_plane(), hyperbolic_plane(),
                                             e8_minus(), e8_minus()}));
  if (name.rfind("diag:", 0) == 0) {
    const std::string spec = name.substr(5);
    const auto comma = spec.find(',');
    require(comma != std::string::npos, "diag lattice needs the form diag:p,m");
    int p = -1, m = -1;
    try {
      std::size_t used = 0;
      p = std::stoi(spec.substr(0, comma), &used);
      require(used == comma, "bad diag lattice size");
      const std::string rest = spec.substr(comma + 1);
      m = std::stoi(rest, &used);
      require(used == rest.size(), "bad diag lattice size");
    } catch (const std::logic_error&) {
      throw PreconditionError("bad diag lattice: " + name);
    }
    require(p >= 0 && m >= 0 && p + m > 0, "diag lattice needs p, m >= 0 and p + m > 0");
    RationalMatrix g(p + m, p + m);
    for (int i = 0; i < p + m; ++i) g(i, i) = i < p ? 1 : -1;
    return IntegralLattice(name, g);
  }
  throw PreconditionError("unknown lattice: " + name);
}

inline bool primitive_test(const IntVector& v) {
  long long g = 0;
  for (long long x : v) g = std::gcd(g, x);
  require(g != 0, "primitive_test: zero vector");
  return g == 1;
}

inline long long height(const IntVector& v) {
  long long h = 0;
  for (long long x : v) h = std::max(h, x < 0 ? -x : x);
  return h;
}

enum class NormSign { Positive, Negative };

struct EnumerateOptions {
  NormSign sign = NormSign::Positive;
  /// Only the first `support` coordinates vary; -1 means all.
  int support = -1;
};

/// Calls visit(v, q(v,v)) for every primitive v of height <= h with the
/// requested norm sign, one per line, in lexicographic order of the box.
inline void enumerate_vectors(const IntegralLattice& lattice, long long h,
                              const std::function<void(const IntVector&, long long)>& visit,
                              const EnumerateOptions& opt = {}) {
  require(h >= 1, "height bound must be >= 1");
  const int d = lattice.dim();
  const int k = opt.support < 0 ? d : opt.support;
  require(k >= 1 && k <= d, "support must lie in [1, dim]");
  IntVector v(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = -h;
  for (;;) {
    int lead = 0;
    while (lead < k && v[static_cast<std::size_t>(lead)] == 0) ++lead;
    if (lead < k && v[static_cast<std::size_t>(lead)] > 0 && primitive_test(v)) {
      const long long n = lattice.norm(v);
      if ((opt.sign == NormSign::Positive && n > 0) || (opt.sign == NormSign::Negative && n < 0)) visit(v, n);
    }
    int i = k - 1;
    while (i >= 0 && v[static_cast<std::size_t>(i)] == h) v[static_cast<std::size_t>(i--)] = -h;
    if (i < 0) break;
    ++v[static_cast<std::size_t>(i)];
  }
}

inline std::vector<IntVector> enumerate_positive(const IntegralLattice& lattice, long long h,
                                                 const EnumerateOptions& opt = {}) {
  std::vector<IntVector> out;
  enumerate_vectors(lattice, h, [&](const IntVector& v, long long) { out.push_back(v); }, opt);
  return out;
}

inline Vector to_vector(const IntVector& v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  return x;
}

// ---------------------------------------------------------------------------
// Discs.

/// t -> w(t) = sum_k coefficients.col(k) t^k on |t| < 1.
class HolomorphicDisc {
 public:
  HolomorphicDisc(QuadraticSpace ambient, CMatrix coefficients, double check_radius = 0.99)
      : ambient_(std::move(ambient)), coeffs_(std::move(coefficients)) {
    require(coeffs_.rows() == ambient_.dim() && coeffs_.cols() >= 1, "disc lift has the wrong shape");
    // q(w, w) must vanish identically: its coefficients are sums of q(c_a, c_b).
    const int deg = degree();
    double top = 0.0;
    for (int k = 0; k <= deg; ++k) top = std::max(top, coeffs_.col(k).norm());
    const double tol = 1e3 * ambient_.tolerance() * ambient_.scale() * top * top;
    for (int s = 0; s <= 2 * deg; ++s) {
      Complex c = 0.0;
      for (int a = std::max(0, s - deg); a <= std::min(s, deg); ++a)
        c += ambient_.cdot(coeffs_.col(a), coeffs_.col(s - a));
      require(std::abs(c) <= tol, "disc lift is not null: q(w(t), w(t)) != 0");
    }
    for (double r : {0.0, 0.5 * check_radius, check_radius})
      for (int j = 0; j < 16; ++j) {
        const Complex t = std::polar(r, 2.0 * 3.141592653589793 * j / 16.0);
        const CVector w = at(t);
        require(ambient_.cdot(w, CVector(w.conjugate())).real() > tol, "disc lift is not positive: q(w, conj w) <= 0");
      }
  }

  const QuadraticSpace& ambient() const { return ambient_; }
  const CMatrix& coefficients() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }

  CVector at(Complex t) const {
    CVector w = CVector::Zero(coeffs_.rows());
    for (Eigen::Index k = coeffs_.cols(); k-- > 0;) w = w * t + coeffs_.col(k);
    return w;
  }

  /// Coefficients of t -> q(w(t), v).
  ComplexPolynomial pairing(const Vector& v) const {
    const Vector gv = ambient_.gram() * v;
    ComplexPolynomial p(static_cast<std::size_t>(coeffs_.cols()));
    // Eigen's dot conjugates its left argument, which is real here
    for (Eigen::Index k = 0; k < coeffs_.cols(); ++k)
      p[static_cast<std::size_t>(k)] = gv.cast<Complex>().dot(coeffs_.col(k));
    return p;
  }

 private:
  QuadraticSpace ambient_;
  CMatrix coeffs_;
};

namespace detail {
/// Coefficients of a quadratic lift a + b tau + c tau^2 with tau = z0 + r t.
inline CMatrix compose_affine(const CVector& a, const CVector& b, const CVector& c, Complex z0, double r) {
  CMatrix m(a.size(), 3);
  m.col(0) = a + z0 * b + z0 * z0 * c;
  m.col(1) = r * (b + 2.0 * z0 * c);
  m.col(2) = r * r * c;
  return m;
}
}  // namespace detail

/// Pinned disc for a seed. Positive index >= 3: a twistor patch
/// z = z0 + t of a random positive 3-space, |z0| < 0.5. Positive index 2:
/// the lift (1 + tau^2) e1 + i (1 - tau^2) e2 + 2 tau u of a random positive
/// plane (e1, e2) and unit negative u orthogonal to it, tau = z0 + r t with
/// |z0| < 0.5 and r = 0.95 (1 - |z0|).
inline HolomorphicDisc seed_disc(const QuadraticSpace& space, std::uint64_t seed) {
  const Signature sig = signature(space);
  require(sig.positive >= 2 && sig.zero == 0, "seed discs need a nondegenerate form with positive index >= 2");
  Rng rng(seed);
  const PositiveSampler sampler(space);
  const Complex z0 = std::polar(0.5 * std::sqrt(rng.uniform()), 2.0 * 3.141592653589793 * rng.uniform());
  const Complex i(0.0, 1.0);
  if (sig.positive >= 3) {
    const TwistorCurve curve(space, sampler.positive_subspace_basis(rng, 3));
    const CVector f1 = curve.f(0).cast<Complex>(), f2 = curve.f(1).cast<Complex>(), f3 = curve.f(2).cast<Complex>();
    // w(z) = (f1 - i f2) - 2 f3 z + (-f1 - i f2) z^2
    return HolomorphicDisc(space, detail::compose_affine(f1 - i * f2, -2.0 * f3, -f1 - i * f2, z0, 1.0));
  }
  require(sig.negative >= 1, "seed discs need a negative direction");
  const ChartFrame frame = make_chart_frame(sampler.plane(rng));
  const Matrix neg = frame.normal().rightCols(sig.negative);
  Vector c = rng.normal_vector(sig.negative);
  const Vector u = neg * (c / c.norm());
  const CVector e1 = frame.base().col(0).cast<Complex>(), e2 = frame.base().col(1).cast<Complex>();
  const double r = 0.95 * (1.0 - std::abs(z0));
  return HolomorphicDisc(space, detail::compose_affine(e1 + i * e2, 2.0 * u.cast<Complex>(), e1 - i * e2, z0, r));
}

inline HolomorphicDisc read_disc(std::istream& in, const QuadraticSpace& space) {
  std::vector<double> nums;
  std::string line;
  int degree = -1;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (degree < 0) {
        degree = std::stoi(tok);
        require(degree >= 0, "disc degree must be non-negative");
      } else {
        nums.push_back(std::stod(tok));
      }
    }
  }
  require(degree >= 0, "disc file is empty");
  const std::size_t per_row = 2 * static_cast<std::size_t>(degree + 1);
  require(nums.size() == per_row * static_cast<std::size_t>(space.dim()),
          "disc file needs " + std::to_string(space.dim()) + " rows of " + std::to_string(per_row) + " numbers");
  CMatrix coeffs(space.dim(), degree + 1);
  for (int i = 0; i < space.dim(); ++i)
    for (int k = 0; k <= degree; ++k) {
      const std::size_t at = static_cast<std::size_t>(i) * per_row + 2 * static_cast<std::size_t>(k);
      coeffs(i, k) = Complex(nums[at], nums[at + 1]);
    }
  return HolomorphicDisc(space, coeffs);
}

inline void write_disc(std::ostream& out, const HolomorphicDisc& disc) {
  const auto old = out.precision(17);
  out << disc.degree() << '\n';
  const CMatrix& c = disc.coefficients();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) out << (k ? " " : "") << c(i, k).real() << ' ' << c(i, k).imag();
    out << '\n';
  }
  out.precision(old);
}

// ---------------------------------------------------------------------------
// Hits.

struct DiscRoot {
  Complex t;
  double residual = 0.0;  // |q(w(t), v)|
};

/// Roots of q(w(t), v) in |t| < 1.
inline std::vector<DiscRoot> disc_hits(const HolomorphicDisc& disc, const Vector& v) {
  require(v.size() == disc.ambient().dim(), "vector has the wrong dimension");
  const ComplexPolynomial raw = disc.pairing(v);
  double top = 0.0;
  for (const Complex& c : raw) top = std::max(top, std::abs(c));
  double cmax = 0.0;
  for (Eigen::Index k = 0; k < disc.coefficients().cols(); ++k) cmax = std::max(cmax, disc.coefficients().col(k).norm());
  if (top <= 1e3 * disc.ambient().tolerance() * disc.ambient().scale() * v.norm() * cmax)
    throw PreconditionError("disc contained in divisor: q(w(t), v) vanishes identically");
  const ComplexPolynomial p = trim(raw);
  std::vector<DiscRoot> out;
  for (const Complex& t : polynomial_roots(p))
    if (std::abs(t) < 1.0) out.push_back({t, std::abs(evaluate(raw, t))});
  return out;
}

struct HitRecord {
  IntVector v;
  std::vector<DiscRoot> roots;
  long long height = 0;
};

struct DensityOptions {
  EnumerateOptions enumerate;
  int grid = 32;
  double probe_radius = 0.9;
  double dedup = 1e-9;
};

struct DensityRow {
  long long height = 0;
  long long vectors = 0;
  long long hits = 0;
  double covering_radius = std::numeric_limits<double>::infinity();
  double max_residual = 0.0;
  double wall_time_ms = 0.0;
};

/// Probe points of the square grid inside |t| <= radius.
inline std::vector<Complex> probe_grid(int n, double radius) {
  std::vector<Complex> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = n == 1 ? 0.0 : -radius + 2.0 * radius * i / (n - 1);
      const double y = n == 1 ? 0.0 : -radius + 2.0 * radius * j / (n - 1);
      if (x * x + y * y <= radius * radius * (1.0 + 1e-12)) pts.emplace_back(x, y);
    }
  return pts;
}

/// max over probes of the distance to the nearest hit; +inf with no hits.
/// Hits are bucketed on a uniform grid over their bounding box and each
/// probe searches rings of cells outward.
inline double covering_radius(const std::vector<Complex>& hits, const std::vector<Complex>& probes) {
  if (hits.empty()) return std::numeric_limits<double>::infinity();
  double x0 = hits[0].real(), x1 = x0, y0 = hits[0].imag(), y1 = y0;
  for (const Complex& h : hits) {
    x0 = std::min(x0, h.real());
    x1 = std::max(x1, h.real());
    y0 = std::min(y0, h.imag());
    y1 = std::max(y1, h.imag());
  }
  const int n = std::clamp(static_cast<int>(std::sqrt(hits.size() / 4.0)), 1, 2048);
  const double cell = std::max({(x1 - x0) / n, (y1 - y0) / n, 1e-12});
  auto cx = [&](double x) { return std::clamp(static_cast<int>((x - x0) / cell), 0, n - 1); };
  auto cy = [&](double y) { return std::clamp(static_cast<int>((y - y0) / cell), 0, n - 1); };
  std::vector<std::vector<Complex>> grid(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (const Complex& h : hits) grid[static_cast<std::size_t>(cx(h.real()) * n + cy(h.imag()))].push_back(h);

  double worst = 0.0;
  for (const Complex& p : probes) {
    const int px = cx(p.real()), py = cy(p.imag());
    // unsearched hits in ring r lie at least max((r - 1) cell, outside) away
    const double outside = std::hypot(std::max({x0 - p.real(), 0.0, p.real() - (x0 + n * cell)}),
                                      std::max({y0 - p.imag(), 0.0, p.imag() - (y0 + n * cell)}));
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= n; ++ring) {
      if (ring > 0 && std::max((ring - 1) * cell, outside) > std::sqrt(best)) break;
      for (int i = px - ring; i <= px + ring; ++i)
        for (int j = py - ring; j <= py + ring; ++j) {
          if (i < 0 || j < 0 || i >= n || j >= n) continue;
          if (std::max(std::abs(i - px), std::abs(j - py)) != ring) continue;
          for (const Complex& h : grid[static_cast<std::size_t>(i * n + j)]) best = std::min(best, std::norm(h - p));
        }
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

/// Set of disc parameters with near-duplicates merged.
class HitSet {
 public:
  explicit HitSet(double tolerance) : tol_(tolerance), cell_(std::max(1e-6, 10 * tolerance)) {}

  bool insert(Complex t) {
    const long long cx = key(t.real()), cy = key(t.imag());
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t idx : it->second)
          if (std::abs(points_[idx] - t) <= tol_) return false;
      }
    cells_[pack(cx, cy)].push_back(points_.size());
    points_.push_back(t);
    return true;
  }

  const std::vector<Complex>& points() const { return points_; }

 private:
  long long key(double x) const { return static_cast<long long>(std::floor(x / cell_)); }
  static std::uint64_t pack(long long a, long long b) {
    return (static_cast<std::uint64_t>(a) << 32) ^ (static_cast<std::uint64_t>(b) & 0xffffffffULL);
  }

  double tol_;
  double cell_;
  std::vector<Complex> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Hit records for all enumerated vectors of height <= h.
inline std::vector<HitRecord> disc_hit_records(const HolomorphicDisc& disc, const IntegralLattice& lattice, long long h,
                                               const EnumerateOptions& opt = {}) {
  require(disc.ambient().dim() == lattice.dim(), "disc and lattice dimensions differ");
  std::vector<HitRecord> out;
  enumerate_vectors(
      lattice, h,
      [&](const IntVector& v, long long) {
        auto roots = disc_hits(disc, to_vector(v));
        if (!roots.empty()) out.push_back({v, std::move(roots), height(v)});
      },
      opt);
  return out;
}

/// One row per height in the increasing schedule; hit sets are cumulative.
inline std::vector<DensityRow> density_report(const HolomorphicDisc& disc, const IntegralLattice& lattice,
                                              const std::vector<long long>& heights, const DensityOptions& opt = {}) {
  require(!heights.empty(), "height schedule is empty");
  for (std::size_t k = 0; k < heights.size(); ++k)
    require(heights[k] >= 1 && (k == 0 || heights[k] > heights[k - 1]), "height schedule must be increasing");
  require(disc.ambient().dim() == lattice.dim(), "disc and lattice dimensions differ");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Complex> probes = probe_grid(opt.grid, opt.probe_radius);

  // vectors bucketed by the first schedule entry covering their height
  struct Bucket {
    long long vectors = 0;
    std::vector<Complex> roots;
    double max_residual = 0.0;
  };
  std::vector<Bucket> buckets(heights.size());
  enumerate_vectors(
      lattice, heights.back(),
      [&](const IntVector& v, long long) {
        const long long ht = height(v);
        const std::size_t b = static_cast<std::size_t>(std::lower_bound(heights.begin(), heights.end(), ht) - heights.begin());
        Bucket& bucket = buckets[b];
        ++bucket.vectors;
        for (const DiscRoot& r : disc_hits(disc, to_vector(v))) {
          bucket.roots.push_back(r.t);
          bucket.max_residual = std::max(bucket.max_residual, r.residual);
        }
      },
      opt.enumerate);

  std::vector<DensityRow> rows;
  HitSet hits(opt.dedup);
  long long vectors = 0;
  double residual = 0.0;
  for (std::size_t k = 0; k < heights.size(); ++k) {
    vectors += buckets[k].vectors;
    residual = std::max(residual, buckets[k].max_residual);
    for (const Complex& t : buckets[k].roots) hits.insert(t);
    DensityRow row;
    row.height = heights[k];
    row.vectors = vectors;
    row.hits = static_cast<long long>(hits.points().size());
    row.covering_radius = covering_radius(hits.points(), probes);
    row.max_residual = residual;
    row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hkp
