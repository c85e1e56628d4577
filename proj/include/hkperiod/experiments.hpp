#pragma once

// Seeded randomized sweeps over the library: each returns worst-case
// residuals and failure counts so that callers apply their own thresholds.

#include "hkperiod/lattice.hpp"
#include "hkperiod/lorkahler.hpp"
#include "hkperiod/perigeo.hpp"
#include "hkperiod/polynomial.hpp"
#include "hkperiod/posgrass.hpp"
#include "hkperiod/torus.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hkp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Planes and null vectors.

struct LebrunReport {
  int samples = 0;
  double roundtrip_max = 0.0;        // projector distance of plane -> null -> plane
  int roundtrip_orientation_failures = 0;
  double null_max = 0.0;             // |q(w, w)|
  double hermitian_min = kInf;       // q(w, conj w)
  double conjugation_max = 0.0;      // line distance of null(reversed W) and conj null(W)
  int worst_sample = -1;
};

inline LebrunReport lebrun_sweep(const QuadraticSpace& space, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  LebrunReport r;
  r.samples = samples;
  double worst = -1.0;
  for (int k = 0; k < samples; ++k) {
    const OrientedPositivePlane w = sampler.plane(rng);
    const CVector z = plane_to_null(w).value();
    const OrientedPositivePlane back = null_to_plane(PositiveNullVector(space, z));
    const double dist = plane_distance(back, w);
    if (!same_orientation(w, back)) ++r.roundtrip_orientation_failures;
    const NullDiagnostics diag = null_diagnostics(space, z);
    const CVector zr = plane_to_null(w.reversed()).value();
    const double conj = null_line_distance(zr, CVector(z.conjugate()));
    r.roundtrip_max = std::max(r.roundtrip_max, dist);
    r.null_max = std::max(r.null_max, std::abs(diag.self));
    r.hermitian_min = std::min(r.hermitian_min, diag.hermitian.real());
    r.conjugation_max = std::max(r.conjugation_max, conj);
    const double score = std::max({dist, std::abs(diag.self), conj});
    if (score > worst) {
      worst = score;
      r.worst_sample = k;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Disc model and retraction.

struct DiscModelReport {
  int grid_points = 0;
  int boundary_points = 0;
  int library_mismatches = 0;  // plane construction accepts iff a^2 + b^2 < 1
  int oracle_mismatches = 0;   // smallest Gram eigenvalue > 0 iff a^2 + b^2 < 1
  double first_mismatch_a = 0.0;
  double first_mismatch_b = 0.0;
};

/// Grid over [-1.2, 1.2]^2 plus points with 1e-6 <= |a^2 + b^2 - 1| < 1e-3,
/// in the coordinate (2,1) space with frame u = e3, v = e1, w = e2.
inline DiscModelReport disc_model_sweep(int grid, int boundary, std::uint64_t seed) {
  require(grid >= 2 && boundary >= 0, "disc-model needs grid >= 2 and boundary >= 0");
  const QuadraticSpace space = QuadraticSpace::diagonal(2, 1);
  const DiscFrame f{Vector::Unit(3, 2), Vector::Unit(3, 0), Vector::Unit(3, 1)};
  DiscModelReport r;
  auto check = [&](double a, double b) {
    const bool inside = a * a + b * b < 1.0;
    const Vector b1 = f.v + a * f.u, b2 = f.w + b * f.u;
    bool accepted = true;
    try {
      const OrientedPositivePlane p(space, b1, b2);
    } catch (const PreconditionError&) {
      accepted = false;
    }
    Matrix basis(3, 2);
    basis << b1, b2;
    const Matrix gram = basis.transpose() * space.gram() * basis;
    const bool oracle = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().minCoeff() > 0.0;
    const bool lib_bad = accepted != inside, oracle_bad = oracle != inside;
    if ((lib_bad || oracle_bad) && r.library_mismatches + r.oracle_mismatches == 0) {
      r.first_mismatch_a = a;
      r.first_mismatch_b = b;
    }
    r.library_mismatches += lib_bad;
    r.oracle_mismatches += oracle_bad;
  };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      check(-1.2 + 2.4 * i / (grid - 1), -1.2 + 2.4 * j / (grid - 1));
      ++r.grid_points;
    }
  Rng rng(seed);
  for (int k = 0; k < boundary; ++k) {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double mag = std::pow(10.0, rng.uniform(-6.0, -3.0));
    const double rho = std::sqrt(1.0 + (k % 2 == 0 ? mag : -mag));
    check(rho * std::cos(t), rho * std::sin(t));
    ++r.boundary_points;
  }
  return r;
}

struct RetractReport {
  int samples = 0;
  double positivity_min = kInf;    // smallest eigenvalue of the normalized image Gram
  double orthogonality_max = 0.0;  // |q(image, l)| / (|image| |l|)
  double fibre_collapse_max = 0.0; // (2,1): retract(disc_embed(a, b), u) - (v, w)
  double fibre_disc_max = 0.0;     // disc_embed(disc_coords(W)) against W inside span(retract(W), l)
  int fibre_outside = 0;           // disc coordinates with a^2 + b^2 >= 1
  int worst_sample = -1;
};

inline RetractReport retract_sweep(const QuadraticSpace& space, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  const int d = space.dim();
  RetractReport r;
  r.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const OrientedPositivePlane w = sampler.plane(rng);
    const Vector l = sampler.negative_vector(rng);
    const OrientedPositivePlane image = retract(w, l);
    const Matrix e = image.basis();
    const Matrix g = e.transpose() * space.gram() * e / e.squaredNorm();
    const double pos = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().minCoeff();
    double orth = 0.0;
    for (int j = 0; j < 2; ++j) orth = std::max(orth, std::abs(space.dot(e.col(j), l)) / (e.col(j).norm() * l.norm()));
    if (orth > r.orthogonality_max || pos < r.positivity_min) r.worst_sample = k;
    r.positivity_min = std::min(r.positivity_min, pos);
    r.orthogonality_max = std::max(r.orthogonality_max, orth);

    // the fibre through W is the disc model of span(retract(W), l)
    const OrientedPositivePlane base = image.orthonormalized();
    Matrix span(d, 3);
    span << base.basis(), l;
    const QuadraticSpace sub(Matrix(span.transpose() * space.gram() * span));
    const DiscFrame f{Vector::Unit(3, 2) / std::sqrt(-space.norm2(l)), Vector::Unit(3, 0), Vector::Unit(3, 1)};
    const Matrix coords = span.colPivHouseholderQr().solve(w.basis());
    const OrientedPositivePlane local(sub, coords);
    const DiscCoords c = disc_coords(local, f);
    if (c.a * c.a + c.b * c.b >= 1.0) {
      ++r.fibre_outside;
    } else {
      r.fibre_disc_max = std::max(r.fibre_disc_max, plane_distance(disc_embed(sub, f, c.a, c.b), local));
    }
  }
  const QuadraticSpace disc = QuadraticSpace::diagonal(2, 1);
  const DiscFrame f{Vector::Unit(3, 2), Vector::Unit(3, 0), Vector::Unit(3, 1)};
  for (int k = 0; k < samples; ++k) {
    const double rho = std::sqrt(rng.uniform()) * 0.999, t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const OrientedPositivePlane p = retract(disc_embed(disc, f, rho * std::cos(t), rho * std::sin(t)), f.u);
    r.fibre_collapse_max = std::max({r.fibre_collapse_max, (p.b1() - f.v).norm(), (p.b2() - f.w).norm()});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Twistor curves.

struct IntersectionReport {
  int samples = 0;
  int wrong_count = 0;           // instances without exactly one unoriented plane
  double conjugacy_max = 0.0;    // line distance between null(P1) and conj null(P0)
  double curve_residual_max = 0.0;
  double divisor_residual_max = 0.0;
  bool degenerate_reported = false;  // v orthogonal to U gives ContainedIn
  int worst_sample = -1;
};

inline IntersectionReport twistor_intersection_sweep(const QuadraticSpace& space, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  IntersectionReport r;
  r.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const TwistorCurve c(space, sampler.positive_subspace_basis(rng, 3));
    const CauchyDivisor div(space, sampler.positive_vector(rng));
    const TwistorCauchyIntersection x = twistor_cauchy_intersection(c, div);
    if (x.kind != IntersectionKind::Hits || x.count_unoriented() != 1 || x.count_oriented() != 2) {
      ++r.wrong_count;
      r.worst_sample = k;
      continue;
    }
    const CVector w0 = plane_to_null(x.planes[0]).value();
    const CVector w1 = plane_to_null(x.planes[1]).value();
    r.conjugacy_max = std::max(r.conjugacy_max, null_line_distance(w1, CVector(w0.conjugate())));
    for (const OrientedPositivePlane& p : x.planes) {
      const Matrix e = p.orthonormalized().basis();
      for (int j = 0; j < 2; ++j) {
        const Vector b = e.col(j);
        r.curve_residual_max = std::max(r.curve_residual_max, (c.frame() * c.frame_coordinates(b) - b).norm());
        r.divisor_residual_max =
            std::max(r.divisor_residual_max, std::abs(space.dot(div.v(), b)) / div.v().norm());
      }
    }
  }
  // coordinate 3-space and a positive vector orthogonal to it, in (4,1)
  const QuadraticSpace big = QuadraticSpace::diagonal(4, 1);
  const TwistorCurve c(big, Matrix(Matrix::Identity(5, 5).leftCols(3)));
  const TwistorCauchyIntersection x = twistor_cauchy_intersection(c, CauchyDivisor(big, Vector::Unit(5, 3)));
  r.degenerate_reported = x.kind == IntersectionKind::ContainedIn && x.planes.empty();
  return r;
}

struct FubiniStudyReport {
  int curves = 0;
  int points = 0;
  double ratio_mean = 0.0;
  double ratio_min = kInf;
  double ratio_max = -kInf;
  double spread = 0.0;  // (max - min) / |mean|
};

/// omega restricted to twistor curves over the Fubini-Study density, at
/// parameters |z| <= 3.
inline FubiniStudyReport fubini_study_sweep(const QuadraticSpace& space, int curves, int points, std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  FubiniStudyReport r;
  r.curves = curves;
  r.points = points;
  double sum = 0.0;
  for (int c = 0; c < curves; ++c) {
    const TwistorCurve curve(space, sampler.positive_subspace_basis(rng, 3));
    for (int k = 0; k < points; ++k) {
      const double rho = 3.0 * std::sqrt(rng.uniform()), t = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double ratio = fubini_study_ratio(curve, std::polar(rho, t));
      sum += ratio;
      r.ratio_min = std::min(r.ratio_min, ratio);
      r.ratio_max = std::max(r.ratio_max, ratio);
    }
  }
  r.ratio_mean = sum / (static_cast<double>(curves) * points);
  r.spread = (r.ratio_max - r.ratio_min) / std::abs(r.ratio_mean);
  return r;
}

struct InvarianceReport {
  int isometries = 0;
  int samples = 0;
  double omega_max = 0.0;
  double metric_max = 0.0;
  double isometry_defect_max = 0.0;  // |Q^T G Q - G|
};

inline InvarianceReport invariance_sweep(const QuadraticSpace& space, int isometries, int samples_each,
                                         std::uint64_t seed) {
  Rng rng(seed);
  InvarianceReport r;
  r.isometries = isometries;
  r.samples = samples_each;
  for (int k = 0; k < isometries; ++k) {
    const Isometry iso = random_isometry(space, rng.next_seed());
    const auto samples = random_invariance_samples(space, samples_each, rng.next_seed());
    const InvarianceResidual res = invariance_residual(space, iso, samples);
    const Matrix& q = iso.matrix();
    r.omega_max = std::max(r.omega_max, res.omega);
    r.metric_max = std::max(r.metric_max, res.metric);
    r.isometry_defect_max = std::max(r.isometry_defect_max, max_abs(q.transpose() * space.gram() * q - space.gram()));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fujiki polarization and the explicit form.

/// Symmetric integer matrix with entries in [-3, 3] and nonzero determinant.
inline RationalMatrix random_nondegenerate_form(Rng& rng, int d) {
  for (;;) {
    RationalMatrix q(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) q(i, j) = q(j, i) = Rational(rng.uniform_int(-3, 3));
    if (determinant(q) != 0) return q;
  }
}

/// q divided by its first nonzero entry in row-major order.
inline RationalMatrix leading_normalized(RationalMatrix q) {
  Rational s = 0;
  for (int i = 0; i < q.rows() && s == 0; ++i)
    for (int j = 0; j < q.cols() && s == 0; ++j) s = q(i, j);
  require(s != 0, "zero form");
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) q(i, j) /= s;
  return q;
}

struct FujikiSweepReport {
  int cases = 0;
  int exact_failures = 0;      // exact q or exact c q^n != F
  double float_error_max = 0.0;  // relative entry error of float q
  int float_rejections = 0;
};

inline FujikiSweepReport fujiki_sweep(int max_dim, const std::vector<int>& powers, int trials, std::uint64_t seed) {
  Rng rng(seed);
  FujikiSweepReport r;
  for (int n : powers)
    for (int d = 1; d <= max_dim; ++d)
      for (int t = 0; t < trials; ++t) {
        ++r.cases;
        const RationalMatrix q = random_nondegenerate_form(rng, d);
        const Rational c(static_cast<long>(rng.uniform_int(1, 9)), static_cast<long>(rng.uniform_int(1, 5)));
        const Polynomial f = c * Polynomial::quadratic_form(q).pow(n);
        const RationalMatrix expect = leading_normalized(q);
        const ExactFujikiResult ex = fujiki_polarize(f);
        if (!(ex.q == expect) || !(ex.c * Polynomial::quadratic_form(ex.q).pow(n) == f)) ++r.exact_failures;
        const FujikiForm ff{n, d, [&f](const Vector& a) { return f.evaluate(a); }};
        try {
          const FujikiResult fr = fujiki_polarize(ff);
          const Matrix e = expect.to_double();
          r.float_error_max = std::max(r.float_error_max, max_abs(fr.q - e) / max_abs(e));
        } catch (const PreconditionError&) {
          ++r.float_rejections;
        }
      }
  return r;
}

struct BbfReport {
  int probes = 0;
  int used = 0;             // probes with |q(a, b)| >= 1e-3
  double constant = 0.0;    // first observed ratio bbf / q(a, b)
  double spread = 0.0;      // max |ratio - constant| / |constant|
  double positivity_min = kInf;  // bbf(s, s), s = Re(omega) + random multiples
};

/// Synthetic cup c * polarized q^n over a random period point of q.
inline BbfReport bbf_sweep(const QuadraticSpace& space, double c, int n, int probes, std::uint64_t seed) {
  Rng rng(seed);
  const CupProduct cup = polarized_power_cup(space.gram(), c, n);
  const PositiveSampler sampler(space);
  const CVector omega = plane_to_null(sampler.plane(rng)).value();
  BbfReport r;
  r.probes = probes;
  std::optional<double> k;
  for (int t = 0; t < probes; ++t) {
    const Vector a = rng.normal_vector(space.dim());
    const Vector b = rng.normal_vector(space.dim());
    const double qab = space.dot(a, b);
    if (std::abs(qab) >= 1e-3) {
      const double ratio = bbf_explicit(cup, n, omega, a, b) / qab;
      if (!k) k = ratio;
      r.spread = std::max(r.spread, std::abs(ratio - *k) / std::abs(*k));
      ++r.used;
    }
    // sigma + conj sigma for sigma = lambda omega
    const Complex lambda = std::polar(rng.uniform(0.5, 2.0), rng.uniform(0.0, 2.0 * std::numbers::pi));
    const Vector s = 2.0 * (lambda * omega).real();
    r.positivity_min = std::min(r.positivity_min, bbf_explicit(cup, n, omega, s, s));
  }
  r.constant = k.value_or(0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Period rank.

struct PeriodRankReport {
  int twistor = -1;
  int chart = -1;
  int constant = -1;
};

inline PeriodRankReport period_rank_checks(const QuadraticSpace& space, std::uint64_t seed) {
  Rng rng(seed);
  const PositiveSampler sampler(space);
  const int d = space.dim();
  PeriodRankReport r;

  const TwistorCurve curve(space, sampler.positive_subspace_basis(rng, 3));
  const PlaneFamily twistor = [&](const Vector& p) { return twistor_point(curve, Complex(p(0), p(1))).basis(); };
  std::vector<Vector> pts2;
  for (int k = 0; k < 5; ++k) pts2.push_back(0.5 * rng.normal_vector(2));
  r.twistor = period_image_rank(space, twistor, pts2);

  const ChartFrame frame = make_chart_frame(sampler.plane(rng));
  const Matrix d1 = rng.normal_matrix(d - 2, 2), d2 = rng.normal_matrix(d - 2, 2);
  const PlaneFamily chart = [&](const Vector& p) {
    return graph_basis(frame, Matrix(0.1 * (p(0) * d1 + p(1) * rotate90(d1) + p(2) * d2 + p(3) * rotate90(d2))));
  };
  r.chart = period_image_rank(space, chart, {Vector::Zero(4), Vector::Constant(4, 0.1)});

  const Matrix fixed = sampler.plane(rng).basis();
  const PlaneFamily constant = [&](const Vector&) { return fixed; };
  r.constant = period_image_rank(space, constant, {Vector::Zero(3), Vector::Ones(3)});
  return r;
}

// ---------------------------------------------------------------------------
// Torus side.

struct TorusReport {
  int samples = 0;
  int membership_failures = 0;   // any of the three predicates fails at the tolerance
  double square_max = 0.0;       // max |J^2 + Id|
  double orthogonal_max = 0.0;   // max |J^T G J - G| / max(1, |G|)
  double symmetric_max = 0.0;    // max |Psi J - (Psi J)^T| / max(1, |Psi|)
  int transversality_nonzero = 0;
  int siegel_failures = 0;       // Z not symmetric to 1e-9 or Im Z not positive definite
  int orientation_failures = 0;  // J outside the J0 orientation class
  int worst_sample = -1;
};

inline TorusReport torus_sweep(int max_n, int samples, std::uint64_t seed, double tolerance = kTorusTolerance) {
  Rng rng(seed);
  TorusReport r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const int n = 1 + s % max_n;
    const Matrix g = random_metric(n, rng);
    const Matrix psi = random_symplectic_form(n, rng);
    const LinearComplexStructure lj = two_out_of_three(EuclideanMetric(g), SymplecticForm(psi));
    const Matrix& j = lj.matrix();
    const ReconstructionResiduals res = reconstruction_residuals(g, psi, j);
    r.square_max = std::max(r.square_max, res.square);
    r.orthogonal_max = std::max(r.orthogonal_max, res.orthogonal / std::max(1.0, max_abs(g)));
    r.symmetric_max = std::max(r.symmetric_max, res.symmetric / std::max(1.0, max_abs(psi)));
    if (!is_complex_structure(j, tolerance) || !is_orthogonal_structure(g, j, tolerance) ||
        !is_cau_member(psi, j, tolerance)) {
      ++r.membership_failures;
      r.worst_sample = s;
    }
    if (transversality_defect(g, psi, j, tolerance) != 0) ++r.transversality_nonzero;
    if (lj.orientation() != 1) ++r.orientation_failures;
    const CMatrix z = siegel_point(psi, j, tolerance);
    const Matrix im = 0.5 * (z.imag() + z.imag().transpose());
    const bool sym = (z - z.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, z.cwiseAbs().maxCoeff());
    if (!sym || !(Eigen::SelfAdjointEigenSolver<Matrix>(im).eigenvalues().minCoeff() > 0.0)) ++r.siegel_failures;
  }
  return r;
}

struct TorusDims {
  int n = 0;
  int all = 0;
  int orthogonal = 0;
  int cau = 0;
  int transversality = 0;
};

/// Exact dimensions at the standard triple (Id, Psi0, J0).
inline TorusDims torus_dimensions_exact(int n) {
  const RationalMatrix j0 = standard_complex_structure_exact(n);
  const RationalMatrix id = RationalMatrix::identity(2 * n);
  const RationalMatrix psi = standard_symplectic_form_exact(n);
  return {n, tangent_dimension(Locus::All, j0), tangent_dimension(Locus::Orthogonal, j0, id),
          tangent_dimension(Locus::Cau, j0, psi), transversality_defect(id, psi, j0)};
}

}  // namespace hkp
