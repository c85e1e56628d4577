#include "hkperiod/perigeo.hpp"

#include <gtest/gtest.h>

namespace hkp {
namespace {

const Complex I(0.0, 1.0);

// 3U + 2 E8(-1), assembled by hand.
RationalMatrix k3_gram() {
  RationalMatrix g(22, 22);
  for (int k = 0; k < 3; ++k) g(2 * k, 2 * k + 1) = g(2 * k + 1, 2 * k) = 1;
  const int e8[8][8] = {{2, -1, 0, 0, 0, 0, 0, 0},  {-1, 2, -1, 0, 0, 0, 0, 0}, {0, -1, 2, -1, 0, 0, 0, -1},
                        {0, 0, -1, 2, -1, 0, 0, 0}, {0, 0, 0, -1, 2, -1, 0, 0}, {0, 0, 0, 0, -1, 2, -1, 0},
                        {0, 0, 0, 0, 0, -1, 2, 0},  {0, 0, -1, 0, 0, 0, 0, 2}};
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) g(6 + 8 * b + i, 6 + 8 * b + j) = -e8[i][j];
  return g;
}

Matrix coordinate_basis(int d, std::initializer_list<int> idx) {
  Matrix b = Matrix::Zero(d, static_cast<Eigen::Index>(idx.size()));
  int c = 0;
  for (int i : idx) b(i, c++) = 1.0;
  return b;
}

Matrix random_positive_3space(const PositiveSampler& s, Rng& rng) { return s.positive_subspace_basis(rng, 3); }

// ---------------------------------------------------------------------------

TEST(PeriodPoint, NullVectorOfPlaneIsPeriodPoint) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(11);
  const PositiveSampler s(v);
  for (int k = 0; k < 50; ++k) EXPECT_TRUE(is_period_point(v, plane_to_null(s.plane(rng)).value()));
}

TEST(PeriodPoint, RealVectorIsNot) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  EXPECT_FALSE(is_period_point(v, Vector(Vector::Unit(4, 0)).cast<Complex>()));
  EXPECT_FALSE(is_period_point(v, Vector((Vector::Unit(4, 0) + Vector::Unit(4, 3)).eval()).cast<Complex>()));
}

TEST(PeriodPoint, MixedSignVectorIsNot) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  const CVector x = Vector::Unit(4, 0).cast<Complex>() + I * Vector::Unit(4, 3).cast<Complex>();
  // q(x,x) = 1 + 1 = 2 and q(x, conj x) = 1 - 1 = 0: both conditions fail.
  EXPECT_NEAR(std::abs(v.cdot(x, x) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v.cdot(x, CVector(x.conjugate()))), 0.0, 1e-15);
  EXPECT_FALSE(is_period_point(v, x));
}

// ---------------------------------------------------------------------------

TEST(Twistor, OriginAndInfinity) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  const TwistorCurve c(v, coordinate_basis(4, {0, 1, 2}));
  const OrientedPositivePlane w12(v, Vector::Unit(4, 0), Vector::Unit(4, 1));
  EXPECT_TRUE(same_oriented_plane(twistor_point(c, Complex(0.0)), w12));
  EXPECT_TRUE(same_oriented_plane(twistor_point(c, std::nullopt), w12.reversed()));
  EXPECT_TRUE(same_oriented_plane(twistor_point(c, Complex(1e9)), w12.reversed(), 1e-8));
}

TEST(Twistor, RejectsNonPositiveSpace) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  EXPECT_THROW(TwistorCurve(v, coordinate_basis(4, {0, 1, 3})), PreconditionError);
}

TEST(Twistor, NullVectorIsHolomorphic) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(5);
  const PositiveSampler s(v);
  for (int trial = 0; trial < 20; ++trial) {
    const TwistorCurve c(v, random_positive_3space(s, rng));
    const Complex z(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
    // Affine chart of the null line: n / q(n, f1), independent of the
    // normalization chosen by plane_to_null.
    auto affine = [&](Complex t) {
      const CVector n = plane_to_null(twistor_point(c, t)).value();
      return CVector(n / v.cdot(n, c.f(0).cast<Complex>()));
    };
    const double h = 1e-5;
    const CVector dx = (affine(z + h) - affine(z - h)) / (2 * h);
    const CVector dy = (affine(z + I * h) - affine(z - I * h)) / (2 * h);
    // Cauchy-Riemann: d/dy = i d/dx.
    EXPECT_LT((dy - I * dx).norm(), 1e-6) << "trial " << trial;
  }
}

TEST(Twistor, PlanesArePositiveInUAndOrthogonalToNormal) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(6);
  const PositiveSampler s(v);
  for (int trial = 0; trial < 10; ++trial) {
    const TwistorCurve c(v, random_positive_3space(s, rng));
    for (int k = 0; k < 20; ++k) {
      const Complex z(rng.normal() * 2, rng.normal() * 2);
      const OrientedPositivePlane p = twistor_point(c, z);
      const Eigen::Vector3d sn = twistor_normal(z);
      EXPECT_NEAR(sn.norm(), 1.0, 1e-14);
      const Vector normal = c.frame() * sn;
      for (int j = 0; j < 2; ++j) {
        const Vector b = p.basis().col(j);
        EXPECT_LT(std::abs(v.dot(normal, b)), 1e-10 * b.norm());
        // b lies in U: it equals its q-projection.
        EXPECT_LT((c.frame() * c.frame_coordinates(b) - b).norm(), 1e-10 * b.norm());
      }
      // (s, b1, b2) positively oriented in the frame.
      Eigen::Matrix3d m;
      m << sn, c.frame_coordinates(p.b1()), c.frame_coordinates(p.b2());
      EXPECT_GT(m.determinant(), 0.0);
      const SpherePoint back = twistor_parameter(sn);
      ASSERT_TRUE(back.has_value());
      EXPECT_LT(std::abs(*back - z), 1e-10 * (1 + std::norm(z)));
    }
  }
}

TEST(Twistor, AntipodeGivesReversedPlane) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 4);
  Rng rng(7);
  const PositiveSampler s(v);
  const TwistorCurve c(v, random_positive_3space(s, rng));
  for (int k = 0; k < 50; ++k) {
    const Complex z(rng.normal(), rng.normal());
    const Complex antipode = -1.0 / std::conj(z);
    const OrientedPositivePlane a = twistor_point(c, z);
    const OrientedPositivePlane b = twistor_point(c, antipode);
    EXPECT_LT(plane_distance(a, b), 1e-10);
    EXPECT_FALSE(same_orientation(a, b));
  }
}

TEST(Twistor, InjectiveOnSamples) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 2);
  Rng rng(8);
  const TwistorCurve c(v, coordinate_basis(5, {0, 1, 2}));
  std::vector<Complex> zs;
  for (int k = 0; k < 60; ++k) zs.emplace_back(rng.normal(), rng.normal());
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j) {
      const OrientedPositivePlane a = twistor_point(c, zs[i]);
      const OrientedPositivePlane b = twistor_point(c, zs[j]);
      EXPECT_FALSE(same_oriented_plane(a, b, 1e-6));
    }
}

// ---------------------------------------------------------------------------

TEST(CauchyIntersection, CoordinateCase) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  const TwistorCurve c(v, coordinate_basis(4, {0, 1, 2}));
  const auto r = twistor_cauchy_intersection(c, CauchyDivisor(v, Vector::Unit(4, 2)));
  ASSERT_EQ(r.kind, IntersectionKind::Hits);
  ASSERT_EQ(r.count_oriented(), 2);
  EXPECT_EQ(r.count_unoriented(), 1);
  const OrientedPositivePlane w12(v, Vector::Unit(4, 0), Vector::Unit(4, 1));
  EXPECT_LT(plane_distance(r.planes[0], w12), 1e-12);
  EXPECT_LT(plane_distance(r.planes[1], w12), 1e-12);
  EXPECT_NE(same_orientation(r.planes[0], w12), same_orientation(r.planes[1], w12));
}

TEST(CauchyIntersection, NullVectorRejected) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  EXPECT_THROW(CauchyDivisor(v, Vector::Unit(4, 2) + Vector::Unit(4, 3)), PreconditionError);
  EXPECT_THROW(CauchyDivisor(v, Vector::Unit(4, 3)), PreconditionError);
}

TEST(CauchyIntersection, CurveContainedInDivisor) {
  const QuadraticSpace v = QuadraticSpace::diagonal(4, 1);
  const TwistorCurve c(v, coordinate_basis(5, {0, 1, 2}));
  const auto r = twistor_cauchy_intersection(c, CauchyDivisor(v, Vector::Unit(5, 3)));
  EXPECT_EQ(r.kind, IntersectionKind::ContainedIn);
  EXPECT_TRUE(r.planes.empty());
}

TEST(CauchyIntersection, RandomInstancesGiveOneConjugatePair) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(21);
  const PositiveSampler s(v);
  for (int k = 0; k < 1000; ++k) {
    const TwistorCurve c(v, random_positive_3space(s, rng));
    const CauchyDivisor d(v, s.positive_vector(rng));
    const auto r = twistor_cauchy_intersection(c, d);
    ASSERT_EQ(r.kind, IntersectionKind::Hits);
    ASSERT_EQ(r.count_oriented(), 2);
    ASSERT_EQ(r.count_unoriented(), 1);
    const CVector w0 = plane_to_null(r.planes[0]).value();
    const CVector w1 = plane_to_null(r.planes[1]).value();
    EXPECT_LT(null_line_distance(w1, CVector(w0.conjugate())), 1e-10);
    for (const auto& p : r.planes) {
      EXPECT_TRUE(cauchy_contains(d, p));
      const Matrix e = p.orthonormalized().basis();
      for (int j = 0; j < 2; ++j) {
        EXPECT_LT(std::abs(v.dot(d.v(), e.col(j))) / d.v().norm(), 1e-10);
        EXPECT_LT((c.frame() * c.frame_coordinates(e.col(j)) - e.col(j)).norm(), 1e-10);
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(CauchyContains, Examples) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 2);
  const CauchyDivisor d(v, Vector::Unit(5, 2));
  EXPECT_TRUE(cauchy_contains(d, OrientedPositivePlane(v, Vector::Unit(5, 0), Vector::Unit(5, 1))));
  EXPECT_FALSE(cauchy_contains(d, OrientedPositivePlane(v, Vector::Unit(5, 0), Vector::Unit(5, 2))));
}

TEST(CauchyContains, PlaneAndNullTestsAgree) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(31);
  const PositiveSampler s(v);
  int contained = 0;
  for (int k = 0; k < 1000; ++k) {
    const OrientedPositivePlane w = s.plane(rng);
    const Vector x = k % 2 ? cauchy_through(w).sample(rng) : s.positive_vector(rng);
    const CauchyDivisor d(v, x);
    const bool a = cauchy_contains(d, w);
    EXPECT_EQ(a, cauchy_contains(d, plane_to_null(w)));
    EXPECT_EQ(a, k % 2 == 1);
    contained += a;
  }
  EXPECT_EQ(contained, 500);
}

TEST(CauchyThrough, SignatureThreeOne) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  const OrientedPositivePlane w(v, Vector::Unit(4, 0), Vector::Unit(4, 1));
  const CauchyPencil p = cauchy_through(w);
  EXPECT_EQ(p.signature(), (Signature{1, 1, 0}));
  // W^perp = span(e3, e4) exactly.
  EXPECT_LT(p.basis().topRows(2).cwiseAbs().maxCoeff(), 1e-14);
  for (double a : {-2.0, -0.5, 0.3, 1.0})
    for (double b : {-1.5, -0.2, 0.0, 0.7}) {
      const Vector x = a * Vector::Unit(4, 2) + b * Vector::Unit(4, 3);
      EXPECT_EQ(p.contains(x), a * a > b * b) << a << ' ' << b;
    }
  EXPECT_FALSE(p.contains(Vector::Unit(4, 0)));
}

TEST(CauchyThrough, RandomSignatureAndSamples) {
  Rng rng(41);
  for (int n : {1, 4, 19}) {
    const QuadraticSpace v = QuadraticSpace::diagonal(3, n);
    const PositiveSampler s(v);
    for (int k = 0; k < 20; ++k) {
      const OrientedPositivePlane w = s.plane(rng);
      const CauchyPencil p = cauchy_through(w);
      const Matrix& b = p.basis();
      EXPECT_EQ(signature(Matrix(b.transpose() * v.gram() * b)), (Signature{1, n, 0}));
      EXPECT_EQ(p.signature(), (Signature{1, n, 0}));
      for (int j = 0; j < 5; ++j) {
        const Vector x = p.sample(rng);
        EXPECT_TRUE(p.contains(x));
        EXPECT_TRUE(cauchy_contains(CauchyDivisor(v, x), w));
      }
    }
  }
}

TEST(CauchyThrough, TwistorCurveThroughWMeetsDivisorAtW) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(51);
  const PositiveSampler s(v);
  for (int k = 0; k < 100; ++k) {
    const OrientedPositivePlane w = s.plane(rng);
    const CauchyPencil p = cauchy_through(w);
    const Vector x = p.sample(rng);
    const TwistorCurve c = twistor_curve_through(w, p.sample(rng));
    const auto r = twistor_cauchy_intersection(c, CauchyDivisor(v, x));
    ASSERT_EQ(r.kind, IntersectionKind::Hits);
    EXPECT_LT(std::min(plane_distance(r.planes[0], w), plane_distance(r.planes[1], w)), 1e-9);
  }
}

// ---------------------------------------------------------------------------

Polynomial power_form(const RationalMatrix& q, const Rational& c, int n) {
  return c * Polynomial::quadratic_form(q).pow(n);
}

RationalMatrix normalized_leading(RationalMatrix q) {
  Rational s = 0;
  for (int i = 0; i < q.rows() && s == 0; ++i)
    for (int j = 0; j < q.cols() && s == 0; ++j) s = q(i, j);
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j) q(i, j) /= s;
  return q;
}

RationalMatrix random_nondegenerate(Rng& rng, int d) {
  for (;;) {
    RationalMatrix q(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) q(i, j) = q(j, i) = Rational(rng.uniform_int(-3, 3));
    if (determinant(q) != 0) return q;
  }
}

TEST(Fujiki, QuadraticIdentityOnK3Exact) {
  const RationalMatrix g = k3_gram();
  const ExactFujikiResult r = fujiki_polarize(Polynomial::quadratic_form(g));
  EXPECT_EQ(r.q, g);
  EXPECT_EQ(r.c, 1);
}

TEST(Fujiki, SquaredLorentzForm) {
  // F = 3 (a1^2 + a2^2 - a3^2)^2
  RationalMatrix q(3, 3);
  q(0, 0) = 1;
  q(1, 1) = 1;
  q(2, 2) = -1;
  const Polynomial f = power_form(q, 3, 2);
  const ExactFujikiResult r = fujiki_polarize(f);
  EXPECT_EQ(r.q, q);
  EXPECT_EQ(r.c, 3);

  FujikiForm ff{2, 3, [](const Vector& a) {
                  const double t = a(0) * a(0) + a(1) * a(1) - a(2) * a(2);
                  return 3.0 * t * t;
                }};
  const FujikiResult fr = fujiki_polarize(ff);
  EXPECT_LT((fr.q - q.to_double()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fr.c, 3.0, 1e-8);
  EXPECT_LT(fr.residual, 1e-12);
}

TEST(Fujiki, DegenerateFourthPowerRejected) {
  Polynomial f(3);
  f.add_term({4, 0, 0}, 1);
  try {
    fujiki_polarize(f);
    FAIL() << "expected rejection";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("not of Fujiki type"), std::string::npos);
  }
  FujikiForm ff{2, 3, [](const Vector& a) { return std::pow(a(0), 4); }};
  try {
    fujiki_polarize(ff);
    FAIL() << "expected rejection";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("not of Fujiki type"), std::string::npos);
  }
}

TEST(Fujiki, NonPowerRejected) {
  Polynomial f(2);
  f.add_term({4, 0}, 1);
  f.add_term({0, 4}, 1);
  EXPECT_THROW(fujiki_polarize(f), PreconditionError);
  FujikiForm ff{2, 2, [](const Vector& a) { return std::pow(a(0), 4) + std::pow(a(1), 4); }};
  EXPECT_THROW(fujiki_polarize(ff), PreconditionError);
}

TEST(Fujiki, NonHomogeneousRejected) {
  Polynomial f(2);
  f.add_term({2, 0}, 1);
  f.add_term({1, 0}, 1);
  EXPECT_THROW(fujiki_polarize(f), PreconditionError);
  FujikiForm ff{1, 2, [](const Vector& a) { return a(0) * a(0) + a(1); }};
  EXPECT_THROW(fujiki_polarize(ff), PreconditionError);
}

TEST(Fujiki, RandomFormsRecoveredExactlyAndInFloat) {
  Rng rng(61);
  for (int n = 1; n <= 3; ++n)
    for (int d = 1; d <= 6; ++d)
      for (int trial = 0; trial < 2; ++trial) {
        const RationalMatrix q = random_nondegenerate(rng, d);
        const Rational c(static_cast<long>(rng.uniform_int(1, 9)), static_cast<long>(rng.uniform_int(1, 5)));
        const ExactFujikiResult r = fujiki_polarize(power_form(q, c, n));
        const RationalMatrix expect = normalized_leading(q);
        EXPECT_EQ(r.q, expect) << "n=" << n << " d=" << d;
        EXPECT_EQ(power_form(r.q, r.c, n), power_form(q, c, n));

        const Matrix qd = q.to_double();
        const double cd = to_double(c);
        FujikiForm ff{n, d, [qd, cd, n](const Vector& a) { return cd * std::pow(a.dot(qd * a), n); }};
        const FujikiResult fr = fujiki_polarize(ff);
        const Matrix ed = expect.to_double();
        EXPECT_LT((fr.q - ed).cwiseAbs().maxCoeff() / max_abs(ed), 1e-8) << "n=" << n << " d=" << d;
      }
}

TEST(Fujiki, LargestEntryNormalization) {
  RationalMatrix q(2, 2);
  q(0, 0) = 1;
  q(1, 1) = -4;
  const ExactFujikiResult r = fujiki_polarize(power_form(q, 2, 2), FujikiNormalization::UnitLargestEntry);
  EXPECT_EQ(r.q(1, 1), 1);
  EXPECT_EQ(r.q(0, 0), Rational(-1, 4));
  EXPECT_EQ(r.c, 32);
}

TEST(Polynomials, TextRoundtrip) {
  std::istringstream in("# F = 3 (x^2 - y^2)^2\n2\n4 0 3\n2 2 -6\n0 4 3\n");
  const Polynomial p = read_polynomial(in);
  EXPECT_EQ(p.degree(), 4);
  std::ostringstream out;
  write_polynomial(out, p);
  std::istringstream again(out.str());
  EXPECT_EQ(read_polynomial(again), p);
  EXPECT_THROW(
      [] {
        std::istringstream bad("2\n1 1\n");
        read_polynomial(bad);
      }(),
      PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(Bbf, QuadraticCaseIsTwiceTheForm) {
  const Matrix g = k3_gram().to_double();
  const CupProduct cup = [&g](const std::vector<CVector>& x) {
    return Complex((x[0].transpose() * g.cast<Complex>() * x[1])(0, 0));
  };
  Rng rng(71);
  const QuadraticSpace v(g);
  const CVector omega = plane_to_null(PositiveSampler(v).plane(rng)).value();
  for (int k = 0; k < 20; ++k) {
    Vector a(22), b(22);
    for (int i = 0; i < 22; ++i) {
      a(i) = static_cast<double>(rng.uniform_int(-3, 3));
      b(i) = static_cast<double>(rng.uniform_int(-3, 3));
    }
    EXPECT_DOUBLE_EQ(bbf_explicit(cup, 1, omega, a, b), 2.0 * a.dot(g * b));
  }
}

TEST(Bbf, PolarizedCupMatchesPower) {
  Matrix q = Matrix::Zero(4, 4);
  q.diagonal() << 1, 1, -1, -1;
  const CupProduct cup = polarized_power_cup(q, 2.5, 3);
  Rng rng(72);
  for (int k = 0; k < 10; ++k) {
    const Vector a = rng.normal_vector(4);
    const std::vector<CVector> args(6, a.cast<Complex>());
    EXPECT_NEAR(cup(args).real(), 2.5 * std::pow(a.dot(q * a), 3), 1e-10 * (1 + std::pow(a.squaredNorm(), 3)));
  }
}

TEST(Bbf, ProportionalToSeededForm) {
  Matrix q = Matrix::Zero(4, 4);
  q.diagonal() << 1, 1, -1, -1;
  const CVector omega = Vector::Unit(4, 0).cast<Complex>() + I * Vector::Unit(4, 1).cast<Complex>();
  Rng rng(73);
  for (int n : {2, 3}) {
    const CupProduct cup = polarized_power_cup(q, 1.7, n);
    std::optional<double> k;
    int used = 0;
    for (int t = 0; t < 100; ++t) {
      const Vector a = rng.normal_vector(4);
      const Vector b = rng.normal_vector(4);
      const double qab = a.dot(q * b);
      if (std::abs(qab) < 1e-3) continue;
      const double ratio = bbf_explicit(cup, n, omega, a, b) / qab;
      if (!k) k = ratio;
      EXPECT_NEAR(ratio, *k, 1e-8 * std::abs(*k)) << "n=" << n;
      ++used;
    }
    EXPECT_GT(used, 90);
    const Vector s = 2.0 * omega.real();
    EXPECT_GT(bbf_explicit(cup, n, omega, s, s), 0.0);
  }
}

TEST(Bbf, PrintedWeightIsNotProportional) {
  Matrix q = Matrix::Zero(4, 4);
  q.diagonal() << 1, 1, -1, -1;
  const CVector omega = Vector::Unit(4, 0).cast<Complex>() + I * Vector::Unit(4, 1).cast<Complex>();
  const CupProduct cup = polarized_power_cup(q, 1.0, 2);
  // a = b = e1 against a = e1, b = e3: the same q-ratio is not reproduced.
  const Vector e1 = Vector::Unit(4, 0), e3 = Vector::Unit(4, 2);
  const double r1 = bbf_explicit(cup, 2, omega, e1, e1, 0.5) / q(0, 0);
  const double r2 = bbf_explicit(cup, 2, omega, e3, e3, 0.5) / q(2, 2);
  EXPECT_GT(std::abs(r1 - r2), 1e-3);
}

TEST(Bbf, VanishingDenominatorReported) {
  Matrix q = Matrix::Identity(3, 3);
  const CupProduct cup = polarized_power_cup(q, 1.0, 2);
  const CVector zero = CVector::Zero(3);
  EXPECT_THROW(bbf_explicit(cup, 2, zero, Vector::Unit(3, 0), Vector::Unit(3, 1)), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(PeriodRank, ConstantMapIsZero) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 4);
  const Matrix base = coordinate_basis(7, {0, 1});
  const PlaneFamily phi = [&](const Vector&) { return base; };
  EXPECT_EQ(period_image_rank(v, phi, {Vector::Zero(3), Vector::Ones(3)}), 0);
}

TEST(PeriodRank, TwistorCurveHasRealRankTwo) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(81);
  const PositiveSampler s(v);
  const TwistorCurve c(v, s.positive_subspace_basis(rng, 3));
  const PlaneFamily phi = [&](const Vector& p) {
    return twistor_point(c, Complex(p(0), p(1))).basis();
  };
  std::vector<Vector> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(rng.normal_vector(2) * 0.5);
  EXPECT_EQ(period_image_rank(v, phi, pts), 2);
  for (const Vector& p : pts) EXPECT_EQ(differential_rank(v, phi, p), 2);
}

TEST(PeriodRank, ChartPatchHasRankFour) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 19);
  Rng rng(82);
  const ChartFrame f = make_chart_frame(PositiveSampler(v).plane(rng));
  const Matrix dir = rng.normal_matrix(20, 2);
  const Matrix dir2 = rng.normal_matrix(20, 2);
  // two complex parameters: A = z1 D1 + z2 D2 with i acting by rotate90
  const PlaneFamily phi = [&](const Vector& p) {
    const Matrix a = 0.1 * (p(0) * dir + p(1) * rotate90(dir) + p(2) * dir2 + p(3) * rotate90(dir2));
    return graph_basis(f, a);
  };
  EXPECT_EQ(period_image_rank(v, phi, {Vector::Zero(4), Vector::Constant(4, 0.1)}), 4);
}

TEST(PeriodRank, StepUnderflow) {
  const QuadraticSpace v = QuadraticSpace::diagonal(3, 1);
  const Matrix base = coordinate_basis(4, {0, 1});
  const PlaneFamily phi = [&](const Vector&) { return base; };
  EXPECT_THROW(differential_rank(v, phi, Vector::Zero(1), RankOptions{1e-300, 1e-6}), NumericalError);
}

}  // namespace
}  // namespace hkp
