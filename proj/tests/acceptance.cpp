// Acceptance suite: one line per criterion, exit status 0 iff all pass.
// Usage: acceptance <path-to-hkp>

#include "hkperiod/experiments.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace hkp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(3) << x;
  return os.str();
}

// eigenvalue count oracle for a nondegenerate symmetric matrix
Signature eigen_signature(const Matrix& g) {
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues();
  return {static_cast<int>((ev.array() > 1e-9).count()), static_cast<int>((ev.array() < -1e-9).count()),
          static_cast<int>((ev.array().abs() <= 1e-9).count())};
}

// integer Faddeev-LeVerrier characteristic polynomial, then Descartes' rule (all roots real)
Signature descartes_signature(const RationalMatrix& a) {
  using boost::multiprecision::cpp_int;
  const int d = a.rows();
  const auto at = [d](int i, int j) { return static_cast<std::size_t>(i * d + j); };
  std::vector<cpp_int> x(static_cast<std::size_t>(d * d)), m(x.size()), am(x.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) x[at(i, j)] = numerator(a(i, j));
  std::vector<cpp_int> c(static_cast<std::size_t>(d) + 1);
  c[static_cast<std::size_t>(d)] = 1;
  for (int i = 0; i < d; ++i) m[at(i, i)] = 1;
  for (int k = 1; k <= d; ++k) {
    cpp_int tr = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        cpp_int s = 0;
        for (int l = 0; l < d; ++l)
          if (x[at(i, l)] != 0 && m[at(l, j)] != 0) s += x[at(i, l)] * m[at(l, j)];
        am[at(i, j)] = s;
        if (i == j) tr += s;
      }
    const cpp_int ck = -tr / k;
    c[static_cast<std::size_t>(d - k)] = ck;
    m.swap(am);
    for (int i = 0; i < d; ++i) m[at(i, i)] += ck;
  }
  int zero = 0;
  while (zero <= d && c[static_cast<std::size_t>(zero)] == 0) ++zero;
  auto changes = [&](bool flip) {
    int count = 0, last = 0;
    for (int k = zero; k <= d; ++k) {
      const cpp_int& v = c[static_cast<std::size_t>(k)];
      if (v == 0) continue;
      const int sign = (v > 0 ? 1 : -1) * (flip && k % 2 == 1 ? -1 : 1);
      if (last != 0 && sign != last) ++count;
      last = sign;
    }
    return count;
  };
  return {changes(false), changes(true), zero};
}

// lower times upper unitriangular integer matrix: unimodular
RationalMatrix unimodular(int d, Rng& rng) {
  RationalMatrix l = RationalMatrix::identity(d), u = RationalMatrix::identity(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      u(i, j) = static_cast<int>(rng.uniform_int(-1, 1));
      l(j, i) = static_cast<int>(rng.uniform_int(-1, 1));
    }
  return l * u;
}

Verdict criterion_signature() {
  const IntegralLattice k3 = standard_lattice("K3");
  const Signature exact = signature(k3.gram());
  bool ok = exact == Signature{3, 19, 0} && eigen_signature(k3.gram().to_double()) == exact &&
            descartes_signature(k3.gram()) == exact;
  Rng rng(101);
  const std::vector<std::string> names{"K3", "E8minus", "U", "diag:2,5", "diag:3,19"};
  int changed = 0;
  for (int k = 0; k < 100; ++k) {
    const IntegralLattice lat = standard_lattice(names[static_cast<std::size_t>(k) % names.size()]);
    const RationalMatrix t = unimodular(lat.dim(), rng);
    const RationalMatrix moved = t.transpose() * lat.gram() * t;
    const bool same = signature(moved) == lat.signature() && descartes_signature(moved) == lat.signature();
    ok = ok && same;
    changed += same;
  }
  return {ok, "K3 exact " + std::to_string(exact.positive) + "," + std::to_string(exact.negative) + "," +
                  std::to_string(exact.zero) + "; " + std::to_string(changed) + "/100 basis changes invariant"};
}

Verdict criterion_lebrun() {
  const LebrunReport r = lebrun_sweep(QuadraticSpace::diagonal(3, 19), 1000, 102);
  const bool ok = r.roundtrip_max < 1e-9 && r.null_max < 1e-10 && r.hermitian_min > 0.0 &&
                  r.roundtrip_orientation_failures == 0 && r.conjugation_max < 1e-9;
  return {ok, "roundtrip " + fmt(r.roundtrip_max) + ", |q(w,w)| " + fmt(r.null_max) + ", min q(w,w~) " +
                  fmt(r.hermitian_min) + ", conjugation " + fmt(r.conjugation_max)};
}

Verdict criterion_disc() {
  const DiscModelReport r = disc_model_sweep(200, 500, 103);
  const bool ok = r.library_mismatches == 0 && r.oracle_mismatches == 0 && r.grid_points == 40000 &&
                  r.boundary_points == 500;
  return {ok, std::to_string(r.grid_points) + " grid + " + std::to_string(r.boundary_points) +
                  " boundary points, mismatches library " + std::to_string(r.library_mismatches) + " oracle " +
                  std::to_string(r.oracle_mismatches)};
}

Verdict criterion_retract() {
  const RetractReport r = retract_sweep(QuadraticSpace::diagonal(3, 19), 1000, 104);
  const bool ok = r.positivity_min > 0.0 && r.orthogonality_max < 1e-10 && r.fibre_collapse_max < 1e-14 &&
                  r.fibre_disc_max < 1e-9 && r.fibre_outside == 0;
  return {ok, "min eigen " + fmt(r.positivity_min) + ", orthogonality " + fmt(r.orthogonality_max) +
                  ", (2,1) collapse " + fmt(r.fibre_collapse_max) + ", fibre disc " + fmt(r.fibre_disc_max)};
}

Verdict criterion_intersection() {
  const IntersectionReport r = twistor_intersection_sweep(QuadraticSpace::diagonal(3, 19), 1000, 105);
  const bool ok = r.wrong_count == 0 && r.conjugacy_max < 1e-10 && r.curve_residual_max < 1e-10 &&
                  r.divisor_residual_max < 1e-10 && r.degenerate_reported;
  return {ok, std::to_string(r.samples - r.wrong_count) + "/1000 with one unoriented point, residuals curve " +
                  fmt(r.curve_residual_max) + " divisor " + fmt(r.divisor_residual_max) + ", degenerate " +
                  (r.degenerate_reported ? "reported" : "missed")};
}

Verdict criterion_fujiki() {
  const FujikiSweepReport r = fujiki_sweep(6, {1, 2, 3}, 2, 106);
  const RationalMatrix k3 = standard_lattice("K3").gram();
  const ExactFujikiResult id = fujiki_polarize(Polynomial::quadratic_form(k3));
  const bool identity = id.q == k3 && id.c == 1;
  const bool ok = r.exact_failures == 0 && r.float_rejections == 0 && r.float_error_max < 1e-8 && identity;
  return {ok, std::to_string(r.cases) + " cases, exact failures " + std::to_string(r.exact_failures) +
                  ", float rel error " + fmt(r.float_error_max) + ", n=1 identity " + (identity ? "exact" : "wrong")};
}

Verdict criterion_bbf() {
  const QuadraticSpace k3(standard_lattice("K3").gram().to_double());
  bool ok = true;
  std::string detail;
  for (int n : {2, 3}) {
    const BbfReport r = bbf_sweep(k3, 1.5, n, 100, 107 + n);
    ok = ok && r.spread < 1e-8 && r.positivity_min > 0.0 && r.used > 90;
    detail += "n=" + std::to_string(n) + " spread " + fmt(r.spread) + " min q(s+s~) " + fmt(r.positivity_min) + "; ";
  }
  return {ok, detail};
}

Verdict criterion_closedness() {
  bool ok = true;
  std::string detail;
  for (auto [p, m] : {std::pair{3, 4}, std::pair{3, 19}}) {
    ClosednessOptions opt;
    opt.seed = 108;
    const ClosednessReport r = closedness_sweep(QuadraticSpace::diagonal(p, m), opt);
    ok = ok && r.residual_max < 1e-6 && r.order_estimate >= 1.8 && r.order_estimate <= 2.2 && r.control_min > 1e-3;
    detail += "(" + std::to_string(p) + "," + std::to_string(m) + ") max " + fmt(r.residual_max) + " order " +
              fmt(r.order_estimate) + " control " + fmt(r.control_min) + "; ";
  }
  return {ok, detail};
}

Verdict criterion_fubini_study() {
  const FubiniStudyReport r = fubini_study_sweep(QuadraticSpace::diagonal(3, 19), 10, 50, 109);
  return {r.spread < 1e-8, "ratio " + fmt(r.ratio_mean) + ", relative spread " + fmt(r.spread)};
}

Verdict criterion_invariance() {
  const InvarianceReport r = invariance_sweep(QuadraticSpace::diagonal(3, 19), 100, 10, 110);
  return {r.omega_max < 1e-8 && r.metric_max < 1e-8,
          "omega " + fmt(r.omega_max) + ", metric " + fmt(r.metric_max)};
}

Verdict criterion_density() {
  const IntegralLattice lattice = standard_lattice("diag:2,2");
  const HolomorphicDisc disc = seed_disc(lattice.space(), 42);
  DensityOptions opt;
  opt.enumerate.sign = NormSign::Negative;
  const auto rows = density_report(disc, lattice, {1, 2, 4, 8, 16}, opt);
  bool ok = rows.size() == 5;
  std::string detail = "negative-norm divisors; hits";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail += " " + std::to_string(rows[k].hits);
    ok = ok && rows[k].max_residual < 1e-10;
    if (k > 0) ok = ok && rows[k].hits > rows[k - 1].hits && rows[k].covering_radius <= rows[k - 1].covering_radius;
  }
  ok = ok && rows.back().covering_radius < 0.5 * rows.front().covering_radius;
  detail += ", radius " + fmt(rows.front().covering_radius) + " -> " + fmt(rows.back().covering_radius) +
            ", max residual " + fmt(rows.back().max_residual);
  return {ok, detail};
}

Verdict criterion_torus() {
  const TorusReport r = torus_sweep(4, 100, 112);
  bool dims = true;
  for (int n = 1; n <= 4; ++n) {
    const TorusDims d = torus_dimensions_exact(n);
    dims = dims && d.all == 2 * n * n && d.orthogonal == n * n - n && d.cau == n * n + n && d.transversality == 0;
  }
  const bool ok = r.membership_failures == 0 && r.transversality_nonzero == 0 && r.siegel_failures == 0 && dims;
  return {ok, "membership failures " + std::to_string(r.membership_failures) + ", |J^2+1| " + fmt(r.square_max) +
                  ", exact dims " + (dims ? "2n^2, n^2-n, n^2+n" : "WRONG") + ", defect>0 " +
                  std::to_string(r.transversality_nonzero) + ", Siegel failures " + std::to_string(r.siegel_failures)};
}

Verdict criterion_period_rank() {
  const PeriodRankReport r = period_rank_checks(QuadraticSpace::diagonal(3, 19), 113);
  return {r.twistor == 2 && r.chart == 4 && r.constant == 0,
          "twistor " + std::to_string(r.twistor) + ", chart " + std::to_string(r.chart) + ", constant " +
              std::to_string(r.constant)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// drops the last CSV column (wall time)
std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Verdict criterion_determinism(const std::string& hkp) {
  if (hkp.empty() || !std::filesystem::exists(hkp)) return {false, "hkp binary not given"};
  const auto dir = std::filesystem::temp_directory_path() / "hkp_acceptance";
  std::filesystem::create_directories(dir);
  const auto poly = dir / "f.poly";
  std::ofstream(poly) << "2\n4 0 3\n2 2 -6\n0 4 3\n";
  const std::vector<std::string> commands{
      "signature --lattice K3",
      "lebrun",
      "disc-model",
      "retract",
      "twistor-intersect",
      "closedness --signature 3,4",
      "fubini-study",
      "invariance",
      "density --lattice diag:2,2 --negative --heights 1,2,4,8",
      "fujiki-polarize --poly " + poly.string(),
      "torus-reconstruct --n 3",
      "torus-dims --n 1..4",
      "period-rank"};
  int identical = 0;
  std::string failed;
  for (const std::string& c : commands) {
    std::string outputs[2];
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
      const auto file = dir / ("run" + std::to_string(k) + ".out");
      const std::string cmd = "\"" + hkp + "\" " + c + " --seed 7 > \"" + file.string() + "\" 2> /dev/null";
      ran = ran && std::system(cmd.c_str()) == 0;
      outputs[k] = slurp(file);
      if (c.rfind("density", 0) == 0) outputs[k] = strip_wall_time(outputs[k]);
    }
    if (ran && !outputs[0].empty() && outputs[0] == outputs[1]) {
      ++identical;
    } else {
      failed += " " + c.substr(0, c.find(' '));
    }
  }
  std::filesystem::remove_all(dir);
  const bool ok = identical == static_cast<int>(commands.size());
  return {ok, std::to_string(identical) + "/" + std::to_string(commands.size()) + " subcommands byte-identical" +
                  (failed.empty() ? "" : "; differing:" + failed)};
}

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string hkp = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria{
      {1, "signature", 5, criterion_signature},
      {2, "lebrun-roundtrip", 5, criterion_lebrun},
      {3, "disc-model", 5, criterion_disc},
      {4, "retraction", 5, criterion_retract},
      {5, "twistor-cauchy", 10, criterion_intersection},
      {6, "fujiki", 30, criterion_fujiki},
      {7, "bbf-formula", 10, criterion_bbf},
      {8, "closedness", 60, criterion_closedness},
      {9, "fubini-study", 10, criterion_fubini_study},
      {10, "invariance", 10, criterion_invariance},
      {11, "density", 120, criterion_density},
      {12, "torus", 30, criterion_torus},
      {13, "period-rank", 5, criterion_period_rank},
      {14, "determinism", 600, [&] { return criterion_determinism(hkp); }},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = s < c.limit_s;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << std::setw(2) << c.id << "  " << std::left << std::setw(17)
              << c.name << std::right << " " << std::fixed << std::setprecision(2) << s << "s/" << std::setprecision(0)
              << c.limit_s << "s" << std::defaultfloat << "  " << v.detail << (in_time ? "" : " [time limit exceeded]")
              << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
