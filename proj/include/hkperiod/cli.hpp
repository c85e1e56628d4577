#pragma once

// Command-line front end. Every subcommand writes JSON (CSV for density)
// to stdout or --out and a run manifest to stderr or <out>.manifest.json.
// Exit codes: 0 pass, 1 check failed, 2 usage or precondition error.

#include "hkperiod/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef HKPERIOD_VERSION
#define HKPERIOD_VERSION "0.0.0"
#endif

namespace hkp::cli {

using json = nlohmann::ordered_json;

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct Output {
  std::string text;
  bool pass = true;
};

namespace detail {

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json matrix_json(const RationalMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline Output json_output(json j, bool pass = true) {
  if (j.contains("pass") || !pass) j["pass"] = pass;
  return {j.dump(2) + "\n", pass};
}

inline std::vector<long long> parse_list(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      require(used == item.size(), "bad list entry '" + item + "'");
    } catch (const std::logic_error&) {
      throw PreconditionError("bad list entry '" + item + "'");
    }
  }
  require(!out.empty(), "empty list");
  return out;
}

/// "p,m" -> diagonal form of that signature.
inline QuadraticSpace parse_signature(const std::string& text) {
  const std::vector<long long> pm = parse_list(text);
  require(pm.size() == 2 && pm[0] >= 0 && pm[1] >= 0 && pm[0] + pm[1] >= 1 && pm[0] + pm[1] <= 64,
          "signature must be 'p,m'");
  return QuadraticSpace::diagonal(static_cast<int>(pm[0]), static_cast<int>(pm[1]));
}

/// "a..b" or "a".
inline std::vector<int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = parse_list(text);
    require(v.size() == 1, "expected 'n' or 'a..b'");
    return {static_cast<int>(v[0])};
  }
  const long long a = parse_list(text.substr(0, dots))[0];
  const long long b = parse_list(text.substr(dots + 2))[0];
  require(a >= 1 && b >= a && b <= 16, "range must satisfy 1 <= a <= b <= 16");
  std::vector<int> out;
  for (long long k = a; k <= b; ++k) out.push_back(static_cast<int>(k));
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  return in;
}

inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

struct Globals {
  double tolerance = -1.0;
  std::uint64_t seed = 1;
  bool exact = false;
  std::string out;

  double tol(double fallback) const { return tolerance > 0.0 ? tolerance : fallback; }
};

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Period domains of hyperkähler type: checks and experiments", "hkp"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--tolerance", g.tolerance, "check tolerance (subcommand default when omitted)");
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_flag("--exact", g.exact, "rational arithmetic where supported");
  app.add_option("--out", g.out, "output file; the manifest goes to <out>.manifest.json");

  std::function<Output()> action;
  std::vector<std::pair<CLI::App*, std::function<Output()>>> table;
  auto command = [&](const std::string& name, const std::string& help) { return app.add_subcommand(name, help); };

  // signature
  std::string lattice_name, gram_file;
  {
    CLI::App* sub = command("signature", "inertia of a lattice or Gram file");
    auto* lat = sub->add_option("--lattice", lattice_name, "U, E8minus, K3 or diag:p,m");
    auto* file = sub->add_option("--gram", gram_file, "Gram matrix text file");
    lat->excludes(file);
    table.emplace_back(sub, [&] {
      require(!lattice_name.empty() || !gram_file.empty(), "signature needs --lattice or --gram");
      RationalMatrix gram;
      if (!lattice_name.empty()) {
        gram = standard_lattice(lattice_name).gram();
      } else {
        std::ifstream in = detail::open_input(gram_file);
        gram = read_gram(in);
      }
      const Signature s = g.exact ? signature(gram) : signature(gram.to_double(), g.tol(kDefaultTolerance));
      return detail::json_output(
          json{{"positive", s.positive}, {"negative", s.negative}, {"zero", s.zero}, {"mode", g.exact ? "exact" : "float"}});
    });
  }

  // lebrun
  std::string sig = "3,19";
  int samples = 1000;
  {
    CLI::App* sub = command("lebrun", "plane <-> null vector roundtrip on random positive planes");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--samples", samples)->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-9);
      const LebrunReport r = lebrun_sweep(detail::parse_signature(sig), samples, g.seed);
      const bool pass = r.roundtrip_max < t && r.null_max < 0.1 * t && r.hermitian_min > 0.0 &&
                        r.conjugation_max < t && r.roundtrip_orientation_failures == 0;
      return detail::json_output(json{{"samples", r.samples},
                                      {"roundtrip_max", r.roundtrip_max},
                                      {"roundtrip_orientation_failures", r.roundtrip_orientation_failures},
                                      {"null_max", r.null_max},
                                      {"hermitian_min", r.hermitian_min},
                                      {"conjugation_max", r.conjugation_max},
                                      {"worst_sample", r.worst_sample},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // disc-model
  int grid = 200, boundary = 500;
  {
    CLI::App* sub = command("disc-model", "positivity of the (2,1) disc model against a^2 + b^2 < 1");
    sub->add_option("--grid", grid)->capture_default_str();
    sub->add_option("--boundary", boundary, "points near the unit circle")->capture_default_str();
    table.emplace_back(sub, [&] {
      const DiscModelReport r = disc_model_sweep(grid, boundary, g.seed);
      const bool pass = r.library_mismatches == 0 && r.oracle_mismatches == 0;
      json j{{"grid_points", r.grid_points},
             {"boundary_points", r.boundary_points},
             {"library_mismatches", r.library_mismatches},
             {"oracle_mismatches", r.oracle_mismatches}};
      if (!pass) j["first_mismatch"] = {r.first_mismatch_a, r.first_mismatch_b};
      j["pass"] = pass;
      return detail::json_output(j, pass);
    });
  }

  // retract
  {
    CLI::App* sub = command("retract", "retraction along random negative lines");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--samples", samples)->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-9);
      const RetractReport r = retract_sweep(detail::parse_signature(sig), samples, g.seed);
      const bool pass = r.positivity_min > 0.0 && r.orthogonality_max < t && r.fibre_collapse_max < t &&
                        r.fibre_disc_max < t && r.fibre_outside == 0;
      return detail::json_output(json{{"samples", r.samples},
                                      {"positivity_min", r.positivity_min},
                                      {"orthogonality_max", r.orthogonality_max},
                                      {"fibre_collapse_max", r.fibre_collapse_max},
                                      {"fibre_disc_max", r.fibre_disc_max},
                                      {"fibre_outside", r.fibre_outside},
                                      {"worst_sample", r.worst_sample},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // twistor-intersect
  {
    CLI::App* sub = command("twistor-intersect", "twistor curves against Cauchy divisors");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--samples", samples)->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-10);
      const IntersectionReport r = twistor_intersection_sweep(detail::parse_signature(sig), samples, g.seed);
      const bool pass = r.wrong_count == 0 && r.conjugacy_max < t && r.curve_residual_max < t &&
                        r.divisor_residual_max < t && r.degenerate_reported;
      return detail::json_output(json{{"samples", r.samples},
                                      {"unoriented_points", 1},
                                      {"wrong_count", r.wrong_count},
                                      {"conjugacy_max", r.conjugacy_max},
                                      {"curve_residual_max", r.curve_residual_max},
                                      {"divisor_residual_max", r.divisor_residual_max},
                                      {"degenerate_reported", r.degenerate_reported},
                                      {"worst_sample", r.worst_sample},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // closedness
  ClosednessOptions copt;
  {
    CLI::App* sub = command("closedness", "finite-difference d(omega) on random chart points");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--samples", copt.samples)->capture_default_str();
    sub->add_option("--step", copt.step)->capture_default_str();
    sub->add_option("--point-scale", copt.point_scale)->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-6);
      copt.seed = g.seed;
      const ClosednessReport r = closedness_sweep(detail::parse_signature(sig), copt);
      const bool pass =
          r.residual_max < t && r.order_estimate >= 1.8 && r.order_estimate <= 2.2 && r.control_min > 1e-3;
      return detail::json_output(json{{"samples", r.samples},
                                      {"step", copt.step},
                                      {"residual_max", r.residual_max},
                                      {"residual_mean", r.residual_mean},
                                      {"order_estimate", r.order_estimate},
                                      {"control_min", r.control_min},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // fubini-study
  int curves = 10, points = 50;
  {
    CLI::App* sub = command("fubini-study", "omega on twistor curves over the Fubini-Study density");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--curves", curves)->capture_default_str();
    sub->add_option("--points", points)->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-8);
      const FubiniStudyReport r = fubini_study_sweep(detail::parse_signature(sig), curves, points, g.seed);
      const bool pass = r.spread < t;
      return detail::json_output(json{{"curves", r.curves},
                                      {"points", r.points},
                                      {"ratio_mean", r.ratio_mean},
                                      {"ratio_min", r.ratio_min},
                                      {"ratio_max", r.ratio_max},
                                      {"spread", r.spread},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // invariance
  int isometries = 100, per = 10;
  {
    CLI::App* sub = command("invariance", "g and omega under random isometries");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    sub->add_option("--samples", isometries, "number of isometries")->capture_default_str();
    sub->add_option("--per", per, "tangent pairs per isometry")->capture_default_str();
    table.emplace_back(sub, [&] {
      const double t = g.tol(1e-8);
      const InvarianceReport r = invariance_sweep(detail::parse_signature(sig), isometries, per, g.seed);
      const bool pass = r.omega_max < t && r.metric_max < t;
      return detail::json_output(json{{"isometries", r.isometries},
                                      {"pairs_each", r.samples},
                                      {"omega_max", r.omega_max},
                                      {"metric_max", r.metric_max},
                                      {"isometry_defect_max", r.isometry_defect_max},
                                      {"pass", pass}},
                                 pass);
    });
  }

  // density
  std::string density_lattice = "K3", disc_spec = "seed:42", heights = "1,2,4,8";
  bool negative = false;
  int support = -1, probe_grid_n = 32;
  {
    CLI::App* sub = command("density", "hits of integral Cauchy divisors on a holomorphic disc (CSV)");
    sub->add_option("--lattice", density_lattice, "U, E8minus, K3 or diag:p,m")->capture_default_str();
    sub->add_option("--disc", disc_spec, "seed:N or a disc file")->capture_default_str();
    sub->add_option("--heights", heights, "increasing comma list")->capture_default_str();
    sub->add_flag("--negative", negative, "use vectors of negative norm");
    sub->add_option("--support", support, "coordinates that vary (default min(dim, 6))");
    sub->add_option("--grid", probe_grid_n, "probe grid size")->capture_default_str();
    table.emplace_back(sub, [&] {
      const IntegralLattice lattice = standard_lattice(density_lattice);
      std::optional<HolomorphicDisc> disc;
      if (disc_spec.rfind("seed:", 0) == 0) {
        const auto v = detail::parse_list(disc_spec.substr(5));
        require(v.size() == 1 && v[0] >= 0, "disc seed must be a non-negative integer");
        disc.emplace(seed_disc(lattice.space(), static_cast<std::uint64_t>(v[0])));
      } else {
        std::ifstream in = detail::open_input(disc_spec);
        disc.emplace(read_disc(in, lattice.space()));
      }
      DensityOptions opt;
      opt.enumerate.sign = negative ? NormSign::Negative : NormSign::Positive;
      opt.enumerate.support = support > 0 ? support : std::min(lattice.dim(), 6);
      opt.grid = probe_grid_n;
      const auto hs = detail::parse_list(heights);
      const auto rows = density_report(*disc, lattice, hs, opt);
      std::ostringstream csv;
      csv << "H,n_vectors,n_hits,covering_radius,max_residual,wall_time_ms\n";
      for (const DensityRow& r : rows)
        csv << r.height << ',' << r.vectors << ',' << r.hits << ',' << detail::format_double(r.covering_radius) << ','
            << detail::format_double(r.max_residual) << ',' << std::fixed << std::setprecision(1) << r.wall_time_ms
            << std::defaultfloat << '\n';
      return Output{csv.str(), true};
    });
  }

  // fujiki-polarize
  std::string poly_file, normalization = "leading";
  {
    CLI::App* sub = command("fujiki-polarize", "recover q and c from F = c q^n");
    sub->add_option("--poly", poly_file, "polynomial file")->required();
    sub->add_option("--normalization", normalization, "leading or largest")
        ->check(CLI::IsMember({"leading", "largest"}))
        ->capture_default_str();
    table.emplace_back(sub, [&] {
      std::ifstream in = detail::open_input(poly_file);
      const Polynomial f = read_polynomial(in);
      const FujikiNormalization mode =
          normalization == "leading" ? FujikiNormalization::UnitLeadingEntry : FujikiNormalization::UnitLargestEntry;
      if (g.exact) {
        const ExactFujikiResult r = fujiki_polarize(f, mode);
        return detail::json_output(json{{"mode", "exact"},
                                        {"n", f.degree() / 2},
                                        {"c", to_string(r.c)},
                                        {"q", detail::matrix_json(r.q)}});
      }
      require(f.is_homogeneous() && f.degree() >= 2 && f.degree() % 2 == 0, "F must be homogeneous of even degree");
      FujikiOptions opt;
      opt.normalization = mode;
      opt.tolerance = g.tol(opt.tolerance);
      opt.seed = g.seed;
      const FujikiForm form{f.degree() / 2, f.variables(), [&f](const Vector& a) { return f.evaluate(a); }};
      const FujikiResult r = fujiki_polarize(form, opt);
      return detail::json_output(json{{"mode", "float"},
                                      {"n", form.n},
                                      {"c", r.c},
                                      {"residual", r.residual},
                                      {"q", detail::matrix_json(r.q)}});
    });
  }

  // torus-reconstruct
  int torus_n = 3;
  {
    CLI::App* sub = command("torus-reconstruct", "J from a random metric and symplectic form");
    sub->add_option("--n", torus_n, "complex dimension")->capture_default_str()->check(CLI::Range(1, 8));
    table.emplace_back(sub, [&] {
      const double t = g.tol(kTorusTolerance);
      Rng rng(g.seed);
      const Matrix gm = random_metric(torus_n, rng);
      const Matrix psi = random_symplectic_form(torus_n, rng);
      const LinearComplexStructure lj = two_out_of_three(EuclideanMetric(gm), SymplecticForm(psi));
      const Matrix& j = lj.matrix();
      const ReconstructionResiduals res = reconstruction_residuals(gm, psi, j);
      const bool member = is_complex_structure(j, t) && is_orthogonal_structure(gm, j, t) && is_cau_member(psi, j, t);
      const int all = tangent_dimension(Locus::All, j, Matrix(), t);
      const int orth = tangent_dimension(Locus::Orthogonal, j, gm, t);
      const int cau = tangent_dimension(Locus::Cau, j, psi, t);
      const int defect = transversality_defect(gm, psi, j, t);
      const UniquenessReport u = uniqueness_probe(gm, psi, j, rng.next_seed(), 20);
      const CMatrix z = siegel_point(psi, j, t);
      const Matrix im = 0.5 * (z.imag() + z.imag().transpose());
      const double im_min = Eigen::SelfAdjointEigenSolver<Matrix>(im).eigenvalues().minCoeff();
      const int n = torus_n;
      const bool pass = member && all == 2 * n * n && orth == n * n - n && cau == n * n + n && defect == 0 &&
                        u.converged == u.samples && u.max_distance < 1e-6 && im_min > 0.0;
      return detail::json_output(
          json{{"n", n},
               {"J", detail::matrix_json(j)},
               {"orientation", lj.orientation()},
               {"residuals",
                {{"square", res.square}, {"orthogonal", res.orthogonal}, {"symmetric", res.symmetric},
                 {"psi_J_min_eigenvalue", res.min_eigen}}},
               {"dimensions", {{"all", all}, {"orthogonal", orth}, {"cau", cau}, {"transversality_defect", defect}}},
               {"uniqueness", {{"samples", u.samples}, {"converged", u.converged}, {"max_distance", u.max_distance}}},
               {"siegel", {{"re", detail::matrix_json(Matrix(z.real()))}, {"im", detail::matrix_json(Matrix(z.imag()))},
                           {"im_min_eigenvalue", im_min}}},
               {"pass", pass}},
          pass);
    });
  }

  // torus-dims
  std::string torus_range = "1..4";
  {
    CLI::App* sub = command("torus-dims", "exact tangent dimensions at the standard triple");
    sub->add_option("--n", torus_range, "n or a..b")->capture_default_str();
    table.emplace_back(sub, [&] {
      const std::vector<int> ns = detail::parse_range(torus_range);
      auto row = [](const TorusDims& d) {
        return json{{"all", d.all}, {"orthogonal", d.orthogonal}, {"cau", d.cau}};
      };
      bool pass = true;
      json rows = json::array();
      for (int n : ns) {
        const TorusDims d = torus_dimensions_exact(n);
        pass = pass && d.all == 2 * n * n && d.orthogonal == n * n - n && d.cau == n * n + n && d.transversality == 0;
        json r{{"n", n}};
        r.update(row(d));
        r["transversality_defect"] = d.transversality;
        rows.push_back(r);
      }
      if (ns.size() == 1) return detail::json_output(row(torus_dimensions_exact(ns[0])), pass);
      return detail::json_output(rows, pass);
    });
  }

  // period-rank
  {
    CLI::App* sub = command("period-rank", "differential rank of twistor, chart and constant families");
    sub->add_option("--signature", sig, "p,m")->capture_default_str();
    table.emplace_back(sub, [&] {
      const PeriodRankReport r = period_rank_checks(detail::parse_signature(sig), g.seed);
      const bool pass = r.twistor == 2 && r.chart == 4 && r.constant == 0;
      return detail::json_output(
          json{{"twistor", r.twistor}, {"chart", r.chart}, {"constant", r.constant}, {"pass", pass}}, pass);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  for (auto& [sub, fn] : table)
    if (sub == chosen) action = fn;

  const auto start = std::chrono::steady_clock::now();
  Output result;
  try {
    result = action();
  } catch (const PreconditionError& e) {
    err << "hkp " << chosen->get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "hkp " << chosen->get_name() << ": numerical failure: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  json flags = json::object();
  for (const CLI::Option* opt : chosen->get_options())
    if (opt->count() > 0 && !opt->get_name().empty() && opt->get_name() != "--help")
      flags[opt->get_name()] = opt->results().size() == 1 ? json(opt->results()[0]) : json(opt->results());
  json manifest{{"subcommand", chosen->get_name()},
                {"flags", flags},
                {"seed", g.seed},
                {"tolerance", g.tolerance > 0.0 ? json(g.tolerance) : json("default")},
                {"exact", g.exact},
                {"version", HKPERIOD_VERSION},
                {"exit_code", result.pass ? kExitPass : kExitCheckFailed},
                {"wall_time_ms", ms}};

  if (g.out.empty()) {
    out << result.text;
    err << manifest.dump() << "\n";
  } else {
    std::ofstream file(g.out);
    std::ofstream mfile(g.out + ".manifest.json");
    if (!file || !mfile) {
      err << "hkp: cannot write '" << g.out << "'\n";
      return kExitUsage;
    }
    file << result.text;
    mfile << manifest.dump(2) << "\n";
  }
  return result.pass ? kExitPass : kExitCheckFailed;
}

}  // namespace hkp::cli
