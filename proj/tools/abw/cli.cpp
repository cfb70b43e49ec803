#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matrix_file.hpp"

namespace abw::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
};

// JSON has no infinities; emit them as strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v(i)));
  return arr;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

BlockLowerTriangular read_direction(const std::string& path) {
  const MatrixFile file = read_matrix_file(path);
  if (file.kind != "lower_triangular" && file.kind != "general") {
    throw InvalidInput(path + ": a direction must be lower_triangular or general, got kind \"" + file.kind + "\"");
  }
  return BlockLowerTriangular(file.shape, file.data);
}

std::optional<std::pair<Vector, Vector>> read_means(const std::string& left, const std::string& right, int n) {
  if (left.empty() && right.empty()) return std::nullopt;
  if (left.empty() || right.empty()) throw InvalidInput("--mean-left and --mean-right must be given together");
  return std::make_pair(read_vector(left, n), read_vector(right, n));
}

// ---------------------------------------------------------------------------
// dist

struct DistArgs {
  std::string left, right, mean_left, mean_right;
};

int cmd_dist(const DistArgs& a, const Globals& g, std::ostream& out) {
  const BlockLowerTriangular l = read_factor(a.left, g.tol);
  const BlockLowerTriangular m = read_factor(a.right, g.tol);
  require_same_shape(l, m, "dist");
  const OptimizerSet opt = optimizer_set(l, m, g.tol);

  const double cov = abw_distance(l, m);
  double distance = cov;
  json j;
  if (const auto means = read_means(a.mean_left, a.mean_right, l.size())) {
    distance = aw_gaussian_distance(means->first, l, means->second, m);
    j["mean_gap"] = (means->first - means->second).norm();
  }
  j["distance"] = distance;
  j["distance_squared"] = distance * distance;
  j["covariance_distance"] = cov;
  j["T"] = l.shape().steps();
  j["d"] = l.shape().dim();
  json blocks = json::array();
  for (int t = 0; t < l.shape().steps(); ++t) {
    blocks.push_back({{"t", t + 1},
                      {"singular_values", vector_json(opt.singular_values(t))},
                      {"rank", opt.rank(t)},
                      {"marginal", opt.marginal(t)}});
  }
  j["per_block"] = std::move(blocks);
  j["optimizer_canonical"] = matrix_json(opt.canonical_member(), "block_orthogonal");
  j["optimizer_unique"] = opt.is_singleton();
  emit(out, j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// geodesic

struct GeodesicArgs {
  std::string left, right, optimizer;
  int steps = 0;
  std::string out = "stdout";
};

int cmd_geodesic(const GeodesicArgs& a, const Globals& g, std::ostream& out) {
  if (a.steps < 1) throw InvalidInput("--steps must be at least 1");
  const BlockLowerTriangular l = read_factor(a.left, g.tol);
  const BlockLowerTriangular m = read_factor(a.right, g.tol);
  require_same_shape(l, m, "geodesic");
  const GeodesicSegment seg =
      a.optimizer.empty() ? geodesic(l, m, g.tol) : geodesic(l, m, read_orthogonal(a.optimizer), g.tol);
  const LogResult lg = log_map(l, m, g.tol);
  const BlockDiagOrthogonal used =
      a.optimizer.empty() ? lg.optimizer_used : read_orthogonal(a.optimizer);

  const bool to_stdout = a.out == "stdout" || a.out == "-";
  if (!to_stdout) std::filesystem::create_directories(a.out);

  json points = json::array();
  for (int k = 0; k <= a.steps; ++k) {
    const double u = static_cast<double>(k) / a.steps;
    const BlockLowerTriangular p = seg.point(u);
    json entry{{"index", k},
               {"u", u},
               {"distance_from_start", abw_distance(l, p)},
               {"regular", is_regular(p, g.tol)}};
    if (to_stdout) {
      entry["matrix"] = matrix_json(p, "lower_triangular");
    } else {
      char name[32];
      std::snprintf(name, sizeof(name), "point_%03d.json", k);
      const std::filesystem::path file = std::filesystem::path(a.out) / name;
      write_text_file(file.string(), matrix_json(p, "lower_triangular").dump(2) + "\n");
      entry["file"] = name;
    }
    points.push_back(std::move(entry));
  }

  json manifest{{"steps", a.steps},
                {"length", seg.length()},
                {"distance", abw_distance(l, m)},
                {"unique", lg.unique},
                {"marginal", lg.marginal},
                {"optimizer_used", matrix_json(used, "block_orthogonal")},
                {"points", std::move(points)}};
  if (!to_stdout) {
    write_text_file((std::filesystem::path(a.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  }
  emit(out, manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// log / exp

struct LogArgs {
  std::string base, target;
};

int cmd_log(const LogArgs& a, const Globals& g, std::ostream& out) {
  const BlockLowerTriangular l = read_factor(a.base, g.tol);
  const BlockLowerTriangular m = read_factor(a.target, g.tol);
  const LogResult lg = log_map(l, m, g.tol);
  emit(out, {{"tangent", matrix_json(lg.tangent.direction(), "lower_triangular")},
             {"tangent_norm", lg.tangent.norm()},
             {"unique", lg.unique},
             {"marginal", lg.marginal},
             {"optimizer_used", matrix_json(lg.optimizer_used, "block_orthogonal")}});
  return kExitOk;
}

struct ExpArgs {
  std::string base, tangent;
  double radius = 1.0;
  bool csv = false;
};

int cmd_exp(const ExpArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const BlockLowerTriangular l = read_factor(a.base, g.tol);
  const BlockLowerTriangular v = read_direction(a.tangent);
  const ExpResult e = exp_map(l, v, a.radius, g.tol);
  if (!e.within_safe_radius) {
    err << "warning: radius " << a.radius << " is not below the safe radius " << e.safe_radius
        << "; the point may not lie on a unique geodesic\n";
  }
  if (a.csv) {
    out << matrix_csv(e.point);
    return kExitOk;
  }
  emit(out, {{"point", matrix_json(e.point, "lower_triangular")},
             {"radius", a.radius},
             {"safe_radius", number(e.safe_radius)},
             {"within_safe_radius", e.within_safe_radius}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string left, right, oracle, third, mean_left, mean_right, optimizer;
  int samples = 0;  // 0: oracle default
  double max_gap = -1.0;  // negative: oracle default
};

int cmd_verify(const VerifyArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const BlockLowerTriangular l = read_factor(a.left, g.tol);
  const BlockLowerTriangular m = read_factor(a.right, g.tol);
  require_same_shape(l, m, "verify");

  OracleReport report;
  double tolerance = 0.0;
  bool passed = false;
  json extras;
  if (a.oracle == "exhaustive") {
    report = exhaustive_distance_d1(l, m);
    tolerance = 1e-12 * (1.0 + report.closed_form);
    passed = report.gap <= tolerance;
    extras["minimizer_count"] = report.minimizer_count;
  } else if (a.oracle == "random") {
    report = random_search_distance(l, m, a.samples > 0 ? a.samples : 10000, g.seed);
    tolerance = 1e-10;
    passed = report.gap <= tolerance && report.best_sample >= report.closed_form - tolerance;
    extras["best_sample"] = report.best_sample;
  } else if (a.oracle == "mc") {
    const auto means = read_means(a.mean_left, a.mean_right, l.size());
    const Vector zero = Vector::Zero(l.size());
    const BlockDiagOrthogonal p =
        a.optimizer.empty() ? optimizer_set(l, m, g.tol).canonical_member() : read_orthogonal(a.optimizer);
    report = monte_carlo_coupling(means ? means->first : zero, l, means ? means->second : zero, m, p,
                                  a.samples > 0 ? a.samples : 100000, g.seed);
    tolerance = 5.0 * report.std_error + 1e-12 * (1.0 + report.closed_form);
    passed = report.gap <= tolerance;
    extras["std_error"] = report.std_error;
    extras["z_score"] = report.std_error > 0.0 ? number(report.gap / report.std_error) : json(0.0);
  } else if (a.oracle == "angle") {
    if (a.third.empty()) throw InvalidInput("--oracle angle needs --third FILE (endpoint of the second geodesic)");
    const BlockLowerTriangular z = read_factor(a.third, g.tol);
    require_same_shape(l, z, "verify");
    const BlockLowerTriangular v = log_map(l, m, g.tol).tangent.direction();
    const BlockLowerTriangular w = log_map(l, z, g.tol).tangent.direction();
    const std::vector<double> grid = default_angle_grid();
    report = finite_difference_angle(l, v, w, grid, g.tol);
    tolerance = 1e-3;
    passed = report.gap <= tolerance && report.violations == 0;
    extras["violations"] = report.violations;
    extras["u_grid"] = grid;
    extras["trajectory"] = report.trajectory;
  } else {
    throw InvalidInput("unknown oracle \"" + a.oracle + "\"");
  }
  if (a.max_gap >= 0.0) {
    tolerance = a.max_gap;
    passed = report.gap <= tolerance && (a.oracle != "random" || report.best_sample >= report.closed_form - 1e-10) &&
             report.violations == 0;
  }

  json j{{"oracle", a.oracle},
         {"closed_form", report.closed_form},
         {"oracle_value", report.oracle_value},
         {"gap", report.gap},
         {"samples_or_states", report.samples_or_states},
         {"seed", report.seed},
         {"tolerance", tolerance},
         {"passed", passed}};
  j.update(extras);
  emit(out, j);
  if (!passed) {
    err << "verification failed (" << a.oracle << "): closed form " << report.closed_form << ", oracle "
        << report.oracle_value << ", gap " << report.gap << " exceeds " << tolerance << '\n';
    return kExitVerification;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// regularity / tangent

struct RegularityArgs {
  std::string input;
};

int cmd_regularity(const RegularityArgs& a, const Globals& g, std::ostream& out) {
  const BlockLowerTriangular l = read_factor(a.input, g.tol);
  const StabilizerSet stab = stabilizer(l, g.tol);
  json blocks = json::array();
  for (int t = 0; t < l.shape().steps(); ++t) {
    // Eigenvalues of the PSD block (L^T L)_{t,t}.
    const SmallSvd svd = svd_small(diag_block_product(l, l, t), g.tol);
    const Vector& lambda = svd.singular_values;
    blocks.push_back({{"t", t + 1},
                      {"eigenvalues", vector_json(lambda)},
                      {"lambda_max", lambda(0)},
                      {"lambda_min", lambda(lambda.size() - 1)},
                      {"lambda_plus_min", number(svd.rank > 0 ? lambda(svd.rank - 1) : kInfinity)},
                      {"rank", svd.rank},
                      {"kernel_dim", stab.kernel_dim(t)}});
  }
  emit(out, {{"regular", is_regular(l, g.tol)},
             {"stabilizer_trivial", stab.is_trivial()},
             {"per_block", std::move(blocks)}});
  return kExitOk;
}

struct TangentArgs {
  std::string base, v, w;
};

int cmd_tangent(const TangentArgs& a, const Globals& g, std::ostream& out) {
  const BlockLowerTriangular l = read_factor(a.base, g.tol);
  const BlockLowerTriangular v = read_direction(a.v);
  require_same_shape(l, v, "tangent");
  if (!is_tangent(l, v, g.tol)) throw NotTangent(a.v + ": direction is not tangent at the base");
  const auto describe = [&](const BlockLowerTriangular& x) {
    return json{{"norm", frobenius_norm(x)}, {"safe_radius", number(safe_radius(l, x, g.tol))}};
  };
  json j{{"v", describe(v)}};
  if (!a.w.empty()) {
    const BlockLowerTriangular w = read_direction(a.w);
    require_same_shape(l, w, "tangent");
    if (!is_tangent(l, w, g.tol)) throw NotTangent(a.w + ": direction is not tangent at the base");
    j["w"] = describe(w);
    j["tangent_cone_distance"] = tangent_cone_distance(l, v, w, g.tol);
    const bool nonzero = frobenius_norm(v) > 0.0 && frobenius_norm(w) > 0.0;
    j["cos_angle"] = nonzero ? json(cos_angle(l, v, w, g.tol)) : json(nullptr);
  }
  emit(out, j);
  return kExitOk;
}

double default_tolerance() {
  const char* env = std::getenv("ABW_DEFAULT_TOL");
  if (env == nullptr || *env == '\0') return kDefaultTol;
  char* end = nullptr;
  const double value = std::strtod(env, &end);
  if (end == env || *end != '\0') throw InvalidInput(std::string("ABW_DEFAULT_TOL is not a number: ") + env);
  return value;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Globals g;
  try {
    g.tol = default_tolerance();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  CLI::App app{"Adapted Bures-Wasserstein geometry of Gaussian processes", "abw"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--tol", g.tol, "Relative tolerance for rank and structure tests (env ABW_DEFAULT_TOL)");
  app.add_option("--seed", g.seed, "Seed for randomized oracles");

  DistArgs dist;
  CLI::App* dist_cmd = app.add_subcommand("dist", "Adapted Wasserstein distance between two factors");
  dist_cmd->add_option("--left", dist.left, "Left factor (or covariance)")->required();
  dist_cmd->add_option("--right", dist.right, "Right factor (or covariance)")->required();
  dist_cmd->add_option("--mean-left", dist.mean_left, "Mean vector of the left process");
  dist_cmd->add_option("--mean-right", dist.mean_right, "Mean vector of the right process");

  GeodesicArgs geo;
  CLI::App* geo_cmd = app.add_subcommand("geodesic", "Sample the geodesic from left to right");
  geo_cmd->add_option("--left", geo.left)->required();
  geo_cmd->add_option("--right", geo.right)->required();
  geo_cmd->add_option("--steps", geo.steps, "Number of segments K (K+1 points)")->required();
  geo_cmd->add_option("--out", geo.out, "Output directory, or 'stdout'");
  geo_cmd->add_option("--optimizer", geo.optimizer, "Block-orthogonal optimizer to use instead of the canonical one");

  LogArgs lg;
  CLI::App* log_cmd = app.add_subcommand("log", "Logarithmic map: direction from base towards target");
  log_cmd->add_option("--base", lg.base)->required();
  log_cmd->add_option("--target", lg.target)->required();

  ExpArgs ex;
  CLI::App* exp_cmd = app.add_subcommand("exp", "Exponential map: base + radius * tangent");
  exp_cmd->add_option("--base", ex.base)->required();
  exp_cmd->add_option("--tangent", ex.tangent)->required();
  exp_cmd->add_option("--radius", ex.radius, "Nonnegative step length (default 1)");
  exp_cmd->add_flag("--csv", ex.csv, "Print the resulting matrix as CSV");

  VerifyArgs ver;
  CLI::App* ver_cmd = app.add_subcommand("verify", "Check a closed form against an independent oracle");
  ver_cmd->add_option("--left", ver.left)->required();
  ver_cmd->add_option("--right", ver.right)->required();
  ver_cmd->add_option("--oracle", ver.oracle)
      ->required()
      ->check(CLI::IsMember({"exhaustive", "random", "mc", "angle"}));
  ver_cmd->add_option("--samples", ver.samples, "Random draws / Monte-Carlo paths");
  ver_cmd->add_option("--third", ver.third, "Angle oracle: endpoint of the second geodesic from left");
  ver_cmd->add_option("--mean-left", ver.mean_left);
  ver_cmd->add_option("--mean-right", ver.mean_right);
  ver_cmd->add_option("--optimizer", ver.optimizer, "Monte-Carlo coupling matrix P (default canonical)");
  ver_cmd->add_option("--max-gap", ver.max_gap, "Override the oracle's default gap tolerance");

  RegularityArgs reg;
  CLI::App* reg_cmd = app.add_subcommand("regularity", "Regularity and stabilizer report for a factor");
  reg_cmd->add_option("--input", reg.input)->required();

  TangentArgs tan;
  CLI::App* tan_cmd = app.add_subcommand("tangent", "Tangent checks, cone distance and angle at a base");
  tan_cmd->add_option("--base", tan.base)->required();
  tan_cmd->add_option("--v", tan.v, "First direction")->required();
  tan_cmd->add_option("--w", tan.w, "Second direction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  if (!(g.tol > 0.0 && g.tol < 1.0)) {
    err << "error: tolerance must lie in (0, 1)\n";
    return kExitInput;
  }

  try {
    if (dist_cmd->parsed()) return cmd_dist(dist, g, out);
    if (geo_cmd->parsed()) return cmd_geodesic(geo, g, out);
    if (log_cmd->parsed()) return cmd_log(lg, g, out);
    if (exp_cmd->parsed()) return cmd_exp(ex, g, out, err);
    if (ver_cmd->parsed()) return cmd_verify(ver, g, out, err);
    if (reg_cmd->parsed()) return cmd_regularity(reg, g, out);
    if (tan_cmd->parsed()) return cmd_tangent(tan, g, out);
  } catch (const NotTangent& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const NotRegular& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace abw::cli
