#include "abw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "abw/abw_metric.hpp"
#include "abw/geometry.hpp"

namespace abw {

namespace {

constexpr int kMaxExhaustiveSteps = 20;
constexpr double kMonotonicitySlack = 1e-9;

double procrustes_residual_sq(const BlockLowerTriangular& l, const BlockLowerTriangular& m,
                              const BlockDiagOrthogonal& o) {
  double sum = 0.0;
  for (int t = 0; t < l.shape().steps(); ++t) {
    sum += (l.lower_column(t) - m.lower_column(t) * o.block(t, t)).squaredNorm();
  }
  return sum;
}

}  // namespace

OracleReport exhaustive_distance_d1(const BlockLowerTriangular& l, const BlockLowerTriangular& m) {
  require_same_shape(l, m, "exhaustive_distance_d1");
  if (l.shape().dim() != 1) throw InvalidInput("exhaustive_distance_d1: requires d = 1");
  const int steps = l.shape().steps();
  if (steps > kMaxExhaustiveSteps) {
    throw InvalidInput("exhaustive_distance_d1: T = " + std::to_string(steps) + " exceeds " +
                       std::to_string(kMaxExhaustiveSteps));
  }

  // Column j of L - M diag(eps) depends on eps_j only.
  std::vector<double> keep(steps), flip(steps);
  for (int j = 0; j < steps; ++j) {
    keep[j] = (l.matrix().col(j) - m.matrix().col(j)).squaredNorm();
    flip[j] = (l.matrix().col(j) + m.matrix().col(j)).squaredNorm();
  }

  const std::uint64_t states = std::uint64_t{1} << steps;
  std::vector<double> values(states);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t pattern = 0; pattern < states; ++pattern) {
    double sum = 0.0;
    for (int j = 0; j < steps; ++j) sum += ((pattern >> j) & 1u) ? flip[j] : keep[j];
    values[pattern] = sum;
    best = std::min(best, sum);
  }
  std::uint64_t minimizers = 0;
  for (const double v : values) {
    if (v <= best + 1e-12 * (1.0 + best)) ++minimizers;
  }

  OracleReport report;
  report.closed_form = abw_distance(l, m);
  report.oracle_value = std::sqrt(best);
  report.gap = std::abs(report.oracle_value - report.closed_form);
  report.samples_or_states = states;
  report.minimizer_count = minimizers;
  return report;
}

OracleReport random_search_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& m, int n_samples,
                                    std::uint64_t seed) {
  require_same_shape(l, m, "random_search_distance");
  if (n_samples < 1) throw InvalidInput("random_search_distance: n_samples must be at least 1");

  std::mt19937_64 rng(seed);
  double best_random = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const BlockDiagOrthogonal o = random_block_orthogonal(l.shape(), rng);
    best_random = std::min(best_random, procrustes_residual_sq(l, m, o));
  }
  const double canonical = procrustes_residual_sq(l, m, optimizer_set(l, m).canonical_member());

  OracleReport report;
  report.closed_form = abw_distance(l, m);
  report.best_sample = std::sqrt(best_random);
  report.oracle_value = std::sqrt(std::min(canonical, best_random));
  report.gap = std::abs(report.oracle_value - report.closed_form);
  report.samples_or_states = static_cast<std::uint64_t>(n_samples);
  report.seed = seed;
  return report;
}

OracleReport monte_carlo_coupling(const Vector& a, const BlockLowerTriangular& l, const Vector& b,
                                  const BlockLowerTriangular& m, const BlockDiagOrthogonal& p, int n_paths,
                                  std::uint64_t seed) {
  require_same_shape(l, m, "monte_carlo_coupling");
  require_same_shape(l, p, "monte_carlo_coupling");
  const int n = l.size();
  if (a.size() != n || b.size() != n) {
    throw ShapeError("monte_carlo_coupling: mean vectors must have length " + std::to_string(n));
  }
  if (n_paths < 100) throw InvalidInput("monte_carlo_coupling: n_paths must be at least 100");

  const Matrix diff = l.matrix() - (m * p).matrix();
  const Vector shift = a - b;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(n);
  // Welford running mean / variance of |shift + diff G|^2.
  double mean = 0.0;
  double m2 = 0.0;
  for (int path = 0; path < n_paths; ++path) {
    for (int i = 0; i < n; ++i) g(i) = normal(rng);
    const double x = (shift + diff * g).squaredNorm();
    const double delta = x - mean;
    mean += delta / (path + 1);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / (n_paths - 1);

  OracleReport report;
  report.closed_form = shift.squaredNorm() + diff.squaredNorm();
  report.oracle_value = mean;
  report.gap = std::abs(mean - report.closed_form);
  report.std_error = std::sqrt(variance / n_paths);
  report.samples_or_states = static_cast<std::uint64_t>(n_paths);
  report.seed = seed;
  return report;
}

std::vector<double> default_angle_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(std::pow(10.0, -0.5 * k));
  return grid;
}

OracleReport finite_difference_angle(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                                     const BlockLowerTriangular& w, const std::vector<double>& u_grid, double tol) {
  require_same_shape(l, v, "finite_difference_angle");
  require_same_shape(l, w, "finite_difference_angle");
  if (u_grid.empty()) throw InvalidInput("finite_difference_angle: empty grid");
  for (std::size_t k = 0; k < u_grid.size(); ++k) {
    const double u = u_grid[k];
    if (!(u > 0.0 && u <= 1.0) || (k > 0 && !(u < u_grid[k - 1]))) {
      throw InvalidInput("finite_difference_angle: grid must be strictly decreasing in (0, 1]");
    }
  }
  if (frobenius_norm(v) == 0.0 || frobenius_norm(w) == 0.0) {
    throw InvalidInput("finite_difference_angle: directions must be nonzero");
  }

  const BlockLowerTriangular sv = v * std::min(1.0, 0.5 * safe_radius(l, v, tol));
  const BlockLowerTriangular sw = w * std::min(1.0, 0.5 * safe_radius(l, w, tol));

  OracleReport report;
  report.closed_form = cos_angle(l, v, w, tol);
  report.trajectory.reserve(u_grid.size());
  for (const double u : u_grid) {
    const BlockLowerTriangular gu = l + sv * u;
    const BlockLowerTriangular hu = l + sw * u;
    const double dg = abw_distance(l, gu);
    const double dh = abw_distance(l, hu);
    const double dgh = abw_distance(gu, hu);
    const double alpha = (dg * dg + dh * dh - dgh * dgh) / (2.0 * dg * dh);
    if (!report.trajectory.empty() && alpha > report.trajectory.back() + kMonotonicitySlack) ++report.violations;
    report.trajectory.push_back(alpha);
  }
  report.oracle_value = report.trajectory.back();
  report.gap = std::abs(report.oracle_value - report.closed_form);
  report.samples_or_states = u_grid.size();
  return report;
}

}  // namespace abw
