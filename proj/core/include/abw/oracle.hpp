#pragma once

// Independent verification engines for the closed forms: exhaustive sign
// enumeration (d = 1), random search over O, Monte-Carlo simulation of the
// coupling (a + L G, b + M P G), and the finite-difference angle limit.
//
// Every engine takes an explicit seed and reports it back; a fixed seed
// reproduces the report exactly.

#include <cstdint>
#include <vector>

#include "abw/block_linalg.hpp"

namespace abw {

struct OracleReport {
  double closed_form = 0.0;
  double oracle_value = 0.0;
  double gap = 0.0;  // |oracle_value - closed_form|
  std::uint64_t samples_or_states = 0;
  std::uint64_t seed = 0;

  // Engine-specific extras; zero when not applicable.
  double std_error = 0.0;              // Monte-Carlo standard error of the estimate
  double best_sample = 0.0;            // random search: best value among random candidates only
  std::uint64_t minimizer_count = 0;   // exhaustive: sign patterns attaining the minimum
  std::uint64_t violations = 0;        // angle: monotonicity violations along the grid
  std::vector<double> trajectory;      // angle: alpha(u) for each grid point
};

// Minimum of ||L - M diag(eps)||_F over all eps in {+1,-1}^T. Requires d = 1, T <= 20.
OracleReport exhaustive_distance_d1(const BlockLowerTriangular& l, const BlockLowerTriangular& m);

// Minimum of ||L - M O||_F over the canonical optimizer and n_samples Haar
// draws of O. best_sample holds the minimum over the random draws alone.
OracleReport random_search_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& m, int n_samples,
                                    std::uint64_t seed);

// Sample mean of |a + L G - (b + M P G)|^2 over n_paths standard Gaussian G,
// against the exact expectation ||a - b||^2 + ||L - M P||_F^2.
OracleReport monte_carlo_coupling(const Vector& a, const BlockLowerTriangular& l, const Vector& b,
                                  const BlockLowerTriangular& m, const BlockDiagOrthogonal& p, int n_paths,
                                  std::uint64_t seed);

// Default decreasing grid 10^0, 10^-0.5, ..., 10^-4.
std::vector<double> default_angle_grid();

// Comparison quantity
//   alpha(u) = [d^2(L, g(u)) + d^2(L, h(u)) - d^2(g(u), h(u))] / [2 d(L, g(u)) d(L, h(u))]
// for g(u) = L + u V, h(u) = L + u W after scaling V, W by
// min(1, 0.5 * safe_radius). u_grid must be strictly decreasing in (0, 1].
// oracle_value is alpha at the smallest u; closed_form is cos_angle(L, V, W).
OracleReport finite_difference_angle(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                                     const BlockLowerTriangular& w, const std::vector<double>& u_grid,
                                     double tol = kDefaultTol);

}  // namespace abw
