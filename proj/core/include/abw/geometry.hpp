#pragma once

// Geodesics, exponential/logarithmic maps and the tangent cone of the
// quotient space L / O.
//
// Every geodesic leaving [L] has the form u -> [L + u V] with V = M P - L,
// P in O*(L, M). Directions live in the linear space
//   V(L) = {V block lower triangular : (V^T L)_{t,t} symmetric for all t},
// and two directions describe the same geodesic when they differ by the
// right action of the stabilizer O*(L, L).

#include <limits>

#include "abw/abw_metric.hpp"
#include "abw/block_linalg.hpp"

namespace abw {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// A direction V anchored at a base factor L, with V in V(L).
class TangentVector {
 public:
  // Throws NotTangent when V is not in V(L), ShapeError on mismatched shapes.
  TangentVector(BlockLowerTriangular base, BlockLowerTriangular direction, double tol = kDefaultTol);

  const BlockLowerTriangular& base() const { return base_; }
  const BlockLowerTriangular& direction() const { return direction_; }
  double norm() const { return frobenius_norm(direction_); }

 private:
  BlockLowerTriangular base_;
  BlockLowerTriangular direction_;
};

class GeodesicSegment {
 public:
  explicit GeodesicSegment(TangentVector direction) : direction_(std::move(direction)) {}

  const BlockLowerTriangular& start() const { return direction_.base(); }
  const TangentVector& direction() const { return direction_; }

  // L + u V. Defined for any real u; a geodesic for u in [0, 1].
  BlockLowerTriangular point(double u) const;

  // ||V||_F, which equals d_ABW(start, point(1)).
  double length() const { return direction_.norm(); }

 private:
  TangentVector direction_;
};

struct LogResult {
  TangentVector tangent;
  bool unique = false;
  // Some rank decision in the uniqueness test was close to the threshold.
  bool marginal = false;
  BlockDiagOrthogonal optimizer_used;
};

struct ExpResult {
  BlockLowerTriangular point;
  double safe_radius = kInfinity;
  bool within_safe_radius = true;
};

struct SemiconcavityResult {
  bool holds = false;
  double slack = 0.0;
};

// Optimal stabilizer alignment of W against V: O* maximizes <V, W O> over O*(L, L).
struct StabilizerAlignment {
  BlockDiagOrthogonal rotation;
  double inner = 0.0;  // <V, W O*>_F
};

bool is_tangent(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double tol = kDefaultTol);

// lambda_min((L^T L)_{t,t}) > tol * lambda_max((L^T L)_{t,t}) > 0 for every t.
bool is_regular(const BlockLowerTriangular& l, double tol = kDefaultTol);

// Geodesic built from the canonical optimizer.
GeodesicSegment geodesic(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol = kDefaultTol);

// Geodesic built from a given optimizer P. Throws InvalidInput unless P is in O*(L, M).
GeodesicSegment geodesic(const BlockLowerTriangular& l, const BlockLowerTriangular& m, const BlockDiagOrthogonal& p,
                         double tol = kDefaultTol);

// tangent = M P - L for the canonical optimizer. unique is the rank test
// rk((M^T M)_{t,t}) == rk((M^T L)_{t,t}) for all t.
LogResult log_map(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol = kDefaultTol);

// L + r V. The point is always returned; within_safe_radius reports r < safe_radius.
// Throws NotTangent, or InvalidInput for r < 0.
ExpResult exp_map(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double r, double tol = kDefaultTol);

// min_t sqrt(lambda+_min((L^T L)_{t,t})) / ||V_{.,t}||_op, +inf for zero
// blocks of either factor. Inside this radius O*(L, L + rV) = O*(L, L).
double safe_radius(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double tol = kDefaultTol);

StabilizerAlignment align_by_stabilizer(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                                        const BlockLowerTriangular& w, double tol = kDefaultTol);

// inf over O in O*(L, L) of ||V - W O||_F.
double tangent_cone_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                             const BlockLowerTriangular& w, double tol = kDefaultTol);

// sup over O in O*(L, L) of <V, W O> / (||V|| ||W||), clamped to [-1, 1].
// Throws InvalidInput for a zero direction.
double cos_angle(const BlockLowerTriangular& l, const BlockLowerTriangular& v, const BlockLowerTriangular& w,
                 double tol = kDefaultTol);

// slack = d^2(g(u), Z) - [(1-u) d^2(L, Z) + u d^2(M, Z) - u(1-u) d^2(L, M)]
// along the canonical geodesic g from L to M. holds = slack >= -tol.
SemiconcavityResult semiconcavity_check(const BlockLowerTriangular& l, const BlockLowerTriangular& m,
                                        const BlockLowerTriangular& z, double u, double tol = kDefaultTol);

// d_ABW(L, M)^2 < min_t lambda_min((L^T L)_{t,t}) - tol. Throws NotRegular.
bool unique_geodesic_sufficient(const BlockLowerTriangular& l, const BlockLowerTriangular& m,
                                double tol = kDefaultTol);

}  // namespace abw
