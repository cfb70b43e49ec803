#include "abw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace abw {

namespace {

void require_tangent(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double tol, const char* what) {
  if (!is_tangent(l, v, tol)) {
    throw NotTangent(std::string(what) + ": direction is not tangent at the base ((V^T L)_{t,t} not symmetric)");
  }
}

Vector column_singular_values(const BlockLowerTriangular& a, int t) {
  return Eigen::JacobiSVD<SmallMatrix>(SmallMatrix(a.lower_column(t))).singularValues();
}

}  // namespace

TangentVector::TangentVector(BlockLowerTriangular base, BlockLowerTriangular direction, double tol)
    : base_(std::move(base)), direction_(std::move(direction)) {
  require_tangent(base_, direction_, tol, "TangentVector");
}

BlockLowerTriangular GeodesicSegment::point(double u) const {
  return direction_.base() + direction_.direction() * u;
}

bool is_tangent(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double tol) {
  require_same_shape(l, v, "is_tangent");
  const double bound = tol * (1.0 + frobenius_norm(v) * frobenius_norm(l));
  for (int t = 0; t < l.shape().steps(); ++t) {
    const SmallMatrix a = diag_block_product(v, l, t);
    if ((a - a.transpose()).norm() > bound) return false;
  }
  return true;
}

bool is_regular(const BlockLowerTriangular& l, double tol) {
  for (int t = 0; t < l.shape().steps(); ++t) {
    // Eigenvalues of (L^T L)_{t,t} are the squared singular values of L_{.,t}.
    const Vector sigma = column_singular_values(l, t);
    const double lambda_max = sigma(0) * sigma(0);
    const double lambda_min = sigma(sigma.size() - 1) * sigma(sigma.size() - 1);
    if (!(lambda_max > 0.0) || !(lambda_min > tol * lambda_max)) return false;
  }
  return true;
}

GeodesicSegment geodesic(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol) {
  const BlockDiagOrthogonal p = optimizer_set(l, m, tol).canonical_member();
  return GeodesicSegment(TangentVector(l, m * p - l, tol));
}

GeodesicSegment geodesic(const BlockLowerTriangular& l, const BlockLowerTriangular& m, const BlockDiagOrthogonal& p,
                         double tol) {
  if (!is_optimizer(l, m, p, tol)) throw InvalidInput("geodesic: P is not an optimizer between L and M");
  return GeodesicSegment(TangentVector(l, m * p - l, tol));
}

LogResult log_map(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol) {
  const OptimizerSet opt = optimizer_set(l, m, tol);
  BlockDiagOrthogonal p = opt.canonical_member();
  bool unique = true;
  bool marginal = opt.marginal();
  for (int t = 0; t < l.shape().steps(); ++t) {
    const SmallSvd self = svd_small(diag_block_product(m, m, t), tol);
    unique = unique && self.rank == opt.rank(t);
    marginal = marginal || rank_is_marginal(self.singular_values, tol);
  }
  TangentVector tangent(l, m * p - l, tol);
  return LogResult{std::move(tangent), unique, marginal, std::move(p)};
}

double safe_radius(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double tol) {
  require_tangent(l, v, tol, "safe_radius");
  double radius = kInfinity;
  for (int t = 0; t < l.shape().steps(); ++t) {
    const Vector sigma = column_singular_values(l, t);
    const int rank = numerical_rank(sigma, tol);
    if (rank == 0) continue;  // lambda+_min = +inf
    const double op = column_singular_values(v, t)(0);
    if (op == 0.0) continue;
    radius = std::min(radius, sigma(rank - 1) / op);
  }
  return radius;
}

ExpResult exp_map(const BlockLowerTriangular& l, const BlockLowerTriangular& v, double r, double tol) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("exp_map: radius must be finite and nonnegative");
  require_tangent(l, v, tol, "exp_map");
  const double radius = safe_radius(l, v, tol);
  return ExpResult{l + v * r, radius, r < radius};
}

StabilizerAlignment align_by_stabilizer(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                                        const BlockLowerTriangular& w, double tol) {
  require_tangent(l, v, tol, "align_by_stabilizer");
  require_tangent(l, w, tol, "align_by_stabilizer");
  const StabilizerSet stab = stabilizer(l, tol);
  const int d = l.shape().dim();

  // <V, W O> = sum_t tr(G_t O_t) with G_t = (V^T W)_{t,t}. On the row space
  // of L_{.,t} every O_t is the identity; on the kernel (basis N) the best
  // rotation is the polar factor of N^T G_t N.
  std::vector<SmallMatrix> blocks;
  blocks.reserve(l.shape().steps());
  double inner = 0.0;
  for (int t = 0; t < l.shape().steps(); ++t) {
    const SmallMatrix g = diag_block_product(v, w, t);
    const SmallMatrix& n = stab.kernel_basis(t);
    SmallMatrix o = SmallMatrix::Identity(d, d);
    if (n.cols() > 0) {
      const SmallMatrix c = n.transpose() * g * n;
      Eigen::JacobiSVD<SmallMatrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const SmallMatrix q = svd.matrixV() * svd.matrixU().transpose();
      o += n * (q - SmallMatrix::Identity(q.rows(), q.cols())) * n.transpose();
    }
    inner += (g * o).trace();
    blocks.push_back(std::move(o));
  }
  return StabilizerAlignment{BlockDiagOrthogonal::from_blocks(l.shape(), blocks), inner};
}

double tangent_cone_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& v,
                             const BlockLowerTriangular& w, double tol) {
  const StabilizerAlignment best = align_by_stabilizer(l, v, w, tol);
  return frobenius_norm(v - w * best.rotation);
}

double cos_angle(const BlockLowerTriangular& l, const BlockLowerTriangular& v, const BlockLowerTriangular& w,
                 double tol) {
  const double nv = frobenius_norm(v);
  const double nw = frobenius_norm(w);
  if (nv == 0.0 || nw == 0.0) throw InvalidInput("cos_angle: directions must be nonzero");
  const StabilizerAlignment best = align_by_stabilizer(l, v, w, tol);
  return std::clamp(best.inner / (nv * nw), -1.0, 1.0);
}

SemiconcavityResult semiconcavity_check(const BlockLowerTriangular& l, const BlockLowerTriangular& m,
                                        const BlockLowerTriangular& z, double u, double tol) {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidInput("semiconcavity_check: u must lie in [0, 1]");
  require_same_shape(l, z, "semiconcavity_check");
  const GeodesicSegment seg = geodesic(l, m, tol);
  const auto sq = [](double x) { return x * x; };
  const double lhs = sq(abw_distance(seg.point(u), z));
  const double rhs = (1.0 - u) * sq(abw_distance(l, z)) + u * sq(abw_distance(m, z)) -
                     u * (1.0 - u) * sq(seg.length());
  const double slack = lhs - rhs;
  return SemiconcavityResult{slack >= -tol, slack};
}

bool unique_geodesic_sufficient(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol) {
  if (!is_regular(l, tol)) throw NotRegular("unique_geodesic_sufficient: base factor is not regular");
  double lambda_min = kInfinity;
  for (int t = 0; t < l.shape().steps(); ++t) {
    const Vector sigma = column_singular_values(l, t);
    lambda_min = std::min(lambda_min, sigma(sigma.size() - 1) * sigma(sigma.size() - 1));
  }
  return abw_distance_squared(l, m) < lambda_min - tol;
}

}  // namespace abw
