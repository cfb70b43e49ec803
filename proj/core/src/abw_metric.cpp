#include "abw/abw_metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abw {

namespace {

// Rotate the null-space columns of U so that U Vᵀ is as close to the
// identity as the free block allows: maximize tr(Q V0ᵀ U0) over Q in O(k).
void align_null_frame(SmallMatrix& u, const SmallMatrix& v, int rank) {
  const auto d = u.cols();
  const auto k = d - rank;
  if (k == 0) return;
  const SmallMatrix cross = v.rightCols(k).transpose() * u.rightCols(k);
  Eigen::JacobiSVD<SmallMatrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const SmallMatrix q = svd.matrixV() * svd.matrixU().transpose();
  u.rightCols(k) = (u.rightCols(k) * q).eval();
}

SmallMatrix embed_rotation(int d, int rank, const SmallMatrix& rotation) {
  SmallMatrix q = SmallMatrix::Identity(d, d);
  const int k = d - rank;
  if (k == 0) return q;
  if (rotation.rows() != k || rotation.cols() != k) {
    throw ShapeError("rotation block must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  const double defect = (rotation.transpose() * rotation - SmallMatrix::Identity(k, k)).norm();
  if (defect > kOrthogonalityTol) throw InvalidInput("rotation block is not orthogonal");
  q.bottomRightCorner(k, k) = rotation;
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// OptimizerSet

const OptimizerSet::Frame& OptimizerSet::at(int t) const {
  if (t < 0 || t >= static_cast<int>(frames_.size())) {
    throw InvalidInput("OptimizerSet: block index " + std::to_string(t) + " out of range");
  }
  return frames_[t];
}

std::vector<int> OptimizerSet::ranks() const {
  std::vector<int> out;
  out.reserve(frames_.size());
  for (const auto& f : frames_) out.push_back(f.rank);
  return out;
}

double OptimizerSet::trace_sum() const {
  double sum = 0.0;
  for (const auto& f : frames_) sum += f.s.sum();
  return sum;
}

bool OptimizerSet::marginal(int t, double window) const {
  return rank_is_marginal(at(t).s, tol_, window);
}

bool OptimizerSet::marginal() const {
  for (int t = 0; t < shape_.steps(); ++t) {
    if (marginal(t)) return true;
  }
  return false;
}

bool OptimizerSet::is_singleton() const {
  return std::all_of(frames_.begin(), frames_.end(), [&](const Frame& f) { return f.rank == shape_.dim(); });
}

int OptimizerSet::degrees_of_freedom() const {
  int dof = 0;
  for (const auto& f : frames_) {
    const int k = shape_.dim() - f.rank;
    dof += k * (k - 1) / 2;
  }
  return dof;
}

BlockDiagOrthogonal OptimizerSet::canonical_member() const {
  std::vector<SmallMatrix> blocks;
  blocks.reserve(frames_.size());
  for (const auto& f : frames_) blocks.emplace_back(f.u * f.v.transpose());
  return BlockDiagOrthogonal::from_blocks(shape_, blocks);
}

BlockDiagOrthogonal OptimizerSet::member(const std::vector<SmallMatrix>& rotations) const {
  if (rotations.size() != frames_.size()) throw ShapeError("OptimizerSet::member: one rotation per block");
  std::vector<SmallMatrix> blocks;
  blocks.reserve(frames_.size());
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    const Frame& f = frames_[t];
    blocks.emplace_back(f.u * embed_rotation(shape_.dim(), f.rank, rotations[t]) * f.v.transpose());
  }
  return BlockDiagOrthogonal::from_blocks(shape_, blocks);
}

BlockDiagOrthogonal OptimizerSet::sample_member(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<SmallMatrix> rotations;
  rotations.reserve(frames_.size());
  for (const auto& f : frames_) rotations.push_back(random_orthogonal(shape_.dim() - f.rank, rng));
  return member(rotations);
}

OptimizerSet optimizer_set(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol) {
  require_same_shape(l, m, "optimizer_set");
  std::vector<OptimizerSet::Frame> frames;
  frames.reserve(l.shape().steps());
  for (int t = 0; t < l.shape().steps(); ++t) {
    SmallSvd svd = svd_small(diag_block_product(m, l, t), tol);
    align_null_frame(svd.u, svd.v, svd.rank);
    frames.push_back({std::move(svd.u), std::move(svd.singular_values), std::move(svd.v), svd.rank});
  }
  return OptimizerSet(l.shape(), std::move(frames), tol);
}

bool is_optimizer(const BlockLowerTriangular& l, const BlockLowerTriangular& m, const BlockDiagOrthogonal& p,
                  double tol) {
  require_same_shape(l, m, "is_optimizer");
  require_same_shape(l, p, "is_optimizer");
  for (int t = 0; t < l.shape().steps(); ++t) {
    const SmallMatrix a = diag_block_product(m, l, t);
    const double achieved = (a * p.block(t, t).transpose()).trace();
    const double best = Eigen::JacobiSVD<SmallMatrix>(a).singularValues().sum();
    if (achieved < best - tol * (1.0 + best)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Distances

double abw_distance_squared(const BlockLowerTriangular& l, const BlockLowerTriangular& m) {
  const double dist = abw_distance(l, m);
  return dist * dist;
}

double abw_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& m) {
  require_same_shape(l, m, "abw_distance");
  // Evaluated as ||L - M P||_F at an optimizer P rather than through the
  // trace identity, which cancels catastrophically when [L] is close to [M].
  // The raw polar factor U V^T is used without any rank decision: singular
  // values below the rank threshold still matter when both factors are small.
  double sum = 0.0;
  for (int t = 0; t < l.shape().steps(); ++t) {
    const SmallSvd svd = svd_small(diag_block_product(m, l, t));
    const SmallMatrix p = svd.u * svd.v.transpose();
    sum += (l.lower_column(t) - m.lower_column(t) * p).squaredNorm();
  }
  return std::sqrt(sum);
}

double aw_gaussian_distance(const Vector& a, const BlockLowerTriangular& l, const Vector& b,
                            const BlockLowerTriangular& m) {
  require_same_shape(l, m, "aw_gaussian_distance");
  if (a.size() != l.size() || b.size() != l.size()) {
    throw ShapeError("aw_gaussian_distance: mean vectors must have length " + std::to_string(l.size()));
  }
  if (!a.allFinite() || !b.allFinite()) throw InvalidInput("aw_gaussian_distance: non-finite mean");
  const double cov = abw_distance(l, m);
  return std::sqrt((a - b).squaredNorm() + cov * cov);
}

bool quotient_equal(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol) {
  return abw_distance(l, m) <= tol * (1.0 + frobenius_norm(l) + frobenius_norm(m));
}

// ---------------------------------------------------------------------------
// Stabilizer

const SmallMatrix& StabilizerSet::kernel_basis(int t) const {
  if (t < 0 || t >= static_cast<int>(kernels_.size())) {
    throw InvalidInput("StabilizerSet: block index " + std::to_string(t) + " out of range");
  }
  return kernels_[t];
}

bool StabilizerSet::is_trivial() const {
  return std::all_of(kernels_.begin(), kernels_.end(), [](const SmallMatrix& n) { return n.cols() == 0; });
}

BlockDiagOrthogonal StabilizerSet::member(const std::vector<SmallMatrix>& rotations) const {
  if (rotations.size() != kernels_.size()) throw ShapeError("StabilizerSet::member: one rotation per block");
  const int d = shape_.dim();
  std::vector<SmallMatrix> blocks;
  blocks.reserve(kernels_.size());
  for (std::size_t t = 0; t < kernels_.size(); ++t) {
    const SmallMatrix& n = kernels_[t];
    const auto k = n.cols();
    if (k == 0) {
      blocks.emplace_back(SmallMatrix::Identity(d, d));
      continue;
    }
    if (rotations[t].rows() != k || rotations[t].cols() != k) {
      throw ShapeError("StabilizerSet::member: rotation " + std::to_string(t) + " must be " + std::to_string(k) +
                       "x" + std::to_string(k));
    }
    blocks.emplace_back(SmallMatrix::Identity(d, d) - n * n.transpose() + n * rotations[t] * n.transpose());
  }
  return BlockDiagOrthogonal::from_blocks(shape_, blocks);
}

BlockDiagOrthogonal StabilizerSet::sample_member(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<SmallMatrix> rotations;
  rotations.reserve(kernels_.size());
  for (const auto& n : kernels_) rotations.push_back(random_orthogonal(static_cast<int>(n.cols()), rng));
  return member(rotations);
}

StabilizerSet stabilizer(const BlockLowerTriangular& l, double tol) {
  const int d = l.shape().dim();
  std::vector<SmallMatrix> kernels;
  kernels.reserve(l.shape().steps());
  for (int t = 0; t < l.shape().steps(); ++t) {
    Eigen::JacobiSVD<SmallMatrix> svd(SmallMatrix(l.lower_column(t)), Eigen::ComputeFullV);
    const int rank = numerical_rank(svd.singularValues(), tol);
    kernels.emplace_back(svd.matrixV().rightCols(d - rank));
  }
  return StabilizerSet(l.shape(), std::move(kernels));
}

// ---------------------------------------------------------------------------
// Sampling

SmallMatrix random_orthogonal(int k, std::mt19937_64& rng) {
  if (k < 0) throw InvalidInput("random_orthogonal: negative dimension");
  if (k == 0) return SmallMatrix(0, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  SmallMatrix g(k, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<SmallMatrix> qr(g);
  SmallMatrix q = qr.householderQ() * SmallMatrix::Identity(k, k);
  const SmallMatrix& r = qr.matrixQR();
  for (int i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

BlockDiagOrthogonal random_block_orthogonal(BlockShape shape, std::mt19937_64& rng) {
  std::vector<SmallMatrix> blocks;
  blocks.reserve(shape.steps());
  for (int t = 0; t < shape.steps(); ++t) blocks.push_back(random_orthogonal(shape.dim(), rng));
  return BlockDiagOrthogonal::from_blocks(shape, blocks);
}

}  // namespace abw
