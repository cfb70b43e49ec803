#pragma once

// The adapted Bures-Wasserstein distance between block lower triangular
// factors, its optimizer set O*(L, M) and the stabilizer O*(L, L).
//
//   d_ABW(L, M)^2 = min_{O in O} ||L - M O||_F^2
//                 = ||L||_F^2 + ||M||_F^2 - 2 sum_t tr(S_t),
//
// where S_t holds the singular values of (M^T L)_{t,t}. The minimizers are
// the block-diagonal P with P_t = U_t Q_t V_t^T, (M^T L)_{t,t} = U_t S_t V_t^T,
// and Q_t the identity on the first rank(S_t) coordinates.

#include <cstdint>
#include <random>
#include <vector>

#include "abw/block_linalg.hpp"

namespace abw {

class OptimizerSet {
 public:
  const BlockShape& shape() const { return shape_; }
  double tolerance() const { return tol_; }

  const SmallMatrix& left_frame(int t) const { return at(t).u; }   // U_t
  const SmallMatrix& right_frame(int t) const { return at(t).v; }  // V_t
  const Vector& singular_values(int t) const { return at(t).s; }   // diag(S_t)
  int rank(int t) const { return at(t).rank; }
  std::vector<int> ranks() const;

  // sum_t tr(S_t)
  double trace_sum() const;

  // True when some singular value of block t sits within a factor `window`
  // of the rank threshold tol * sigma_1, i.e. the rank is fragile.
  bool marginal(int t, double window = 10.0) const;
  bool marginal() const;

  bool is_singleton() const;

  // Sum over blocks of dim O(d - r_t).
  int degrees_of_freedom() const;

  // Q_t = Id for every block. The frames are chosen so that this member is
  // the optimizer closest to the identity.
  BlockDiagOrthogonal canonical_member() const;

  // Member with Q_t = diag(Id_{r_t}, rotations[t]); rotations[t] is
  // (d - r_t) x (d - r_t) orthogonal.
  BlockDiagOrthogonal member(const std::vector<SmallMatrix>& rotations) const;

  BlockDiagOrthogonal sample_member(std::uint64_t seed) const;

 private:
  struct Frame {
    SmallMatrix u;
    Vector s;
    SmallMatrix v;
    int rank = 0;
  };

  OptimizerSet(BlockShape shape, std::vector<Frame> frames, double tol)
      : shape_(shape), frames_(std::move(frames)), tol_(tol) {}

  const Frame& at(int t) const;

  friend OptimizerSet optimizer_set(const BlockLowerTriangular&, const BlockLowerTriangular&, double);

  BlockShape shape_;
  std::vector<Frame> frames_;
  double tol_;
};

// O*(L, L) = {O in O : L O = L}. Block t acts as the identity on the row
// space of L_{.,t} and as an arbitrary rotation on ker(L_{.,t}).
class StabilizerSet {
 public:
  const BlockShape& shape() const { return shape_; }

  // d x k_t, orthonormal columns spanning ker(L_{.,t}).
  const SmallMatrix& kernel_basis(int t) const;
  int kernel_dim(int t) const { return static_cast<int>(kernel_basis(t).cols()); }
  bool is_trivial() const;

  // O_t = (Id - N_t N_t^T) + N_t rotations[t] N_t^T.
  BlockDiagOrthogonal member(const std::vector<SmallMatrix>& rotations) const;
  BlockDiagOrthogonal sample_member(std::uint64_t seed) const;

 private:
  StabilizerSet(BlockShape shape, std::vector<SmallMatrix> kernels) : shape_(shape), kernels_(std::move(kernels)) {}

  friend StabilizerSet stabilizer(const BlockLowerTriangular&, double);

  BlockShape shape_;
  std::vector<SmallMatrix> kernels_;
};

double abw_distance(const BlockLowerTriangular& l, const BlockLowerTriangular& m);
double abw_distance_squared(const BlockLowerTriangular& l, const BlockLowerTriangular& m);

// Adapted Wasserstein distance between N(a, L L^T) and N(b, M M^T) processes.
double aw_gaussian_distance(const Vector& a, const BlockLowerTriangular& l, const Vector& b,
                            const BlockLowerTriangular& m);

OptimizerSet optimizer_set(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol = kDefaultTol);

// Trace test: tr((M^T L)_{t,t} P_t^T) >= tr(S_t) - tol * (1 + tr(S_t)) for every t.
bool is_optimizer(const BlockLowerTriangular& l, const BlockLowerTriangular& m, const BlockDiagOrthogonal& p,
                  double tol = kDefaultTol);

StabilizerSet stabilizer(const BlockLowerTriangular& l, double tol = kDefaultTol);

// d_ABW(L, M) <= tol * (1 + ||L||_F + ||M||_F).
bool quotient_equal(const BlockLowerTriangular& l, const BlockLowerTriangular& m, double tol = kDefaultTol);

// Haar-distributed k x k orthogonal matrix (Gaussian QR with R's diagonal made positive).
SmallMatrix random_orthogonal(int k, std::mt19937_64& rng);
BlockDiagOrthogonal random_block_orthogonal(BlockShape shape, std::mt19937_64& rng);

}  // namespace abw
