#pragma once

// Block-structured dense linear algebra for dT x dT factors.
//
// A factor is stored as a dense row-major n x n matrix (n = d * T) and is
// addressed through d x d block views. Block indices are zero-based
// throughout the C++ API: block (s, t) covers rows [s*d, (s+1)*d) and
// columns [t*d, (t+1)*d).

#include <Eigen/Dense>

#include <vector>

#include "abw/errors.hpp"

namespace abw {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SmallMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative threshold for numerical rank and the other exact-arithmetic tests.
inline constexpr double kDefaultTol = 1e-9;

// Bound on ||A^T A - Id||_F for the diagonal blocks of a BlockDiagOrthogonal.
inline constexpr double kOrthogonalityTol = 1e-8;

class BlockShape {
 public:
  BlockShape(int steps, int dim);

  int steps() const { return steps_; }  // T
  int dim() const { return dim_; }      // d
  int size() const { return steps_ * dim_; }

  friend bool operator==(const BlockShape&, const BlockShape&) = default;

 private:
  int steps_;
  int dim_;
};

class BlockMatrix {
 public:
  // Throws ShapeError unless entries is n x n, InvalidInput on non-finite data.
  BlockMatrix(BlockShape shape, Matrix entries);

  const BlockShape& shape() const { return shape_; }
  const Matrix& matrix() const { return entries_; }
  int size() const { return shape_.size(); }

  Eigen::Block<const Matrix> block(int s, int t) const;

  // All rows of block column t: the n x d slab A_{.,t}.
  Eigen::Block<const Matrix> block_column(int t) const;

 protected:
  void check_block_index(int t) const;

  BlockShape shape_;
  Matrix entries_;
};

class BlockDiagOrthogonal;

// A factor L with exact zeros above the block diagonal.
class BlockLowerTriangular : public BlockMatrix {
 public:
  // Throws InvalidInput when any entry above the block diagonal is nonzero.
  BlockLowerTriangular(BlockShape shape, Matrix entries);

  // Zeroes the strictly upper block part instead of rejecting it.
  static BlockLowerTriangular project(BlockShape shape, Matrix entries);
  static BlockLowerTriangular zero(BlockShape shape);
  static BlockLowerTriangular identity(BlockShape shape);

  // The part of block column t that can be nonzero: rows [t*d, n).
  Eigen::Block<const Matrix> lower_column(int t) const;

  BlockLowerTriangular operator+(const BlockLowerTriangular& other) const;
  BlockLowerTriangular operator-(const BlockLowerTriangular& other) const;
  BlockLowerTriangular operator*(double scale) const;
  friend BlockLowerTriangular operator*(double scale, const BlockLowerTriangular& a) { return a * scale; }

  // Right action of the block-orthogonal group: L * O stays block lower triangular.
  BlockLowerTriangular operator*(const BlockDiagOrthogonal& o) const;

 private:
  struct Unchecked {};
  BlockLowerTriangular(Unchecked, BlockShape shape, Matrix entries);
};

// Block-diagonal matrix whose diagonal blocks are orthogonal (the group O).
class BlockDiagOrthogonal : public BlockMatrix {
 public:
  // Throws InvalidInput if an off-diagonal block is nonzero or a diagonal
  // block violates ||A^T A - Id||_F <= orthogonality_tol.
  BlockDiagOrthogonal(BlockShape shape, Matrix entries, double orthogonality_tol = kOrthogonalityTol);

  static BlockDiagOrthogonal from_blocks(BlockShape shape, const std::vector<SmallMatrix>& blocks,
                                         double orthogonality_tol = kOrthogonalityTol);
  static BlockDiagOrthogonal identity(BlockShape shape);

  SmallMatrix diagonal_block(int t) const { return block(t, t); }

  BlockDiagOrthogonal transpose() const;
  BlockDiagOrthogonal operator*(const BlockDiagOrthogonal& other) const;
};

struct SmallSvd {
  SmallMatrix u;
  Vector singular_values;  // nonincreasing
  SmallMatrix v;
  int rank = 0;
};

// Count of singular values strictly above tol * sigma_1 (0 when sigma_1 == 0).
int numerical_rank(const Vector& singular_values, double tol);

// True when some sigma_i (i >= 1) lies within a factor `window` of the rank
// threshold tol * sigma_1, so the numerical rank is fragile.
bool rank_is_marginal(const Vector& singular_values, double tol, double window = 10.0);

// Full SVD of a small square matrix with a deterministic frame: every column
// of U has its largest-magnitude entry nonnegative (ties go to the lowest
// row), and the matching column of V is flipped with it.
SmallSvd svd_small(const SmallMatrix& a, double tol = kDefaultTol);

// (M^T L)_{t,t} = M_{.,t}^T L_{.,t}; only rows s >= t contribute.
SmallMatrix diag_block_product(const BlockLowerTriangular& m, const BlockLowerTriangular& l, int t);

template <class A, class B>
double frobenius_inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("frobenius_inner: operands have different shapes");
  }
  return a.cwiseProduct(b).sum();
}

inline double frobenius_inner(const BlockMatrix& a, const BlockMatrix& b) {
  return frobenius_inner(a.matrix(), b.matrix());
}

template <class A>
double frobenius_norm(const Eigen::MatrixBase<A>& a) {
  return a.norm();
}

inline double frobenius_norm(const BlockMatrix& a) { return a.matrix().norm(); }

// Semi-definite Cholesky: returns L in block lower triangular form with
// L L^T = Sigma. Null directions produce exact zero columns.
// Throws NotPSD for asymmetric or indefinite input beyond tol.
BlockLowerTriangular block_cholesky(const Matrix& sigma, BlockShape shape, double tol = kDefaultTol);

void require_same_shape(const BlockMatrix& a, const BlockMatrix& b, const char* what);

}  // namespace abw
