#include "abw/block_linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace abw {

BlockShape::BlockShape(int steps, int dim) : steps_(steps), dim_(dim) {
  if (steps < 1 || dim < 1) {
    throw InvalidInput("BlockShape: T and d must be positive (got T=" + std::to_string(steps) +
                       ", d=" + std::to_string(dim) + ")");
  }
}

BlockMatrix::BlockMatrix(BlockShape shape, Matrix entries) : shape_(shape), entries_(std::move(entries)) {
  const int n = shape_.size();
  if (entries_.rows() != n || entries_.cols() != n) {
    throw ShapeError("BlockMatrix: expected " + std::to_string(n) + "x" + std::to_string(n) + " entries, got " +
                     std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
  }
  if (!entries_.allFinite()) {
    throw InvalidInput("BlockMatrix: non-finite entry");
  }
}

void BlockMatrix::check_block_index(int t) const {
  if (t < 0 || t >= shape_.steps()) {
    throw InvalidInput("block index " + std::to_string(t) + " out of range [0, " +
                       std::to_string(shape_.steps()) + ")");
  }
}

Eigen::Block<const Matrix> BlockMatrix::block(int s, int t) const {
  check_block_index(s);
  check_block_index(t);
  const int d = shape_.dim();
  return entries_.block(s * d, t * d, d, d);
}

Eigen::Block<const Matrix> BlockMatrix::block_column(int t) const {
  check_block_index(t);
  const int d = shape_.dim();
  return entries_.block(0, t * d, size(), d);
}

void require_same_shape(const BlockMatrix& a, const BlockMatrix& b, const char* what) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string(what) + ": shape mismatch (T=" + std::to_string(a.shape().steps()) +
                     ", d=" + std::to_string(a.shape().dim()) + " vs T=" + std::to_string(b.shape().steps()) +
                     ", d=" + std::to_string(b.shape().dim()) + ")");
  }
}

// ---------------------------------------------------------------------------
// BlockLowerTriangular

namespace {

bool strictly_upper_blocks_zero(const Matrix& m, int d) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index first_upper = (i / d + 1) * d;
    for (Eigen::Index j = first_upper; j < n; ++j) {
      if (m(i, j) != 0.0) return false;
    }
  }
  return true;
}

void zero_strictly_upper_blocks(Matrix& m, int d) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index first_upper = (i / d + 1) * d;
    for (Eigen::Index j = first_upper; j < n; ++j) m(i, j) = 0.0;
  }
}

// Left-looking Cholesky; a pivot at or below `pivot_floor` marks a null
// direction and its whole column is set to zero.
Matrix semidefinite_cholesky(const Eigen::MatrixXd& sym, double pivot_floor) {
  const auto n = sym.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = sym(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot <= pivot_floor) continue;
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (sym(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
    }
  }
  return l;
}

// Given Sigma = F F^T, returns lower triangular L with L L^T = Sigma: row i of
// L holds the coordinates of row i of F in an orthonormal frame grown one
// row at a time (Gram-Schmidt, two passes). A row whose new component is at
// most `drop` opens no direction, leaving column i zero.
Matrix triangularize_rows(const Eigen::MatrixXd& f, double drop) {
  const auto n = f.rows();
  Matrix l = Matrix::Zero(n, n);
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(f.cols(), n);
  std::vector<Eigen::Index> open;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd rest = f.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (const Eigen::Index k : open) {
        const double c = frame.col(k).dot(rest);
        l(i, k) += c;
        rest -= c * frame.col(k);
      }
    }
    const double norm = rest.norm();
    if (norm <= drop) continue;
    l(i, i) = norm;
    frame.col(i) = rest / norm;
    open.push_back(i);
  }
  return l;
}

}  // namespace

BlockLowerTriangular::BlockLowerTriangular(BlockShape shape, Matrix entries)
    : BlockMatrix(shape, std::move(entries)) {
  if (!strictly_upper_blocks_zero(entries_, shape_.dim())) {
    throw InvalidInput("BlockLowerTriangular: nonzero entry above the block diagonal");
  }
}

BlockLowerTriangular::BlockLowerTriangular(Unchecked, BlockShape shape, Matrix entries)
    : BlockMatrix(shape, std::move(entries)) {
  zero_strictly_upper_blocks(entries_, shape_.dim());
}

BlockLowerTriangular BlockLowerTriangular::project(BlockShape shape, Matrix entries) {
  return BlockLowerTriangular(Unchecked{}, shape, std::move(entries));
}

BlockLowerTriangular BlockLowerTriangular::zero(BlockShape shape) {
  return BlockLowerTriangular(Unchecked{}, shape, Matrix::Zero(shape.size(), shape.size()));
}

BlockLowerTriangular BlockLowerTriangular::identity(BlockShape shape) {
  return BlockLowerTriangular(Unchecked{}, shape, Matrix::Identity(shape.size(), shape.size()));
}

Eigen::Block<const Matrix> BlockLowerTriangular::lower_column(int t) const {
  check_block_index(t);
  const int d = shape_.dim();
  return entries_.block(t * d, t * d, size() - t * d, d);
}

BlockLowerTriangular BlockLowerTriangular::operator+(const BlockLowerTriangular& other) const {
  require_same_shape(*this, other, "BlockLowerTriangular::operator+");
  return BlockLowerTriangular(Unchecked{}, shape_, entries_ + other.entries_);
}

BlockLowerTriangular BlockLowerTriangular::operator-(const BlockLowerTriangular& other) const {
  require_same_shape(*this, other, "BlockLowerTriangular::operator-");
  return BlockLowerTriangular(Unchecked{}, shape_, entries_ - other.entries_);
}

BlockLowerTriangular BlockLowerTriangular::operator*(double scale) const {
  return BlockLowerTriangular(Unchecked{}, shape_, entries_ * scale);
}

BlockLowerTriangular BlockLowerTriangular::operator*(const BlockDiagOrthogonal& o) const {
  require_same_shape(*this, o, "BlockLowerTriangular * BlockDiagOrthogonal");
  const int d = shape_.dim();
  Matrix out = Matrix::Zero(size(), size());
  for (int t = 0; t < shape_.steps(); ++t) {
    const int rows = size() - t * d;
    out.block(t * d, t * d, rows, d).noalias() = lower_column(t) * o.block(t, t);
  }
  return BlockLowerTriangular(Unchecked{}, shape_, std::move(out));
}

// ---------------------------------------------------------------------------
// BlockDiagOrthogonal

BlockDiagOrthogonal::BlockDiagOrthogonal(BlockShape shape, Matrix entries, double orthogonality_tol)
    : BlockMatrix(shape, std::move(entries)) {
  const int d = shape_.dim();
  const int steps = shape_.steps();
  for (int s = 0; s < steps; ++s) {
    for (int t = 0; t < steps; ++t) {
      if (s == t) continue;
      if (!(entries_.block(s * d, t * d, d, d).array() == 0.0).all()) {
        throw InvalidInput("BlockDiagOrthogonal: nonzero off-diagonal block (" + std::to_string(s) + ", " +
                           std::to_string(t) + ")");
      }
    }
    const SmallMatrix a = entries_.block(s * d, s * d, d, d);
    const double defect = (a.transpose() * a - SmallMatrix::Identity(d, d)).norm();
    if (defect > orthogonality_tol) {
      throw InvalidInput("BlockDiagOrthogonal: diagonal block " + std::to_string(s) +
                         " is not orthogonal (||A^T A - I||_F = " + std::to_string(defect) + ")");
    }
  }
}

BlockDiagOrthogonal BlockDiagOrthogonal::from_blocks(BlockShape shape, const std::vector<SmallMatrix>& blocks,
                                                     double orthogonality_tol) {
  const int d = shape.dim();
  if (static_cast<int>(blocks.size()) != shape.steps()) {
    throw ShapeError("BlockDiagOrthogonal::from_blocks: expected " + std::to_string(shape.steps()) + " blocks");
  }
  Matrix m = Matrix::Zero(shape.size(), shape.size());
  for (int t = 0; t < shape.steps(); ++t) {
    if (blocks[t].rows() != d || blocks[t].cols() != d) {
      throw ShapeError("BlockDiagOrthogonal::from_blocks: block " + std::to_string(t) + " is not d x d");
    }
    m.block(t * d, t * d, d, d) = blocks[t];
  }
  return BlockDiagOrthogonal(shape, std::move(m), orthogonality_tol);
}

BlockDiagOrthogonal BlockDiagOrthogonal::identity(BlockShape shape) {
  return BlockDiagOrthogonal(shape, Matrix::Identity(shape.size(), shape.size()));
}

BlockDiagOrthogonal BlockDiagOrthogonal::transpose() const {
  return BlockDiagOrthogonal(shape_, entries_.transpose(), std::numeric_limits<double>::infinity());
}

BlockDiagOrthogonal BlockDiagOrthogonal::operator*(const BlockDiagOrthogonal& other) const {
  require_same_shape(*this, other, "BlockDiagOrthogonal::operator*");
  const int d = shape_.dim();
  Matrix out = Matrix::Zero(size(), size());
  for (int t = 0; t < shape_.steps(); ++t) {
    out.block(t * d, t * d, d, d).noalias() = block(t, t) * other.block(t, t);
  }
  return BlockDiagOrthogonal(shape_, std::move(out), std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------------------
// SVD and products

int numerical_rank(const Vector& singular_values, double tol) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
  const double threshold = tol * singular_values(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > threshold) ++rank;
  }
  return rank;
}

bool rank_is_marginal(const Vector& singular_values, double tol, double window) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return false;
  const double threshold = tol * singular_values(0);
  for (Eigen::Index i = 1; i < singular_values.size(); ++i) {
    const double sigma = singular_values(i);
    if (sigma > threshold / window && sigma < threshold * window) return true;
  }
  return false;
}

SmallSvd svd_small(const SmallMatrix& a, double tol) {
  if (a.rows() != a.cols()) throw ShapeError("svd_small: matrix must be square");
  if (!a.allFinite()) throw InvalidInput("svd_small: non-finite entry");
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidInput("svd_small: tol must lie in (0, 1)");

  // Extended precision keeps ||A - U S V^T||_F at the rounding level of the
  // returned double factors.
  using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<WideMatrix> svd(a.cast<long double>(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  SmallSvd out{svd.matrixU().cast<double>(), svd.singularValues().cast<double>(), svd.matrixV().cast<double>(), 0};

  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < out.u.rows(); ++i) {
      if (std::abs(out.u(i, j)) > std::abs(out.u(pivot, j))) pivot = i;
    }
    if (out.u(pivot, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  out.rank = numerical_rank(out.singular_values, tol);
  return out;
}

SmallMatrix diag_block_product(const BlockLowerTriangular& m, const BlockLowerTriangular& l, int t) {
  require_same_shape(m, l, "diag_block_product");
  return m.lower_column(t).transpose() * l.lower_column(t);
}

// ---------------------------------------------------------------------------
// Cholesky

BlockLowerTriangular block_cholesky(const Matrix& sigma, BlockShape shape, double tol) {
  const int n = shape.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw ShapeError("block_cholesky: covariance must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!sigma.allFinite()) throw InvalidInput("block_cholesky: non-finite entry");

  const double scale = sigma.norm();
  if ((sigma - sigma.transpose()).norm() > tol * scale) {
    throw NotPSD("block_cholesky: covariance is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  if (scale == 0.0) return BlockLowerTriangular::zero(shape);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const double lambda_min = eig.eigenvalues()(0);
  const double lambda_max = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (lambda_min < -tol * lambda_max) {
    throw NotPSD("block_cholesky: covariance has eigenvalue " + std::to_string(lambda_min));
  }

  const double eps = std::numeric_limits<double>::epsilon();
  Matrix l = semidefinite_cholesky(sym, 64.0 * n * eps * sym.diagonal().maxCoeff());
  if ((l * l.transpose() - sym).norm() > 64.0 * n * eps * scale) {
    // Numerically singular: rebuild from the square root F = Q sqrt(Lambda).
    const double floor = 64.0 * n * eps * lambda_max;
    const Eigen::VectorXd roots =
        eig.eigenvalues().unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
    const Eigen::MatrixXd f = eig.eigenvectors() * roots.asDiagonal();
    l = triangularize_rows(f, 64.0 * n * eps * std::sqrt(lambda_max));
  }

  const double residual = (l * l.transpose() - sym).norm();
  if (residual > std::sqrt(tol) * scale) {
    throw NotPSD("block_cholesky: covariance is numerically indefinite (residual " + std::to_string(residual) +
                 ")");
  }
  return BlockLowerTriangular::project(shape, std::move(l));
}

}  // namespace abw
