#pragma once

// Markov operators on l1^n as column-stochastic matrices.
//
// Convention: y = M * x acts on column vectors, so entry (i, j) is the weight
// that input coordinate j sends to output coordinate i and every COLUMN sums
// to one. A row-stochastic (transposed) matrix is rejected by validation
// unless it happens to be doubly stochastic.

#include "deltap/common.hpp"

#include <optional>
#include <vector>

namespace deltap {

// Induced l1 -> l1 norm: the largest absolute column sum.
template <typename Derived>
typename Derived::Scalar op_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return Scalar(0);
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Number of singular values above n * eps * sigma_max.
Index numerical_rank(const Matrix& m);

struct ValidationAdjustment {
  Index clamped_entries = 0;       // tiny negatives set to zero
  double max_column_correction = 0.0;  // largest |column sum - 1| renormalized away
};

class MarkovOperator {
 public:
  // Throws NotSquare, NonFinite, NegativeEntry or NotStochastic.
  static MarkovOperator validate(const Matrix& m, double tol = kDefaultTol);

  const Matrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }
  const ValidationAdjustment& adjustment() const noexcept { return adjustment_; }

  static MarkovOperator identity(Index n);

 private:
  MarkovOperator(Matrix m, ValidationAdjustment adj) : matrix_(std::move(m)), adjustment_(adj) {}

  Matrix matrix_;
  ValidationAdjustment adjustment_;
};

inline MarkovOperator validate_markov(const Matrix& m, double tol = kDefaultTol) {
  return MarkovOperator::validate(m, tol);
}

// Lumping structure: a partition of the coordinates and, per block, a
// distribution supported inside the block. Column j of the projection is the
// representative of the block containing j.
struct BlockStructure {
  std::vector<std::vector<Index>> blocks;
  std::vector<Vector> reps;
};

class MarkovProjection {
 public:
  // Throws the MarkovOperator errors or NotIdempotent.
  static MarkovProjection validate(const Matrix& m, double tol = kDefaultTol);

  const Matrix& matrix() const noexcept { return op_.matrix(); }
  const MarkovOperator& as_operator() const noexcept { return op_; }
  Index dim() const noexcept { return op_.dim(); }
  Index rank() const noexcept { return rank_; }
  bool is_identity() const noexcept { return rank_ == dim(); }
  double idempotency_residual() const noexcept { return idempotency_residual_; }

  const std::optional<BlockStructure>& block_structure() const noexcept { return blocks_; }
  MarkovProjection with_block_structure(BlockStructure blocks) const;

 private:
  MarkovProjection(MarkovOperator op, Index rank, double residual)
      : op_(std::move(op)), rank_(rank), idempotency_residual_(residual) {}

  MarkovOperator op_;
  Index rank_;
  double idempotency_residual_;
  std::optional<BlockStructure> blocks_;
};

inline MarkovProjection validate_markov_projection(const Matrix& m, double tol = kDefaultTol) {
  return MarkovProjection::validate(m, tol);
}

// Basis of N_P = range(I - P), as actual columns of I - P picked by a
// column-pivoted QR.
struct KernelBasis {
  Matrix vectors;  // n x (n - rank P)
  bool degenerate = false;  // P = I, empty kernel

  Index dim() const noexcept { return vectors.cols(); }
};

KernelBasis kernel_basis(const MarkovProjection& p, double tol = 1e-10);

// The two sides of "T(N_P) is contained in N_P  <=>  PT = PTP", evaluated
// independently of each other.
struct KernelInvariance {
  double kernel_residual = 0.0;  // max_b dist(T b, span B) / |b|
  double commutator_residual = 0.0;  // |PT - PTP|
};

KernelInvariance kernel_invariance(const Matrix& t, const MarkovProjection& p);

}  // namespace deltap
