#include "deltap/operators.hpp"

#include "deltap/statespace.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace deltap {

Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double threshold = static_cast<double>(std::max(m.rows(), m.cols())) *
                           std::numeric_limits<double>::epsilon() * s(0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++r;
  }
  return r;
}

MarkovOperator MarkovOperator::validate(const Matrix& m, double tol) {
  require_square(m, "operator");
  if (!m.allFinite()) fail(ErrorCode::NonFinite, "operator has non-finite entries");
  Matrix out = m;
  ValidationAdjustment adj;
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double v = out(i, j);
      if (v < -tol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "entry (" << i << "," << j << ") = " << v;
        fail(ErrorCode::NegativeEntry, msg.str());
      }
      if (v < 0.0) {
        out(i, j) = 0.0;
        ++adj.clamped_entries;
      }
    }
  }
  for (Index j = 0; j < n; ++j) {
    const double sum = out.col(j).sum();
    const double deviation = sum - 1.0;
    if (std::abs(deviation) > tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "column " << j << " sums to " << sum << " (deviation " << deviation << ")";
      fail(ErrorCode::NotStochastic, msg.str());
    }
    if (deviation != 0.0) {
      out.col(j) /= sum;
      adj.max_column_correction = std::max(adj.max_column_correction, std::abs(deviation));
    }
  }
  return MarkovOperator(std::move(out), adj);
}

MarkovOperator MarkovOperator::identity(Index n) {
  return MarkovOperator(Matrix::Identity(n, n), {});
}

MarkovProjection MarkovProjection::validate(const Matrix& m, double tol) {
  MarkovOperator op = MarkovOperator::validate(m, tol);
  const Matrix& a = op.matrix();
  const double residual = op_norm(a * a - a);
  if (residual > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "|M*M - M| = " << residual;
    fail(ErrorCode::NotIdempotent, msg.str());
  }
  const Index rank = numerical_rank(a);
  return MarkovProjection(std::move(op), rank, residual);
}

MarkovProjection MarkovProjection::with_block_structure(BlockStructure blocks) const {
  MarkovProjection copy = *this;
  copy.blocks_ = std::move(blocks);
  return copy;
}

KernelBasis kernel_basis(const MarkovProjection& p, double tol) {
  const Index n = p.dim();
  KernelBasis basis;
  if (p.is_identity()) {
    basis.vectors = Matrix(n, 0);
    basis.degenerate = true;
    return basis;
  }
  const Matrix q = Matrix::Identity(n, n) - p.matrix();
  Eigen::ColPivHouseholderQR<Matrix> qr(q);
  qr.setThreshold(tol);
  const Index k = n - p.rank();
  basis.vectors.resize(n, k);
  const auto& perm = qr.colsPermutation().indices();
  for (Index c = 0; c < k; ++c) basis.vectors.col(c) = q.col(perm(c));
  return basis;
}

KernelInvariance kernel_invariance(const Matrix& t, const MarkovProjection& p) {
  require_square(t, "operator");
  require_same_dim(t.rows(), p.dim(), "operator vs projection");
  KernelInvariance out;
  const Matrix& pm = p.matrix();
  out.commutator_residual = op_norm(pm * t - pm * t * pm);
  const KernelBasis basis = kernel_basis(p);
  if (basis.degenerate) return out;
  Eigen::ColPivHouseholderQR<Matrix> qr(basis.vectors);
  for (Index c = 0; c < basis.dim(); ++c) {
    const Vector b = basis.vectors.col(c);
    const Vector tb = t * b;
    const Vector coeffs = qr.solve(tb);
    const double r = l1_norm(tb - basis.vectors * coeffs) / l1_norm(b);
    out.kernel_residual = std::max(out.kernel_residual, r);
  }
  return out;
}

}  // namespace deltap
