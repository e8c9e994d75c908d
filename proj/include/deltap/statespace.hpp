#pragma once

// The classical finite-dimensional instance of an abstract state space:
// R^n with the l1 norm, the cone of nonnegative vectors, the probability
// simplex as base and the coordinate sum as base functional.
//
// The free functions are templated on the Eigen expression so they accept
// blocks, maps and lazy expressions without a temporary.

#include "deltap/common.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace deltap {

template <typename Derived>
typename Derived::Scalar l1_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseAbs().sum();
}

// f(x) = sum of coordinates; equals the norm on the cone.
template <typename Derived>
typename Derived::Scalar base_functional(const Eigen::MatrixBase<Derived>& x) {
  return x.sum();
}

template <typename Derived>
auto pos_neg_parts(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Column plus = x.cwiseMax(Scalar(0));
  Column minus = (-x).cwiseMax(Scalar(0));
  return std::pair<Column, Column>{std::move(plus), std::move(minus)};
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

struct BaseCheck {
  bool ok = true;
  std::vector<Index> negative_coordinates;
  double sum_deviation = 0.0;  // sum(x) - 1
  bool sum_ok = true;
};

template <typename Derived>
BaseCheck is_base_element(const Eigen::MatrixBase<Derived>& x, double tol = kDefaultTol) {
  BaseCheck check;
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= -tol)) check.negative_coordinates.push_back(i);
  }
  check.sum_deviation = static_cast<double>(x.sum()) - 1.0;
  check.sum_ok = std::abs(check.sum_deviation) <= tol;
  check.ok = check.negative_coordinates.empty() && check.sum_ok;
  return check;
}

inline Vector barycenter(Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

inline Vector basis_vector(Index n, Index i) {
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

// Dimension descriptor; lambda is the generating constant of the cone
// (1 for l1: every x splits as x+ - x- with |x+| + |x-| = |x|).
class StateSpace {
 public:
  explicit StateSpace(Index dim, double lambda = 1.0);

  Index dim() const noexcept { return dim_; }
  double lambda() const noexcept { return lambda_; }

  // Dimension-checked wrappers around the free functions.
  double l1_norm(const Vector& x) const;
  double base_functional(const Vector& x) const;
  BaseCheck is_base_element(const Vector& x, double tol = kDefaultTol) const;
  std::pair<Vector, Vector> pos_neg_parts(const Vector& x) const;

  void check_dim(const Vector& x) const;

 private:
  Index dim_;
  double lambda_;
};

inline StateSpace::StateSpace(Index dim, double lambda) : dim_(dim), lambda_(lambda) {
  if (dim < 1) fail(ErrorCode::InvalidParams, "state space dimension must be >= 1");
  if (lambda != 1.0) fail(ErrorCode::InvalidParams, "only the 1-generating l1 instance is supported");
}

inline void StateSpace::check_dim(const Vector& x) const {
  require_same_dim(x.size(), dim_, "vector dimension vs state space");
  if (!x.allFinite()) fail(ErrorCode::NonFinite, "vector has non-finite entries");
}

inline double StateSpace::l1_norm(const Vector& x) const {
  check_dim(x);
  return deltap::l1_norm(x);
}

inline double StateSpace::base_functional(const Vector& x) const {
  check_dim(x);
  return deltap::base_functional(x);
}

inline BaseCheck StateSpace::is_base_element(const Vector& x, double tol) const {
  check_dim(x);
  return deltap::is_base_element(x, tol);
}

inline std::pair<Vector, Vector> StateSpace::pos_neg_parts(const Vector& x) const {
  check_dim(x);
  return deltap::pos_neg_parts(x);
}

}  // namespace deltap
