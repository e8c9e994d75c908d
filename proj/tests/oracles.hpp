#pragma once

// Independent reference computations for delta_P, written against the
// definition and sharing no code with the library's polytope methods.

#include "support.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>

namespace oracles {

using deltap::Index;
using deltap::Matrix;
using deltap::Vector;

inline double l1(const Vector& x) { return x.cwiseAbs().sum(); }

// Active-set enumeration. With B a basis of ker P (k columns), every vertex
// of {x in ker P : |x|_1 <= 1} has at least k - 1 zero coordinates, and
// fixing k - 1 of them leaves a one-dimensional solution line.
inline double delta_active_set(const Matrix& t, const Matrix& p) {
  Eigen::FullPivLU<Matrix> lu(p);
  lu.setThreshold(1e-10);
  const Matrix b = lu.kernel();
  const Index n = p.rows();
  const Index k = lu.dimensionOfKernel();
  if (k == 0) return 1.0;
  double best = 0.0;
  auto evaluate = [&](const Vector& c) {
    const Vector x = b * c;
    const double nx = l1(x);
    if (nx > 1e-12) best = std::max(best, l1(t * x) / nx);
  };
  if (k == 1) {
    evaluate(Vector::Ones(1));
    return best;
  }
  std::vector<Index> pick(static_cast<std::size_t>(k - 1));
  std::function<void(Index, Index)> rec = [&](Index start, Index depth) {
    if (depth == k - 1) {
      Matrix m(k - 1, k);
      for (Index r = 0; r < k - 1; ++r) m.row(r) = b.row(pick[static_cast<std::size_t>(r)]);
      Eigen::FullPivLU<Matrix> sub(m);
      sub.setThreshold(1e-10);
      if (sub.dimensionOfKernel() == 1) evaluate(sub.kernel().col(0));
      return;
    }
    for (Index i = start; i < n; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Monte Carlo lower bound: random directions in ker P.
inline double delta_ball_sample(const Matrix& t, const Matrix& p, int samples, std::mt19937_64& rng) {
  Eigen::FullPivLU<Matrix> lu(p);
  lu.setThreshold(1e-10);
  if (lu.dimensionOfKernel() == 0) return 1.0;
  const Matrix b = lu.kernel();
  std::normal_distribution<double> g(0.0, 1.0);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector c(b.cols());
    for (Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    const Vector x = b * c;
    const double nx = l1(x);
    if (nx > 1e-12) best = std::max(best, l1(t * x) / nx);
  }
  return best;
}

// Classic coefficient through the overlap form 1 - min_{i,j} sum_k min(T_ki, T_kj).
inline double delta_overlap(const Matrix& t) {
  const Index n = t.cols();
  if (n < 2) return 0.0;
  double worst = 1.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) worst = std::min(worst, t.col(i).cwiseMin(t.col(j)).sum());
  }
  return 1.0 - worst;
}

}  // namespace oracles
