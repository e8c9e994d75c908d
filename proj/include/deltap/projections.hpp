#pragma once

// Left consistency of Markov projections (P <=l Q iff PQ = P), lazily
// materialized projection sequences and the lumping / rank-one constructors.

#include "deltap/operators.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace deltap {

bool left_consistent(const MarkovProjection& p, const MarkovProjection& q, double tol = kDefaultTol);
double left_consistency_residual(const MarkovProjection& p, const MarkovProjection& q);

// 1-based lazy sequence n -> P_n, materialized up to a declared horizon.
// Copies share the cache; reads are safe from several threads.
class ProjectionSequence {
 public:
  using Rule = std::function<MarkovProjection(Index)>;

  ProjectionSequence(Rule rule, Index horizon, std::optional<MarkovProjection> limit = std::nullopt);

  static ProjectionSequence constant(const MarkovProjection& p, Index horizon);
  // P_n = list[n-1]; past the end the last entry repeats.
  static ProjectionSequence from_list(std::vector<MarkovProjection> list, Index horizon = 0);

  const MarkovProjection& at(Index n) const;  // HorizonExceeded outside [1, horizon]
  Index horizon() const noexcept;
  Index dim() const;
  const std::optional<MarkovProjection>& declared_limit() const noexcept;
  // Built from an explicit finite list: the tail past it is unknown.
  bool is_finite_list() const noexcept;

  ProjectionSequence with_horizon(Index horizon) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct LeftDecreasingCheck {
  bool ok = true;
  std::optional<Index> first_violation;  // n with P_{n+1} not <=l P_n
  double worst_residual = 0.0;
  struct Spot {
    Index m;
    Index k;
    double residual;
  };
  std::vector<Spot> spot_checks;  // non-consecutive m > k
};

LeftDecreasingCheck is_left_decreasing(const ProjectionSequence& seq, Index upto,
                                       double tol = kDefaultTol, std::uint64_t seed = 0);

struct LimitResult {
  MarkovProjection projection;
  double residual = 0.0;  // max |P_{n+1} - P_n| over the window
  Index horizon = 0;
  double consistency_residual = 0.0;  // max_k |P P_k - P|
};

// Cauchy test on the last `window` consecutive differences.
LimitResult limit_projection(const ProjectionSequence& seq, double tol = kDefaultTol,
                             Index window = 5);

// T_z: every column equal to z.
MarkovProjection one_dim_projection(const Vector& z, double tol = kDefaultTol);

// Lumping projection; 0-based indices. Column j is the rep of j's block.
MarkovProjection block_projection(const std::vector<std::vector<Index>>& blocks,
                                  const std::vector<Vector>& reps, double tol = kDefaultTol);

}  // namespace deltap
