#include "deltap/projections.hpp"

#include "deltap/statespace.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace deltap {

double left_consistency_residual(const MarkovProjection& p, const MarkovProjection& q) {
  require_same_dim(p.dim(), q.dim(), "left consistency");
  return op_norm(p.matrix() * q.matrix() - p.matrix());
}

bool left_consistent(const MarkovProjection& p, const MarkovProjection& q, double tol) {
  return left_consistency_residual(p, q) <= tol;
}

struct ProjectionSequence::Impl {
  Rule rule;
  Index horizon;
  std::optional<MarkovProjection> limit;
  bool finite_list = false;
  mutable std::mutex mutex;
  mutable std::map<Index, MarkovProjection> cache;
};

ProjectionSequence::ProjectionSequence(Rule rule, Index horizon,
                                       std::optional<MarkovProjection> limit)
    : impl_(std::make_shared<Impl>()) {
  if (horizon < 1) fail(ErrorCode::InvalidParams, "projection sequence horizon must be >= 1");
  impl_->rule = std::move(rule);
  impl_->horizon = horizon;
  impl_->limit = std::move(limit);
}

ProjectionSequence ProjectionSequence::constant(const MarkovProjection& p, Index horizon) {
  return ProjectionSequence([p](Index) { return p; }, horizon, p);
}

ProjectionSequence ProjectionSequence::from_list(std::vector<MarkovProjection> list, Index horizon) {
  if (list.empty()) fail(ErrorCode::InvalidParams, "projection list is empty");
  for (const auto& p : list) require_same_dim(p.dim(), list.front().dim(), "projection list");
  const Index size = static_cast<Index>(list.size());
  if (horizon <= 0) horizon = size;
  auto shared = std::make_shared<std::vector<MarkovProjection>>(std::move(list));
  std::optional<MarkovProjection> limit;
  if (horizon > size) limit = shared->back();
  ProjectionSequence seq(
      [shared, size](Index n) { return (*shared)[static_cast<std::size_t>(std::min(n, size) - 1)]; },
      horizon, limit);
  seq.impl_->finite_list = true;
  return seq;
}

const MarkovProjection& ProjectionSequence::at(Index n) const {
  if (n < 1 || n > impl_->horizon) {
    fail(ErrorCode::HorizonExceeded, "P_" + std::to_string(n) + " outside [1, " +
                                         std::to_string(impl_->horizon) + "]");
  }
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto it = impl_->cache.find(n);
  if (it == impl_->cache.end()) it = impl_->cache.emplace(n, impl_->rule(n)).first;
  return it->second;
}

Index ProjectionSequence::horizon() const noexcept { return impl_->horizon; }

bool ProjectionSequence::is_finite_list() const noexcept { return impl_->finite_list; }

Index ProjectionSequence::dim() const { return at(1).dim(); }

const std::optional<MarkovProjection>& ProjectionSequence::declared_limit() const noexcept {
  return impl_->limit;
}

ProjectionSequence ProjectionSequence::with_horizon(Index horizon) const {
  ProjectionSequence seq(impl_->rule, horizon, impl_->limit);
  seq.impl_->finite_list = impl_->finite_list;
  return seq;
}

LeftDecreasingCheck is_left_decreasing(const ProjectionSequence& seq, Index upto, double tol,
                                       std::uint64_t seed) {
  if (upto > seq.horizon()) {
    fail(ErrorCode::HorizonExceeded, "upto " + std::to_string(upto) + " beyond horizon " +
                                         std::to_string(seq.horizon()));
  }
  LeftDecreasingCheck check;
  for (Index n = 1; n < upto; ++n) {
    const double r = left_consistency_residual(seq.at(n + 1), seq.at(n));
    check.worst_residual = std::max(check.worst_residual, r);
    if (r > tol && !check.first_violation) {
      check.ok = false;
      check.first_violation = n;
    }
  }
  if (upto >= 3) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(1, upto);
    for (int s = 0; s < 3; ++s) {
      Index a = pick(rng);
      Index b = pick(rng);
      if (a == b) continue;
      if (a < b) std::swap(a, b);
      const double r = left_consistency_residual(seq.at(a), seq.at(b));
      check.spot_checks.push_back({a, b, r});
      if (check.ok && r > tol) check.ok = false;
    }
  }
  return check;
}

LimitResult limit_projection(const ProjectionSequence& seq, double tol, Index window) {
  const Index horizon = seq.horizon();
  if (window < 1) fail(ErrorCode::InvalidParams, "Cauchy window must be >= 1");
  double residual = 0.0;
  const Index first = std::max<Index>(1, horizon - window);
  for (Index n = first; n < horizon; ++n) {
    residual = std::max(residual, op_norm(seq.at(n + 1).matrix() - seq.at(n).matrix()));
  }
  if (residual > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Cauchy residual " << residual << " over the last " << window << " terms up to n = "
        << horizon;
    fail(ErrorCode::NoConvergence, msg.str());
  }
  const MarkovProjection& last = seq.at(horizon);
  LimitResult out{MarkovProjection::validate(last.matrix()), residual, horizon, 0.0};
  if (last.block_structure()) out.projection = out.projection.with_block_structure(*last.block_structure());
  for (Index k = 1; k <= horizon; ++k) {
    out.consistency_residual =
        std::max(out.consistency_residual, left_consistency_residual(out.projection, seq.at(k)));
  }
  return out;
}

MarkovProjection one_dim_projection(const Vector& z, double tol) {
  if (z.size() < 1) fail(ErrorCode::InvalidParams, "empty vector");
  if (!z.allFinite()) fail(ErrorCode::NonFinite, "z has non-finite entries");
  const BaseCheck check = is_base_element(z, tol);
  if (!check.ok) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "z is not in K: sum deviation " << check.sum_deviation << ", "
        << check.negative_coordinates.size() << " negative coordinates";
    fail(ErrorCode::NotBaseElement, msg.str());
  }
  const Index n = z.size();
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) m.col(j) = z;
  BlockStructure blocks;
  blocks.blocks.emplace_back(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) blocks.blocks[0][static_cast<std::size_t>(i)] = i;
  blocks.reps.push_back(z);
  return MarkovProjection::validate(m, tol).with_block_structure(std::move(blocks));
}

MarkovProjection block_projection(const std::vector<std::vector<Index>>& blocks,
                                  const std::vector<Vector>& reps, double tol) {
  if (blocks.empty()) fail(ErrorCode::InvalidPartition, "no blocks");
  if (reps.size() != blocks.size()) {
    fail(ErrorCode::InvalidPartition, std::to_string(blocks.size()) + " blocks but " +
                                          std::to_string(reps.size()) + " representatives");
  }
  Index n = 0;
  for (const auto& b : blocks) {
    if (b.empty()) fail(ErrorCode::InvalidPartition, "empty block");
    n += static_cast<Index>(b.size());
  }
  std::vector<Index> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (Index i : blocks[bi]) {
      if (i < 0 || i >= n) {
        fail(ErrorCode::InvalidPartition, "state " + std::to_string(i) + " outside [0, " +
                                              std::to_string(n - 1) + "]");
      }
      if (owner[static_cast<std::size_t>(i)] != -1) {
        fail(ErrorCode::InvalidPartition, "state " + std::to_string(i) + " in two blocks");
      }
      owner[static_cast<std::size_t>(i)] = static_cast<Index>(bi);
    }
  }
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Vector& rep = reps[bi];
    require_same_dim(rep.size(), n, "representative of block " + std::to_string(bi));
    if (!is_base_element(rep, tol).ok) {
      fail(ErrorCode::NotBaseElement, "representative of block " + std::to_string(bi) + " is not in K");
    }
    for (Index i = 0; i < n; ++i) {
      if (owner[static_cast<std::size_t>(i)] != static_cast<Index>(bi) && std::abs(rep(i)) > tol) {
        fail(ErrorCode::RepOutsideBlock, "representative of block " + std::to_string(bi) +
                                             " has mass at state " + std::to_string(i));
      }
    }
    for (Index j : blocks[bi]) m.col(j) = rep;
  }
  return MarkovProjection::validate(m, tol).with_block_structure(BlockStructure{blocks, reps});
}

}  // namespace deltap
