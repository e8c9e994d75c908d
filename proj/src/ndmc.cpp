#include "deltap/ndmc.hpp"

#include "deltap/dobrushin.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace deltap {

struct GeneratingSequence::Impl {
  Rule rule;
  Index horizon;
  mutable std::mutex mutex;
  mutable std::map<Index, MarkovOperator> cache;
};

GeneratingSequence::GeneratingSequence(Rule rule, Index horizon) : impl_(std::make_shared<Impl>()) {
  if (horizon < 1) fail(ErrorCode::InvalidParams, "generating sequence horizon must be >= 1");
  impl_->rule = std::move(rule);
  impl_->horizon = horizon;
}

GeneratingSequence GeneratingSequence::constant(const MarkovOperator& t, Index horizon) {
  return GeneratingSequence([t](Index) { return t; }, horizon);
}

GeneratingSequence GeneratingSequence::from_list(std::vector<MarkovOperator> list, Index horizon,
                                                 bool cycle) {
  if (list.empty()) fail(ErrorCode::InvalidParams, "generator list is empty");
  for (const auto& t : list) require_same_dim(t.dim(), list.front().dim(), "generator list");
  const Index size = static_cast<Index>(list.size());
  if (horizon <= 0) horizon = size;
  auto shared = std::make_shared<std::vector<MarkovOperator>>(std::move(list));
  return GeneratingSequence(
      [shared, size, cycle](Index n) {
        const Index i = cycle ? (n - 1) % size : std::min(n, size) - 1;
        return (*shared)[static_cast<std::size_t>(i)];
      },
      horizon);
}

const MarkovOperator& GeneratingSequence::at(Index n) const {
  if (n < 1 || n > impl_->horizon) {
    fail(ErrorCode::HorizonExceeded, "T_" + std::to_string(n) + " outside [1, " +
                                         std::to_string(impl_->horizon) + "]");
  }
  std::lock_guard<std::mutex> lock(impl_->mutex);
  auto it = impl_->cache.find(n);
  if (it == impl_->cache.end()) it = impl_->cache.emplace(n, impl_->rule(n)).first;
  return it->second;
}

Index GeneratingSequence::horizon() const noexcept { return impl_->horizon; }

Index GeneratingSequence::dim() const { return at(1).dim(); }

GeneratingSequence GeneratingSequence::with_horizon(Index horizon) const {
  return GeneratingSequence(impl_->rule, horizon);
}

GeneratingSequence GeneratingSequence::map(std::function<Matrix(Index, const Matrix&)> f) const {
  GeneratingSequence base = *this;
  return GeneratingSequence(
      [base, f = std::move(f)](Index n) { return MarkovOperator::validate(f(n, base.at(n).matrix())); },
      impl_->horizon);
}

struct Ndmc::Cache {
  struct Entry {
    Matrix value;
    std::uint64_t stamp;
  };
  std::size_t capacity;
  std::uint64_t clock = 0;
  std::map<std::pair<Index, Index>, Entry> entries;
  mutable std::mutex mutex;

  void put(Index k, Index n, const Matrix& m) {
    if (capacity == 0) return;
    if (entries.size() >= capacity && entries.find({k, n}) == entries.end()) {
      auto oldest = std::min_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.second.stamp < b.second.stamp;
      });
      entries.erase(oldest);
    }
    entries[{k, n}] = Entry{m, ++clock};
  }
};

Ndmc::Ndmc(GeneratingSequence gen, std::size_t cache_capacity)
    : gen_(std::move(gen)), cache_(std::make_shared<Cache>()) {
  cache_->capacity = cache_capacity;
}

Matrix Ndmc::window(Index k, Index n) const {
  if (k < 0 || n < k) {
    fail(ErrorCode::InvalidParams, "window (" + std::to_string(k) + "," + std::to_string(n) +
                                       ") needs 0 <= k <= n");
  }
  if (n > gen_.horizon()) {
    fail(ErrorCode::HorizonExceeded, "window end " + std::to_string(n) + " beyond horizon " +
                                         std::to_string(gen_.horizon()));
  }
  const Index d = gen_.dim();
  if (k == n) return Matrix::Identity(d, d);

  Matrix product;
  Index start = k;
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->entries.upper_bound({k, n});
    if (it != cache_->entries.begin()) {
      --it;
      if (it->first.first == k && it->first.second <= n) {
        it->second.stamp = ++cache_->clock;
        product = it->second.value;
        start = it->first.second;
      }
    }
  }
  if (start == n) return product;
  if (start == k) {
    product = gen_.at(k + 1).matrix();
    start = k + 1;
  }
  for (Index j = start + 1; j <= n; ++j) product = gen_.at(j).matrix() * product;
  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->put(k, n, product);
  return product;
}

std::size_t Ndmc::cached_windows() const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->entries.size();
}

double cocycle_residual(const Ndmc& chain, Index m, Index k, Index n) {
  if (!(m <= k && k <= n)) fail(ErrorCode::InvalidParams, "cocycle needs m <= k <= n");
  return op_norm(chain.window(m, n) - chain.window(k, n) * chain.window(m, k));
}

std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::OpnormToP: return "opnorm-to-P";
    case DecayKind::DeltaP: return "delta_P";
    case DecayKind::DeltaPSequence: return "delta_{P_{m+1}}";
  }
  return "unknown";
}

std::string_view to_string(DecayClass cls) {
  switch (cls) {
    case DecayClass::ConvergedBelowTol: return "converged-below-tol";
    case DecayClass::DecayingUnclassified: return "decaying-unclassified";
    case DecayClass::Stalled: return "stalled";
  }
  return "unknown";
}

void classify(DecayReport& report) {
  report.first_below_tol.reset();
  report.fitted_rate.reset();
  const auto& rows = report.rows;
  if (rows.empty()) {
    report.classification = DecayClass::Stalled;
    return;
  }
  for (const auto& [n, v] : rows) {
    if (v <= report.tol) {
      report.first_below_tol = n;
      break;
    }
  }
  const std::size_t tail = std::min(rows.size(), std::max<std::size_t>(5, rows.size() / 4));
  const std::size_t begin = rows.size() - tail;

  // Least squares of log(value) against n over the positive tail values.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = begin; i < rows.size(); ++i) {
    const double v = rows[i].second;
    if (!(v > 0.0)) continue;
    const double x = static_cast<double>(rows[i].first);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) report.fitted_rate = std::exp((count * sxy - sx * sy) / denom);
  }

  if (rows.back().second <= report.tol) {
    report.classification = DecayClass::ConvergedBelowTol;
  } else if (rows.back().second < rows[begin].second * (1.0 - 1e-6)) {
    report.classification = DecayClass::DecayingUnclassified;
  } else {
    report.classification = DecayClass::Stalled;
  }
}

namespace {

DecayReport make_report(DecayKind kind, Index m, Index horizon, double tol, const Ndmc& chain) {
  if (m < 0) fail(ErrorCode::InvalidParams, "m must be >= 0");
  if (horizon > chain.horizon()) {
    fail(ErrorCode::HorizonExceeded, "probe horizon " + std::to_string(horizon) +
                                         " beyond chain horizon " + std::to_string(chain.horizon()));
  }
  if (m >= horizon) {
    fail(ErrorCode::InvalidParams, "probe needs m < horizon (m = " + std::to_string(m) +
                                       ", horizon = " + std::to_string(horizon) + ")");
  }
  DecayReport r;
  r.kind = kind;
  r.m = m;
  r.horizon = horizon;
  r.tol = tol;
  r.rows.reserve(static_cast<std::size_t>(horizon - m));
  return r;
}

DecayReport delta_rows(DecayKind kind, const Ndmc& chain, const MarkovProjection& p, Index m,
                       Index horizon, double tol) {
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  DecayReport r = make_report(kind, m, horizon, tol, chain);
  const KernelPolytope poly = kernel_polytope(p);
  for (Index n = m + 1; n <= horizon; ++n) {
    r.rows.emplace_back(n, delta_p_exact(chain.window(m, n), poly).value);
  }
  classify(r);
  return r;
}

}  // namespace

DecayReport uniform_probe(const Ndmc& chain, const MarkovProjection& p, Index m, Index horizon,
                          double tol) {
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  DecayReport r = make_report(DecayKind::OpnormToP, m, horizon, tol, chain);
  for (Index n = m + 1; n <= horizon; ++n) {
    r.rows.emplace_back(n, op_norm(chain.window(m, n) - p.matrix()));
  }
  classify(r);
  return r;
}

DecayReport weak_probe(const Ndmc& chain, const MarkovProjection& p, Index m, Index horizon,
                       double tol) {
  return delta_rows(DecayKind::DeltaP, chain, p, m, horizon, tol);
}

DecayReport weak_wrt_sequence_probe(const Ndmc& chain, const ProjectionSequence& seq, Index m,
                                    Index horizon, double tol) {
  return delta_rows(DecayKind::DeltaPSequence, chain, seq.at(m + 1), m, horizon, tol);
}

}  // namespace deltap
