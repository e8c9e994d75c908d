#pragma once

// Non-homogeneous discrete Markov chains: a generating sequence T_1, T_2, ...
// and its windows T^{k,n} = T_n T_{n-1} ... T_{k+1}, with T^{k,k} = I.

#include "deltap/operators.hpp"
#include "deltap/projections.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace deltap {

// 1-based lazy rule n -> T_n. Copies share the cache.
class GeneratingSequence {
 public:
  using Rule = std::function<MarkovOperator(Index)>;

  GeneratingSequence(Rule rule, Index horizon);

  static GeneratingSequence constant(const MarkovOperator& t, Index horizon);
  // T_n = list[n-1]; past the end the last entry repeats (or the list cycles).
  static GeneratingSequence from_list(std::vector<MarkovOperator> list, Index horizon = 0,
                                      bool cycle = false);

  const MarkovOperator& at(Index n) const;  // HorizonExceeded outside [1, horizon]
  Index horizon() const noexcept;
  Index dim() const;

  GeneratingSequence with_horizon(Index horizon) const;

  // New sequence n -> f(n, T_n), revalidated.
  GeneratingSequence map(std::function<Matrix(Index, const Matrix&)> f) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

inline constexpr std::size_t kDefaultWindowCache = 256;

class Ndmc {
 public:
  explicit Ndmc(GeneratingSequence gen, std::size_t cache_capacity = kDefaultWindowCache);

  const GeneratingSequence& generators() const noexcept { return gen_; }
  Index horizon() const noexcept { return gen_.horizon(); }
  Index dim() const { return gen_.dim(); }

  // T^{k,n}; extends the longest cached window (k, n') with n' <= n.
  Matrix window(Index k, Index n) const;

  std::size_t cached_windows() const;

 private:
  struct Cache;
  GeneratingSequence gen_;
  std::shared_ptr<Cache> cache_;
};

inline Matrix compose_window(const Ndmc& chain, Index k, Index n) { return chain.window(k, n); }

// |T^{m,n} - T^{k,n} T^{m,k}| for m <= k <= n.
double cocycle_residual(const Ndmc& chain, Index m, Index k, Index n);

enum class DecayKind { OpnormToP, DeltaP, DeltaPSequence };
enum class DecayClass { ConvergedBelowTol, DecayingUnclassified, Stalled };

std::string_view to_string(DecayKind kind);
std::string_view to_string(DecayClass cls);

inline constexpr double kProbeTol = 1e-8;

struct DecayReport {
  DecayKind kind = DecayKind::OpnormToP;
  Index m = 0;
  Index horizon = 0;
  double tol = kProbeTol;
  std::vector<std::pair<Index, double>> rows;  // (n, value), n = m+1..horizon
  DecayClass classification = DecayClass::Stalled;
  std::optional<double> fitted_rate;  // exp of the log-linear slope on the tail
  std::optional<Index> first_below_tol;

  bool converged() const noexcept { return classification == DecayClass::ConvergedBelowTol; }
  double last() const { return rows.empty() ? 0.0 : rows.back().second; }
};

// Fills classification, fitted_rate and first_below_tol from the rows.
void classify(DecayReport& report);

// rows (n, |T^{m,n} - P|).
DecayReport uniform_probe(const Ndmc& chain, const MarkovProjection& p, Index m, Index horizon,
                          double tol = kProbeTol);
// rows (n, delta_P(T^{m,n})).
DecayReport weak_probe(const Ndmc& chain, const MarkovProjection& p, Index m, Index horizon,
                       double tol = kProbeTol);
// rows (n, delta_{P_{m+1}}(T^{m,n})).
DecayReport weak_wrt_sequence_probe(const Ndmc& chain, const ProjectionSequence& seq, Index m,
                                    Index horizon, double tol = kProbeTol);

}  // namespace deltap
