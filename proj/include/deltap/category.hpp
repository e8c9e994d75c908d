#pragma once

// The chain metric d(T, S) = sum_n |T_n - S_n| / 2^n, the coefficient map
// Phi_{m,n}(T) = delta_{P_{m+1}}(T^{m,n}) and the two densification
// constructions.

#include "deltap/ndmc.hpp"

namespace deltap {

inline constexpr Index kDefaultTruncation = 40;

struct ChainMetricValue {
  double value = 0.0;       // partial sum up to N
  Index N = 0;
  double tail_bound = 0.0;  // 2^{1-N}
};

// HorizonExceeded when either chain stops before N.
ChainMetricValue chain_metric(const Ndmc& t, const Ndmc& s, Index N = kDefaultTruncation);

double phi(const Ndmc& chain, const ProjectionSequence& seq, Index m, Index n);

struct LipschitzReport {
  double phi_t = 0.0;
  double phi_s = 0.0;
  double diff = 0.0;        // |phi_t - phi_s|
  double sum_r = 0.0;       // sum_{k=m+1}^n |T_k - S_k|
  double metric_bound = 0.0;  // 2^n (d + tail) + 1e-9
  bool holds_metric = false;
  bool holds_sum = false;
  bool holds() const noexcept { return holds_metric && holds_sum; }
};

LipschitzReport phi_lipschitz_check(const Ndmc& t, const Ndmc& s, const ProjectionSequence& seq,
                                    Index m, Index n, Index N = kDefaultTruncation);

// S_n = (eps/2) P_n + (1 - eps/2) T_n. HypothesisNotMet unless T_n commutes
// with P_n and fixes it up to the chain horizon.
Ndmc densify(const Ndmc& chain, const ProjectionSequence& seq, double eps, double tol = kDefaultTol);

// S_n = (eps/2) P + (1 - eps/2) T_n.
Ndmc densify_uniform(const Ndmc& chain, const MarkovProjection& p, double eps,
                     double tol = kDefaultTol);

}  // namespace deltap
