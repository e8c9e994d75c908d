#pragma once

// Q-products Q_{m+n} ... Q_{m+1} with Q_j = T_j - P_j, the product
// perturbation bound for two chains, and ergodicity-transfer experiments.

#include "deltap/ndmc.hpp"
#include "deltap/theorems.hpp"

#include <optional>
#include <string>
#include <vector>

namespace deltap {

struct QProduct {
  Matrix product;
  double norm = 0.0;
  // |product - (T^{m,m+n} - T^{m+1,m+n} P_{m+1})|
  double eq1_residual = 0.0;
};

// Throws HypothesisNotMet unless T_j P_j = P_j, P_j T_j = T_j P_j for
// j = m+1..m+n and the sequence is left decreasing on that range.
QProduct q_product(const Ndmc& chain, const ProjectionSequence& seq, Index m, Index n,
                   double tol = kDefaultTol);

struct PerturbationReport {
  Index m = 0;
  Index n = 0;
  std::vector<double> r;             // r_i = |T_i - S_i|, i = m+1..n
  std::vector<double> partial_sums;  // running sums of r_i
  double r_norm = 0.0;               // |T^{m,n} - S^{m,n}|
  double bound = 0.0;                // prod (1 + r_i) - 1
  double slack = 0.0;                // bound - r_norm
  bool holds = true;
};

PerturbationReport perturbation_bound(const Ndmc& chain_t, const Ndmc& chain_s, Index m, Index n);

// Finite-data summability of sum r_n: the partial sums increase by less than
// tol over the last quarter, or a log-log fit of r_n over the last three
// quarters decays faster than n^-1.5, or the tail is already below tol. The
// margin over n^-1 absorbs the scatter of randomly drawn generators.
struct SummabilityProxy {
  bool summable = false;
  double last_quarter_increase = 0.0;
  double tail_log_log_slope = 0.0;
  std::string rule;  // which clause decided
};

SummabilityProxy summability_proxy(const std::vector<double>& r, double tol);

struct TransferReport {
  std::vector<HypothesisCheck> hypotheses;
  PerturbationReport perturbation;
  SummabilityProxy summability;
  std::optional<MarkovProjection> limit;
  DecayReport uniform_t;
  DecayReport uniform_s;
  DecayReport weak_t;
  DecayReport weak_s;
  bool uniform_agree = false;
  bool weak_agree = false;

  bool hypotheses_passed() const;
  bool verified() const { return hypotheses_passed() && uniform_agree && weak_agree; }
};

// chain_t lives on seq; chain_s lives on seq_s when given (the two-sequence
// form, which adds |P_n - Pbar_n| -> 0 as a hypothesis), otherwise on seq.
TransferReport transfer_experiment(const Ndmc& chain_t, const Ndmc& chain_s,
                                   const ProjectionSequence& seq, Index m, Index horizon,
                                   const std::optional<ProjectionSequence>& seq_s = std::nullopt,
                                   double tol = kProbeTol);

}  // namespace deltap
