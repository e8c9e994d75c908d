#pragma once

// Hypothesis checkers and finite-horizon conclusion checks for the ergodicity
// theorems. A report is "verified" only when every hypothesis passes and the
// conclusion trace converges below tol within the horizon; it is evidence,
// not a proof of an asymptotic statement.

#include "deltap/ndmc.hpp"
#include "deltap/projections.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace deltap {

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string note;
};

struct TheoremReport {
  std::string theorem;
  Index horizon = 0;
  std::vector<HypothesisCheck> hypotheses;
  std::string conclusion_metric;
  std::vector<std::pair<Index, double>> conclusion_trace;
  bool conclusion_passed = false;
  std::map<std::string, double> metrics;  // parameters used and derived quantities
  std::vector<std::string> warnings;

  bool hypotheses_passed() const;
  bool verified() const { return hypotheses_passed() && conclusion_passed; }
  std::vector<std::string> failed_hypotheses() const;
  // HypothesisNotMet listing the failed checks.
  void throw_if_hypothesis_failed() const;
};

using IndexRule = std::function<Index(Index)>;
using ScalarRule = std::function<double(Index)>;

// Weak P-ergodicity plus (i) T_n P_n = P_n T_n = P_n, (ii) left decrease and
// (iii) vanishing tail sums of |P_{n+1} - P_n| give uniform P-ergodicity.
TheoremReport check_thm_4_1(const Ndmc& chain, const ProjectionSequence& seq, Index m,
                            Index horizon, double tol = kProbeTol);

// Bounded sums S(n) = sum_{l<n} delta_P(T^{l,n}) give uniform P-ergodicity.
TheoremReport check_thm_4_2(const Ndmc& chain, const ProjectionSequence& seq,
                            const MarkovProjection& p, Index horizon, double tol = kProbeTol,
                            std::uint64_t seed = 0);

// Uniform P-ergodicity plus delta_{P_n}(T_n^{k_n}) <= gamma_n with
// sup k_n / (1 - gamma_n) finite give P_n -> P.
TheoremReport check_thm_4_3(const Ndmc& chain, const ProjectionSequence& seq,
                            const MarkovProjection& p, const IndexRule& k_n,
                            const ScalarRule& gamma_n, Index horizon, double tol = kProbeTol);

// T_n in Sigma_P with |T_n - P| < eps_n -> 0 gives uniform P-ergodicity.
TheoremReport check_thm_5_2(const Ndmc& chain, const MarkovProjection& p, const ScalarRule& eps_n,
                            Index horizon, double tol = kProbeTol);

// Finite-data reading of "eps_n -> 0": non-increasing, and either the last
// value is below tol or the log-log slope over the second half is <= -0.5.
bool vanishing_proxy(const std::vector<double>& values, double tol, double* slope = nullptr);

}  // namespace deltap
