#pragma once

// Doeblin-type condition relative to a Markov projection P: for base pairs
// (x, y) with P x = P y, the window images dominate lambda_k z after adding a
// common positive correction phi.

#include "deltap/ndmc.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace deltap {

struct CriterionEntry {
  Index k = 0;
  Index n_k = 0;
  double mu = 0.0;  // delta_P(T^{k, k+n_k})
};

struct CriterionReport {
  std::vector<CriterionEntry> entries;
  std::vector<double> partial_sums;  // running sums of 1 - mu_k
  double growth_exponent = 0.0;      // log-log slope of the partial sums, second half
  bool diverging = false;            // evidence only
  bool generators_commute = false;
  std::optional<DecayReport> weak;   // run when every T_n commutes with P
};

// Divergence evidence: partial sums strictly increasing over the schedule and
// growing at least like j^0.1.
CriterionReport check_criterion_iii(const Ndmc& chain, const MarkovProjection& p,
                                    const std::vector<std::pair<Index, Index>>& schedule,
                                    Index horizon, double tol = kProbeTol);

// Evaluation of the domination inequalities for one pair. The anchor z is
// W y0 when P(u - y0) = 0, otherwise W(Pu), which always shares P-class
// with u and v.
struct PairDomination {
  Vector z;
  Vector phi;
  double phi_norm = 0.0;
  double residual = 0.0;  // min entry of W u + phi - lambda z and W v + phi - lambda z
  bool anchored = true;   // z came from y0
};

PairDomination evaluate_dc(const Matrix& window, const MarkovProjection& p, const Vector& u,
                           const Vector& v, const Vector& y0, double lambda = 1.0,
                           double tol = kDefaultTol);

struct DoeblinWitness {
  Index k = 0;
  Index n_k = 0;
  double lambda = 1.0;
  double delta = 0.0;        // delta_P(T^{k, k+n_k})
  Vector z;                  // anchor of the worst pair
  Vector phi;                // correction of the worst pair
  double phi_norm = 0.0;     // max over tested pairs
  double phi_bound = 0.5;    // lambda / 2
  double residual = 0.0;     // worst over tested pairs
  Index pairs_tested = 0;
  bool anchored = true;      // every pair used the y0 anchor
};

// Smallest window with delta_P < threshold, then every vertex pair of
// {(u, v) in K x K : Pu = Pv} is checked. NoWindowFound / WitnessInvalid.
DoeblinWitness build_witness(const Ndmc& chain, const MarkovProjection& p, Index k,
                             const Vector& y0, Index horizon, double threshold = 0.25,
                             double tol = kDefaultTol);

inline double witness_to_mu(const DoeblinWitness& w) { return 1.0 - w.lambda / 2.0; }
inline double witness_to_mu(double lambda) { return 1.0 - lambda / 2.0; }

}  // namespace deltap
