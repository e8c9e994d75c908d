#pragma once

// Parametric chain families. Each instance carries its chain, the projection
// data it lives on and, where one exists, a closed-form bound (k, n) -> b
// on |T^{k,n} - P|.

#include "deltap/ndmc.hpp"
#include "deltap/theorems.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace deltap {

using Json = nlohmann::json;
using BoundRule = std::function<double(Index, Index)>;

struct FamilyInstance {
  FamilyInstance(std::string name_, Ndmc chain_) : name(std::move(name_)), chain(std::move(chain_)) {}

  std::string name;
  Json params = Json::object();  // with defaults filled in
  Ndmc chain;
  std::optional<Ndmc> chain_s;   // second chain of a two-chain family
  std::optional<ProjectionSequence> seq;
  std::optional<ProjectionSequence> seq_s;
  std::optional<MarkovProjection> limit;
  BoundRule bound;               // empty when there is no closed form
  ScalarRule eps;                // |T_n - P| < eps(n), when known
  std::vector<std::string> notes;

  Index dim() const { return chain.dim(); }
};

// Random symmetric proposal on `support` with column sums below one.
Matrix random_proposal(Index dim, const std::vector<Index>& support, std::mt19937_64& rng);
// Metropolis kernel with stationary vector pi for a symmetric proposal.
// Coordinates with pi = 0 only move into the support of pi.
Matrix metropolis_kernel(const Vector& pi, const Matrix& proposal);
// Metropolis within each block, stationary at the block's rep: T P = P T = P.
Matrix random_block_operator(const BlockStructure& s, std::mt19937_64& rng);
// Same with a uniform proposal inside each block; deterministic.
Matrix uniform_block_operator(const BlockStructure& s);

// z_n = (1/2, 1/4, ..., 1/2^k, 1/2^k, 0, ...) with k = min(n, dim - 1).
Vector geometric_z(Index dim, Index n);

// P_n = T_{z_n}, limit T_{z_rule(horizon)}. NotBaseElement.
ProjectionSequence lce1_projections(const std::function<Vector(Index)>& z_rule, Index dim,
                                    Index horizon);

// Dimension 2M. P_n merges the first n pairs (n <= N0) and then stays at
// P_{N0}; Q_n = Q_1 / n moves half the mass of each even coordinate back to
// its odd partner; T_n = P_n + Q_n.
FamilyInstance example_5_5(Index n0, Index pairs, Index horizon = 60);
// The projection P_n of the family above.
MarkovProjection example_5_5_projection(Index n0, Index pairs, Index n);

// T_n = a T_{z0} + (1 - a) Ttilde_n with bound 2 (1 - a)^{n-k}.
// FixedPointViolated when some Ttilde_n moves z0.
FamilyInstance mixture_chain(double a, const Vector& z0,
                             const std::function<Matrix(Index)>& base_rule, Index horizon = 60,
                             double tol = kDefaultTol);
// base "identity" or "metropolis" (seeded random proposals).
FamilyInstance mixture_family(double a, Index dim, const std::string& base, std::uint64_t seed,
                              Index horizon = 60);

// T_n = (1 - alpha_n) P + alpha_n Ttilde_n with bound 2 prod alpha_j.
// HypothesisNotMet when some Ttilde_n does not commute with and fix P, or
// the partial sums of 1 - alpha_n show no divergence.
FamilyInstance ergodic_mixture(const ScalarRule& alpha, const MarkovProjection& p,
                               const std::function<Matrix(Index)>& base_rule, Index horizon = 60,
                               double tol = kDefaultTol);

// P_n = T_{e_n} (indices cycle modulo dim), T_n = P_n + r (I - P_n).
// InvalidParams unless 0 < r < 1/2.
FamilyInstance r_contraction(Index dim, double r, Index horizon = 60);

// T_n = P + Q_n with Q_n = c_n (I - P) D (I - P) and |Q_n| = eps_n / 2;
// c_n is halved until T_n is Markov. CannotValidate otherwise.
FamilyInstance commuting_perturbation(const MarkovProjection& p, const ScalarRule& eps,
                                      Index horizon = 60,
                                      const std::optional<Matrix>& direction = std::nullopt);

// Random left-decreasing block projections (merging blocks for a few steps,
// then constant) with random block Metropolis generators.
FamilyInstance nested_block_chain(Index dim, std::uint64_t seed, Index horizon = 60);

// T from nested_block_chain, S_n = (1 - lambda_n) P_n + lambda_n T_n with
// 1 - lambda_n = c / n^2.
FamilyInstance example_6_7(Index dim, std::uint64_t seed, double c = 0.5, Index horizon = 60);

// T_n = (1 - alpha_n) P + alpha_n Ttilde_n on P = P_{N0} of example_5_5 and
// S_n = (1 - beta_n) Pbar_n + beta_n Ttilde_n on Pbar_n = the example_5_5
// projections, with alpha_n = 1 - 1/(2(n+1)) and
// beta_n = 1 - (1 - alpha_n)(1 + 1/n^2).
FamilyInstance alpha_beta(Index n0, Index pairs, Index horizon = 60);

// JSON scalar rules n -> value:
//   {"kind": "constant", "value": c}
//   {"kind": "inverse_power", "c": c, "p": p}      c / n^p
//   {"kind": "geometric", "c": c, "q": q}          c q^n
//   {"kind": "one_minus", "rule": {...}}           1 - rule(n)
ScalarRule scalar_rule_from_json(const Json& j);

struct FamilyInfo {
  std::string name;
  std::string description;
  Json defaults;
};

const std::vector<FamilyInfo>& family_list();
// Unknown names and bad parameters raise InvalidParams.
FamilyInstance instantiate_family(const std::string& name, const Json& params);

}  // namespace deltap
