#pragma once

// Classical and generalized Dobrushin coefficients.
//
//   delta_P(T) = sup { |Tx| / |x| : x != 0, Px = 0 },   delta_I(T) = 1.
//
// Exact values come from two independent vertex enumerations: the vertices of
// {x : Px = 0, |x| <= 1} (kernel-vertex) and the vertices of
// {(u, v) in K x K : P(u - v) = 0} (pair-vertex). Both maximize a convex
// function over a polytope, so the sup sits on a vertex.

#include "deltap/operators.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deltap {

// Exact methods enumerate O(2^n) supports.
inline constexpr Index kExactDimensionLimit = 14;

// Cap on candidate bases examined by the pair-vertex method.
inline constexpr long long kPairBasisLimit = 1'000'000;

enum class CoefficientMethod {
  ClassicFormula,
  KernelVertex,
  PairVertex,
  SamplingLowerBound,
  BlockClosedForm,
};

std::string_view to_string(CoefficientMethod method);

struct PairCertificate {
  Vector u;
  Vector v;
};

// monostate: the P = I convention, no witness.
using Certificate = std::variant<std::monostate, Vector, PairCertificate>;

struct CoefficientValue {
  double value = 0.0;
  CoefficientMethod method = CoefficientMethod::KernelVertex;
  Certificate certificate;
  bool bound_only = false;  // lower bound rather than exact value
};

// Re-evaluates the certificate through the definition: |Tx|/|x| for a kernel
// vector, |T(u - v)|/2 for a pair, 1 for the identity convention.
double replay_certificate(const Matrix& t, const CoefficientValue& value);

// delta(T) = 1/2 max_{i<j} |T(e_i - e_j)|.
CoefficientValue delta_classic(const Matrix& t);

// Normalized vertices of {x : Px = 0, |x|_1 <= 1}, one per antipodal pair,
// in lexicographic order of their supports. Depends on P only.
struct KernelPolytope {
  Index dim = 0;
  bool identity = false;
  std::vector<Vector> vertices;
  std::vector<std::vector<Index>> supports;
};

KernelPolytope kernel_polytope(const MarkovProjection& p);

CoefficientValue delta_p_exact(const Matrix& t, const MarkovProjection& p);
CoefficientValue delta_p_exact(const Matrix& t, const KernelPolytope& polytope);

// Vertices of {(u, v) in K x K : P(u - v) = 0}.
struct PairPolytope {
  Index dim = 0;
  bool identity = false;
  std::vector<PairCertificate> vertices;
};

PairPolytope pair_polytope(const MarkovProjection& p);

CoefficientValue delta_p_pair(const Matrix& t, const MarkovProjection& p);
CoefficientValue delta_p_pair(const Matrix& t, const PairPolytope& polytope);

// 1/2 max over same-block elementary pairs. Exact for lumping projections
// (their kernel is {block sums zero}), still cross-checked in the tests.
CoefficientValue delta_p_block(const Matrix& t, const std::vector<std::vector<Index>>& blocks,
                               const std::vector<Vector>& reps);
// Uses the block structure attached to P; InvalidParams if there is none.
CoefficientValue delta_p_block(const Matrix& t, const MarkovProjection& p);

// Random kernel combinations followed by hill climbing. Lower bound.
CoefficientValue delta_p_sample(const Matrix& t, const MarkovProjection& p, int samples,
                                std::uint64_t seed);

// x = alpha (u - v) with u, v in K, P u = P v and alpha = |x|/2.
struct PairDecomposition {
  double alpha = 0.0;
  Vector u;
  Vector v;
};

PairDecomposition pair_decomposition(const Vector& x, const MarkovProjection& p,
                                     double tol = 1e-8);

// Coefficient laws. A law whose commutation hypothesis fails is reported as
// not applicable rather than failed.
struct LawCheck {
  std::string law;
  bool applicable = true;
  bool holds = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  std::string note;
};

struct LawReport {
  std::vector<LawCheck> laws;

  bool all_hold() const;
  const LawCheck* find(std::string_view law) const;
};

// P <=l Q, checked inside the law report before use.
struct ProjectionPair {
  MarkovProjection p;
  MarkovProjection q;
};

LawReport check_coefficient_laws(const MarkovOperator& t, const MarkovOperator& s,
                                 const Matrix& h, const MarkovProjection& p,
                                 double tol = kDefaultTol,
                                 const std::vector<ProjectionPair>& pairs = {});

}  // namespace deltap
