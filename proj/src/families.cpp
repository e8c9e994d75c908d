#include "deltap/families.hpp"

#include "deltap/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace deltap {

namespace {

std::mt19937_64 rng_for(std::uint64_t seed, Index n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n)};
  return std::mt19937_64(seq);
}

Matrix rank_one(const Vector& z) { return z * Eigen::RowVectorXd::Ones(z.size()); }

// Uniform reps on consecutive pairs; a trailing odd coordinate is a singleton.
MarkovProjection pair_block_projection(Index dim) {
  std::vector<std::vector<Index>> blocks;
  std::vector<Vector> reps;
  for (Index i = 0; i < dim; i += 2) {
    std::vector<Index> b{i};
    if (i + 1 < dim) b.push_back(i + 1);
    Vector r = Vector::Zero(dim);
    for (Index j : b) r(j) = 1.0 / static_cast<double>(b.size());
    blocks.push_back(std::move(b));
    reps.push_back(std::move(r));
  }
  return block_projection(blocks, reps);
}

const BlockStructure& structure_of(const MarkovProjection& p) {
  if (!p.block_structure()) fail(ErrorCode::InvalidParams, "projection carries no block structure");
  return *p.block_structure();
}

double product_bound(const ScalarRule& alpha, Index k, Index n) {
  double prod = 2.0;
  for (Index j = k + 1; j <= n; ++j) prod *= alpha(j);
  return prod;
}

void materialize(const Ndmc& chain) {
  for (Index n = 1; n <= chain.horizon(); ++n) (void)chain.generators().at(n);
}

void require_horizon(Index horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidParams, "horizon must be >= 1");
}

}  // namespace

Matrix random_proposal(Index dim, const std::vector<Index>& support, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix q = Matrix::Zero(dim, dim);
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = a + 1; b < support.size(); ++b) {
      const double w = unif(rng);
      q(support[a], support[b]) = w;
      q(support[b], support[a]) = w;
    }
  }
  const double col = q.size() ? q.colwise().sum().maxCoeff() : 0.0;
  if (col > 0.0) q /= 1.25 * col;
  return q;
}

Matrix metropolis_kernel(const Vector& pi, const Matrix& proposal) {
  require_square(proposal, "proposal");
  require_same_dim(pi.size(), proposal.rows(), "pi vs proposal");
  const Index n = pi.size();
  Matrix t = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double out = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i == j || proposal(i, j) == 0.0) continue;
      const double accept = pi(j) > 0.0 ? std::min(1.0, pi(i) / pi(j)) : 1.0;
      t(i, j) = proposal(i, j) * accept;
      out += t(i, j);
    }
    t(j, j) = 1.0 - out;
  }
  return t;
}

Matrix random_block_operator(const BlockStructure& s, std::mt19937_64& rng) {
  if (s.blocks.empty()) fail(ErrorCode::InvalidPartition, "empty block structure");
  const Index dim = s.reps.front().size();
  Matrix q = Matrix::Zero(dim, dim);
  Vector pi = Vector::Zero(dim);
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    q += random_proposal(dim, s.blocks[b], rng);
    pi += s.reps[b];
  }
  return metropolis_kernel(pi, q);
}

Matrix uniform_block_operator(const BlockStructure& s) {
  if (s.blocks.empty()) fail(ErrorCode::InvalidPartition, "empty block structure");
  const Index dim = s.reps.front().size();
  Matrix q = Matrix::Zero(dim, dim);
  Vector pi = Vector::Zero(dim);
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const double w = 1.0 / static_cast<double>(s.blocks[b].size());
    for (Index i : s.blocks[b]) {
      for (Index j : s.blocks[b]) {
        if (i != j) q(i, j) = w;
      }
    }
    pi += s.reps[b];
  }
  return metropolis_kernel(pi, q);
}

Vector geometric_z(Index dim, Index n) {
  if (dim < 1 || n < 1) fail(ErrorCode::InvalidParams, "geometric_z needs dim >= 1 and n >= 1");
  const Index k = std::min(n, dim - 1);
  Vector z = Vector::Zero(dim);
  for (Index i = 0; i < k; ++i) z(i) = std::ldexp(1.0, static_cast<int>(-(i + 1)));
  z(k) = std::ldexp(1.0, static_cast<int>(-k));
  return z;
}

ProjectionSequence lce1_projections(const std::function<Vector(Index)>& z_rule, Index dim,
                                    Index horizon) {
  require_horizon(horizon);
  auto make = [z_rule, dim](Index n) {
    const Vector z = z_rule(n);
    require_same_dim(z.size(), dim, "z_n");
    return one_dim_projection(z);
  };
  ProjectionSequence seq(make, horizon, make(horizon));
  for (Index n = 1; n <= horizon; ++n) (void)seq.at(n);
  return seq;
}

MarkovProjection example_5_5_projection(Index n0, Index pairs, Index n) {
  if (n0 < 1 || pairs < n0) fail(ErrorCode::InvalidParams, "need 1 <= N0 <= pairs");
  if (n < 1) fail(ErrorCode::InvalidParams, "projection index must be >= 1");
  const Index dim = 2 * pairs;
  const Index k = std::min(n, n0);
  std::vector<std::vector<Index>> blocks;
  std::vector<Vector> reps;
  std::vector<Index> merged;
  Vector rep = Vector::Zero(dim);
  for (Index i = 0; i < 2 * k; ++i) merged.push_back(i);
  for (Index i = 0; i < 2 * k; i += 2) rep(i) = 1.0 / static_cast<double>(k);
  blocks.push_back(std::move(merged));
  reps.push_back(std::move(rep));
  for (Index j = k; j < pairs; ++j) {
    blocks.push_back({2 * j, 2 * j + 1});
    reps.push_back(basis_vector(dim, 2 * j));
  }
  return block_projection(blocks, reps);
}

FamilyInstance example_5_5(Index n0, Index pairs, Index horizon) {
  require_horizon(horizon);
  const Index dim = 2 * pairs;
  const MarkovProjection limit = example_5_5_projection(n0, pairs, n0);
  ProjectionSequence seq([n0, pairs](Index n) { return example_5_5_projection(n0, pairs, n); },
                         horizon, limit);
  Matrix q1 = Matrix::Zero(dim, dim);
  for (Index j = 0; j < pairs; ++j) {
    q1(2 * j, 2 * j + 1) = -0.5;
    q1(2 * j + 1, 2 * j + 1) = 0.5;
  }
  GeneratingSequence gen(
      [seq, q1](Index n) {
        return MarkovOperator::validate(seq.at(n).matrix() + q1 / static_cast<double>(n));
      },
      horizon);
  FamilyInstance inst("example_5_5", Ndmc(gen));
  materialize(inst.chain);
  inst.params = {{"N0", n0}, {"pairs", pairs}, {"horizon", horizon}};
  inst.seq = seq;
  inst.limit = limit;
  const double c = static_cast<double>(2 * n0 + 2);
  inst.eps = [c](Index n) { return c / static_cast<double>(n); };
  inst.notes.push_back("|T_n - P| = 1/n for n > N0 and at most 2 + 1/n before");

  // Homogeneous T_3 measured against P_2 and P_3.
  if (pairs >= 3 && horizon >= 3) {
    const Ndmc t3(GeneratingSequence::constant(inst.chain.generators().at(3), 30));
    std::ostringstream note;
    note << "homogeneous T_3:";
    for (Index l : {Index{2}, Index{3}}) {
      const DecayReport r = uniform_probe(t3, seq.at(l), 0, 30);
      note << " |T_3^30 - P_" << l << "| = " << r.last() << " (" << to_string(r.classification) << ")";
    }
    inst.notes.push_back(note.str());
  }
  return inst;
}

FamilyInstance mixture_chain(double a, const Vector& z0, const std::function<Matrix(Index)>& base_rule,
                             Index horizon, double tol) {
  require_horizon(horizon);
  if (!(a > 0.0 && a < 1.0)) fail(ErrorCode::InvalidParams, "mixture weight a must lie in (0, 1)");
  if (!is_base_element(z0, tol).ok) fail(ErrorCode::NotBaseElement, "z0 is not in K");
  const Index dim = z0.size();
  std::vector<Matrix> base;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix t = MarkovOperator::validate(base_rule(n)).matrix();
    require_same_dim(t.rows(), dim, "base operator");
    const double moved = l1_norm(t * z0 - z0);
    if (moved > tol) {
      std::ostringstream msg;
      msg << "base operator " << n << " moves z0 by " << moved;
      fail(ErrorCode::FixedPointViolated, msg.str());
    }
    base.push_back(t);
  }
  const Matrix tz = rank_one(z0);
  GeneratingSequence gen(
      [base, tz, a](Index n) {
        return MarkovOperator::validate(a * tz + (1.0 - a) * base[static_cast<std::size_t>(n - 1)]);
      },
      horizon);
  FamilyInstance inst("mixture", Ndmc(gen));
  materialize(inst.chain);

  // T_n T_m = (1 - (1-a)^2) T_z0 + (1-a)^2 Ttilde_n Ttilde_m
  const double b = (1.0 - a) * (1.0 - a);
  for (auto [n, m] : {std::pair<Index, Index>{1, 2}, {2, 1}, {3, 5}}) {
    if (std::max(n, m) > horizon) continue;
    const Matrix lhs = inst.chain.generators().at(n).matrix() * inst.chain.generators().at(m).matrix();
    const Matrix rhs = (1.0 - b) * tz + b * base[n - 1] * base[m - 1];
    const double r = op_norm(lhs - rhs);
    if (r > 1e-10) {
      std::ostringstream msg;
      msg << "mixture product identity off by " << r << " at (" << n << ", " << m << ")";
      fail(ErrorCode::FixedPointViolated, msg.str());
    }
  }

  const MarkovProjection p = one_dim_projection(z0, tol);
  inst.seq = ProjectionSequence::constant(p, horizon);
  inst.limit = p;
  inst.bound = [a](Index k, Index n) { return 2.0 * std::pow(1.0 - a, static_cast<double>(n - k)); };
  inst.params = {{"a", a}, {"dim", dim}, {"horizon", horizon}};
  return inst;
}

FamilyInstance mixture_family(double a, Index dim, const std::string& base, std::uint64_t seed,
                              Index horizon) {
  if (dim < 1) fail(ErrorCode::InvalidParams, "dim must be >= 1");
  Vector z0(dim);
  for (Index i = 0; i < dim; ++i) z0(i) = static_cast<double>(i + 1);
  z0 /= z0.sum();
  std::function<Matrix(Index)> rule;
  if (base == "identity") {
    rule = [dim](Index) { return Matrix::Identity(dim, dim).eval(); };
  } else if (base == "metropolis") {
    std::vector<Index> all(static_cast<std::size_t>(dim));
    std::iota(all.begin(), all.end(), Index{0});
    rule = [z0, all, seed, dim](Index n) {
      auto rng = rng_for(seed, n);
      return metropolis_kernel(z0, random_proposal(dim, all, rng));
    };
  } else {
    fail(ErrorCode::InvalidParams, "mixture base must be \"identity\" or \"metropolis\", got \"" + base + "\"");
  }
  FamilyInstance inst = mixture_chain(a, z0, rule, horizon);
  inst.params = {{"a", a}, {"dim", dim}, {"base", base}, {"seed", seed}, {"horizon", horizon}};
  return inst;
}

FamilyInstance ergodic_mixture(const ScalarRule& alpha, const MarkovProjection& p,
                               const std::function<Matrix(Index)>& base_rule, Index horizon,
                               double tol) {
  require_horizon(horizon);
  const Matrix& pm = p.matrix();
  std::vector<Matrix> base;
  std::vector<double> sums;
  double running = 0.0;
  for (Index n = 1; n <= horizon; ++n) {
    const double a = alpha(n);
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::InvalidParams, "alpha_" + std::to_string(n) + " outside [0, 1]");
    const Matrix t = MarkovOperator::validate(base_rule(n)).matrix();
    require_same_dim(t.rows(), p.dim(), "base operator");
    const double fix = op_norm(t * pm - pm);
    const double comm = op_norm(pm * t - pm);
    if (fix > tol || comm > tol) {
      std::ostringstream msg;
      msg << "base operator " << n << ": |T P - P| = " << fix << ", |P T - P| = " << comm;
      fail(ErrorCode::HypothesisNotMet, msg.str());
    }
    base.push_back(t);
    running += 1.0 - a;
    sums.push_back(running);
  }

  // divergence evidence for sum (1 - alpha_n): strictly growing partial sums
  // with log-log slope at least 0.1 over the second half
  bool increasing = sums.back() > 0.0;
  for (std::size_t i = sums.size() / 2 + 1; i < sums.size(); ++i) {
    if (!(sums[i] > sums[i - 1])) increasing = false;
  }
  double slope = 0.0;
  const std::size_t lo = sums.size() / 2;
  if (sums.size() >= 4 && sums[lo] > 0.0) {
    slope = std::log(sums.back() / sums[lo]) /
            std::log(static_cast<double>(sums.size()) / static_cast<double>(lo + 1));
  }
  if (!increasing || slope < 0.1) {
    std::ostringstream msg;
    msg << "partial sums of 1 - alpha_n show no divergence (slope " << slope << ")";
    fail(ErrorCode::HypothesisNotMet, msg.str());
  }

  GeneratingSequence gen(
      [base, pm, alpha](Index n) {
        const double a = alpha(n);
        return MarkovOperator::validate((1.0 - a) * pm + a * base[static_cast<std::size_t>(n - 1)]);
      },
      horizon);
  FamilyInstance inst("ergodic_mixture", Ndmc(gen));
  materialize(inst.chain);
  inst.seq = ProjectionSequence::constant(p, horizon);
  inst.limit = p;
  inst.bound = [alpha](Index k, Index n) { return product_bound(alpha, k, n); };
  return inst;
}

FamilyInstance r_contraction(Index dim, double r, Index horizon) {
  require_horizon(horizon);
  if (dim < 1) fail(ErrorCode::InvalidParams, "dim must be >= 1");
  if (!(r > 0.0 && r < 0.5)) fail(ErrorCode::InvalidParams, "r must lie in (0, 1/2)");
  ProjectionSequence seq(
      [dim](Index n) { return one_dim_projection(basis_vector(dim, (n - 1) % dim)); }, horizon);
  GeneratingSequence gen(
      [seq, r, dim](Index n) {
        return MarkovOperator::validate((1.0 - r) * seq.at(n).matrix() + r * Matrix::Identity(dim, dim));
      },
      horizon);
  FamilyInstance inst("r_contraction", Ndmc(gen));
  materialize(inst.chain);
  inst.seq = seq;
  inst.params = {{"dim", dim}, {"r", r}, {"horizon", horizon}};
  inst.notes.push_back("e_n cycles modulo dim");
  return inst;
}

FamilyInstance commuting_perturbation(const MarkovProjection& p, const ScalarRule& eps, Index horizon,
                                      const std::optional<Matrix>& direction) {
  require_horizon(horizon);
  const Index dim = p.dim();
  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix d = direction ? *direction : id;
  require_square(d, "direction");
  require_same_dim(d.rows(), dim, "direction");
  const Matrix q = (id - p.matrix()) * d * (id - p.matrix());
  const double qn = op_norm(q);
  std::vector<MarkovOperator> ops;
  for (Index n = 1; n <= horizon; ++n) {
    const double e = eps(n);
    if (!(e >= 0.0)) fail(ErrorCode::InvalidParams, "eps_" + std::to_string(n) + " must be >= 0");
    if (e == 0.0 || qn < 1e-14) {
      ops.push_back(p.as_operator());
      continue;
    }
    double c = e / (2.0 * qn);
    std::optional<MarkovOperator> op;
    for (int halving = 0; halving < 60 && !op; ++halving, c /= 2.0) {
      try {
        op = MarkovOperator::validate(p.matrix() + c * q);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NegativeEntry && err.code() != ErrorCode::NotStochastic) throw;
      }
    }
    if (!op) {
      fail(ErrorCode::CannotValidate,
           "direction leaves the Markov class at n = " + std::to_string(n) + " after shrinking");
    }
    ops.push_back(*op);
  }
  FamilyInstance inst("commuting_perturbation", Ndmc(GeneratingSequence::from_list(ops, horizon)));
  inst.seq = ProjectionSequence::constant(p, horizon);
  inst.limit = p;
  inst.eps = eps;
  inst.params = {{"dim", dim}, {"horizon", horizon}};
  return inst;
}

FamilyInstance nested_block_chain(Index dim, std::uint64_t seed, Index horizon) {
  require_horizon(horizon);
  if (dim < 2) fail(ErrorCode::InvalidParams, "nested block chain needs dim >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);

  std::vector<std::vector<Index>> blocks;
  for (Index i = 0; i < dim; ++i) blocks.push_back({i});
  auto merge_random = [&]() {
    std::uniform_int_distribution<std::size_t> pick(0, blocks.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    blocks[a].insert(blocks[a].end(), blocks[b].begin(), blocks[b].end());
    std::sort(blocks[a].begin(), blocks[a].end());
    blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(b));
  };
  auto make_projection = [&]() {
    std::vector<Vector> reps;
    for (const auto& b : blocks) {
      Vector r = Vector::Zero(dim);
      for (Index i : b) r(i) = unif(rng);
      reps.push_back(r / r.sum());
    }
    std::vector<std::vector<Index>> sorted = blocks;
    return block_projection(sorted, reps);
  };

  merge_random();
  std::vector<MarkovProjection> list{make_projection()};
  const Index steps = std::uniform_int_distribution<Index>(1, std::max<Index>(1, dim - 2))(rng);
  for (Index s = 0; s < steps && blocks.size() > 1 && static_cast<Index>(list.size()) < horizon; ++s) {
    merge_random();
    list.push_back(make_projection());
  }
  const MarkovProjection limit = list.back();
  ProjectionSequence seq = ProjectionSequence::from_list(list, horizon);

  GeneratingSequence gen(
      [seq, seed](Index n) {
        auto rng_n = rng_for(seed ^ 0x9e3779b97f4a7c15ULL, n);
        return MarkovOperator::validate(random_block_operator(*seq.at(n).block_structure(), rng_n));
      },
      horizon);
  FamilyInstance inst("nested_block", Ndmc(gen));
  materialize(inst.chain);
  inst.seq = seq;
  inst.limit = limit;
  inst.params = {{"dim", dim}, {"seed", seed}, {"horizon", horizon}};
  return inst;
}

FamilyInstance example_6_7(Index dim, std::uint64_t seed, double c, Index horizon) {
  if (!(c > 0.0 && c < 1.0)) fail(ErrorCode::InvalidParams, "c must lie in (0, 1)");
  FamilyInstance inst = nested_block_chain(dim, seed, horizon);
  const ProjectionSequence seq = *inst.seq;
  Ndmc s(inst.chain.generators().map([seq, c](Index n, const Matrix& t) -> Matrix {
    const double one_minus = c / static_cast<double>(n * n);
    return one_minus * seq.at(n).matrix() + (1.0 - one_minus) * t;
  }));
  materialize(s);
  inst.name = "example_6_7";
  inst.chain_s = s;
  inst.seq_s = seq;
  inst.params = {{"dim", dim}, {"seed", seed}, {"c", c}, {"horizon", horizon}};
  inst.notes.push_back("chain_s: S_n = (1 - lambda_n) P_n + lambda_n T_n, 1 - lambda_n = c / n^2");
  return inst;
}

FamilyInstance alpha_beta(Index n0, Index pairs, Index horizon) {
  require_horizon(horizon);
  const MarkovProjection p = example_5_5_projection(n0, pairs, n0);
  ProjectionSequence fine([n0, pairs](Index n) { return example_5_5_projection(n0, pairs, n); },
                          horizon, p);
  const ScalarRule alpha = [](Index n) { return 1.0 - 1.0 / (2.0 * static_cast<double>(n + 1)); };
  const ScalarRule beta = [alpha](Index n) {
    const double nn = static_cast<double>(n);
    return 1.0 - (1.0 - alpha(n)) * (1.0 + 1.0 / (nn * nn));
  };
  const Matrix pm = p.matrix();
  GeneratingSequence gen_t(
      [fine, pm, alpha](Index n) {
        const double a = alpha(n);
        return MarkovOperator::validate((1.0 - a) * pm +
                                        a * uniform_block_operator(*fine.at(n).block_structure()));
      },
      horizon);
  GeneratingSequence gen_s(
      [fine, beta](Index n) {
        const double b = beta(n);
        const MarkovProjection& pn = fine.at(n);
        return MarkovOperator::validate((1.0 - b) * pn.matrix() +
                                        b * uniform_block_operator(*pn.block_structure()));
      },
      horizon);
  FamilyInstance inst("alpha_beta", Ndmc(gen_t));
  materialize(inst.chain);
  inst.chain_s = Ndmc(gen_s);
  materialize(*inst.chain_s);
  inst.seq = ProjectionSequence::constant(p, horizon);
  inst.seq_s = fine;
  inst.limit = p;
  inst.bound = [alpha](Index k, Index n) { return product_bound(alpha, k, n); };
  inst.params = {{"N0", n0}, {"pairs", pairs}, {"horizon", horizon}};
  inst.notes.push_back("chain on P: alpha_n = 1 - 1/(2(n+1)); chain_s on Pbar_n: beta_n = 1 - (1 - alpha_n)(1 + 1/n^2)");
  return inst;
}

ScalarRule scalar_rule_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail(ErrorCode::InvalidParams, "scalar rule needs a string field \"kind\"");
  }
  auto num = [&j](const char* key, double def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number()) fail(ErrorCode::InvalidParams, std::string("scalar rule field \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  const std::string kind = j["kind"];
  if (kind == "constant") {
    const double v = num("value", 0.0);
    return [v](Index) { return v; };
  }
  if (kind == "inverse_power") {
    const double c = num("c", 1.0);
    const double p = num("p", 1.0);
    return [c, p](Index n) { return c / std::pow(static_cast<double>(n), p); };
  }
  if (kind == "geometric") {
    const double c = num("c", 1.0);
    const double q = num("q", 0.5);
    return [c, q](Index n) { return c * std::pow(q, static_cast<double>(n)); };
  }
  if (kind == "one_minus") {
    if (!j.contains("rule")) fail(ErrorCode::InvalidParams, "one_minus rule needs \"rule\"");
    ScalarRule inner = scalar_rule_from_json(j["rule"]);
    return [inner](Index n) { return 1.0 - inner(n); };
  }
  fail(ErrorCode::InvalidParams, "unknown scalar rule kind \"" + kind + "\"");
}

const std::vector<FamilyInfo>& family_list() {
  static const std::vector<FamilyInfo> list = {
      {"lce1", "rank-one projections P_n = T_{z_n}, z_n truncated geometric; chain T_n = P_n",
       {{"dim", 8}, {"horizon", 60}}},
      {"example_5_5", "merged pair blocks with T_n = P_n + Q_1 / n",
       {{"N0", 3}, {"pairs", 4}, {"horizon", 60}}},
      {"mixture", "T_n = a T_z0 + (1 - a) Ttilde_n",
       {{"a", 0.3}, {"dim", 4}, {"base", "metropolis"}, {"seed", 0}, {"horizon", 60}}},
      {"ergodic_mixture", "T_n = (1 - alpha_n) P + alpha_n Ttilde_n on a pair-block P",
       {{"dim", 4},
        {"alpha", {{"kind", "one_minus"}, {"rule", {{"kind", "inverse_power"}, {"c", 1.0}, {"p", 1.0}}}}},
        {"seed", 0},
        {"horizon", 60}}},
      {"r_contraction", "T_n = P_n + r (I - P_n), P_n = T_{e_n}",
       {{"dim", 4}, {"r", 0.25}, {"horizon", 60}}},
      {"commuting_perturbation", "T_n = P + Q_n with PQ_n = Q_n P = 0 and |Q_n| = eps_n / 2",
       {{"dim", 4}, {"eps", {{"kind", "inverse_power"}, {"c", 1.0}, {"p", 1.0}}}, {"horizon", 60}}},
      {"nested_block", "random left-decreasing block projections with block Metropolis generators",
       {{"dim", 5}, {"seed", 0}, {"horizon", 60}}},
      {"example_6_7", "nested_block chain and its perturbation S_n = (1 - lambda_n) P_n + lambda_n T_n",
       {{"dim", 5}, {"seed", 0}, {"c", 0.5}, {"horizon", 60}}},
      {"alpha_beta", "alpha-mixture on P_{N0} and beta-mixture on the example_5_5 projections",
       {{"N0", 3}, {"pairs", 4}, {"horizon", 60}}},
  };
  return list;
}

namespace {

Json merged_params(const FamilyInfo& info, const Json& params) {
  if (!params.is_null() && !params.is_object()) fail(ErrorCode::InvalidParams, "family params must be an object");
  Json out = info.defaults;
  if (params.is_object()) {
    for (auto it = params.begin(); it != params.end(); ++it) {
      if (!info.defaults.contains(it.key())) {
        fail(ErrorCode::InvalidParams, "family \"" + info.name + "\" has no parameter \"" + it.key() + "\"");
      }
      out[it.key()] = it.value();
    }
  }
  return out;
}

template <typename T>
T param(const Json& p, const char* key) {
  try {
    return p.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::InvalidParams, std::string("parameter \"") + key + "\" has the wrong type");
  }
}

}  // namespace

FamilyInstance instantiate_family(const std::string& name, const Json& params) {
  const auto& list = family_list();
  const auto it = std::find_if(list.begin(), list.end(), [&](const FamilyInfo& f) { return f.name == name; });
  if (it == list.end()) fail(ErrorCode::InvalidParams, "unknown family \"" + name + "\"");
  const Json p = merged_params(*it, params);
  const Index horizon = param<Index>(p, "horizon");

  auto finish = [&p](FamilyInstance inst) {
    inst.params = p;
    return inst;
  };

  if (name == "lce1") {
    const Index dim = param<Index>(p, "dim");
    if (dim < 1) fail(ErrorCode::InvalidParams, "dim must be >= 1");
    ProjectionSequence seq = lce1_projections([dim](Index n) { return geometric_z(dim, n); }, dim, horizon);
    GeneratingSequence gen([seq](Index n) { return seq.at(n).as_operator(); }, horizon);
    FamilyInstance inst("lce1", Ndmc(gen));
    inst.seq = seq;
    inst.limit = seq.declared_limit();
    return finish(std::move(inst));
  }
  if (name == "example_5_5") {
    return finish(example_5_5(param<Index>(p, "N0"), param<Index>(p, "pairs"), horizon));
  }
  if (name == "mixture") {
    return finish(mixture_family(param<double>(p, "a"), param<Index>(p, "dim"), param<std::string>(p, "base"),
                                 param<std::uint64_t>(p, "seed"), horizon));
  }
  if (name == "ergodic_mixture") {
    const Index dim = param<Index>(p, "dim");
    if (dim < 2) fail(ErrorCode::InvalidParams, "dim must be >= 2");
    const MarkovProjection proj = pair_block_projection(dim);
    const std::uint64_t seed = param<std::uint64_t>(p, "seed");
    auto base = [proj, seed](Index n) {
      auto rng = rng_for(seed, n);
      return random_block_operator(structure_of(proj), rng);
    };
    FamilyInstance inst = ergodic_mixture(scalar_rule_from_json(p.at("alpha")), proj, base, horizon);
    return finish(std::move(inst));
  }
  if (name == "r_contraction") {
    return finish(r_contraction(param<Index>(p, "dim"), param<double>(p, "r"), horizon));
  }
  if (name == "commuting_perturbation") {
    const Index dim = param<Index>(p, "dim");
    if (dim < 2) fail(ErrorCode::InvalidParams, "dim must be >= 2");
    return finish(commuting_perturbation(pair_block_projection(dim), scalar_rule_from_json(p.at("eps")), horizon));
  }
  if (name == "nested_block") {
    return finish(nested_block_chain(param<Index>(p, "dim"), param<std::uint64_t>(p, "seed"), horizon));
  }
  if (name == "example_6_7") {
    return finish(example_6_7(param<Index>(p, "dim"), param<std::uint64_t>(p, "seed"), param<double>(p, "c"),
                              horizon));
  }
  return finish(alpha_beta(param<Index>(p, "N0"), param<Index>(p, "pairs"), horizon));
}

}  // namespace deltap
