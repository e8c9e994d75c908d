#include "deltap/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace deltap {

QProduct q_product(const Ndmc& chain, const ProjectionSequence& seq, Index m, Index n, double tol) {
  if (m < 0 || n < 1) fail(ErrorCode::InvalidParams, "q_product needs m >= 0 and n >= 1");
  require_same_dim(chain.dim(), seq.dim(), "chain vs projection sequence");
  std::vector<std::string> failed;
  for (Index j = m + 1; j <= m + n; ++j) {
    const Matrix& t = chain.generators().at(j).matrix();
    const Matrix& p = seq.at(j).matrix();
    const double fix = op_norm(t * p - p);
    const double comm = op_norm(p * t - t * p);
    if (fix > tol) failed.push_back("T_" + std::to_string(j) + " P_" + std::to_string(j) + " != P_" + std::to_string(j));
    if (comm > tol) failed.push_back("T_" + std::to_string(j) + " not in Sigma_{P_" + std::to_string(j) + "}");
    if (j < m + n) {
      const double lc = left_consistency_residual(seq.at(j + 1), seq.at(j));
      if (lc > tol) failed.push_back("P_" + std::to_string(j + 1) + " not <=l P_" + std::to_string(j));
    }
  }
  if (!failed.empty()) {
    std::string msg = "q_product:";
    for (const auto& f : failed) msg += " [" + f + "]";
    fail(ErrorCode::HypothesisNotMet, msg);
  }

  const Index d = chain.dim();
  QProduct out;
  out.product = Matrix::Identity(d, d);
  for (Index j = m + 1; j <= m + n; ++j) {
    out.product = (chain.generators().at(j).matrix() - seq.at(j).matrix()) * out.product;
  }
  out.norm = op_norm(out.product);
  const Matrix rhs = chain.window(m, m + n) - chain.window(m + 1, m + n) * seq.at(m + 1).matrix();
  out.eq1_residual = op_norm(out.product - rhs);
  return out;
}

PerturbationReport perturbation_bound(const Ndmc& chain_t, const Ndmc& chain_s, Index m, Index n) {
  require_same_dim(chain_t.dim(), chain_s.dim(), "chain dimensions");
  if (m < 0 || n < m) fail(ErrorCode::InvalidParams, "perturbation bound needs 0 <= m <= n");
  PerturbationReport rep;
  rep.m = m;
  rep.n = n;
  double running = 0.0;
  double product = 1.0;
  for (Index i = m + 1; i <= n; ++i) {
    const double r = op_norm(chain_t.generators().at(i).matrix() - chain_s.generators().at(i).matrix());
    rep.r.push_back(r);
    running += r;
    rep.partial_sums.push_back(running);
    product *= 1.0 + r;
  }
  rep.bound = product - 1.0;
  rep.r_norm = op_norm(chain_t.window(m, n) - chain_s.window(m, n));
  rep.slack = rep.bound - rep.r_norm;
  rep.holds = rep.slack >= -1e-9;
  return rep;
}

SummabilityProxy summability_proxy(const std::vector<double>& r, double tol) {
  SummabilityProxy out;
  if (r.empty()) {
    out.summable = true;
    out.rule = "empty";
    return out;
  }
  const std::size_t size = r.size();
  const std::size_t quarter = std::max<std::size_t>(1, size / 4);
  double inc = 0.0;
  for (std::size_t i = size - quarter; i < size; ++i) inc += r[i];
  out.last_quarter_increase = inc;

  // least-squares slope of log r_n against log n from n = size/4 on
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  double tail_max = 0.0;
  for (std::size_t i = size - quarter; i < size; ++i) tail_max = std::max(tail_max, r[i]);
  for (std::size_t i = std::min(size - 1, size / 4); i < size; ++i) {
    if (!(r[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) out.tail_log_log_slope = (count * sxy - sx * sy) / denom;
  }
  if (inc < tol) {
    out.summable = true;
    out.rule = "last-quarter increase below tol";
  } else if (tail_max <= tol) {
    out.summable = true;
    out.rule = "tail below tol";
  } else if (count >= 2 && out.tail_log_log_slope < -1.5) {
    out.summable = true;
    out.rule = "tail decays faster than n^-1.5";
  } else {
    out.rule = "no summability evidence";
  }
  return out;
}

bool TransferReport::hypotheses_passed() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(),
                     [](const HypothesisCheck& h) { return h.passed; });
}

namespace {

void fixing_hypotheses(std::vector<HypothesisCheck>& out, const std::string& name, const Ndmc& chain,
                       const ProjectionSequence& seq, Index horizon, double tol) {
  double fix = 0.0;
  double comm = 0.0;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix& t = chain.generators().at(n).matrix();
    const Matrix& p = seq.at(n).matrix();
    fix = std::max(fix, op_norm(t * p - p));
    comm = std::max(comm, op_norm(p * t - t * p));
  }
  out.push_back({name + "_n P_n = P_n", fix <= tol, fix, {}});
  out.push_back({name + "_n in Sigma_{P_n}", comm <= tol, comm, {}});
}

}  // namespace

TransferReport transfer_experiment(const Ndmc& chain_t, const Ndmc& chain_s,
                                   const ProjectionSequence& seq, Index m, Index horizon,
                                   const std::optional<ProjectionSequence>& seq_s, double tol) {
  require_same_dim(chain_t.dim(), chain_s.dim(), "chain dimensions");
  require_same_dim(chain_t.dim(), seq.dim(), "chain vs projection sequence");
  const ProjectionSequence& s_seq = seq_s ? *seq_s : seq;
  TransferReport rep;

  fixing_hypotheses(rep.hypotheses, "T", chain_t, seq, horizon, tol);
  fixing_hypotheses(rep.hypotheses, "S", chain_s, s_seq, horizon, tol);
  const LeftDecreasingCheck ld = is_left_decreasing(seq, horizon, tol);
  rep.hypotheses.push_back({"P_n left decreasing", ld.ok, ld.worst_residual, {}});
  if (seq_s) {
    const LeftDecreasingCheck lds = is_left_decreasing(*seq_s, horizon, tol);
    rep.hypotheses.push_back({"Pbar_n left decreasing", lds.ok, lds.worst_residual, {}});
    const double gap = op_norm(seq.at(horizon).matrix() - seq_s->at(horizon).matrix());
    rep.hypotheses.push_back({"|P_n - Pbar_n| -> 0", gap <= tol, gap, "value at the horizon"});
  }

  rep.perturbation = perturbation_bound(chain_t, chain_s, 0, horizon);
  rep.summability = summability_proxy(rep.perturbation.r, tol);
  rep.hypotheses.push_back({"sum |T_n - S_n| finite", rep.summability.summable,
                            rep.summability.last_quarter_increase,
                            "finite-data proxy: " + rep.summability.rule});

  MarkovProjection p = seq.at(horizon);
  try {
    const LimitResult lim = limit_projection(seq, tol);
    p = lim.projection;
    rep.hypotheses.push_back({"P_n converges", true, lim.residual, {}});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
    rep.hypotheses.push_back({"P_n converges", false, 0.0, e.what()});
  }
  rep.limit = p;

  rep.uniform_t = uniform_probe(chain_t, p, m, horizon, tol);
  rep.uniform_s = uniform_probe(chain_s, p, m, horizon, tol);
  rep.weak_t = weak_wrt_sequence_probe(chain_t, seq, m, horizon, tol);
  rep.weak_s = weak_wrt_sequence_probe(chain_s, s_seq, m, horizon, tol);
  rep.uniform_agree = rep.uniform_t.converged() == rep.uniform_s.converged();
  rep.weak_agree = rep.weak_t.converged() == rep.weak_s.converged();
  return rep;
}

}  // namespace deltap
