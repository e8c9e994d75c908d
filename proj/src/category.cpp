#include "deltap/category.hpp"

#include "deltap/dobrushin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace deltap {

ChainMetricValue chain_metric(const Ndmc& t, const Ndmc& s, Index N) {
  require_same_dim(t.dim(), s.dim(), "chain dimensions");
  if (N < 1) fail(ErrorCode::InvalidParams, "truncation must be >= 1");
  if (t.horizon() < N || s.horizon() < N) {
    fail(ErrorCode::HorizonExceeded, "chain metric truncation " + std::to_string(N) +
                                         " beyond chain horizons " + std::to_string(t.horizon()) +
                                         ", " + std::to_string(s.horizon()));
  }
  ChainMetricValue out;
  out.N = N;
  double weight = 1.0;
  for (Index n = 1; n <= N; ++n) {
    weight *= 0.5;
    out.value += op_norm(t.generators().at(n).matrix() - s.generators().at(n).matrix()) * weight;
  }
  out.tail_bound = std::ldexp(1.0, static_cast<int>(1 - N));
  return out;
}

double phi(const Ndmc& chain, const ProjectionSequence& seq, Index m, Index n) {
  if (m < 0 || n < m) fail(ErrorCode::InvalidParams, "phi needs 0 <= m <= n");
  return delta_p_exact(chain.window(m, n), seq.at(m + 1)).value;
}

LipschitzReport phi_lipschitz_check(const Ndmc& t, const Ndmc& s, const ProjectionSequence& seq,
                                    Index m, Index n, Index N) {
  LipschitzReport rep;
  rep.phi_t = phi(t, seq, m, n);
  rep.phi_s = phi(s, seq, m, n);
  rep.diff = std::abs(rep.phi_t - rep.phi_s);
  for (Index k = m + 1; k <= n; ++k) {
    rep.sum_r += op_norm(t.generators().at(k).matrix() - s.generators().at(k).matrix());
  }
  const ChainMetricValue d = chain_metric(t, s, std::max(N, n));
  const double scale = std::ldexp(1.0, static_cast<int>(n));
  rep.metric_bound = scale * (d.value + d.tail_bound) + 1e-9;
  rep.holds_metric = rep.diff <= rep.metric_bound;
  rep.holds_sum = rep.diff <= rep.sum_r + 1e-9;
  return rep;
}

namespace {

void require_fixing(const Ndmc& chain, Index n, const Matrix& p, double tol) {
  const Matrix& t = chain.generators().at(n).matrix();
  const double comm = op_norm(p * t - t * p);
  const double fix = op_norm(t * p - p);
  if (comm > tol || fix > tol) {
    std::ostringstream msg;
    msg << "generator " << n << ": |PT - TP| = " << comm << ", |TP - P| = " << fix;
    fail(ErrorCode::HypothesisNotMet, msg.str());
  }
}

void require_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorCode::InvalidParams, "epsilon must lie in (0, 1]");
}

}  // namespace

Ndmc densify(const Ndmc& chain, const ProjectionSequence& seq, double eps, double tol) {
  require_eps(eps);
  require_same_dim(chain.dim(), seq.dim(), "chain vs projection sequence");
  const Index horizon = std::min(chain.horizon(), seq.horizon());
  for (Index n = 1; n <= horizon; ++n) require_fixing(chain, n, seq.at(n).matrix(), tol);

  const double w = eps / 2.0;
  Ndmc out(chain.generators().with_horizon(horizon).map(
      [seq, w](Index n, const Matrix& t) -> Matrix { return w * seq.at(n).matrix() + (1.0 - w) * t; }));

  const Index N = std::min(kDefaultTruncation, horizon);
  const Ndmc base(chain.generators().with_horizon(horizon));
  const ChainMetricValue d = chain_metric(out, base, N);
  // every omitted term is at most (eps/2) * 2 / 2^n
  const double bound = d.value + eps * std::ldexp(1.0, static_cast<int>(-N));
  if (!(bound < eps)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "densified chain at distance up to " << bound << ", not below " << eps;
    fail(ErrorCode::HypothesisNotMet, msg.str());
  }
  return out;
}

Ndmc densify_uniform(const Ndmc& chain, const MarkovProjection& p, double eps, double tol) {
  require_eps(eps);
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  for (Index n = 1; n <= chain.horizon(); ++n) require_fixing(chain, n, p.matrix(), tol);
  const double w = eps / 2.0;
  const Matrix pm = p.matrix();
  return Ndmc(chain.generators().map(
      [pm, w](Index, const Matrix& t) -> Matrix { return w * pm + (1.0 - w) * t; }));
}

}  // namespace deltap
