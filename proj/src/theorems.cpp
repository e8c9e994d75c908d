#include "deltap/theorems.hpp"

#include "deltap/dobrushin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace deltap {

bool TheoremReport::hypotheses_passed() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(),
                     [](const HypothesisCheck& h) { return h.passed; });
}

std::vector<std::string> TheoremReport::failed_hypotheses() const {
  std::vector<std::string> out;
  for (const auto& h : hypotheses) {
    if (!h.passed) out.push_back(h.name);
  }
  return out;
}

void TheoremReport::throw_if_hypothesis_failed() const {
  const auto failed = failed_hypotheses();
  if (failed.empty()) return;
  std::string msg = theorem + ":";
  for (const auto& f : failed) msg += " [" + f + "]";
  fail(ErrorCode::HypothesisNotMet, msg);
}

bool vanishing_proxy(const std::vector<double>& values, double tol, double* slope) {
  if (slope) *slope = 0.0;
  if (values.empty()) return false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1] + 1e-15) return false;
  }
  // log-log least squares on the second half, positive values only.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = values.size() / 2; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  double fitted = 0.0;
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) fitted = (count * sxy - sx * sy) / denom;
  }
  if (slope) *slope = fitted;
  return values.back() <= tol || (count >= 2 && fitted <= -0.5);
}

namespace {

HypothesisCheck hypothesis(std::string name, bool passed, double residual, std::string note = {}) {
  return HypothesisCheck{std::move(name), passed, residual, std::move(note)};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void require_horizon(const Ndmc& chain, Index horizon) {
  if (horizon < 2) fail(ErrorCode::InvalidParams, "horizon must be >= 2");
  if (horizon > chain.horizon()) {
    fail(ErrorCode::HorizonExceeded, "horizon " + std::to_string(horizon) + " beyond chain horizon " +
                                         std::to_string(chain.horizon()));
  }
}

// max_n |T_n P_n - P_n| and max_n |P_n T_n - P_n| for n <= horizon.
std::pair<double, double> fixing_residuals(const Ndmc& chain, const ProjectionSequence& seq,
                                           Index horizon) {
  double right = 0.0;
  double left = 0.0;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix& t = chain.generators().at(n).matrix();
    const Matrix& p = seq.at(n).matrix();
    right = std::max(right, op_norm(t * p - p));
    left = std::max(left, op_norm(p * t - p));
  }
  return {right, left};
}

void add_fixing_hypotheses(TheoremReport& r, const Ndmc& chain, const ProjectionSequence& seq,
                           Index horizon, double tol) {
  const auto [right, left] = fixing_residuals(chain, seq, horizon);
  r.hypotheses.push_back(hypothesis("T_n P_n = P_n", right <= tol, right));
  r.hypotheses.push_back(hypothesis("P_n T_n = P_n", left <= tol, left));
  const LeftDecreasingCheck ld = is_left_decreasing(seq, horizon, tol);
  std::string note;
  if (ld.first_violation) note = "first violation at n = " + std::to_string(*ld.first_violation);
  r.hypotheses.push_back(hypothesis("P_n left decreasing", ld.ok, ld.worst_residual, note));
}

void set_conclusion(TheoremReport& r, const DecayReport& probe) {
  r.conclusion_metric = std::string(to_string(probe.kind));
  r.conclusion_trace = probe.rows;
  r.conclusion_passed = probe.converged();
  if (probe.first_below_tol) r.metrics["first_below_tol"] = static_cast<double>(*probe.first_below_tol);
  if (probe.fitted_rate) r.metrics["fitted_rate"] = *probe.fitted_rate;
}

}  // namespace

TheoremReport check_thm_4_1(const Ndmc& chain, const ProjectionSequence& seq, Index m,
                            Index horizon, double tol) {
  require_horizon(chain, horizon);
  TheoremReport r;
  r.theorem = "4.1";
  r.horizon = horizon;
  r.metrics["m"] = static_cast<double>(m);
  r.metrics["tol"] = tol;

  add_fixing_hypotheses(r, chain, seq, horizon, tol);

  // Finite tail sums of |P_{n+1} - P_n|, read at the start of the last quarter.
  std::vector<double> diffs;
  for (Index n = 1; n < horizon; ++n) {
    diffs.push_back(op_norm(seq.at(n + 1).matrix() - seq.at(n).matrix()));
  }
  const Index tail_len = std::max<Index>(5, horizon / 4);
  const Index k_last = std::max<Index>(1, horizon - tail_len);
  double tail = 0.0;
  for (Index n = k_last; n < horizon; ++n) tail += diffs[static_cast<std::size_t>(n - 1)];
  r.metrics["tail_sum_from"] = static_cast<double>(k_last);
  r.metrics["tail_sum"] = tail;
  r.hypotheses.push_back(hypothesis("tail sums of |P_{n+1} - P_n| vanish", tail <= tol, tail,
                                    "sum from n = " + std::to_string(k_last) + " to the horizon"));
  if (seq.is_finite_list()) {
    r.warnings.push_back("projection sequence is a finite list; its tail beyond the list is assumed constant");
  }

  MarkovProjection p = seq.at(horizon);
  try {
    const LimitResult lim = limit_projection(seq, tol);
    p = lim.projection;
    r.hypotheses.push_back(hypothesis("P_n converges", true, lim.residual));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
    r.hypotheses.push_back(hypothesis("P_n converges", false, 0.0, e.what()));
  }

  const DecayReport weak = weak_probe(chain, p, m, horizon, tol);
  r.hypotheses.push_back(hypothesis("weakly P-ergodic", weak.converged(), weak.last(),
                                    std::string(to_string(weak.classification))));
  set_conclusion(r, uniform_probe(chain, p, m, horizon, tol));
  return r;
}

TheoremReport check_thm_4_2(const Ndmc& chain, const ProjectionSequence& seq,
                            const MarkovProjection& p, Index horizon, double tol,
                            std::uint64_t seed) {
  require_horizon(chain, horizon);
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  TheoremReport r;
  r.theorem = "4.2";
  r.horizon = horizon;
  r.metrics["tol"] = tol;

  add_fixing_hypotheses(r, chain, seq, horizon, tol);
  const double to_limit = op_norm(seq.at(horizon).matrix() - p.matrix());
  r.hypotheses.push_back(hypothesis("P_n -> P", to_limit <= tol, to_limit, "|P_horizon - P|"));

  // a(l, n) = delta_P(T^{l,n}) for 1 <= l <= n <= horizon.
  const KernelPolytope poly = kernel_polytope(p);
  const Index d = chain.dim();
  const double a_diag = delta_p_exact(Matrix::Identity(d, d), poly).value;
  std::vector<std::vector<double>> a(static_cast<std::size_t>(horizon + 1),
                                     std::vector<double>(static_cast<std::size_t>(horizon + 1), 0.0));
  for (Index l = 1; l <= horizon; ++l) {
    a[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)] = a_diag;
    Matrix w = Matrix::Identity(d, d);
    for (Index n = l + 1; n <= horizon; ++n) {
      w = chain.generators().at(n).matrix() * w;
      a[static_cast<std::size_t>(l)][static_cast<std::size_t>(n)] = delta_p_exact(w, poly).value;
    }
  }
  std::vector<double> sums(static_cast<std::size_t>(horizon + 1), 0.0);
  double c_hat = 0.0;
  for (Index n = 2; n <= horizon; ++n) {
    double s = 0.0;
    for (Index l = 1; l < n; ++l) s += a[static_cast<std::size_t>(l)][static_cast<std::size_t>(n)];
    sums[static_cast<std::size_t>(n)] = s;
    c_hat = std::max(c_hat, s);
  }
  const Index quarter = std::max<Index>(1, horizon / 4);
  const double growth = sums[static_cast<std::size_t>(horizon)] -
                        sums[static_cast<std::size_t>(std::max<Index>(2, horizon - quarter))];
  r.metrics["C_hat"] = c_hat;
  r.metrics["S_growth_last_quarter"] = growth;
  r.hypotheses.push_back(hypothesis("sum_l delta_P(T^{l,n}) bounded", growth <= std::max(tol, 0.01 * c_hat),
                                    growth, "C_hat = " + fmt(c_hat)));

  // Submultiplicative premise a(j,n) <= a(j,m) a(m+1,n); needs P T_n = T_n P.
  double comm = 0.0;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix& t = chain.generators().at(n).matrix();
    comm = std::max(comm, op_norm(p.matrix() * t - t * p.matrix()));
  }
  if (comm <= tol) {
    std::mt19937_64 rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    int triples = 0;
    for (int s = 0; s < 50 && horizon >= 2; ++s) {
      std::uniform_int_distribution<Index> pick_j(1, horizon - 1);
      const Index j = pick_j(rng);
      std::uniform_int_distribution<Index> pick_n(j + 1, horizon);
      const Index n = pick_n(rng);
      std::uniform_int_distribution<Index> pick_m(j, n - 1);
      const Index mm = pick_m(rng);
      const auto at = [&](Index x, Index y) {
        return a[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      };
      worst = std::min(worst, at(j, mm) * at(mm + 1, n) - at(j, n));
      ++triples;
    }
    r.metrics["submultiplicative_min_slack"] = worst;
    r.metrics["submultiplicative_triples"] = triples;
    if (worst < -1e-9) {
      r.warnings.push_back("submultiplicative premise violated, min slack " + fmt(worst));
    }
  } else {
    r.warnings.push_back("generators do not commute with P (|PT_n - T_nP| = " + fmt(comm) +
                         "); submultiplicative premise not sampled");
  }

  set_conclusion(r, uniform_probe(chain, p, 0, horizon, tol));
  r.metrics["sums_final"] = sums[static_cast<std::size_t>(horizon)];
  return r;
}

TheoremReport check_thm_4_3(const Ndmc& chain, const ProjectionSequence& seq,
                            const MarkovProjection& p, const IndexRule& k_n,
                            const ScalarRule& gamma_n, Index horizon, double tol) {
  require_horizon(chain, horizon);
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  TheoremReport r;
  r.theorem = "4.3";
  r.horizon = horizon;
  r.metrics["tol"] = tol;

  add_fixing_hypotheses(r, chain, seq, horizon, tol);

  const DecayReport uniform = uniform_probe(chain, p, 1, horizon, tol);
  r.hypotheses.push_back(hypothesis("uniformly P-ergodic", uniform.converged(), uniform.last(),
                                    std::string(to_string(uniform.classification))));

  double worst_gap = -std::numeric_limits<double>::infinity();
  double sup_ratio = 0.0;
  bool gamma_ok = true;
  for (Index n = 1; n <= horizon; ++n) {
    const Index k = k_n(n);
    const double g = gamma_n(n);
    if (k < 1 || !(g >= 0.0 && g < 1.0)) {
      gamma_ok = false;
      continue;
    }
    Matrix power = Matrix::Identity(chain.dim(), chain.dim());
    const Matrix& t = chain.generators().at(n).matrix();
    for (Index i = 0; i < k; ++i) power = t * power;
    const double d = delta_p_exact(power, seq.at(n)).value;
    worst_gap = std::max(worst_gap, d - g);
    sup_ratio = std::max(sup_ratio, static_cast<double>(k) / (1.0 - g));
  }
  r.hypotheses.push_back(hypothesis("delta_{P_n}(T_n^{k_n}) <= gamma_n", gamma_ok && worst_gap <= 1e-9,
                                    worst_gap));
  r.metrics["sup_k_over_one_minus_gamma"] = sup_ratio;
  r.hypotheses.push_back(hypothesis("sup k_n / (1 - gamma_n) finite", gamma_ok && std::isfinite(sup_ratio),
                                    sup_ratio));

  // E_n = T^{1,n} - T^{1,n-1}, D_n = P_n - T^{1,n-1}.
  double identity_residual = 0.0;
  std::vector<std::pair<Index, double>> d_trace;
  for (Index n = 2; n <= horizon; ++n) {
    const Matrix prev = chain.window(1, n - 1);
    const Matrix cur = chain.window(1, n);
    const Matrix& t = chain.generators().at(n).matrix();
    const Matrix e = cur - prev;
    const Matrix dn = seq.at(n).matrix() - prev;
    identity_residual = std::max(identity_residual, op_norm(dn - (e + t * t * dn + t * e)));
    d_trace.emplace_back(n, op_norm(dn));
  }
  const double to_limit = op_norm(seq.at(horizon).matrix() - p.matrix());
  r.metrics["identity_residual"] = identity_residual;
  r.metrics["P_n_minus_P_final"] = to_limit;
  r.conclusion_metric = "|D_n|";
  r.conclusion_trace = d_trace;
  const double d_last = d_trace.empty() ? 0.0 : d_trace.back().second;
  r.metrics["D_n_final"] = d_last;
  r.conclusion_passed = d_last <= tol && to_limit <= tol && identity_residual <= 1e-10;
  return r;
}

TheoremReport check_thm_5_2(const Ndmc& chain, const MarkovProjection& p, const ScalarRule& eps_n,
                            Index horizon, double tol) {
  require_horizon(chain, horizon);
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  TheoremReport r;
  r.theorem = "5.2";
  r.horizon = horizon;
  r.metrics["tol"] = tol;

  double comm = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> eps;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix& t = chain.generators().at(n).matrix();
    comm = std::max(comm, op_norm(p.matrix() * t - t * p.matrix()));
    const double e = eps_n(n);
    eps.push_back(e);
    worst = std::max(worst, op_norm(t - p.matrix()) - e);
  }
  r.hypotheses.push_back(hypothesis("T_n in Sigma_P", comm <= tol, comm));
  r.hypotheses.push_back(hypothesis("|T_n - P| < eps_n", worst < 0.0, worst, "max of |T_n - P| - eps_n"));
  double slope = 0.0;
  const bool vanishing = vanishing_proxy(eps, tol, &slope);
  r.metrics["eps_log_log_slope"] = slope;
  r.metrics["eps_final"] = eps.back();
  r.hypotheses.push_back(hypothesis("eps_n -> 0", vanishing, eps.back(),
                                    "non-increasing, and below tol or log-log slope <= -0.5"));

  set_conclusion(r, uniform_probe(chain, p, 0, horizon, tol));
  return r;
}

}  // namespace deltap
