#include "deltap/doeblin.hpp"

#include "deltap/dobrushin.hpp"
#include "deltap/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace deltap {

CriterionReport check_criterion_iii(const Ndmc& chain, const MarkovProjection& p,
                                    const std::vector<std::pair<Index, Index>>& schedule,
                                    Index horizon, double tol) {
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  if (horizon > chain.horizon()) {
    fail(ErrorCode::HorizonExceeded, "horizon beyond chain horizon");
  }
  CriterionReport report;
  const KernelPolytope poly = kernel_polytope(p);
  double running = 0.0;
  for (const auto& [k, n_k] : schedule) {
    if (k < 0 || n_k < 1) fail(ErrorCode::InvalidParams, "schedule entries need k >= 0, n_k >= 1");
    if (k + n_k > horizon) {
      fail(ErrorCode::HorizonExceeded, "schedule window (" + std::to_string(k) + ", " +
                                           std::to_string(k + n_k) + ") beyond horizon " +
                                           std::to_string(horizon));
    }
    const double mu = delta_p_exact(chain.window(k, k + n_k), poly).value;
    report.entries.push_back({k, n_k, mu});
    running += 1.0 - mu;
    report.partial_sums.push_back(running);
  }

  const auto& s = report.partial_sums;
  bool increasing = !s.empty() && s.front() > 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) increasing = false;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = s.size() / 2; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(s[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) report.growth_exponent = (count * sxy - sx * sy) / denom;
  }
  report.diverging = increasing && report.growth_exponent >= 0.1;

  double comm = 0.0;
  for (Index n = 1; n <= horizon; ++n) {
    const Matrix& t = chain.generators().at(n).matrix();
    comm = std::max(comm, op_norm(p.matrix() * t - t * p.matrix()));
  }
  report.generators_commute = comm <= kDefaultTol;
  if (report.generators_commute && !schedule.empty() && schedule.front().first < horizon) {
    report.weak = weak_probe(chain, p, schedule.front().first, horizon, tol);
  }
  return report;
}

PairDomination evaluate_dc(const Matrix& window, const MarkovProjection& p, const Vector& u,
                           const Vector& v, const Vector& y0, double lambda, double tol) {
  PairDomination out;
  const Matrix& pm = p.matrix();
  Vector anchor = y0;
  if (l1_norm(pm * (u - y0)) > tol) {
    anchor = pm * u;
    out.anchored = false;
  }
  out.z = window * anchor;
  const Vector wu = window * u;
  const Vector wv = window * v;
  out.phi = (out.z - wu).cwiseMax(0.0) + (out.z - wv).cwiseMax(0.0);
  out.phi_norm = l1_norm(out.phi);
  out.residual = std::min((wu + out.phi - lambda * out.z).minCoeff(),
                          (wv + out.phi - lambda * out.z).minCoeff());
  return out;
}

DoeblinWitness build_witness(const Ndmc& chain, const MarkovProjection& p, Index k,
                             const Vector& y0, Index horizon, double threshold, double tol) {
  require_same_dim(chain.dim(), p.dim(), "chain vs projection");
  require_same_dim(y0.size(), p.dim(), "y0 vs projection");
  if (!is_base_element(y0, tol).ok) fail(ErrorCode::NotBaseElement, "y0 is not in K");
  if (horizon > chain.horizon()) fail(ErrorCode::HorizonExceeded, "horizon beyond chain horizon");
  if (k < 0) fail(ErrorCode::InvalidParams, "k must be >= 0");

  const KernelPolytope poly = kernel_polytope(p);
  Index n_k = 0;
  double delta = 1.0;
  for (Index n = 1; k + n <= horizon; ++n) {
    const double d = delta_p_exact(chain.window(k, k + n), poly).value;
    if (d < threshold) {
      n_k = n;
      delta = d;
      break;
    }
  }
  if (n_k == 0) {
    fail(ErrorCode::NoWindowFound, "no window from k = " + std::to_string(k) + " up to horizon " +
                                       std::to_string(horizon) + " has delta_P below " +
                                       std::to_string(threshold));
  }

  DoeblinWitness w;
  w.k = k;
  w.n_k = n_k;
  w.lambda = 1.0;
  w.delta = delta;
  w.phi_bound = w.lambda / 2.0;
  w.residual = std::numeric_limits<double>::infinity();
  const Matrix window = chain.window(k, k + n_k);
  const PairPolytope pairs = pair_polytope(p);
  bool first = true;
  for (const auto& pair : pairs.vertices) {
    const PairDomination dom = evaluate_dc(window, p, pair.u, pair.v, y0, w.lambda, tol);
    ++w.pairs_tested;
    if (!dom.anchored) w.anchored = false;
    if (first || dom.phi_norm > w.phi_norm) {
      w.phi_norm = dom.phi_norm;
      w.phi = dom.phi;
      w.z = dom.z;
    }
    w.residual = std::min(w.residual, dom.residual);
    first = false;
  }
  if (first) w.residual = 0.0;
  if (w.residual < -tol || w.phi_norm > w.phi_bound + tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "residual " << w.residual << ", |phi| " << w.phi_norm << " against bound " << w.phi_bound;
    fail(ErrorCode::WitnessInvalid, msg.str());
  }
  return w;
}

}  // namespace deltap
