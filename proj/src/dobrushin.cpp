#include "deltap/dobrushin.hpp"

#include "deltap/projections.hpp"
#include "deltap/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace deltap {

namespace {

// Calls f(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_combination(Index n, Index k, F&& f) {
  if (k < 1 || k > n) return;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  while (true) {
    f(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

double binomial(Index n, Index k) {
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

void require_exact_dim(Index n) {
  if (n > kExactDimensionLimit) {
    fail(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(n) + " exceeds exact limit " +
                                           std::to_string(kExactDimensionLimit));
  }
}

CoefficientValue identity_convention(CoefficientMethod method) {
  CoefficientValue v;
  v.value = 1.0;
  v.method = method;
  return v;
}

}  // namespace

std::string_view to_string(CoefficientMethod method) {
  switch (method) {
    case CoefficientMethod::ClassicFormula: return "classic-formula";
    case CoefficientMethod::KernelVertex: return "kernel-vertex";
    case CoefficientMethod::PairVertex: return "pair-vertex";
    case CoefficientMethod::SamplingLowerBound: return "sampling-lower-bound";
    case CoefficientMethod::BlockClosedForm: return "block-closed-form";
  }
  return "unknown";
}

double replay_certificate(const Matrix& t, const CoefficientValue& value) {
  struct Visitor {
    const Matrix& t;
    double operator()(std::monostate) const { return 1.0; }
    double operator()(const Vector& x) const { return l1_norm(t * x) / l1_norm(x); }
    double operator()(const PairCertificate& c) const { return 0.5 * l1_norm(t * (c.u - c.v)); }
  };
  return std::visit(Visitor{t}, value.certificate);
}

CoefficientValue delta_classic(const Matrix& t) {
  require_square(t, "operator");
  const Index n = t.rows();
  CoefficientValue out;
  out.method = CoefficientMethod::ClassicFormula;
  Index bi = -1;
  Index bj = -1;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * l1_norm(t.col(i) - t.col(j));
      if (bi < 0 || v > out.value) {
        out.value = v;
        bi = i;
        bj = j;
      }
    }
  }
  if (bi >= 0) out.certificate = PairCertificate{basis_vector(n, bi), basis_vector(n, bj)};
  return out;
}

KernelPolytope kernel_polytope(const MarkovProjection& p) {
  KernelPolytope poly;
  const Index n = p.dim();
  poly.dim = n;
  if (p.is_identity()) {
    poly.identity = true;
    return poly;
  }
  require_exact_dim(n);
  const Matrix& pm = p.matrix();
  const Index max_support = std::min(p.rank() + 1, n);
  // A vertex is the unique (up to scale) kernel vector on a minimal support.
  for (Index s = 2; s <= max_support; ++s) {
    for_each_combination(n, s, [&](const std::vector<Index>& support) {
      Matrix sub(n, s);
      for (Index c = 0; c < s; ++c) sub.col(c) = pm.col(support[static_cast<std::size_t>(c)]);
      Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullV);
      const Vector& sv = svd.singularValues();
      const double threshold = 1e-10 * std::max(1.0, sv(0));
      Index nullity = 0;
      for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= threshold) ++nullity;
      }
      if (nullity != 1) return;
      Vector coeffs = svd.matrixV().col(s - 1);
      const double peak = coeffs.cwiseAbs().maxCoeff();
      if (coeffs.cwiseAbs().minCoeff() <= 1e-9 * peak) return;
      coeffs /= l1_norm(coeffs);
      if (coeffs(0) < 0) coeffs = -coeffs;
      Vector x = Vector::Zero(n);
      for (Index c = 0; c < s; ++c) x(support[static_cast<std::size_t>(c)]) = coeffs(c);
      poly.vertices.push_back(std::move(x));
      poly.supports.push_back(support);
    });
  }
  std::vector<std::size_t> order(poly.vertices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(poly.supports[a].begin(), poly.supports[a].end(),
                                        poly.supports[b].begin(), poly.supports[b].end());
  });
  KernelPolytope sorted;
  sorted.dim = n;
  for (std::size_t i : order) {
    sorted.vertices.push_back(std::move(poly.vertices[i]));
    sorted.supports.push_back(std::move(poly.supports[i]));
  }
  return sorted;
}

CoefficientValue delta_p_exact(const Matrix& t, const KernelPolytope& poly) {
  require_square(t, "operator");
  require_same_dim(t.rows(), poly.dim, "operator vs projection");
  if (poly.identity) return identity_convention(CoefficientMethod::KernelVertex);
  CoefficientValue out;
  out.method = CoefficientMethod::KernelVertex;
  std::size_t best = poly.vertices.size();
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const double v = l1_norm(t * poly.vertices[i]);
    if (best == poly.vertices.size() || v > out.value) {
      out.value = v;
      best = i;
    }
  }
  if (best < poly.vertices.size()) out.certificate = poly.vertices[best];
  return out;
}

CoefficientValue delta_p_exact(const Matrix& t, const MarkovProjection& p) {
  require_same_dim(t.rows(), p.dim(), "operator vs projection");
  return delta_p_exact(t, kernel_polytope(p));
}

PairPolytope pair_polytope(const MarkovProjection& p) {
  PairPolytope poly;
  const Index n = p.dim();
  poly.dim = n;
  if (p.is_identity()) {
    poly.identity = true;
    return poly;
  }
  require_exact_dim(n);
  // y = (u, v) >= 0 with P u - P v = 0, sum u = 1, sum v = 1.
  Matrix a = Matrix::Zero(n + 2, 2 * n);
  a.topLeftCorner(n, n) = p.matrix();
  a.topRightCorner(n, n) = -p.matrix();
  a.row(n).head(n).setOnes();
  a.row(n + 1).tail(n).setOnes();
  Vector b = Vector::Zero(n + 2);
  b(n) = 1.0;
  b(n + 1) = 1.0;
  const Index r = numerical_rank(a);
  const double count = binomial(2 * n, r);
  if (count > static_cast<double>(kPairBasisLimit)) {
    fail(ErrorCode::DimensionTooLarge, "pair-vertex enumeration needs " +
                                           std::to_string(static_cast<long long>(count)) +
                                           " bases (limit " + std::to_string(kPairBasisLimit) + ")");
  }
  std::set<std::vector<long long>> seen;
  Matrix sub(n + 2, r);
  for_each_combination(2 * n, r, [&](const std::vector<Index>& basis) {
    if (basis.front() >= n || basis.back() < n) return;
    for (Index c = 0; c < r; ++c) sub.col(c) = a.col(basis[static_cast<std::size_t>(c)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() != r) return;
    const Vector y = qr.solve(b);
    if ((sub * y - b).cwiseAbs().maxCoeff() > 1e-9) return;
    if (y.minCoeff() < -1e-12) return;
    Vector full = Vector::Zero(2 * n);
    for (Index c = 0; c < r; ++c) full(basis[static_cast<std::size_t>(c)]) = std::max(0.0, y(c));
    std::vector<long long> key(static_cast<std::size_t>(2 * n));
    for (Index i = 0; i < 2 * n; ++i) key[static_cast<std::size_t>(i)] = std::llround(full(i) * 1e9);
    if (!seen.insert(std::move(key)).second) return;
    poly.vertices.push_back(PairCertificate{full.head(n), full.tail(n)});
  });
  return poly;
}

CoefficientValue delta_p_pair(const Matrix& t, const PairPolytope& poly) {
  require_square(t, "operator");
  require_same_dim(t.rows(), poly.dim, "operator vs projection");
  if (poly.identity) return identity_convention(CoefficientMethod::PairVertex);
  CoefficientValue out;
  out.method = CoefficientMethod::PairVertex;
  std::size_t best = poly.vertices.size();
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const double v = 0.5 * l1_norm(t * (poly.vertices[i].u - poly.vertices[i].v));
    if (best == poly.vertices.size() || v > out.value) {
      out.value = v;
      best = i;
    }
  }
  if (best < poly.vertices.size()) out.certificate = poly.vertices[best];
  return out;
}

CoefficientValue delta_p_pair(const Matrix& t, const MarkovProjection& p) {
  require_same_dim(t.rows(), p.dim(), "operator vs projection");
  return delta_p_pair(t, pair_polytope(p));
}

CoefficientValue delta_p_block(const Matrix& t, const std::vector<std::vector<Index>>& blocks,
                               const std::vector<Vector>& reps) {
  require_square(t, "operator");
  const MarkovProjection p = block_projection(blocks, reps);
  require_same_dim(t.rows(), p.dim(), "operator vs projection");
  const Index n = p.dim();
  if (p.is_identity()) return identity_convention(CoefficientMethod::BlockClosedForm);
  CoefficientValue out;
  out.method = CoefficientMethod::BlockClosedForm;
  Index bi = -1;
  Index bj = -1;
  for (const auto& block : blocks) {
    std::vector<Index> sorted = block;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t a = 0; a < sorted.size(); ++a) {
      for (std::size_t b = a + 1; b < sorted.size(); ++b) {
        const double v = 0.5 * l1_norm(t.col(sorted[a]) - t.col(sorted[b]));
        if (bi < 0 || v > out.value) {
          out.value = v;
          bi = sorted[a];
          bj = sorted[b];
        }
      }
    }
  }
  if (bi >= 0) out.certificate = PairCertificate{basis_vector(n, bi), basis_vector(n, bj)};
  return out;
}

CoefficientValue delta_p_block(const Matrix& t, const MarkovProjection& p) {
  if (!p.block_structure()) fail(ErrorCode::InvalidParams, "projection carries no block structure");
  return delta_p_block(t, p.block_structure()->blocks, p.block_structure()->reps);
}

CoefficientValue delta_p_sample(const Matrix& t, const MarkovProjection& p, int samples,
                                std::uint64_t seed) {
  require_square(t, "operator");
  require_same_dim(t.rows(), p.dim(), "operator vs projection");
  if (samples < 1) fail(ErrorCode::InvalidParams, "samples must be >= 1");
  const KernelBasis basis = kernel_basis(p);
  if (basis.degenerate) fail(ErrorCode::DegenerateKernel, "P = I has an empty kernel");
  const Matrix& b = basis.vectors;
  const Matrix tb = t * b;
  const Index k = b.cols();
  auto score = [&](const Vector& c) {
    const double denom = l1_norm(b * c);
    return denom > 0.0 ? l1_norm(tb * c) / denom : 0.0;
  };

  Vector best_c = Vector::Zero(k);
  double best = -1.0;
  for (Index i = 0; i < k; ++i) {
    const Vector c = Vector::Unit(k, i);
    const double v = score(c);
    if (v > best) {
      best = v;
      best_c = c;
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector c(k);
  for (int s = 0; s < samples; ++s) {
    for (Index i = 0; i < k; ++i) c(i) = normal(rng);
    const double v = score(c);
    if (v > best) {
      best = v;
      best_c = c;
    }
  }

  // Greedy coordinate moves in coefficient space with a shrinking step.
  double step = 0.5 * best_c.cwiseAbs().maxCoeff();
  const double floor = 1e-12 * std::max(1.0, best_c.cwiseAbs().maxCoeff());
  int evaluations = 0;
  while (step > floor && evaluations < 50000) {
    bool improved = false;
    for (Index i = 0; i < k; ++i) {
      for (double dir : {1.0, -1.0}) {
        Vector trial = best_c;
        trial(i) += dir * step;
        const double v = score(trial);
        ++evaluations;
        if (v > best) {
          best = v;
          best_c = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  Vector x = b * best_c;
  x /= l1_norm(x);
  CoefficientValue out;
  out.method = CoefficientMethod::SamplingLowerBound;
  out.value = l1_norm(t * x);
  out.certificate = x;
  out.bound_only = true;
  return out;
}

PairDecomposition pair_decomposition(const Vector& x, const MarkovProjection& p, double tol) {
  require_same_dim(x.size(), p.dim(), "vector vs projection");
  const double norm = l1_norm(x);
  if (l1_norm(p.matrix() * x) > tol * std::max(1.0, norm)) {
    fail(ErrorCode::InvalidParams, "x is not in the kernel of P");
  }
  PairDecomposition d;
  if (norm == 0.0) {
    d.u = barycenter(x.size());
    d.v = d.u;
    return d;
  }
  // sum x = 0 on the kernel, so both parts carry half the norm.
  auto [plus, minus] = pos_neg_parts(x);
  d.alpha = 0.5 * norm;
  d.u = plus / d.alpha;
  d.v = minus / d.alpha;
  return d;
}

bool LawReport::all_hold() const {
  return std::all_of(laws.begin(), laws.end(), [](const LawCheck& l) { return l.holds; });
}

const LawCheck* LawReport::find(std::string_view law) const {
  for (const auto& l : laws) {
    if (l.law == law) return &l;
  }
  return nullptr;
}

LawReport check_coefficient_laws(const MarkovOperator& t, const MarkovOperator& s, const Matrix& h,
                                 const MarkovProjection& p, double tol,
                                 const std::vector<ProjectionPair>& pairs) {
  const Index n = p.dim();
  require_same_dim(t.dim(), n, "T vs P");
  require_same_dim(s.dim(), n, "S vs P");
  require_square(h, "H");
  require_same_dim(h.rows(), n, "H vs P");
  const Matrix& tm = t.matrix();
  const Matrix& sm = s.matrix();
  const Matrix& pm = p.matrix();
  const KernelPolytope poly = kernel_polytope(p);
  auto delta = [&](const Matrix& m) { return delta_p_exact(m, poly).value; };

  LawReport report;
  auto add = [&](std::string law, double lhs, double rhs, double slack, std::string note = {}) {
    LawCheck c;
    c.law = std::move(law);
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = slack;
    c.holds = slack >= -tol;
    c.note = std::move(note);
    report.laws.push_back(std::move(c));
  };
  auto skip = [&](std::string law, std::string note) {
    LawCheck c;
    c.law = std::move(law);
    c.applicable = false;
    c.note = "HypothesisNotMet: " + std::move(note);
    report.laws.push_back(std::move(c));
  };

  const double dt = delta(tm);
  add("i", dt, 1.0, std::min(dt, 1.0 - dt));

  if (p.is_identity()) {
    // delta_I = 1 is a convention for Markov operators only.
    const std::string why = "P = I, the convention value does not satisfy the law";
    skip("ii", why);
    skip("iii", why);
    skip("iv", why);
    skip("v", why);
  } else {
    const double ds = delta(sm);
    const double a = std::abs(dt - ds);
    const double mid = delta(tm - sm);
    const double c = op_norm(tm - sm);
    add("ii", a, c, std::min(mid - a, c - mid), "delta_P(T - S) = " + std::to_string(mid));

    try {
      const double half_sup = delta_p_pair(tm, p).value;
      add("iii", dt, half_sup, half_sup - dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DimensionTooLarge) throw;
      skip("iii", e.what());
    }

    const double hp = op_norm(h * pm - pm * h);
    if (hp <= tol) {
      const double lhs = delta(tm * h);
      const double rhs = dt * op_norm(h);
      add("iv", lhs, rhs, rhs - lhs);
    } else {
      skip("iv", "|HP - PH| = " + std::to_string(hp));
    }

    const double ph = op_norm(pm * h);
    if (ph <= tol) {
      const double lhs = op_norm(tm * h);
      const double rhs = dt * op_norm(h);
      add("v", lhs, rhs, rhs - lhs);
    } else {
      skip("v", "|PH| = " + std::to_string(ph));
    }
  }

  const double ds = delta(sm);
  const double dts = delta(tm * sm);
  const double comm = op_norm(pm * sm - sm * pm);
  if (comm <= tol) {
    add("vi", dts, dt * ds, dt * ds - dts);
  } else {
    skip("vi", "|PS - SP| = " + std::to_string(comm));
  }
  const double weak = op_norm(pm * sm - pm * sm * pm);
  if (weak <= tol) {
    add("weak-submultiplicative", dts, dt * ds, dt * ds - dts);
  } else {
    skip("weak-submultiplicative", "|PS - PSP| = " + std::to_string(weak));
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string name = "PQl[" + std::to_string(i) + "]";
    const double r = left_consistency_residual(pairs[i].p, pairs[i].q);
    if (r > tol) {
      skip(name, "|PQ - P| = " + std::to_string(r));
      continue;
    }
    if (pairs[i].q.is_identity() && !pairs[i].p.is_identity()) {
      skip(name, "Q = I, the convention value does not satisfy the law");
      continue;
    }
    const double dq = delta_p_exact(tm, pairs[i].q).value;
    const double dp = delta_p_exact(tm, pairs[i].p).value;
    add(name, dq, dp, dp - dq);
  }
  return report;
}

}  // namespace deltap
