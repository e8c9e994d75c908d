#include "deltap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace deltap {

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& msg) {
  fail(ErrorCode::ParseError, path + ": " + msg);
}

// Re-raises validation errors with the JSON path in front.
template <typename F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    fail(e.code(), path + ": " + msg);
  }
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  if (!j.contains(key)) parse_fail(path + "." + key, "missing field");
  return j[key];
}

std::string str_field(const Json& j, const std::string& path, const char* key) {
  const Json& v = field(j, path, key);
  if (!v.is_string()) parse_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Index int_field(const Json& j, const std::string& path, const char* key, Index def) {
  if (!j.contains(key)) return def;
  const Json& v = j[key];
  if (!v.is_number_integer()) parse_fail(path + "." + key, "expected an integer");
  return v.get<Index>();
}

std::vector<std::vector<Index>> parse_blocks(const Json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of index arrays");
  std::vector<std::vector<Index>> out;
  for (std::size_t b = 0; b < j.size(); ++b) {
    const std::string bp = path + "[" + std::to_string(b) + "]";
    if (!j[b].is_array()) parse_fail(bp, "expected an array of indices");
    std::vector<Index> block;
    for (std::size_t i = 0; i < j[b].size(); ++i) {
      if (!j[b][i].is_number_integer()) parse_fail(bp + "[" + std::to_string(i) + "]", "expected an integer");
      block.push_back(j[b][i].get<Index>());
    }
    out.push_back(std::move(block));
  }
  return out;
}

ProjectionSequence parse_projection_sequence(const Json& j, const std::string& path, Index horizon,
                                             const FamilyInstance& inst) {
  const std::string kind = str_field(j, path, "kind");
  if (kind == "family") {
    if (!inst.seq) parse_fail(path, "family \"" + inst.name + "\" has no projection sequence");
    return *inst.seq;
  }
  if (kind == "sequence") {
    const Json& items = field(j, path, "items");
    if (!items.is_array() || items.empty()) parse_fail(path + ".items", "expected a non-empty array");
    std::vector<MarkovProjection> list;
    for (std::size_t i = 0; i < items.size(); ++i) {
      list.push_back(parse_projection(items[i], path + ".items[" + std::to_string(i) + "]"));
    }
    return at_path(path, [&] { return ProjectionSequence::from_list(list, horizon); });
  }
  const MarkovProjection p = parse_projection(j, path);
  return ProjectionSequence(
      [p](Index) { return p; }, horizon, p);
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

Matrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) parse_fail(path + "[0]", "expected an array");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) parse_fail(rp, "expected an array");
    if (j[i].size() != cols) parse_fail(rp, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) parse_fail(rp + "[" + std::to_string(c) + "]", "expected a number");
      m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) parse_fail(path + "[" + std::to_string(i) + "]", "expected a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

MarkovProjection parse_projection(const Json& j, const std::string& path) {
  const std::string kind = str_field(j, path, "kind");
  if (kind == "one_dim") {
    const Vector z = parse_vector(field(j, path, "z"), path + ".z");
    return at_path(path, [&] { return one_dim_projection(z); });
  }
  if (kind == "block") {
    const auto blocks = parse_blocks(field(j, path, "blocks"), path + ".blocks");
    const Json& rj = field(j, path, "reps");
    if (!rj.is_array()) parse_fail(path + ".reps", "expected an array of vectors");
    std::vector<Vector> reps;
    for (std::size_t i = 0; i < rj.size(); ++i) {
      reps.push_back(parse_vector(rj[i], path + ".reps[" + std::to_string(i) + "]"));
    }
    return at_path(path, [&] { return block_projection(blocks, reps); });
  }
  if (kind == "explicit") {
    const Matrix m = parse_matrix(field(j, path, "matrix"), path + ".matrix");
    return at_path(path, [&] { return MarkovProjection::validate(m); });
  }
  parse_fail(path + ".kind", "unknown projection kind \"" + kind + "\"");
}

ChainSpec parse_chain_spec(const Json& j) {
  const std::string root = "$";
  if (!j.is_object()) parse_fail(root, "expected an object");
  const Json& gen = field(j, root, "generators");
  const std::string gp = root + ".generators";
  const std::string kind = str_field(gen, gp, "kind");

  std::optional<FamilyInstance> inst;
  if (kind == "family") {
    const std::string name = str_field(gen, gp, "name");
    const Json params = gen.contains("params") ? gen["params"] : Json::object();
    inst = at_path(gp, [&] { return instantiate_family(name, params); });
  } else if (kind == "explicit") {
    const Json& mats = field(gen, gp, "matrices");
    if (!mats.is_array() || mats.empty()) parse_fail(gp + ".matrices", "expected a non-empty array of matrices");
    std::vector<MarkovOperator> ops;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const std::string mp = gp + ".matrices[" + std::to_string(i) + "]";
      const Matrix m = parse_matrix(mats[i], mp);
      ops.push_back(at_path(mp, [&] { return MarkovOperator::validate(m); }));
    }
    const std::string mode = gen.contains("mode") ? str_field(gen, gp, "mode") : "repeat";
    if (mode != "repeat" && mode != "cycle") parse_fail(gp + ".mode", "expected \"repeat\" or \"cycle\"");
    const Index horizon = int_field(gen, gp, "horizon", 60);
    if (horizon < 1) parse_fail(gp + ".horizon", "must be >= 1");
    for (std::size_t i = 1; i < ops.size(); ++i) {
      if (ops[i].dim() != ops[0].dim()) {
        fail(ErrorCode::DimensionMismatch, gp + ".matrices[" + std::to_string(i) + "]: dimension " +
                                               std::to_string(ops[i].dim()) + " vs " + std::to_string(ops[0].dim()));
      }
    }
    inst.emplace("explicit", Ndmc(GeneratingSequence::from_list(ops, horizon, mode == "cycle")));
    inst->params = {{"horizon", horizon}, {"mode", mode}};
  } else {
    parse_fail(gp + ".kind", "unknown generator kind \"" + kind + "\"");
  }

  if (j.contains("dimension")) {
    const Index dim = int_field(j, root, "dimension", 0);
    if (dim != inst->dim()) {
      fail(ErrorCode::DimensionMismatch, "$.dimension: " + std::to_string(dim) + " but generators have dimension " +
                                             std::to_string(inst->dim()));
    }
  }

  if (j.contains("projections")) {
    const std::string pp = root + ".projections";
    ProjectionSequence seq = parse_projection_sequence(j["projections"], pp, inst->chain.horizon(), *inst);
    if (seq.dim() != inst->dim()) {
      fail(ErrorCode::DimensionMismatch, pp + ": dimension " + std::to_string(seq.dim()) + " vs " +
                                             std::to_string(inst->dim()));
    }
    inst->seq = seq;
    if (seq.declared_limit()) {
      inst->limit = seq.declared_limit();
    } else if (str_field(j["projections"], pp, "kind") == "sequence") {
      inst->limit = seq.at(seq.horizon());
    }
  }

  ChainSpec spec{std::move(*inst), Json::object()};
  if (j.contains("analysis")) {
    if (!j["analysis"].is_object()) parse_fail("$.analysis", "expected an object");
    spec.analysis = j["analysis"];
  }
  return spec;
}

ChainSpec load_chain_spec(const std::string& path) { return parse_chain_spec(read_json_file(path)); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const std::vector<std::pair<Index, double>>& rows) {
  std::string out = "n,value\n";
  for (const auto& [n, v] : rows) out += std::to_string(n) + "," + format_double(v) + "\n";
  return out;
}

std::string decay_csv(const DecayReport& r) { return trace_csv(r.rows); }

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

Json to_json(const CoefficientValue& v) {
  Json out = {{"value", v.value}, {"method", std::string(to_string(v.method))}, {"bound_only", v.bound_only}};
  if (const auto* x = std::get_if<Vector>(&v.certificate)) {
    out["certificate"] = {{"kind", "kernel-vector"}, {"x", to_json(*x)}};
  } else if (const auto* pc = std::get_if<PairCertificate>(&v.certificate)) {
    out["certificate"] = {{"kind", "pair"}, {"u", to_json(pc->u)}, {"v", to_json(pc->v)}};
  } else {
    out["certificate"] = {{"kind", "identity-convention"}};
  }
  return out;
}

namespace {

Json rows_json(const std::vector<std::pair<Index, double>>& rows) {
  Json out = Json::array();
  for (const auto& [n, v] : rows) out.push_back({n, v});
  return out;
}

Json hypotheses_json(const std::vector<HypothesisCheck>& hs) {
  Json out = Json::array();
  for (const auto& h : hs) {
    out.push_back({{"name", h.name}, {"passed", h.passed}, {"residual", h.residual}, {"note", h.note}});
  }
  return out;
}

}  // namespace

Json to_json(const DecayReport& r) {
  Json out = {{"kind", std::string(to_string(r.kind))},
              {"m", r.m},
              {"horizon", r.horizon},
              {"tol", r.tol},
              {"classification", std::string(to_string(r.classification))},
              {"rows", rows_json(r.rows)}};
  out["fitted_rate"] = r.fitted_rate ? Json(*r.fitted_rate) : Json(nullptr);
  out["first_below_tol"] = r.first_below_tol ? Json(*r.first_below_tol) : Json(nullptr);
  return out;
}

Json to_json(const TheoremReport& r) {
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return {{"theorem", r.theorem},
          {"horizon", r.horizon},
          {"hypotheses", hypotheses_json(r.hypotheses)},
          {"hypotheses_passed", r.hypotheses_passed()},
          {"conclusion_metric", r.conclusion_metric},
          {"conclusion_trace", rows_json(r.conclusion_trace)},
          {"conclusion_passed", r.conclusion_passed},
          {"verified", r.verified()},
          {"metrics", metrics},
          {"warnings", r.warnings}};
}

Json to_json(const CriterionReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) entries.push_back({{"k", e.k}, {"n_k", e.n_k}, {"mu", e.mu}});
  Json out = {{"entries", entries},
              {"partial_sums", r.partial_sums},
              {"growth_exponent", r.growth_exponent},
              {"diverging", r.diverging},
              {"generators_commute", r.generators_commute}};
  out["weak"] = r.weak ? to_json(*r.weak) : Json(nullptr);
  return out;
}

Json to_json(const DoeblinWitness& w) {
  return {{"k", w.k},
          {"n_k", w.n_k},
          {"lambda", w.lambda},
          {"delta", w.delta},
          {"mu", witness_to_mu(w)},
          {"z", to_json(w.z)},
          {"phi", to_json(w.phi)},
          {"phi_norm", w.phi_norm},
          {"phi_bound", w.phi_bound},
          {"residual", w.residual},
          {"pairs_tested", w.pairs_tested},
          {"anchored", w.anchored}};
}

Json to_json(const PerturbationReport& r) {
  return {{"m", r.m},         {"n", r.n},         {"r", r.r},         {"partial_sums", r.partial_sums},
          {"r_norm", r.r_norm}, {"bound", r.bound}, {"slack", r.slack}, {"holds", r.holds}};
}

Json to_json(const SummabilityProxy& s) {
  return {{"summable", s.summable},
          {"last_quarter_increase", s.last_quarter_increase},
          {"tail_log_log_slope", s.tail_log_log_slope},
          {"rule", s.rule}};
}

Json to_json(const TransferReport& r) {
  Json out = {{"hypotheses", hypotheses_json(r.hypotheses)},
              {"hypotheses_passed", r.hypotheses_passed()},
              {"perturbation", to_json(r.perturbation)},
              {"summability", to_json(r.summability)},
              {"uniform_t", to_json(r.uniform_t)},
              {"uniform_s", to_json(r.uniform_s)},
              {"weak_t", to_json(r.weak_t)},
              {"weak_s", to_json(r.weak_s)},
              {"uniform_agree", r.uniform_agree},
              {"weak_agree", r.weak_agree},
              {"verified", r.verified()}};
  out["limit"] = r.limit ? to_json(r.limit->matrix()) : Json(nullptr);
  return out;
}

Json to_json(const ChainMetricValue& v) {
  return {{"value", v.value}, {"N", v.N}, {"tail_bound", v.tail_bound}};
}

Json to_json(const LipschitzReport& r) {
  return {{"phi_t", r.phi_t},
          {"phi_s", r.phi_s},
          {"diff", r.diff},
          {"sum_r", r.sum_r},
          {"metric_bound", r.metric_bound},
          {"holds_metric", r.holds_metric},
          {"holds_sum", r.holds_sum}};
}

Json to_json(const LawReport& r) {
  Json out = Json::array();
  for (const auto& l : r.laws) {
    out.push_back({{"law", l.law},
                   {"applicable", l.applicable},
                   {"holds", l.holds},
                   {"lhs", l.lhs},
                   {"rhs", l.rhs},
                   {"slack", l.slack},
                   {"note", l.note}});
  }
  return {{"laws", out}, {"all_hold", r.all_hold()}};
}

Json error_json(const Error& e) {
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
}

}  // namespace deltap
