// deltap: command-line front end for chain specs.
//
// Exit codes: 0 verified / converged, 1 not within the horizon (or no
// Doeblin window), 2 hypothesis failure, validation or parse error.

#include "deltap/io.hpp"
#include "deltap/statespace.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace deltap;

namespace {

constexpr int kOk = 0;
constexpr int kNotWithinHorizon = 1;
constexpr int kFailure = 2;

struct Common {
  std::string spec;
  std::optional<Index> m;
  std::optional<Index> horizon;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("spec", c.spec, "chain spec (JSON)")->required();
  cmd->add_option("--m", c.m, "start index m");
  cmd->add_option("--horizon", c.horizon, "last index examined");
  cmd->add_option("--tol", c.tol, "convergence tolerance");
  cmd->add_option("--seed", c.seed, "seed for sampling (default 0)");
  cmd->add_option("--out", c.out, "write <out>.csv and <out>.json instead of printing");
}

template <typename T>
T analysis_value(const ChainSpec& spec, const char* key, const std::optional<T>& flag, T def) {
  if (flag) return *flag;
  if (spec.analysis.contains(key)) {
    try {
      return spec.analysis[key].get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::ParseError, std::string("$.analysis.") + key + ": wrong type");
    }
  }
  return def;
}

struct Settings {
  Index m;
  Index horizon;
  double tol;
  std::uint64_t seed;
};

Settings settings(const ChainSpec& spec, const Common& c, Index default_horizon = 30) {
  Settings s;
  s.m = analysis_value<Index>(spec, "m", c.m, 0);
  s.horizon = analysis_value<Index>(spec, "horizon", c.horizon, std::min(default_horizon, spec.instance.chain.horizon()));
  s.tol = analysis_value<double>(spec, "tol", c.tol, kProbeTol);
  s.seed = analysis_value<std::uint64_t>(spec, "seed", c.seed, 0);
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidParams, "cannot write " + path);
  f << text;
}

// JSON to stdout, or <out>.json (+ <out>.csv when csv is non-empty).
void emit(const Common& c, const Json& j, const std::string& csv) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  write_file(c.out + ".json", text);
  if (!csv.empty()) write_file(c.out + ".csv", csv);
  std::cout << "wrote " << c.out << ".json" << (csv.empty() ? "" : " and " + c.out + ".csv") << "\n";
}

const MarkovProjection& require_limit(const ChainSpec& spec) {
  if (!spec.instance.limit) fail(ErrorCode::InvalidParams, "spec declares no limit projection");
  return *spec.instance.limit;
}

const ProjectionSequence& require_seq(const ChainSpec& spec) {
  if (!spec.instance.seq) fail(ErrorCode::InvalidParams, "spec declares no projections");
  return *spec.instance.seq;
}

MarkovProjection select_projection(const ChainSpec& spec, const std::string& ref) {
  if (ref == "limit") return require_limit(spec);
  if (ref == "identity") return MarkovProjection::validate(Matrix::Identity(spec.dim(), spec.dim()));
  if (ref.rfind("seq:", 0) == 0) return require_seq(spec).at(std::stoll(ref.substr(4)));
  fail(ErrorCode::InvalidParams, "projection reference must be limit, identity or seq:N, got \"" + ref + "\"");
}

Matrix select_operator(const ChainSpec& spec, const std::string& ref) {
  const auto colon = ref.find(':');
  const std::string head = ref.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : ref.substr(colon + 1);
  if (head == "T" && !rest.empty()) return spec.instance.chain.generators().at(std::stoll(rest)).matrix();
  if (head == "window") {
    const auto comma = rest.find(',');
    if (comma != std::string::npos) {
      return spec.instance.chain.window(std::stoll(rest.substr(0, comma)), std::stoll(rest.substr(comma + 1)));
    }
  }
  fail(ErrorCode::InvalidParams, "operator reference must be T:n or window:k,n, got \"" + ref + "\"");
}

const Ndmc& second_chain(const ChainSpec& spec, const std::optional<ChainSpec>& other) {
  if (other) return other->instance.chain;
  if (spec.instance.chain_s) return *spec.instance.chain_s;
  fail(ErrorCode::InvalidParams, "needs --other or a two-chain family");
}

int cmd_validate(const Common& c) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Index horizon = spec.instance.chain.horizon();
  for (Index n = 1; n <= horizon; ++n) (void)spec.instance.chain.generators().at(n);
  Json j = {{"valid", true}, {"family", spec.instance.name}, {"dimension", spec.dim()}, {"horizon", horizon}};
  if (spec.instance.seq) {
    for (Index n = 1; n <= spec.instance.seq->horizon(); ++n) (void)spec.instance.seq->at(n);
    const LeftDecreasingCheck ld = is_left_decreasing(*spec.instance.seq, spec.instance.seq->horizon());
    j["projections"] = {{"horizon", spec.instance.seq->horizon()}, {"left_decreasing", ld.ok}};
  }
  if (spec.instance.limit) j["limit_rank"] = spec.instance.limit->rank();
  emit(c, j, "");
  return kOk;
}

int cmd_coeff(const Common& c, const std::string& op_ref, const std::string& proj_ref,
              const std::string& method, bool classic_check, int samples) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  const Matrix t = select_operator(spec, op_ref);
  const MarkovProjection p = select_projection(spec, proj_ref);
  CoefficientValue v;
  if (method == "exact") v = delta_p_exact(t, p);
  else if (method == "pair") v = delta_p_pair(t, p);
  else if (method == "block") v = delta_p_block(t, p);
  else if (method == "sample") v = delta_p_sample(t, p, samples, s.seed);
  else if (method == "classic") v = delta_classic(t);
  else fail(ErrorCode::InvalidParams, "unknown method \"" + method + "\"");
  Json j = {{"operator", op_ref}, {"projection", proj_ref}, {"coefficient", to_json(v)}};
  if (classic_check) {
    const CoefficientValue cl = delta_classic(t);
    j["classic"] = cl.value;
    j["difference"] = v.value - cl.value;
  }
  emit(c, j, "");
  return kOk;
}

int cmd_probe(const Common& c, const std::string& kind) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  DecayReport r;
  if (kind == "uniform") r = uniform_probe(spec.instance.chain, require_limit(spec), s.m, s.horizon, s.tol);
  else if (kind == "weak") r = weak_probe(spec.instance.chain, require_limit(spec), s.m, s.horizon, s.tol);
  else if (kind == "weak-seq") r = weak_wrt_sequence_probe(spec.instance.chain, require_seq(spec), s.m, s.horizon, s.tol);
  else fail(ErrorCode::InvalidParams, "probe kind must be uniform, weak or weak-seq");
  if (c.out.empty()) {
    std::cout << decay_csv(r);
  } else {
    emit(c, to_json(r), decay_csv(r));
  }
  return r.converged() ? kOk : kNotWithinHorizon;
}

int theorem_exit(const TheoremReport& r) {
  if (!r.hypotheses_passed()) return kFailure;
  return r.conclusion_passed ? kOk : kNotWithinHorizon;
}

int cmd_verify(const Common& c, const std::string& theorem) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  const std::string th = theorem.empty() ? analysis_value<std::string>(spec, "theorem", std::nullopt, "") : theorem;
  TheoremReport r;
  if (th == "4.1") {
    r = check_thm_4_1(spec.instance.chain, require_seq(spec), s.m, s.horizon, s.tol);
  } else if (th == "4.2") {
    r = check_thm_4_2(spec.instance.chain, require_seq(spec), require_limit(spec), s.horizon, s.tol, s.seed);
  } else if (th == "4.3") {
    const Index k = analysis_value<Index>(spec, "k", std::nullopt, 1);
    const double gamma = analysis_value<double>(spec, "gamma", std::nullopt, 0.5);
    r = check_thm_4_3(spec.instance.chain, require_seq(spec), require_limit(spec),
                      [k](Index) { return k; }, [gamma](Index) { return gamma; }, s.horizon, s.tol);
  } else if (th == "5.2") {
    ScalarRule eps = spec.instance.eps;
    if (spec.analysis.contains("eps")) eps = scalar_rule_from_json(spec.analysis["eps"]);
    if (!eps) fail(ErrorCode::InvalidParams, "theorem 5.2 needs analysis.eps or a family with a known rate");
    r = check_thm_5_2(spec.instance.chain, require_limit(spec), eps, s.horizon, s.tol);
  } else {
    fail(ErrorCode::InvalidParams, "--theorem must be 4.1, 4.2, 4.3 or 5.2");
  }
  emit(c, to_json(r), trace_csv(r.conclusion_trace));
  return theorem_exit(r);
}

int cmd_doeblin(const Common& c, Index k, double threshold) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  const MarkovProjection& p = require_limit(spec);
  Vector y0 = barycenter(spec.dim());
  if (spec.analysis.contains("y0")) y0 = parse_vector(spec.analysis["y0"], "$.analysis.y0");
  const DoeblinWitness w = build_witness(spec.instance.chain, p, k, y0, s.horizon, threshold);
  emit(c, to_json(w), "");
  return kOk;
}

int cmd_perturb(const Common& c, const std::string& other_path, Index q_window) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  std::optional<ChainSpec> other;
  if (!other_path.empty()) other = load_chain_spec(other_path);
  const Ndmc& t = spec.instance.chain;
  const Ndmc& sc = second_chain(spec, other);
  Json j;
  int code = kOk;
  if (spec.instance.seq) {
    std::optional<ProjectionSequence> seq_s = other ? other->instance.seq : spec.instance.seq_s;
    const TransferReport r = transfer_experiment(t, sc, *spec.instance.seq, s.m, s.horizon, seq_s, s.tol);
    j = to_json(r);
    if (!r.hypotheses_passed() || !r.perturbation.holds) code = kFailure;
    else if (!r.verified()) code = kNotWithinHorizon;
  } else {
    const PerturbationReport r = perturbation_bound(t, sc, s.m, s.horizon);
    j = {{"perturbation", to_json(r)}};
    if (!r.holds) code = kFailure;
  }
  if (q_window > 0) {
    const QProduct q = q_product(t, require_seq(spec), s.m, q_window);
    j["q_product"] = {{"m", s.m}, {"n", q_window}, {"norm", q.norm}, {"eq1_residual", q.eq1_residual}};
  }
  std::vector<std::pair<Index, double>> rows;
  const Json& pr = j.contains("perturbation") ? j["perturbation"] : j;
  Index n = s.m + 1;
  for (const auto& v : pr["r"]) rows.emplace_back(n++, v.get<double>());
  emit(c, j, trace_csv(rows));
  return code;
}

int cmd_metric(const Common& c, const std::string& other_path, Index truncation, bool lipschitz) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  std::optional<ChainSpec> other;
  if (!other_path.empty()) other = load_chain_spec(other_path);
  const Ndmc& sc = second_chain(spec, other);
  const ChainMetricValue d = chain_metric(spec.instance.chain, sc, truncation);
  Json j = {{"metric", to_json(d)}};
  int code = kOk;
  if (lipschitz) {
    const LipschitzReport l = phi_lipschitz_check(spec.instance.chain, sc, require_seq(spec), s.m, s.horizon, truncation);
    j["lipschitz"] = to_json(l);
    if (!l.holds()) code = kFailure;
  }
  emit(c, j, "");
  return code;
}

int cmd_densify(const Common& c, double eps, const std::string& mode) {
  const ChainSpec spec = load_chain_spec(c.spec);
  const Settings s = settings(spec, c);
  const Ndmc& t = spec.instance.chain;
  const double rate = 1.0 - eps / 2.0;
  std::vector<std::pair<Index, double>> rows;
  bool holds = true;
  Json j = {{"eps", eps}, {"mode", mode}, {"m", s.m}};
  std::optional<Ndmc> dense;
  if (mode == "sequence") {
    const ProjectionSequence& seq = require_seq(spec);
    dense = densify(t, seq, eps);
    for (Index n = s.m + 1; n <= s.horizon; ++n) {
      const double v = phi(*dense, seq, s.m, n);
      rows.emplace_back(n, v);
      if (v > std::pow(rate, static_cast<double>(n - s.m)) + 1e-9) holds = false;
    }
  } else if (mode == "uniform") {
    const MarkovProjection& p = require_limit(spec);
    dense = densify_uniform(t, p, eps);
    const DecayReport r = uniform_probe(*dense, p, s.m, s.horizon, s.tol);
    rows = r.rows;
    for (const auto& [n, v] : rows) {
      if (v > 2.0 * std::pow(rate, static_cast<double>(n - s.m)) + 1e-9) holds = false;
    }
  } else {
    fail(ErrorCode::InvalidParams, "--mode must be sequence or uniform");
  }
  const Index N = std::min<Index>(kDefaultTruncation, std::min(t.horizon(), dense->horizon()));
  const ChainMetricValue d = chain_metric(*dense, Ndmc(t.generators().with_horizon(dense->horizon())), N);
  j["distance"] = to_json(d);
  j["distance_below_eps"] = d.value < eps;
  j["rate"] = rate;
  j["rate_bound_holds"] = holds;
  j["trace"] = Json::array();
  for (const auto& [n, v] : rows) j["trace"].push_back({n, v});
  emit(c, j, trace_csv(rows));
  return holds ? kOk : kFailure;
}

Json instance_json(const FamilyInstance& inst, Index show) {
  Json j = {{"family", inst.name}, {"params", inst.params}, {"dimension", inst.dim()},
            {"horizon", inst.chain.horizon()}, {"notes", inst.notes}};
  Json gens = Json::array();
  for (Index n = 1; n <= std::min(show, inst.chain.horizon()); ++n) {
    gens.push_back(to_json(inst.chain.generators().at(n).matrix()));
  }
  j["generators"] = gens;
  if (inst.seq) {
    Json ps = Json::array();
    for (Index n = 1; n <= std::min(show, inst.seq->horizon()); ++n) ps.push_back(to_json(inst.seq->at(n).matrix()));
    j["projections"] = ps;
  }
  j["limit"] = inst.limit ? to_json(inst.limit->matrix()) : Json(nullptr);
  j["two_chain"] = inst.chain_s.has_value();
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"Generalized Dobrushin coefficients and ergodicity checks for non-homogeneous Markov chains"};
  app.require_subcommand(1);

  Common c;
  auto* validate = app.add_subcommand("validate", "validate a chain spec");
  validate->add_option("spec", c.spec, "chain spec (JSON)")->required();
  validate->add_option("--out", c.out, "write <out>.json");

  std::string op_ref = "T:1", proj_ref = "limit", method = "exact";
  bool classic_check = false;
  int samples = 2000;
  auto* coeff = app.add_subcommand("coeff", "coefficient delta_P of one operator");
  add_common(coeff, c);
  coeff->add_option("--op", op_ref, "T:n or window:k,n");
  coeff->add_option("--projection", proj_ref, "limit, identity or seq:N");
  coeff->add_option("--method", method, "exact, pair, block, sample or classic");
  coeff->add_option("--samples", samples, "random starts for --method sample");
  coeff->add_flag("--classic-check", classic_check, "also print the classic coefficient");

  std::string probe_kind = "uniform";
  auto* probe = app.add_subcommand("probe", "decay probe n -> value");
  add_common(probe, c);
  probe->add_option("--kind", probe_kind, "uniform, weak or weak-seq");

  std::string theorem;
  auto* verify = app.add_subcommand("verify", "check a theorem's hypotheses and conclusion");
  add_common(verify, c);
  verify->add_option("--theorem", theorem, "4.1, 4.2, 4.3 or 5.2");

  Index doeblin_k = 0;
  double threshold = 0.25;
  auto* doeblin = app.add_subcommand("doeblin", "build a Doeblin witness");
  add_common(doeblin, c);
  doeblin->add_option("--k", doeblin_k, "window start");
  doeblin->add_option("--threshold", threshold, "delta_P threshold for the window");

  std::string other;
  Index q_window = 0;
  auto* perturb = app.add_subcommand("perturb", "perturbation bound and ergodicity transfer");
  add_common(perturb, c);
  perturb->add_option("--other", other, "spec of the second chain");
  perturb->add_option("--q-window", q_window, "also report the Q-product over this many steps");

  Index truncation = kDefaultTruncation;
  bool lipschitz = false;
  auto* metric = app.add_subcommand("metric", "chain metric d(T, S)");
  add_common(metric, c);
  metric->add_option("--other", other, "spec of the second chain");
  metric->add_option("--N", truncation, "truncation");
  metric->add_flag("--lipschitz", lipschitz, "also check the Lipschitz bound of Phi_{m,horizon}");

  double eps = 0.4;
  std::string densify_mode = "sequence";
  auto* dens = app.add_subcommand("densify", "densified chain and its contraction rate");
  add_common(dens, c);
  dens->add_option("--eps", eps, "epsilon in (0, 1]");
  dens->add_option("--mode", densify_mode, "sequence or uniform");

  auto* family = app.add_subcommand("family", "parametric families");
  family->require_subcommand(1);
  auto* flist = family->add_subcommand("list", "list families and their defaults");
  std::string fname, fparams = "{}";
  Index show = 3;
  auto* finst = family->add_subcommand("instantiate", "instantiate a family");
  finst->add_option("name", fname, "family name")->required();
  finst->add_option("--params", fparams, "JSON object of parameters");
  finst->add_option("--show", show, "number of generators to print");
  finst->add_option("--out", c.out, "write <out>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*coeff) return cmd_coeff(c, op_ref, proj_ref, method, classic_check, samples);
    if (*probe) return cmd_probe(c, probe_kind);
    if (*verify) return cmd_verify(c, theorem);
    if (*doeblin) return cmd_doeblin(c, doeblin_k, threshold);
    if (*perturb) return cmd_perturb(c, other, q_window);
    if (*metric) return cmd_metric(c, other, truncation, lipschitz);
    if (*dens) return cmd_densify(c, eps, densify_mode);
    if (*flist) {
      Json j = Json::array();
      for (const auto& f : family_list()) {
        j.push_back({{"name", f.name}, {"description", f.description}, {"defaults", f.defaults}});
      }
      emit(c, j, "");
      return kOk;
    }
    if (*finst) {
      Json params;
      try {
        params = Json::parse(fparams);
      } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("--params: ") + e.what());
      }
      emit(c, instance_json(instantiate_family(fname, params), show), "");
      return kOk;
    }
  } catch (const Error& e) {
    std::cout << error_json(e).dump(2) << "\n";
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::NoWindowFound ? kNotWithinHorizon : kFailure;
  } catch (const std::exception& e) {
    std::cout << Json{{"error", {{"code", "InvalidParams"}, {"message", e.what()}}}}.dump(2) << "\n";
    std::cerr << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
