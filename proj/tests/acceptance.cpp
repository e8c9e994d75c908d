// Acceptance checks, one per criterion. Each prints a single PASS/FAIL line.
//   acceptance --criterion N     (N = 1..11; without the flag all run)

#include "deltap/io.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace deltap;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. exact = pair, sample below exact, rank one = classic
Outcome criterion_1() {
  auto rng = rng_for(101);
  std::vector<MarkovProjection> projections;
  for (int j = 0; j < 20; ++j) {
    const Index rank = 1 + j % 4;
    projections.push_back(j % 2 ? random_lumping(5, rank, rng) : random_projection(5, rank, rng));
  }
  std::vector<KernelPolytope> kp;
  std::vector<PairPolytope> pp;
  for (const auto& p : projections) {
    kp.push_back(kernel_polytope(p));
    pp.push_back(pair_polytope(p));
  }
  double worst_pair = 0.0, worst_sample = -1.0, worst_classic = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Matrix t = MarkovOperator::validate(random_markov(5, rng, i % 3 == 0)).matrix();
    const double classic = delta_classic(t).value;
    for (std::size_t j = 0; j < projections.size(); ++j) {
      const double exact = delta_p_exact(t, kp[j]).value;
      worst_pair = std::max(worst_pair, std::abs(exact - delta_p_pair(t, pp[j]).value));
      if (projections[j].rank() == 1) worst_classic = std::max(worst_classic, std::abs(exact - classic));
    }
    const std::size_t j = static_cast<std::size_t>(i % 20);
    const double sample = delta_p_sample(t, projections[j], 64, static_cast<std::uint64_t>(i)).value;
    worst_sample = std::max(worst_sample, sample - delta_p_exact(t, kp[j]).value);
  }
  const bool pass = worst_pair <= 1e-9 && worst_sample <= 1e-10 && worst_classic <= 1e-9;
  return {pass, "max|exact-pair| " + num(worst_pair) + ", max(sample-exact) " + num(worst_sample) +
                    ", max|exact-classic| " + num(worst_classic)};
}

// 2. coefficient laws and the kernel invariance equivalence
Outcome criterion_2() {
  auto rng = rng_for(202);
  int violations = 0;
  int checked = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Index n = 3 + s % 3;
    const Index rank = 1 + s % (n - 1);
    const MarkovProjection p = s % 2 ? random_lumping(n, rank, rng) : random_projection(n, rank, rng);
    const MarkovOperator t = MarkovOperator::validate(random_markov(n, rng));
    const MarkovOperator sm = MarkovOperator::validate(random_sigma_p(p, rng));
    const Matrix h = s % 4 < 2 ? Matrix(random_sigma_p(p, rng))
                               : Matrix((Matrix::Identity(n, n) - p.matrix()) * random_markov(n, rng));
    const LawReport r = check_coefficient_laws(t, sm, h, p);
    for (const char* law : {"i", "ii", "iv", "v", "vi", "weak-submultiplicative"}) {
      const LawCheck* l = r.find(law);
      if (!l || !l->applicable) continue;
      ++checked;
      worst = std::min(worst, l->slack);
      if (l->slack < -1e-9) ++violations;
    }
    if (!r.find("vi")->applicable || !r.find("weak-submultiplicative")->applicable) ++violations;
    if (!r.find(s % 4 < 2 ? "iv" : "v")->applicable) ++violations;
  }

  int iff_failures = 0;
  for (int s = 0; s < 50; ++s) {
    const Index n = 4 + s % 2;
    const MarkovProjection p = random_projection(n, 1 + s % (n - 1), rng);
    const double w = uniform(rng, 0.1, 0.9);
    const Matrix inside = (1.0 - w) * random_markov(n, rng) * p.matrix() + w * random_sigma_p(p, rng);
    const KernelInvariance yes = kernel_invariance(inside, p);
    if (!(yes.kernel_residual < 1e-10 && yes.commutator_residual < 1e-10)) ++iff_failures;
    // a rank-one P has PT = P = PTP for every Markov T, so the generic side
    // uses rank at least two
    const MarkovProjection q = random_projection(n, 2 + s % (n - 2), rng);
    const KernelInvariance no = kernel_invariance(random_markov(n, rng, false), q);
    if (!(no.kernel_residual > 1e-8 && no.commutator_residual > 1e-8)) ++iff_failures;
  }
  return {violations == 0 && iff_failures == 0,
          std::to_string(checked) + " law checks, min slack " + num(worst) + ", " + std::to_string(violations) +
              " violations; kernel-invariance disagreements " + std::to_string(iff_failures) + "/100"};
}

// 3. delta_Q <= delta_P for P <=l Q along every shipped sequence family
Outcome criterion_3() {
  auto rng = rng_for(303);
  double worst = std::numeric_limits<double>::infinity();
  int pairs_checked = 0;
  int families = 0;
  for (const auto& info : family_list()) {
    Json params = Json::object();
    params["horizon"] = 10;
    const FamilyInstance inst = instantiate_family(info.name, params);
    std::vector<const ProjectionSequence*> seqs;
    if (inst.seq) seqs.push_back(&*inst.seq);
    if (inst.seq_s) seqs.push_back(&*inst.seq_s);
    if (seqs.empty()) continue;
    ++families;
    for (const ProjectionSequence* seq : seqs) {
      std::vector<ProjectionPair> pairs;
      for (Index i = 1; i <= 6; ++i) {
        for (Index j = i + 1; j <= 7; ++j) pairs.push_back({seq->at(j), seq->at(i)});
      }
      for (int k = 0; k < 4; ++k) {
        const MarkovOperator t = k == 0 ? inst.chain.generators().at(1)
                                        : MarkovOperator::validate(random_markov(inst.dim(), rng));
        const LawReport r = check_coefficient_laws(t, t, Matrix::Identity(inst.dim(), inst.dim()), seq->at(1),
                                                   kDefaultTol, pairs);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          const LawCheck* l = r.find("PQl[" + std::to_string(i) + "]");
          if (!l->applicable) {
            if (l->note.find("Q = I") == std::string::npos) worst = -1.0;  // order violated
            continue;
          }
          ++pairs_checked;
          worst = std::min(worst, l->slack);
        }
      }
    }
  }
  return {worst >= -1e-10, std::to_string(families) + " families, " + std::to_string(pairs_checked) +
                               " ordered pairs, min slack " + num(worst)};
}

// 4. mixture bound 2 (1 - a)^n and convergence of the uniform probe
Outcome criterion_4() {
  const FamilyInstance mix = instantiate_family("mixture", Json::parse(R"({"a": 0.3})"));
  double worst = std::numeric_limits<double>::infinity();
  for (Index n = 1; n <= 30; ++n) {
    const double measured = op_norm(Matrix(mix.chain.window(0, n) - mix.limit->matrix()));
    worst = std::min(worst, 2.0 * std::pow(0.7, static_cast<double>(n)) - measured);
  }
  const DecayReport probe = uniform_probe(mix.chain, *mix.limit, 0, 30, 1e-8);
  const std::string first = probe.first_below_tol ? std::to_string(*probe.first_below_tol) : "none";
  return {worst >= -1e-12 && probe.converged(),
          "min(bound - measured) " + num(worst) + ", probe " + std::string(to_string(probe.classification)) +
              ", first n below 1e-8: " + first};
}

// 5. r-contraction Q-product norm against 0.5^n
Outcome criterion_5() {
  const FamilyInstance rc = r_contraction(4, 0.25, 60);
  double worst_expected = 0.0;
  double worst_two_rn = 0.0;
  for (Index n = 1; n <= 20; ++n) {
    const double norm = q_product(rc.chain, *rc.seq, 0, n).norm;
    worst_expected = std::max(worst_expected, std::abs(norm - std::pow(0.5, static_cast<double>(n))));
    worst_two_rn = std::max(worst_two_rn, std::abs(norm - 2.0 * std::pow(0.25, static_cast<double>(n))));
  }
  const DecayReport weak = weak_wrt_sequence_probe(rc.chain, *rc.seq, 0, 40);
  const bool pass = worst_expected <= 1e-9 && weak.converged();
  return {pass, "max|norm - 0.5^n| " + num(worst_expected) + " (measured norm is 2*0.25^n, max dev " +
                    num(worst_two_rn) + "); weak-seq probe " + std::string(to_string(weak.classification))};
}

// 6. Q-product identity on block chains
Outcome criterion_6() {
  double worst_ratio = 0.0;
  int products = 0;
  auto scan = [&](const Ndmc& chain, const ProjectionSequence& seq) {
    for (Index m = 0; m <= 2; m += 2) {
      for (Index n = 1; n <= 15; ++n) {
        const double r = q_product(chain, seq, m, n).eq1_residual;
        worst_ratio = std::max(worst_ratio, r / (1e-12 * static_cast<double>(n)));
        ++products;
      }
    }
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FamilyInstance ex = example_6_7(5, seed, 0.5, 20);
    scan(ex.chain, *ex.seq);
    scan(*ex.chain_s, *ex.seq_s);
  }
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const FamilyInstance nb = nested_block_chain(4 + static_cast<Index>(seed % 3), seed, 20);
    scan(nb.chain, *nb.seq);
  }
  return {worst_ratio <= 1.0, std::to_string(products) + " products, max residual / (1e-12 n) " + num(worst_ratio)};
}

// 7. perturbation bound on random pairs
Outcome criterion_7() {
  int violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Index h = 15;
    Ndmc t = random_chain(3 + static_cast<Index>(s % 3), h, s);
    auto rng = rng_for(s + 7000);
    const double w = uniform(rng, 0.0, 0.5);
    const Index d = t.dim();
    const Ndmc s_chain(t.generators().map([&, d](Index n, const Matrix& m) -> Matrix {
      auto local = rng_for(s * 131 + static_cast<std::uint64_t>(n));
      return (1.0 - w / static_cast<double>(n)) * m + (w / static_cast<double>(n)) * random_markov(d, local);
    }));
    const PerturbationReport rep = perturbation_bound(t, s_chain, static_cast<Index>(s % 4), h);
    worst = std::min(worst, rep.slack);
    if (!rep.holds) ++violations;
  }
  return {violations == 0, "50 pairs, " + std::to_string(violations) + " violations, min slack " + num(worst)};
}

// 8. Doeblin witnesses on the mixture family
Outcome criterion_8() {
  const FamilyInstance mix = instantiate_family("mixture", Json::object());
  bool ok = true;
  double worst_residual = std::numeric_limits<double>::infinity();
  double worst_phi = 0.0;
  double worst_gap = -1.0;
  for (Index k = 0; k <= 10; ++k) {
    try {
      const DoeblinWitness w = build_witness(mix.chain, *mix.limit, k, barycenter(mix.dim()), 60);
      worst_residual = std::min(worst_residual, w.residual);
      worst_phi = std::max(worst_phi, w.phi_norm);
      worst_gap = std::max(worst_gap, w.delta - witness_to_mu(w));
      ok = ok && w.lambda == 1.0 && w.phi_norm <= 0.5 && w.residual >= -1e-9 && w.delta <= witness_to_mu(w) + 1e-9;
    } catch (const Error& e) {
      return {false, "k = " + std::to_string(k) + ": " + e.what()};
    }
  }
  return {ok, "k = 0..10, lambda 1, max |phi| " + num(worst_phi) + ", min residual " + num(worst_residual) +
                  ", max(delta - mu) " + num(worst_gap)};
}

// 9. metric axioms, densification and the Lipschitz bound
Outcome criterion_9() {
  double worst_triangle = std::numeric_limits<double>::infinity();
  bool axioms = true;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Index d = 3 + static_cast<Index>(s % 2);
    const Ndmc a = random_chain(d, 40, 3 * s);
    const Ndmc b = random_chain(d, 40, 3 * s + 1);
    const Ndmc c = random_chain(d, 40, 3 * s + 2);
    const double ab = chain_metric(a, b).value, bc = chain_metric(b, c).value, ac = chain_metric(a, c).value;
    worst_triangle = std::min({worst_triangle, ab + bc - ac, ab + ac - bc, ac + bc - ab});
    axioms = axioms && chain_metric(a, a).value == 0.0 && ab == chain_metric(b, a).value && ab > 0.0;
  }
  axioms = axioms && worst_triangle >= -1e-12;

  bool dense = true;
  double max_d = 0.0;
  double worst_rate = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 10; ++s) {
    const FamilyInstance nb = nested_block_chain(5, s, 40);
    const Ndmc sd = densify(nb.chain, *nb.seq, 0.4);
    const double dist = chain_metric(sd, nb.chain).value;
    max_d = std::max(max_d, dist);
    dense = dense && dist < 0.4;
    for (Index n = 1; n <= 15; ++n) {
      worst_rate = std::min(worst_rate, std::pow(0.8, static_cast<double>(n)) - phi(sd, *nb.seq, 0, n));
    }
  }
  dense = dense && worst_rate >= -1e-12;

  int lip_fail = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const FamilyInstance nb = nested_block_chain(4, 500 + s, 40);
    const ProjectionSequence seq = *nb.seq;
    auto rng = rng_for(s + 900);
    const double w = uniform(rng, 0.0, 0.5);
    const Ndmc other(nb.chain.generators().map([&](Index n, const Matrix& m) -> Matrix {
      return n % 3 == 0 ? (1.0 - w) * m + w * seq.at(n).matrix() : m;
    }));
    const LipschitzReport rep = phi_lipschitz_check(nb.chain, other, seq, 0, 1 + static_cast<Index>(s % 10));
    if (!rep.holds_metric) ++lip_fail;
  }
  return {axioms && dense && lip_fail == 0,
          "triangle min slack " + num(worst_triangle) + "; densify max d " + num(max_d) +
              ", min(0.8^n - Phi) " + num(worst_rate) + "; Lipschitz failures " + std::to_string(lip_fail) + "/50"};
}

// 10. theorem checkers on the merging pairs chain
Outcome criterion_10() {
  const FamilyInstance ex = example_5_5(3, 4, 40);
  const TheoremReport t41 = check_thm_4_1(ex.chain, *ex.seq, 0, 40);
  const TheoremReport t52 = check_thm_5_2(ex.chain, *ex.limit, ex.eps, 40);
  const TheoremReport t43 = check_thm_4_3(
      ex.chain, *ex.seq, *ex.limit, [](Index) { return Index{1}; }, [](Index) { return 0.5; }, 40);
  const double residual = t43.metrics.at("identity_residual");
  const bool pass = t41.verified() && t52.verified() && residual <= 1e-10;
  return {pass, std::string("4.1 ") + (t41.verified() ? "verified" : "not verified") + ", 5.2 " +
                    (t52.verified() ? "verified" : "not verified") + ", 4.3 identity residual " + num(residual)};
}

// 11. byte-identical CLI output across two runs
Outcome criterion_11() {
  const std::string cli = DELTAP_CLI;
  const std::string dir = DELTAP_SPEC_DIR;
  auto s = [&](const char* name) { return dir + "/" + name; };
  std::vector<std::string> commands;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    commands.push_back("validate " + entry.path().string());
  }
  std::sort(commands.begin(), commands.end());
  const std::vector<std::string> more = {
      "coeff " + s("mixture.json") + " --op T:1 --seed 0",
      "coeff " + s("mixture.json") + " --op window:0,3 --method pair --seed 0",
      "coeff " + s("explicit_pair_blocks.json") + " --op T:2 --method block --seed 0",
      "coeff " + s("mixture.json") + " --op T:1 --method sample --samples 64 --seed 0",
      "coeff " + s("mixture.json") + " --op T:2 --method classic --seed 0",
      "probe " + s("mixture.json") + " --seed 0",
      "probe " + s("mixture.json") + " --kind weak --seed 0",
      "probe " + s("r_contraction.json") + " --kind weak-seq --seed 0",
      "verify " + s("example_5_5.json") + " --seed 0",
      "verify " + s("example_5_5.json") + " --theorem 4.3 --seed 0",
      "verify " + s("commuting_perturbation.json") + " --seed 0",
      "verify " + s("explicit_pair_blocks.json") + " --seed 0",
      "doeblin " + s("mixture.json") + " --k 2 --seed 0",
      "perturb " + s("example_6_7.json") + " --seed 0",
      "perturb " + s("alpha_beta.json") + " --seed 0",
      "metric " + s("example_6_7.json") + " --lipschitz --seed 0",
      "densify " + s("lce1.json") + " --eps 0.4 --seed 0",
      "densify " + s("mixture.json") + " --mode uniform --eps 0.4 --seed 0",
      "family list",
      "family instantiate mixture --show 2",
  };
  commands.insert(commands.end(), more.begin(), more.end());

  const auto tmp = std::filesystem::temp_directory_path();
  auto capture = [&](const std::string& args, int tag, int& code) {
    const auto path = tmp / ("deltap_acceptance_" + std::to_string(tag) + ".out");
    const std::string cmd = cli + " " + args + " > " + path.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };
  int differing = 0;
  int crashed = 0;
  std::string first_bad;
  for (const auto& c : commands) {
    int c1 = 0, c2 = 0;
    const std::string a = capture(c, 1, c1);
    const std::string b = capture(c, 2, c2);
    if (a != b || c1 != c2) {
      ++differing;
      if (first_bad.empty()) first_bad = c;
    }
    if (c1 > 2 || c1 < 0 || a.empty()) ++crashed;
  }
  std::string detail = std::to_string(commands.size()) + " commands, " + std::to_string(differing) +
                       " differing, " + std::to_string(crashed) + " abnormal";
  if (!first_bad.empty()) detail += "; first: " + first_bad;
  return {differing == 0 && crashed == 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
      criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criterion" && i + 1 < argc) which.push_back(std::atoi(argv[++i]));
  }
  if (which.empty()) {
    for (int i = 1; i <= 11; ++i) which.push_back(i);
  }
  bool all = true;
  for (int c : which) {
    if (c < 1 || c > 11) {
      std::cerr << "unknown criterion " << c << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
