#include "deltap/dobrushin.hpp"
#include "deltap/families.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace deltap;
using namespace testing_support;

namespace {
Matrix pair_block(Index n) {
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; i += 2) {
    p(i, i) = p(i, i + 1) = 1.0;
  }
  return p;
}
}  // namespace

TEST_SUITE("dobrushin") {
  TEST_CASE("classic coefficient") {
    CHECK(delta_classic(Matrix::Identity(2, 2)).value == 1.0);
    CHECK(delta_classic(Matrix::Constant(3, 3, 1.0 / 3.0)).value == doctest::Approx(0.0));
    Matrix t(2, 2);
    t << 0.9, 0.2, 0.1, 0.8;
    CHECK(delta_classic(t).value == doctest::Approx(0.7));
    CHECK(delta_p_exact(t, one_dim_projection(Vector::Constant(2, 0.5))).value == doctest::Approx(0.7));
  }

  TEST_CASE("classic coefficient against the overlap form") {
    auto rng = rng_for(21);
    for (int s = 0; s < 100; ++s) {
      const Matrix t = random_markov(2 + s % 6, rng);
      CHECK(delta_classic(t).value == doctest::Approx(oracles::delta_overlap(t)).epsilon(1e-12));
    }
  }

  TEST_CASE("exact method edge values") {
    const MarkovProjection id = MarkovProjection::validate(Matrix::Identity(3, 3));
    auto rng = rng_for(1);
    const CoefficientValue conv = delta_p_exact(random_markov(3, rng), id);
    CHECK(conv.value == 1.0);
    CHECK(std::holds_alternative<std::monostate>(conv.certificate));

    const MarkovProjection p = MarkovProjection::validate(pair_block(4));
    CHECK(delta_p_exact(p.matrix(), p).value == doctest::Approx(0.0));
    Matrix avg = Matrix::Zero(4, 4);
    avg.block(0, 0, 2, 2).setConstant(0.5);
    avg.block(2, 2, 2, 2).setConstant(0.5);
    CHECK(delta_p_exact(avg, p).value < 1e-15);
    CHECK(delta_p_exact(Matrix::Identity(4, 4), p).value == doctest::Approx(1.0));
    CHECK(delta_p_pair(Matrix::Identity(4, 4), p).value == doctest::Approx(1.0));
    CHECK(delta_p_pair(p.matrix(), p).value == doctest::Approx(0.0));
  }

  TEST_CASE("exact and pair methods agree with the active-set oracle") {
    auto rng = rng_for(2);
    for (int s = 0; s < 200; ++s) {
      const Index n = 2 + s % 7;
      const Index rank = 1 + uniform_index(rng, 0, n - 2);
      const MarkovProjection p = random_projection(n, rank, rng);
      const Matrix t = random_markov(n, rng);
      const double oracle = oracles::delta_active_set(t, p.matrix());
      const CoefficientValue exact = delta_p_exact(t, p);
      const CoefficientValue pair = delta_p_pair(t, p);
      CHECK(exact.value == doctest::Approx(oracle).epsilon(1e-9));
      CHECK(pair.value == doctest::Approx(exact.value).epsilon(1e-9));
      CHECK(replay_certificate(t, exact) == doctest::Approx(exact.value).epsilon(1e-10));
      CHECK(replay_certificate(t, pair) == doctest::Approx(pair.value).epsilon(1e-10));
      CHECK(oracles::delta_ball_sample(t, p.matrix(), 200, rng) <= exact.value + 1e-10);
      CHECK(exact.value <= delta_classic(t).value + 1e-9);
    }
  }

  TEST_CASE("rank-one projections give the classic coefficient") {
    auto rng = rng_for(4);
    for (int s = 0; s < 50; ++s) {
      const Index n = 2 + s % 6;
      const Matrix t = random_markov(n, rng);
      const MarkovProjection p = one_dim_projection(random_distribution(n, rng, true));
      CHECK(delta_p_exact(t, p).value == doctest::Approx(delta_classic(t).value).epsilon(1e-9));
    }
  }

  TEST_CASE("block closed form") {
    auto rng = rng_for(6);
    const std::vector<std::vector<Index>> whole{{0, 1, 2, 3}};
    const Matrix t = random_markov(4, rng);
    CHECK(delta_p_block(t, whole, {Vector::Constant(4, 0.25)}).value ==
          doctest::Approx(delta_classic(t).value));
    std::vector<std::vector<Index>> singles{{0}, {1}, {2}};
    std::vector<Vector> reps{basis_vector(3, 0), basis_vector(3, 1), basis_vector(3, 2)};
    CHECK(delta_p_block(random_markov(3, rng), singles, reps).value == 1.0);

    const std::vector<std::vector<Index>> halves{{0, 1, 2}, {3, 4, 5}};
    std::vector<Vector> hreps{Vector::Zero(6), Vector::Zero(6)};
    hreps[0].head(3).setConstant(1.0 / 3.0);
    hreps[1].tail(3).setConstant(1.0 / 3.0);
    const MarkovProjection p = block_projection(halves, hreps);
    for (int s = 0; s < 30; ++s) {
      const Matrix tb = random_sigma_p(p, rng);
      CHECK(delta_p_block(tb, p).value == doctest::Approx(delta_p_exact(tb, p).value).epsilon(1e-9));
      const Matrix tg = random_markov(6, rng);
      CHECK(delta_p_block(tg, p).value == doctest::Approx(delta_p_exact(tg, p).value).epsilon(1e-9));
    }
  }

  TEST_CASE("block closed form against the oracle on random lumpings") {
    auto rng = rng_for(8);
    for (int s = 0; s < 100; ++s) {
      const Index n = 2 + s % 7;
      const MarkovProjection p = random_lumping(n, 1 + uniform_index(rng, 0, n - 1), rng);
      const Matrix t = random_markov(n, rng);
      CHECK(delta_p_block(t, p).value == doctest::Approx(oracles::delta_active_set(t, p.matrix())).epsilon(1e-9));
    }
  }

  TEST_CASE("sampling is a lower bound") {
    const MarkovProjection p = MarkovProjection::validate(pair_block(4));
    const CoefficientValue v = delta_p_sample(Matrix::Identity(4, 4), p, 1000, 7);
    CHECK(v.bound_only);
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(delta_p_sample(p.matrix(), p, 100, 0).value == doctest::Approx(0.0));
    auto rng = rng_for(9);
    for (int s = 0; s < 40; ++s) {
      const Index n = 3 + s % 4;
      const MarkovProjection q = random_projection(n, 1 + s % (n - 1), rng);
      const Matrix t = random_markov(n, rng);
      CHECK(delta_p_sample(t, q, 100, static_cast<std::uint64_t>(s)).value <= delta_p_exact(t, q).value + 1e-10);
    }
    try {
      delta_p_sample(Matrix::Identity(3, 3), MarkovProjection::validate(Matrix::Identity(3, 3)), 10, 0);
      FAIL("expected DegenerateKernel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateKernel);
    }
  }

  TEST_CASE("sampling is reproducible") {
    auto rng = rng_for(10);
    const MarkovProjection p = random_projection(5, 2, rng);
    const Matrix t = random_markov(5, rng);
    CHECK(delta_p_sample(t, p, 300, 42).value == delta_p_sample(t, p, 300, 42).value);
  }

  TEST_CASE("certificates are deterministic") {
    auto rng = rng_for(12);
    const MarkovProjection p = random_projection(6, 3, rng);
    const Matrix t = random_markov(6, rng);
    const CoefficientValue a = delta_p_exact(t, p);
    const CoefficientValue b = delta_p_exact(t, p);
    CHECK(std::get<Vector>(a.certificate) == std::get<Vector>(b.certificate));
  }

  TEST_CASE("dimension guard") {
    const Index n = 15;
    const MarkovProjection p = one_dim_projection(Vector::Constant(n, 1.0 / n));
    try {
      delta_p_exact(Matrix::Identity(n, n), p);
      FAIL("expected DimensionTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionTooLarge);
    }
  }

  TEST_CASE("pair decomposition") {
    auto rng = rng_for(13);
    for (int s = 0; s < 50; ++s) {
      const Index n = 3 + s % 5;
      const MarkovProjection p = random_projection(n, 1 + s % (n - 1), rng);
      const Vector x = (Matrix::Identity(n, n) - p.matrix()) * random_distribution(n, rng) * uniform(rng, 0.1, 3.0);
      const PairDecomposition d = pair_decomposition(x, p);
      CHECK((d.alpha * (d.u - d.v) - x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(d.alpha == doctest::Approx(x.cwiseAbs().sum() / 2.0));
      CHECK(d.u.minCoeff() >= 0.0);
      CHECK(d.u.sum() == doctest::Approx(1.0));
      CHECK((p.matrix() * (d.u - d.v)).cwiseAbs().maxCoeff() < 1e-10);
    }
    const MarkovProjection p = one_dim_projection(Vector::Constant(3, 1.0 / 3.0));
    CHECK_THROWS_AS(pair_decomposition(basis_vector(3, 0), p), Error);
  }

  TEST_CASE("law suite on commuting instances") {
    auto rng = rng_for(14);
    for (int s = 0; s < 40; ++s) {
      const Index n = 3 + s % 3;
      const MarkovProjection p = random_lumping(n, 1 + s % (n - 1), rng);
      const MarkovOperator t = MarkovOperator::validate(random_markov(n, rng));
      const MarkovOperator sm = MarkovOperator::validate(random_sigma_p(p, rng));
      const Matrix h = s % 2 ? Matrix(p.matrix()) : Matrix((Matrix::Identity(n, n) - p.matrix()) * random_markov(n, rng));
      const LawReport r = check_coefficient_laws(t, sm, h, p);
      for (const auto& l : r.laws) {
        if (l.applicable) CHECK_MESSAGE(l.slack >= -1e-9, l.law);
      }
      CHECK(r.find("vi")->applicable);
      CHECK(r.find("weak-submultiplicative")->applicable);
      CHECK(r.find(s % 2 ? "iv" : "v")->applicable);
    }
  }

  TEST_CASE("identical operators give zero on the difference law") {
    auto rng = rng_for(15);
    const MarkovProjection p = random_lumping(4, 2, rng);
    const MarkovOperator t = MarkovOperator::validate(random_markov(4, rng));
    const LawReport r = check_coefficient_laws(t, t, p.matrix(), p);
    CHECK(r.find("ii")->lhs == 0.0);
  }

  TEST_CASE("laws are skipped for the identity projection") {
    auto rng = rng_for(16);
    const MarkovProjection id = MarkovProjection::validate(Matrix::Identity(3, 3));
    const MarkovOperator t = MarkovOperator::validate(random_markov(3, rng));
    const LawReport r = check_coefficient_laws(t, t, Matrix::Identity(3, 3), id);
    CHECK_FALSE(r.find("ii")->applicable);
    CHECK(r.find("ii")->note.find("HypothesisNotMet") == 0);
  }

  TEST_CASE("projection order is monotone") {
    auto rng = rng_for(17);
    for (int s = 0; s < 40; ++s) {
      FamilyInstance inst = nested_block_chain(5, static_cast<std::uint64_t>(s), 10);
      const Matrix t = random_markov(5, rng);
      std::vector<ProjectionPair> pairs;
      for (Index j = 2; j <= 4; ++j) pairs.push_back({inst.seq->at(j), inst.seq->at(1)});
      const LawReport r = check_coefficient_laws(MarkovOperator::validate(t), MarkovOperator::validate(t),
                                                 inst.seq->at(1).matrix(), inst.seq->at(1), kDefaultTol, pairs);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const LawCheck* l = r.find("PQl[" + std::to_string(i) + "]");
        REQUIRE(l != nullptr);
        CHECK(l->applicable);
        CHECK(l->slack >= -1e-10);
      }
    }
  }
}
