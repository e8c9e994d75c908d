#include "deltap/operators.hpp"
#include "deltap/projections.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace deltap;

namespace {
Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ParseError;
}
}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("markov validation") {
    CHECK(MarkovOperator::validate(Matrix::Identity(3, 3)).dim() == 3);
    CHECK_NOTHROW(MarkovOperator::validate(mat({{0.5, 0.5}, {0.5, 0.5}})));
    try {
      MarkovOperator::validate(mat({{1.0, 0.2}, {0.1, 0.8}}));
      FAIL("expected NotStochastic");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotStochastic);
      CHECK(std::string(e.what()).find("column 0") != std::string::npos);
    }
    CHECK(code_of([] { MarkovOperator::validate(mat({{1.2, 0.0}, {-0.2, 1.0}})); }) == ErrorCode::NegativeEntry);
    CHECK(code_of([] { MarkovOperator::validate(Matrix::Ones(2, 3) / 2.0); }) == ErrorCode::NotSquare);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK(code_of([&] { MarkovOperator::validate(bad); }) == ErrorCode::NonFinite);
  }

  TEST_CASE("row-stochastic input is rejected") {
    CHECK(code_of([] { MarkovOperator::validate(mat({{0.9, 0.1}, {0.3, 0.7}})); }) == ErrorCode::NotStochastic);
  }

  TEST_CASE("tiny defects are cleaned and reported") {
    Matrix m = mat({{0.5, 1.0}, {0.5, -1e-12}});
    const MarkovOperator op = MarkovOperator::validate(m);
    CHECK(op.adjustment().clamped_entries == 1);
    CHECK(op.matrix().minCoeff() >= 0.0);
    CHECK((op.matrix().colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("projection validation") {
    const MarkovProjection tz = MarkovProjection::validate(mat({{0.5, 0.5}, {0.5, 0.5}}));
    CHECK(tz.rank() == 1);
    const MarkovProjection id = MarkovProjection::validate(Matrix::Identity(4, 4));
    CHECK(id.rank() == 4);
    CHECK(id.is_identity());
    try {
      MarkovProjection::validate(mat({{0.9, 0.2}, {0.1, 0.8}}));
      FAIL("expected NotIdempotent");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotIdempotent);
    }
  }

  TEST_CASE("operator norm") {
    CHECK(op_norm(Matrix::Identity(3, 3)) == 1.0);
    CHECK(op_norm(Matrix::Zero(3, 3)) == 0.0);
    const Matrix a = Matrix::Identity(2, 2) - mat({{0.5, 0.5}, {0.5, 0.5}});
    CHECK(op_norm(a) == doctest::Approx(1.0));
    // dense sampling of the unit ball never exceeds the column-sum formula
    auto rng = testing_support::rng_for(3);
    for (int s = 0; s < 20; ++s) {
      const Matrix m = testing_support::random_markov(5, rng) - testing_support::random_markov(5, rng);
      const double norm = op_norm(m);
      std::normal_distribution<double> g;
      double best = 0.0;
      for (int k = 0; k < 2000; ++k) {
        Vector x(5);
        for (Index i = 0; i < 5; ++i) x(i) = g(rng);
        best = std::max(best, (m * x).cwiseAbs().sum() / x.cwiseAbs().sum());
      }
      CHECK(best <= norm + 1e-12);
    }
  }

  TEST_CASE("kernel basis") {
    const KernelBasis id = kernel_basis(MarkovProjection::validate(Matrix::Identity(3, 3)));
    CHECK(id.degenerate);
    CHECK(id.dim() == 0);

    const KernelBasis two = kernel_basis(MarkovProjection::validate(mat({{0.3, 0.3}, {0.7, 0.7}})));
    REQUIRE(two.dim() == 1);
    CHECK(std::abs(two.vectors(0, 0) + two.vectors(1, 0)) < 1e-14);

    Matrix p = Matrix::Zero(4, 4);
    p(0, 0) = p(0, 1) = 1.0;
    p(2, 2) = p(2, 3) = 1.0;
    const KernelBasis pairs = kernel_basis(MarkovProjection::validate(p));
    REQUIRE(pairs.dim() == 2);
    CHECK((p * pairs.vectors).cwiseAbs().maxCoeff() < 1e-14);
    // spans {(1,-1,0,0), (0,0,1,-1)}
    Matrix expect(4, 2);
    expect << 1, 0, -1, 0, 0, 1, 0, -1;
    Matrix both(4, 4);
    both << pairs.vectors, expect;
    CHECK(numerical_rank(both) == 2);
  }

  TEST_CASE("kernel invariance sides agree") {
    auto rng = testing_support::rng_for(11);
    for (int s = 0; s < 30; ++s) {
      const MarkovProjection p = testing_support::random_projection(5, 1 + s % 4, rng);
      const Matrix t = testing_support::random_sigma_p(p, rng);
      const KernelInvariance inv = kernel_invariance(t, p);
      CHECK(inv.kernel_residual < 1e-10);
      CHECK(inv.commutator_residual < 1e-10);
    }
  }
}
