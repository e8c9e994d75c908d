#pragma once

// Hand-rolled generators for property tests.

#include "deltap/dobrushin.hpp"
#include "deltap/statespace.hpp"
#include "deltap/families.hpp"
#include "deltap/ndmc.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace testing_support {

using deltap::Index;
using deltap::Matrix;
using deltap::Vector;

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + 17); }

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

// Random probability vector; roughly one entry in five is zero when sparse.
inline Vector random_distribution(Index n, std::mt19937_64& rng, bool sparse = false) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = (sparse && uniform(rng) < 0.2) ? 0.0 : uniform(rng, 0.01, 1.0);
  if (v.sum() == 0.0) v(uniform_index(rng, 0, n - 1)) = 1.0;
  return v / v.sum();
}

inline Matrix random_markov(Index n, std::mt19937_64& rng, bool sparse = true) {
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) m.col(j) = random_distribution(n, rng, sparse);
  return m;
}

// Random Markov projection of the given rank. Reps have disjoint supports;
// with `transient`, coordinates outside every support map to random
// mixtures of reps, so P is not a plain lumping.
inline Matrix random_markov_projection(Index n, Index rank, std::mt19937_64& rng, bool transient = true) {
  std::vector<Index> coords(static_cast<std::size_t>(n));
  std::iota(coords.begin(), coords.end(), Index{0});
  std::shuffle(coords.begin(), coords.end(), rng);
  const Index covered = transient ? uniform_index(rng, rank, n) : n;
  std::vector<std::vector<Index>> supports(static_cast<std::size_t>(rank));
  for (Index i = 0; i < covered; ++i) {
    const Index b = i < rank ? i : uniform_index(rng, 0, rank - 1);
    supports[static_cast<std::size_t>(b)].push_back(coords[static_cast<std::size_t>(i)]);
  }
  Matrix reps = Matrix::Zero(n, rank);
  for (Index b = 0; b < rank; ++b) {
    double total = 0.0;
    for (Index i : supports[static_cast<std::size_t>(b)]) total += reps(i, b) = uniform(rng, 0.05, 1.0);
    reps.col(b) /= total;
  }
  Matrix p(n, n);
  for (Index b = 0; b < rank; ++b) {
    for (Index i : supports[static_cast<std::size_t>(b)]) p.col(i) = reps.col(b);
  }
  for (Index i = covered; i < n; ++i) {
    p.col(coords[static_cast<std::size_t>(i)]) = reps * random_distribution(rank, rng);
  }
  return p;
}

inline deltap::MarkovProjection random_projection(Index n, Index rank, std::mt19937_64& rng,
                                                  bool transient = true) {
  return deltap::MarkovProjection::validate(random_markov_projection(n, rank, rng, transient));
}

// Random lumping projection with its block structure attached.
inline deltap::MarkovProjection random_lumping(Index n, Index rank, std::mt19937_64& rng) {
  std::vector<Index> coords(static_cast<std::size_t>(n));
  std::iota(coords.begin(), coords.end(), Index{0});
  std::shuffle(coords.begin(), coords.end(), rng);
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(rank));
  for (Index i = 0; i < n; ++i) {
    const Index b = i < rank ? i : uniform_index(rng, 0, rank - 1);
    blocks[static_cast<std::size_t>(b)].push_back(coords[static_cast<std::size_t>(i)]);
  }
  std::vector<Vector> reps;
  for (auto& b : blocks) {
    std::sort(b.begin(), b.end());
    Vector r = Vector::Zero(n);
    for (Index i : b) r(i) = uniform(rng, 0.05, 1.0);
    reps.push_back(r / r.sum());
  }
  return deltap::block_projection(blocks, reps);
}

// Markov operator commuting with P and fixing it: block Metropolis when P is
// a lumping, otherwise a mixture of P and I.
inline Matrix random_sigma_p(const deltap::MarkovProjection& p, std::mt19937_64& rng) {
  const Index n = p.dim();
  const double w = uniform(rng, 0.1, 0.9);
  if (p.block_structure()) {
    return w * deltap::random_block_operator(*p.block_structure(), rng) + (1.0 - w) * p.matrix();
  }
  return w * Matrix::Identity(n, n) + (1.0 - w) * p.matrix();
}

// Random chain of Markov operators, horizon h.
inline deltap::Ndmc random_chain(Index n, Index h, std::uint64_t seed) {
  return deltap::Ndmc(deltap::GeneratingSequence(
      [n, seed](Index k) {
        auto rng = rng_for(seed * 1000003ULL + static_cast<std::uint64_t>(k));
        return deltap::MarkovOperator::validate(random_markov(n, rng));
      },
      h));
}

}  // namespace testing_support
