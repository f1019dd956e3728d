// random.hpp
// Seeded generators for test states. Everything here is a deterministic
// function of its seed; the samplers avoid std:: distributions so the
// streams are identical across standard library implementations.

#pragma once

#include "qshare/qmat.hpp"

#include <cstdint>
#include <numbers>
#include <random>

namespace qshare {

/// splitmix64 finaliser; used to derive independent child streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of child stream `index` of `seed`. Schedule-independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, cached pair).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  ComplexMatrix ginibre(Index rows, Index cols) {
    ComplexMatrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) g(i, j) = complex_normal();
    return g;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct StateMeasure {
  enum class Kind { haar_pure, hilbert_schmidt, rank_limited };
  Kind kind = Kind::hilbert_schmidt;
  int rank = 0;

  static StateMeasure haar_pure() { return {Kind::haar_pure, 1}; }
  static StateMeasure hilbert_schmidt() { return {Kind::hilbert_schmidt, 0}; }
  static StateMeasure rank_limited(int r) { return {Kind::rank_limited, r}; }
};

/// Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phases removed.
inline ComplexMatrix random_unitary(Index d, Rng& rng) {
  const ComplexMatrix g = rng.ginibre(d, d);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

inline PureState random_pure_state(const Dims& dims, Rng& rng) {
  const Index d = total_dim(dims);
  return PureState::normalized(rng.ginibre(d, 1), dims);
}

inline PureState random_pure_state(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure_state(dims, rng);
}

/// rho = G G^dagger / tr(G G^dagger) with G a D x K Ginibre matrix
/// (K = D for Hilbert-Schmidt, K = r for rank-limited, pure for K = 1).
inline DensityMatrix random_state(const Dims& dims, StateMeasure measure, Rng& rng) {
  const Index d = total_dim(dims);
  Index k = d;
  switch (measure.kind) {
    case StateMeasure::Kind::haar_pure: k = 1; break;
    case StateMeasure::Kind::hilbert_schmidt: k = d; break;
    case StateMeasure::Kind::rank_limited:
      if (measure.rank < 1) throw Error(ErrorKind::invalid_argument, "rank must be positive");
      if (measure.rank > d) throw Error(ErrorKind::invalid_argument, "rank exceeds dimension");
      k = measure.rank;
      break;
  }
  const ComplexMatrix g = rng.ginibre(d, k);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix(std::move(m), dims);
}

inline DensityMatrix random_state(const Dims& dims, StateMeasure measure, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(dims, measure, rng);
}

}  // namespace qshare
