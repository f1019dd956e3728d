#include "oracles.hpp"

#include "qshare/extension.hpp"
#include "qshare/monogamy.hpp"

#include <gtest/gtest.h>

using namespace qshare;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

const PureState kZero = PureState::basis({2}, 0);
const PureState kOne = PureState::basis({2}, 1);

SeparableDecomposition classical() { return {{0.5, 0.5}, {kZero, kOne}, {kZero, kOne}}; }

SeparableDecomposition random_separable(int terms, const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  SeparableDecomposition d;
  double total = 0.0;
  for (int i = 0; i < terms; ++i) {
    d.weights.push_back(rng.uniform(0.05, 1.0));
    total += d.weights.back();
    d.a_states.push_back(random_pure_state({dims[0]}, rng));
    d.b_states.push_back(random_pure_state({dims[1]}, rng));
  }
  for (double& w : d.weights) w /= total;
  return d;
}

/// Swaps B factors i and j (1-based positions in dims).
ComplexMatrix swap_b(const DensityMatrix& ext, int i, int j) {
  std::vector<int> order(ext.dims().size());
  std::iota(order.begin(), order.end(), 0);
  std::swap(order[i], order[j]);
  return permute_subsystems(ext.matrix(), ext.dims(), order);
}

}  // namespace

TEST(Build, SingleCopyReproducesTarget) {
  const auto d = random_separable(3, {2, 3}, 1);
  EXPECT_LT(max_abs(build(d, 1).matrix() - d.target().matrix()), 1e-15);
}

TEST(Build, ClassicallyCorrelatedThreeCopies) {
  const DensityMatrix ext = build(classical(), 3);
  ComplexMatrix expected = ComplexMatrix::Zero(16, 16);
  expected(0, 0) = expected(15, 15) = 0.5;
  EXPECT_EQ(ext.dims(), (Dims{2, 2, 2, 2}));
  EXPECT_LT(max_abs(ext.matrix() - expected), 1e-15);
  const Validation v = validate(ext, classical().target());
  EXPECT_TRUE(v.valid);
  EXPECT_EQ(v.deviation, 0.0);
}

TEST(Build, MaximallyMixedProductFourCopies) {
  const SeparableDecomposition d{{0.25, 0.25, 0.25, 0.25}, {kZero, kZero, kOne, kOne}, {kZero, kOne, kZero, kOne}};
  EXPECT_LT(max_abs(d.target().matrix() - ComplexMatrix::Identity(4, 4) / 4.0), 1e-15);
  const DensityMatrix ext = build(d, 4);
  ComplexMatrix copies = ComplexMatrix::Zero(16, 16);
  copies(0, 0) = copies(15, 15) = 0.5;
  EXPECT_LT(max_abs(ext.matrix() - oracle::kron(ComplexMatrix::Identity(2, 2) / 2.0, copies)), 1e-15);
  EXPECT_TRUE(validate(ext, d.target()).valid);
}

TEST(Build, DimensionLimit) {
  try {
    build(classical(), 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_limit);
    EXPECT_STREQ(e.what(), "dimension limit");
  }
}

TEST(Build, ValidatesForAllSmallNProperty) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto d = random_separable(2 + static_cast<int>(s), {2, 2}, s + 10);
    for (int n = 1; n <= 5; ++n) {
      const Validation v = validate(build(d, n), d.target());
      EXPECT_TRUE(v.valid) << n;
      EXPECT_LE(v.deviation, 1e-12);
    }
  }
}

TEST(Build, PermutationSymmetricProperty) {
  const DensityMatrix ext = build(random_separable(4, {2, 2}, 3), 4);
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) EXPECT_LE(max_abs(swap_b(ext, i, j) - ext.matrix()), 1e-12);
}

TEST(Decomposition, Checks) {
  SeparableDecomposition d = classical();
  EXPECT_EQ(d.deviation_from(d.target()), 0.0);
  d.weights = {0.6, 0.5};
  EXPECT_THROW(d.target(), Error);
  d.weights = {0.5};
  EXPECT_THROW(d.check_shape(), Error);
}

TEST(Validate, ProductPaddingIsInvalid) {
  const DensityMatrix rho = werner_state(0.8);
  const DensityMatrix ext = tensor(rho, partial_trace(rho, {1}));
  const Validation v = validate(ext, rho);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.k, 2);
  const ComplexMatrix product = oracle::kron(partial_trace(rho, {0}).matrix(), partial_trace(rho, {1}).matrix());
  EXPECT_NEAR(v.deviation, max_abs(product - rho.matrix()), 1e-15);
}

TEST(Validate, BellCannotBeShared) {
  const DensityMatrix bell = DensityMatrix::from_pure(bell_state());
  const Validation v = validate(tensor(bell, DensityMatrix::from_pure(kZero)), bell);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.k, 2);
  EXPECT_GT(v.deviation, 0.1);
}

TEST(Validate, ShapeMismatch) {
  const DensityMatrix ext = build(classical(), 2);
  try {
    validate(ext, DensityMatrix::maximally_mixed({2, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "shape mismatch");
  }
  EXPECT_THROW(validate(ext, DensityMatrix::maximally_mixed({4})), Error);
}

TEST(Validate, SelfConsistencyOnSymmetricStates) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dims dims{2, 2, 2};
    const ComplexMatrix sym = detail::symmetrize_b(random_state(dims, StateMeasure::hilbert_schmidt(), s).matrix(), dims);
    const DensityMatrix ext = DensityMatrix::assume_valid(sym, dims);
    EXPECT_TRUE(validate(ext, partial_trace(ext, {0, 1})).valid);
  }
}

TEST(Projections, SimplexAndMarginal) {
  RealVector v(4);
  v << 0.9, 0.4, -0.2, 0.1;
  const RealVector p = detail::project_to_simplex(v);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_NEAR(p(0) - p(1), 0.5, 1e-15);  // a common shift on the support

  const Dims dims{2, 2, 2, 2};
  const ComplexMatrix x = detail::symmetrize_b(random_state(dims, StateMeasure::hilbert_schmidt(), 4).matrix(), dims);
  const DensityMatrix target = random_state({2, 2}, StateMeasure::hilbert_schmidt(), 5);
  const ComplexMatrix y = detail::project_to_marginal(x, target.matrix(), dims);
  EXPECT_LT(detail::marginal_deviation(y, target.matrix(), dims), 1e-14);
  // the correction is orthogonal to every symmetric matrix with zero marginal
  const ComplexMatrix z = detail::symmetrize_b(random_state(dims, StateMeasure::hilbert_schmidt(), 6).matrix(), dims);
  const ComplexMatrix w = detail::project_to_marginal(z, ComplexMatrix::Zero(4, 4), dims);
  EXPECT_LT(detail::marginal_deviation(w, ComplexMatrix::Zero(4, 4), dims), 1e-14);
  EXPECT_LT(std::abs((y - x).cwiseProduct(w.conjugate()).sum()), 1e-12);
}

TEST(Search, SeparableTargetIsFound) {
  const auto d = random_separable(3, {2, 2}, 7);
  const SearchResult r = search_extension(d.target(), 3, 1);
  EXPECT_TRUE(r.found);
  ASSERT_TRUE(r.extension.has_value());
  EXPECT_LE(r.best_deviation, 1e-6);
  EXPECT_TRUE(validate(*r.extension, d.target(), 1e-6).valid);
  EXPECT_GE(eigh(r.extension->matrix()).values.minCoeff(), -1e-9);
  EXPECT_NEAR(r.extension->matrix().trace().real(), 1.0, 1e-9);

  const SearchResult c = search_extension(classical().target(), 3, 1);
  EXPECT_TRUE(c.found);
}

TEST(Search, BellIsNotTwoShareable) {
  const SearchResult r = search_extension(DensityMatrix::from_pure(bell_state()), 2, 1);
  EXPECT_FALSE(r.found);
  EXPECT_GE(r.best_deviation, 1e-2);
}

TEST(Search, DeterministicPerSeed) {
  const SearchResult a = search_extension(werner_state(0.5), 2, 3);
  const SearchResult b = search_extension(werner_state(0.5), 2, 3);
  ASSERT_TRUE(a.found && b.found);
  EXPECT_EQ(max_abs(a.extension->matrix() - b.extension->matrix()), 0.0);
  EXPECT_EQ(a.best_deviation, b.best_deviation);
}

TEST(Search, NeverReportsFoundAboveTolerance) {
  for (double p : {0.3, 0.5, 0.6, 0.65, 0.7, 0.9}) {
    const SearchResult r = search_extension(werner_state(p), 2, 1);
    if (r.found) {
      EXPECT_LE(r.best_deviation, 1e-6);
      EXPECT_TRUE(validate(*r.extension, werner_state(p), 1e-6).valid);
    } else {
      EXPECT_GT(r.best_deviation, 1e-6);
    }
  }
}

// A found n-extension must not contradict a resolved bound n_max < n.
TEST(Consistency, SearchAgreesWithBound) {
  const OptBudget budget{16, 400, 1e-7};
  std::vector<std::pair<DensityMatrix, int>> cases = {
      {werner_state(0.5), 2}, {werner_state(0.6), 2}, {werner_state(0.9), 2}, {random_separable(3, {2, 2}, 9).target(), 3}};
  for (const auto& [rho, n] : cases) {
    const SearchResult s = search_extension(rho, n, 1);
    const BoundReport b = sharability_bound(rho, budget, 1);
    if (s.found && b.n_max) EXPECT_GE(*b.n_max, n);
  }
}
