// n-extensions rho_{A B_1 .. B_n}: explicit construction from a separable
// decomposition, marginal validation, and an alternating-projection search for
// B-permutation-symmetric extensions. Subsystem order is A, B_1, .., B_n.

#pragma once

#include "qshare/optimize.hpp"
#include "qshare/random.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace qshare {

/// rho_AB = sum_i p_i |a_i><a_i| (x) |b_i><b_i|.
struct SeparableDecomposition {
  std::vector<double> weights;
  std::vector<PureState> a_states;
  std::vector<PureState> b_states;

  Index da() const { return a_states.front().dim(); }
  Index db() const { return b_states.front().dim(); }

  /// Throws unless the lists are non-empty, aligned, and the weights form a distribution.
  void check_shape() const {
    if (weights.empty() || weights.size() != a_states.size() || weights.size() != b_states.size())
      throw Error(ErrorKind::invalid_argument, "decomposition lists must be non-empty and of equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0)) throw Error(ErrorKind::invariant, "decomposition weights must be non-negative");
      if (a_states[i].dim() != da() || b_states[i].dim() != db())
        throw Error(ErrorKind::invalid_argument, "decomposition states must share dimensions");
      total += weights[i];
    }
    if (std::abs(total - 1.0) > tol::trace) throw Error(ErrorKind::invariant, "decomposition weights must sum to 1");
  }

  DensityMatrix target() const {
    check_shape();
    ComplexMatrix m = ComplexMatrix::Zero(da() * db(), da() * db());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const ComplexVector v = tensor(a_states[i], b_states[i]).amplitudes();
      m += weights[i] * v * v.adjoint();
    }
    return DensityMatrix::assume_valid(std::move(m), {static_cast<int>(da()), static_cast<int>(db())});
  }

  /// Entrywise deviation from a declared state.
  double deviation_from(const DensityMatrix& declared) const {
    const DensityMatrix t = target();
    if (declared.dim() != t.dim()) return std::numeric_limits<double>::infinity();
    return (t.matrix() - declared.matrix()).cwiseAbs().maxCoeff();
  }
};

/// sum_i p_i |a_i><a_i| (x) (|b_i><b_i|)^{(x) n}.
inline DensityMatrix build(const SeparableDecomposition& decomp, int n, Index max_dim = kDefaultMaxDim) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be at least 1");
  decomp.check_shape();
  Dims dims{static_cast<int>(decomp.da())};
  for (int k = 0; k < n; ++k) dims.push_back(static_cast<int>(decomp.db()));
  const Index d = total_dim(dims, max_dim);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < decomp.weights.size(); ++i) {
    PureState v = decomp.a_states[i];
    for (int k = 0; k < n; ++k) v = tensor(v, decomp.b_states[i], max_dim);
    m.selfadjointView<Eigen::Lower>().rankUpdate(v.amplitudes(), decomp.weights[i]);
  }
  m = m.selfadjointView<Eigen::Lower>();
  return DensityMatrix::assume_valid(std::move(m), std::move(dims));
}

struct Validation {
  bool valid = false;
  int k = 0;               // first offending B index (1-based); 0 when valid
  double deviation = 0.0;  // offending deviation, or the maximum over k when valid
};

inline constexpr double kExtensionTol = 1e-8;

/// Compares every A:B_k marginal of `ext` with `target`.
inline Validation validate(const DensityMatrix& ext, const DensityMatrix& target, double tolerance = kExtensionTol) {
  if (target.parties() != 2 || ext.parties() < 2 || ext.dims()[0] != target.dims()[0])
    throw Error(ErrorKind::invalid_argument, "shape mismatch");
  for (int k = 1; k < ext.parties(); ++k)
    if (ext.dims()[k] != target.dims()[1]) throw Error(ErrorKind::invalid_argument, "shape mismatch");
  Validation v{true, 0, 0.0};
  for (int k = 1; k < ext.parties(); ++k) {
    const ComplexMatrix marginal = partial_trace(ext.matrix(), ext.dims(), std::vector<int>{0, k});
    const double dev = (marginal - target.matrix()).cwiseAbs().maxCoeff();
    if (dev > tolerance) return {false, k, dev};
    v.deviation = std::max(v.deviation, dev);
  }
  return v;
}

struct SearchOptions {
  int max_rounds = 2000;
  double change_tol = 1e-10;
  double found_tol = 1e-6;
  double support_cutoff = 1e-10;  // target eigenvalues at or below this count as its kernel
  Index max_dim = kDefaultMaxDim;
};

struct SearchResult {
  bool found = false;
  std::optional<DensityMatrix> extension;  // set when found
  double best_deviation = 0.0;              // max over k of |rho_{AB_k} - target|
  int rounds = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Average of X over all permutations of the B factors.
inline ComplexMatrix symmetrize_b(const ComplexMatrix& x, const Dims& dims) {
  std::vector<int> order(dims.size());
  std::iota(order.begin(), order.end(), 0);
  ComplexMatrix sum = ComplexMatrix::Zero(x.rows(), x.cols());
  int count = 0;
  do {
    sum += permute_subsystems(x, dims, order);
    ++count;
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return sum / static_cast<double>(count);
}

/// Euclidean projection of a probability-like vector onto the simplex.
inline RealVector project_to_simplex(const RealVector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

/// Nearest positive unit-trace matrix in Frobenius norm.
inline ComplexMatrix project_to_states(const ComplexMatrix& x) {
  const Spectrum s = eigh(0.5 * (x + x.adjoint()));
  const RealVector w = project_to_simplex(s.values);
  return s.vectors * w.asDiagonal() * s.vectors.adjoint();
}

/// Y on A B_k, identity elsewhere.
inline ComplexMatrix embed_pair(const ComplexMatrix& y, const Dims& dims, int k) {
  const Index rest = total_dim(dims) / y.rows();
  const ComplexMatrix full = tensor(y, ComplexMatrix::Identity(rest, rest));
  // full is ordered (A, B_k, others...); move B_k back to position k
  std::vector<int> order(dims.size());
  order[0] = 0;
  for (int p = 1, src = 2; p < static_cast<int>(dims.size()); ++p) order[p] = p == k ? 1 : src++;
  Dims arranged{dims[0], dims[k]};
  for (int p = 1; p < static_cast<int>(dims.size()); ++p)
    if (p != k) arranged.push_back(dims[p]);
  return permute_subsystems(full, arranged, order);
}

/// Frobenius projection of a B-symmetric X onto {symmetric X : rho_{AB_1}(X) = target}.
inline ComplexMatrix project_to_marginal(const ComplexMatrix& x, const ComplexMatrix& target, const Dims& dims) {
  const int n = static_cast<int>(dims.size()) - 1;
  const Index da = dims[0], db = dims[1];
  const ComplexMatrix delta = target - partial_trace(x, dims, std::vector<int>{0, 1});
  const ComplexMatrix delta_a = partial_trace(delta, {static_cast<int>(da), static_cast<int>(db)}, std::vector<int>{0});
  const double dpow1 = std::pow(static_cast<double>(db), n - 1);
  const double dpow2 = n >= 2 ? std::pow(static_cast<double>(db), n - 2) : 0.0;
  const ComplexMatrix ya = delta_a / (n * dpow1);
  const ComplexMatrix y = (delta - (n - 1) * dpow2 * tensor(ya, ComplexMatrix::Identity(db, db))) / dpow1;
  ComplexMatrix out = x;
  for (int k = 1; k <= n; ++k) out += embed_pair(y, dims, k);
  return out;
}

inline double marginal_deviation(const ComplexMatrix& x, const ComplexMatrix& target, const Dims& dims) {
  double dev = 0.0;
  for (int k = 1; k < static_cast<int>(dims.size()); ++k)
    dev = std::max(dev, (partial_trace(x, dims, std::vector<int>{0, k}) - target).cwiseAbs().maxCoeff());
  return dev;
}

/// Orthonormal basis of the only subspace an extension can live in: every
/// A:B_k marginal must be supported on supp(target), so the extension is
/// supported on the intersection of supp(target)_{AB_k} (x) I over k.
inline ComplexMatrix extension_support(const ComplexMatrix& target, const Dims& dims, double cutoff) {
  const Spectrum s = eigh(target);
  const int r = numerical_rank(s, cutoff);
  const Index d = total_dim(dims);
  if (r == target.rows()) return ComplexMatrix::Identity(d, d);
  const ComplexMatrix proj = s.vectors.leftCols(r) * s.vectors.leftCols(r).adjoint();
  const int n = static_cast<int>(dims.size()) - 1;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (int k = 1; k <= n; ++k) sum += embed_pair(proj, dims, k);
  const Spectrum t = eigh(0.5 * (sum + sum.adjoint()));
  Index keep = 0;
  while (keep < d && t.values(keep) > n - 1e-9) ++keep;
  return t.vectors.leftCols(keep);
}

}  // namespace detail

/// Alternating projections between {positive, unit trace, B-symmetric} and
/// {rho_{AB_k} = target for all k}, from a seeded random start. A not-found
/// outcome is evidence, not a proof of non-extendibility.
inline SearchResult search_extension(const DensityMatrix& target, int n, std::uint64_t seed = 0,
                                     const SearchOptions& opts = {}) {
  if (target.parties() != 2) throw Error(ErrorKind::invalid_argument, "bipartite target required");
  if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be at least 1");
  Dims dims{target.dims()[0]};
  for (int k = 0; k < n; ++k) dims.push_back(target.dims()[1]);
  total_dim(dims, opts.max_dim);

  SearchResult res;
  res.seed = seed;
  Rng rng(seed);
  const ComplexMatrix q = detail::extension_support(target.matrix(), dims, opts.support_cutoff);
  if (q.cols() == 0) {
    res.best_deviation = target.matrix().cwiseAbs().maxCoeff();
    return res;
  }
  // positivity is imposed inside span(q); states outside it cannot have the target marginals
  auto to_states = [&](const ComplexMatrix& x) -> ComplexMatrix {
    return q * detail::project_to_states(q.adjoint() * x * q) * q.adjoint();
  };
  ComplexMatrix state =
      to_states(detail::symmetrize_b(random_state(dims, StateMeasure::hilbert_schmidt(), rng).matrix(), dims));
  for (int round = 1; round <= opts.max_rounds; ++round) {
    res.rounds = round;
    const ComplexMatrix affine = detail::project_to_marginal(state, target.matrix(), dims);
    const ComplexMatrix next = to_states(detail::symmetrize_b(affine, dims));
    const double change = (next - state).cwiseAbs().maxCoeff();
    state = next;
    if (change < opts.change_tol) break;
  }
  res.best_deviation = detail::marginal_deviation(state, target.matrix(), dims);
  if (res.best_deviation <= opts.found_tol) {
    DensityMatrix ext = DensityMatrix::assume_valid(0.5 * (state + state.adjoint()), dims);
    const Validation post = validate(ext, target, opts.found_tol);
    if (post.valid) {
      res.found = true;
      res.extension = std::move(ext);
    }
  }
  return res;
}

}  // namespace qshare
