// Executable monogamy checks: the Koashi-Winter duality for pure tripartite
// states, the single-step inequality E_f(A:BC) >= E_f(A:B) + G<-(A:C), its
// iteration over an n-extension, and the shareability bound
// N = floor(S(rho_A) / G<-(rho_AB)).

#pragma once

#include "qshare/measures.hpp"

#include <numeric>
#include <optional>

namespace qshare {

/// Best available E_f value with its direction tag.
struct EofValue {
  double value = 0.0;
  Direction direction = Direction::exact;
};

/// Wootters when both sides of `cut` are single qubits, the convex roof otherwise.
inline EofValue best_eof(const DensityMatrix& rho, const Cut& cut, const OptBudget& budget, std::uint64_t seed,
                         const RoofOptions& opts = {}) {
  const auto [a, b] = cut.groups(rho.parties());
  if (a.size() == 1 && b.size() == 1 && rho.dims()[a[0]] == 2 && rho.dims()[b[0]] == 2) {
    const DensityMatrix ordered =
        a[0] == 0 ? rho
                  : DensityMatrix::assume_valid(permute_subsystems(rho.matrix(), rho.dims(), std::vector<int>{1, 0}),
                                                rho.dims());
    return {eof_2q(ordered), Direction::exact};
  }
  const OptResult r = eof_convex_roof(rho, cut, budget, seed, opts);
  return {r.value, r.direction};
}

struct DualityReport {
  double s_a = 0.0;
  double eof_ab = 0.0;
  double cc_ac = 0.0;
  double residual = 0.0;  // s_a - eof_ab - cc_ac
  Direction eof_direction = Direction::exact;
  Direction cc_direction = Direction::lower;
};

namespace detail {
inline void require_tripartite(const Dims& dims) {
  if (dims.size() != 3) throw Error(ErrorKind::invalid_argument, "tripartite state required");
}
}  // namespace detail

/// S(rho_A) = E_f(A:B) + C<-(A:C) for pure |phi>_ABC; the residual is signed.
inline DualityReport duality_check(const PureState& phi, const OptBudget& budget, std::uint64_t seed = 0) {
  detail::require_tripartite(phi.dims());
  const DensityMatrix rho = DensityMatrix::from_pure(phi);
  DualityReport r;
  r.s_a = entropy(partial_trace(rho, {0}));
  const EofValue ef = best_eof(partial_trace(rho, {0, 1}), Cut::first_party(), budget, derive_seed(seed, 1));
  r.eof_ab = ef.value;
  r.eof_direction = ef.direction;
  r.cc_ac = classical_correlation(partial_trace(rho, {0, 2}), 1, budget, derive_seed(seed, 2)).value;
  r.residual = r.s_a - r.eof_ab - r.cc_ac;
  return r;
}

struct StepReport {
  double eof_a_bc = 0.0;
  double eof_a_b = 0.0;
  double g_a_c = 0.0;
  double slack = 0.0;  // eof_a_bc - eof_a_b - g_a_c
  Direction eof_ab_direction = Direction::exact;
};

/// E_f(A:BC) - E_f(A:B) - G<-(A:C) from best-found estimates. The first and
/// last terms are upper estimates, so a small negative slack is optimizer noise.
inline StepReport monogamy_step(const DensityMatrix& rho, const OptBudget& budget, std::uint64_t seed = 0) {
  detail::require_tripartite(rho.dims());
  StepReport r;
  r.eof_a_bc = eof_convex_roof(rho, Cut::first_party(), budget, derive_seed(seed, 1)).value;
  const EofValue ab = best_eof(partial_trace(rho, {0, 1}), Cut::first_party(), budget, derive_seed(seed, 2));
  r.eof_a_b = ab.value;
  r.eof_ab_direction = ab.direction;
  r.g_a_c = g_arrow(partial_trace(rho, {0, 2}), 1, budget, derive_seed(seed, 3)).value;
  r.slack = r.eof_a_bc - r.eof_a_b - r.g_a_c;
  return r;
}

inline double monogamy_step_check(const DensityMatrix& rho, const OptBudget& budget, std::uint64_t seed = 0) {
  return monogamy_step(rho, budget, seed).slack;
}

/// Largest deviation between the A:B_k marginals of an extension and A:B_1.
inline double marginal_spread(const DensityMatrix& ext) {
  const ComplexMatrix first = partial_trace(ext.matrix(), ext.dims(), std::vector<int>{0, 1});
  double dev = 0.0;
  for (int k = 2; k < ext.parties(); ++k) {
    if (ext.dims()[k] != ext.dims()[1]) return std::numeric_limits<double>::infinity();
    dev = std::max(dev, (partial_trace(ext.matrix(), ext.dims(), std::vector<int>{0, k}) - first).cwiseAbs().maxCoeff());
  }
  return dev;
}

struct ChainReport {
  int n = 0;
  double s_a = 0.0;
  double g_arrow_ab = 0.0;
  double margin = 0.0;  // s_a - n * g_arrow_ab
  /// Advisory E_f(A:B_1..B_k) upper estimates, k = 1..n; empty entries were skipped.
  std::vector<std::optional<double>> eof_prefix;
  /// Advisory E_f(A:B_1..B_k) - E_f(A:B_1..B_{k-1}) - G<-(A:B); the k = 1 entry uses E_f(A:B_1) - G<-.
  std::vector<std::optional<double>> step_slacks;
};

struct ChainOptions {
  Index advisory_max_dim = 64;  // skip advisory E_f above this total dimension
  int advisory_max_members = 16;
};

/// Checks S(rho_A) >= n G<-(A:B) on an extension rho_{A B_1 .. B_n}.
inline ChainReport chain_verify(const DensityMatrix& ext, const OptBudget& budget, std::uint64_t seed = 0,
                                const ChainOptions& opts = {}) {
  if (ext.parties() < 2) throw Error(ErrorKind::invalid_argument, "extension needs A and at least one B");
  if (marginal_spread(ext) > 1e-8) throw Error(ErrorKind::invariant, "not a valid extension: unequal A:B_k marginals");
  ChainReport r;
  r.n = ext.parties() - 1;
  r.s_a = entropy(partial_trace(ext, {0}));
  const DensityMatrix ab = partial_trace(ext, {0, 1});
  r.g_arrow_ab = g_arrow(ab, 1, budget, derive_seed(seed, 1)).value;
  r.margin = r.s_a - r.n * r.g_arrow_ab;

  const OptBudget advisory = budget.nested();
  std::optional<double> previous = 0.0;
  for (int k = 1; k <= r.n; ++k) {
    std::vector<int> keep(k + 1);
    std::iota(keep.begin(), keep.end(), 0);
    const DensityMatrix prefix = k == r.n ? ext : partial_trace(ext, keep);
    std::optional<double> ef;
    if (prefix.dim() <= opts.advisory_max_dim)
      ef = best_eof(prefix, Cut::first_party(), advisory, derive_seed(seed, 100 + k),
                    RoofOptions{opts.advisory_max_members})
               .value;
    r.eof_prefix.push_back(ef);
    r.step_slacks.push_back(ef && previous ? std::optional<double>(*ef - *previous - r.g_arrow_ab) : std::nullopt);
    previous = ef;
  }
  return r;
}

enum class BoundStatus { bounded, separable, unreliable };

inline std::string_view to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::bounded: return "bounded";
    case BoundStatus::separable: return "separable";
    case BoundStatus::unreliable: return "bound unreliable: G<- below optimizer resolution";
  }
  return "?";
}

struct BoundReport {
  double s_a = 0.0;
  double g_arrow_ab = 0.0;
  std::optional<int> n_max;  // empty means unbounded
  Separability verdict = Separability::indeterminate;
  BoundStatus status = BoundStatus::bounded;
  /// Distance of s_a / g_arrow_ab to the nearest integer; signed (ratio - n_max) on a tie.
  std::optional<double> margin;
  bool tie = false;
};

struct BoundOptions {
  double g_floor = 2e-3;
  double tie_tol = 1e-6;
};

inline BoundReport sharability_bound(const DensityMatrix& rho, const OptBudget& budget, std::uint64_t seed = 0,
                                     const BoundOptions& opts = {}) {
  if (rho.parties() != 2) throw Error(ErrorKind::invalid_argument, "bipartite state required");
  BoundReport r;
  r.s_a = entropy(partial_trace(rho, {0}));
  r.verdict = ppt_entangled(rho, Cut::first_party());
  r.g_arrow_ab = g_arrow(rho, 1, budget, seed).value;
  if (r.g_arrow_ab > 0.0) {
    const double ratio = r.s_a / r.g_arrow_ab;
    const double nearest = std::round(ratio);
    r.margin = std::abs(ratio - nearest);
    if (std::abs(ratio - nearest) <= opts.tie_tol) {
      r.tie = true;
      r.margin = ratio - nearest;
    }
  }
  if (r.verdict == Separability::separable) {
    r.status = BoundStatus::separable;
    return r;
  }
  if (r.g_arrow_ab < opts.g_floor) {
    r.status = BoundStatus::unreliable;
    return r;
  }
  const double ratio = r.s_a / r.g_arrow_ab;
  r.n_max = static_cast<int>(r.tie ? std::round(ratio) : std::floor(ratio));
  return r;
}

}  // namespace qshare
