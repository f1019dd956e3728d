#pragma once

#include "qshare/qmat.hpp"

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace qshare {

/// Which side of the true value a reported number sits on.
enum class Direction { exact, upper, lower };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::exact: return "exact";
    case Direction::upper: return "upper";
    case Direction::lower: return "lower";
  }
  return "?";
}

/// A bipartition of the subsystems: `first` lists the first group, the
/// remaining subsystems form the second.
struct Cut {
  std::vector<int> first;

  static Cut of(std::initializer_list<int> s) { return Cut{std::vector<int>(s)}; }
  /// Subsystem 0 against everything else.
  static Cut first_party() { return Cut{{0}}; }

  /// Sorted first group and its complement; throws unless both are non-empty.
  std::pair<std::vector<int>, std::vector<int>> groups(int parties) const {
    std::vector<int> a = detail::normalize_subset(parties, first);
    std::vector<int> b = detail::complement(parties, a);
    if (a.empty() || b.empty()) throw Error(ErrorKind::invalid_argument, "bipartition must be non-trivial");
    return {std::move(a), std::move(b)};
  }
};

/// Finite POVM on one subsystem.
struct Povm {
  std::vector<ComplexMatrix> elements;
  int subsystem = 0;

  double completeness_error() const {
    if (elements.empty()) return std::numeric_limits<double>::infinity();
    ComplexMatrix sum = ComplexMatrix::Zero(elements.front().rows(), elements.front().cols());
    for (const auto& e : elements) sum += e;
    return (sum - ComplexMatrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : elements) m = std::min(m, eigh(e).values.minCoeff());
    return m;
  }
};

/// Weighted decomposition of a state; rank-1 members represent pure states.
struct Ensemble {
  std::vector<double> weights;
  std::vector<DensityMatrix> members;

  ComplexMatrix mixture() const {
    ComplexMatrix sum = ComplexMatrix::Zero(members.front().dim(), members.front().dim());
    for (std::size_t i = 0; i < members.size(); ++i) sum += weights[i] * members[i].matrix();
    return sum;
  }

  double deviation_from(const ComplexMatrix& target) const {
    return (mixture() - target).cwiseAbs().maxCoeff();
  }
};

/// Result of a multi-restart optimisation. `value` is in bits; `direction`
/// says whether it bounds the true optimum from above or below.
struct OptResult {
  double value = 0.0;
  std::variant<Povm, Ensemble> argument;
  int restarts_used = 0;
  double best_gap = 0.0;
  std::uint64_t seed = 0;
  Direction direction = Direction::exact;
};

}  // namespace qshare
