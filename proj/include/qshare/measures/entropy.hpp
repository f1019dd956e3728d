// Closed-form measures: von Neumann entropy, pure-state entanglement,
// two-qubit concurrence and entanglement of formation, and the partial
// transpose test. All entropies are in bits.

#pragma once

#include "qshare/measures/types.hpp"

#include <numbers>

namespace qshare {

namespace detail {

inline constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

/// -x log2 x with eigenvalues below the cutoff treated as 0.
inline double neg_xlog2x(double x) { return x > tol::eig_cutoff ? -x * std::log2(x) : 0.0; }

/// phi(X) = tr(X) S(X / tr X) for an unnormalised PSD spectrum.
/// Homogeneous of degree one; vanishes for zero-weight operators.
inline double phi_of_spectrum(const RealVector& mu) {
  double p = 0.0, s = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) > tol::eig_cutoff) {
      p += mu(i);
      s += neg_xlog2x(mu(i));
    }
  }
  return p > 0.0 ? s + p * std::log2(p) : 0.0;
}

inline double phi(const ComplexMatrix& x) { return phi_of_spectrum(eigvalsh_unchecked(x)); }

/// phi(X) and its gradient (-log X + log(tr X) I) / ln 2.
inline double phi_with_gradient(const ComplexMatrix& x, ComplexMatrix& grad) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
  const RealVector& mu = es.eigenvalues();
  const double p = std::max(x.trace().real(), 1e-300);
  RealVector coeff(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    coeff(i) = (std::log(p) - std::log(std::max(mu(i), 1e-30))) * kInvLn2;
  grad = es.eigenvectors() * coeff.asDiagonal() * es.eigenvectors().adjoint();
  return phi_of_spectrum(mu);
}

/// Reorders subsystems so `first` precedes its complement.
struct BipartiteView {
  ComplexMatrix matrix;
  Index da = 1, db = 1;
  std::vector<int> order;  // new position -> original subsystem
  Dims dims;               // reordered dims
};

inline BipartiteView bipartite_view(const ComplexMatrix& m, const Dims& dims, const Cut& cut) {
  auto [a, b] = cut.groups(static_cast<int>(dims.size()));
  BipartiteView v;
  v.order = a;
  v.order.insert(v.order.end(), b.begin(), b.end());
  v.matrix = permute_subsystems(m, dims, v.order);
  v.dims = permute_dims(dims, v.order);
  for (int k : a) v.da *= dims[k];
  for (int k : b) v.db *= dims[k];
  return v;
}

inline std::vector<int> inverse_order(const std::vector<int>& order) {
  std::vector<int> inv(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) inv[order[p]] = static_cast<int>(p);
  return inv;
}

}  // namespace detail

/// S(rho) = -tr rho log2 rho.
inline double entropy(const DensityMatrix& rho) {
  const RealVector mu = eigvalsh_unchecked(rho.matrix());
  double s = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) s += detail::neg_xlog2x(mu(i));
  return std::max(0.0, s);
}

inline double binary_entropy(double x) { return detail::neg_xlog2x(x) + detail::neg_xlog2x(1.0 - x); }

/// E(phi) = S(tr_second |phi><phi|) across `cut`.
inline double pure_entanglement(const PureState& psi, const Cut& cut) {
  const auto view = detail::bipartite_view(ComplexMatrix(psi.amplitudes()), psi.dims(), cut);
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> coeffs(view.matrix.data(), view.da, view.db);
  const ComplexMatrix gram = view.da <= view.db ? ComplexMatrix(coeffs * coeffs.adjoint())
                                                : ComplexMatrix(coeffs.transpose() * coeffs.conjugate());
  return std::max(0.0, detail::phi(gram));
}

namespace detail {
inline void require_two_qubits(const DensityMatrix& rho) {
  if (rho.dims() != Dims{2, 2}) throw Error(ErrorKind::invalid_argument, "two-qubit only");
}
}  // namespace detail

/// Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the singular values
/// of sqrt(rho) (Y x Y) sqrt(rho)^*.
inline double concurrence_2q(const DensityMatrix& rho) {
  detail::require_two_qubits(rho);
  const Spectrum s = eigh(rho.matrix());
  RealVector root = s.values.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix sqrt_rho = s.vectors * root.asDiagonal() * s.vectors.adjoint();
  const ComplexMatrix yy = tensor(pauli_y(), pauli_y());
  const ComplexMatrix r = sqrt_rho * yy * sqrt_rho.conjugate();
  Eigen::JacobiSVD<ComplexMatrix> svd(r);
  const RealVector& l = svd.singularValues();  // descending
  return std::max(0.0, l(0) - l(1) - l(2) - l(3));
}

/// Entanglement of formation of a two-qubit state, h((1 + sqrt(1 - C^2)) / 2).
inline double eof_2q(const DensityMatrix& rho) {
  const double c = std::min(1.0, concurrence_2q(rho));
  return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

enum class Separability { entangled, separable, indeterminate };

inline std::string_view to_string(Separability s) {
  switch (s) {
    case Separability::entangled: return "entangled";
    case Separability::separable: return "separable";
    case Separability::indeterminate: return "indeterminate";
  }
  return "?";
}

/// Positive-partial-transpose test on the second group of `cut`. Decisive
/// for 2x2 and 2x3; larger systems without a negative eigenvalue are
/// reported as indeterminate.
inline Separability ppt_entangled(const DensityMatrix& rho, const Cut& cut) {
  const auto [a, b] = cut.groups(rho.parties());
  const ComplexMatrix pt = partial_transpose(rho.matrix(), rho.dims(), b);
  if (eigvalsh_unchecked(0.5 * (pt + pt.adjoint())).minCoeff() < -tol::psd) return Separability::entangled;
  Index da = 1, db = 1;
  for (int k : a) da *= rho.dims()[k];
  for (int k : b) db *= rho.dims()[k];
  if (da == 1 || db == 1 || da * db <= 6) return Separability::separable;
  return Separability::indeterminate;
}

}  // namespace qshare
