// qmat.hpp
// Dense complex linear algebra for multipartite quantum states.
//
// Index convention: subsystems are ordered left to right (A first, then
// B_1 ... B_n). A basis index is the row-major mixed-radix number of the
// subsystem digits, i.e. the last subsystem varies fastest.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qshare {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;
using Dims = std::vector<int>;

inline constexpr Index kDefaultMaxDim = 4096;

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double trace = 1e-9;
inline constexpr double psd = 1e-9;
inline constexpr double norm = 1e-12;
inline constexpr double eig_cutoff = 1e-12;
}  // namespace tol

enum class ErrorKind { invalid_argument, dimension_limit, not_hermitian, invariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Index total_dim(std::span<const int> dims, Index max_dim = kDefaultMaxDim) {
  Index d = 1;
  for (int k : dims) {
    if (k < 1) throw Error(ErrorKind::invalid_argument, "subsystem dimension must be positive");
    d *= k;
    if (d > max_dim) throw Error(ErrorKind::dimension_limit, "dimension limit");
  }
  return d;
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline double hermiticity_error(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
struct Spectrum {
  RealVector values;
  ComplexMatrix vectors;  // columns
};

/// Deterministic Hermitian eigensolver (Householder tridiagonalisation + QL).
inline Spectrum eigh(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || hermiticity_error(m) > tol::hermitian)
    throw Error(ErrorKind::not_hermitian, "not Hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  const Index n = h.rows();
  Spectrum s{RealVector(n), ComplexMatrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    s.values(i) = solver.eigenvalues()(n - 1 - i);
    s.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return s;
}

/// Eigenvalues only (ascending), no Hermiticity check. Hot-loop helper.
inline RealVector eigvalsh_unchecked(const ComplexMatrix& m) {
  if (m.rows() == 1) return RealVector::Constant(1, m(0, 0).real());
  if (m.rows() == 2) {
    const double a = m(0, 0).real(), d = m(1, 1).real();
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
    RealVector v(2);
    v << mid - rad, mid + rad;
    return v;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

class PureState;

/// Positive unit-trace Hermitian operator with a subsystem signature.
class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix m, Dims dims) : m_(std::move(m)), dims_(std::move(dims)) { validate(); }

  /// Skips the (cubic-cost) invariant check. For states valid by construction.
  static DensityMatrix assume_valid(ComplexMatrix m, Dims dims) {
    return DensityMatrix(std::move(m), std::move(dims), Unchecked{});
  }

  static DensityMatrix maximally_mixed(Dims dims) {
    const Index d = total_dim(dims);
    return assume_valid(ComplexMatrix::Identity(d, d) / static_cast<double>(d), std::move(dims));
  }

  static DensityMatrix from_pure(const PureState& psi);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  const Dims& dims() const noexcept { return dims_; }
  Index dim() const noexcept { return m_.rows(); }
  int parties() const noexcept { return static_cast<int>(dims_.size()); }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Dims dims, Unchecked) : m_(std::move(m)), dims_(std::move(dims)) {}

  void validate() const {
    if (dims_.empty()) throw Error(ErrorKind::invalid_argument, "dims must be non-empty");
    if (m_.rows() != m_.cols()) throw Error(ErrorKind::invariant, "density matrix must be square");
    if (total_dim(dims_) != m_.rows())
      throw Error(ErrorKind::invariant, "dims product does not match matrix side");
    if (!all_finite(m_)) throw Error(ErrorKind::invariant, "non-finite entry");
    if (hermiticity_error(m_) > tol::hermitian) throw Error(ErrorKind::not_hermitian, "not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > tol::trace)
      throw Error(ErrorKind::invariant, "trace must equal 1");
    if (eigh(m_).values.minCoeff() < -tol::psd)
      throw Error(ErrorKind::invariant, "density matrix has a negative eigenvalue");
  }

  ComplexMatrix m_;
  Dims dims_;
};

/// Normalised state vector with a subsystem signature.
class PureState {
 public:
  PureState(ComplexVector amplitudes, Dims dims) : v_(std::move(amplitudes)), dims_(std::move(dims)) {
    if (dims_.empty()) throw Error(ErrorKind::invalid_argument, "dims must be non-empty");
    if (total_dim(dims_) != v_.size())
      throw Error(ErrorKind::invariant, "dims product does not match vector length");
    if (!all_finite(v_)) throw Error(ErrorKind::invariant, "non-finite amplitude");
    if (std::abs(v_.norm() - 1.0) > tol::norm) throw Error(ErrorKind::invariant, "state is not normalised");
  }

  static PureState normalized(ComplexVector amplitudes, Dims dims) {
    const double n = amplitudes.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::invariant, "zero vector");
    amplitudes /= n;
    return PureState(std::move(amplitudes), std::move(dims));
  }

  /// Computational basis vector |index>.
  static PureState basis(Dims dims, Index index) {
    ComplexVector v = ComplexVector::Zero(total_dim(dims));
    v(index) = 1.0;
    return PureState(std::move(v), std::move(dims));
  }

  const ComplexVector& amplitudes() const noexcept { return v_; }
  const Dims& dims() const noexcept { return dims_; }
  Index dim() const noexcept { return v_.size(); }
  int parties() const noexcept { return static_cast<int>(dims_.size()); }

 private:
  ComplexVector v_;
  Dims dims_;
};

inline DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  ComplexMatrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return assume_valid(std::move(m), psi.dims());
}

inline Dims concat(const Dims& a, const Dims& b) {
  Dims out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Kronecker product, block-row ordering (a is the slow index).
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b, Index max_dim = kDefaultMaxDim) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (rows > max_dim || cols > max_dim) throw Error(ErrorKind::dimension_limit, "dimension limit");
  ComplexMatrix out(rows, cols);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b, Index max_dim = kDefaultMaxDim) {
  return DensityMatrix::assume_valid(tensor(a.matrix(), b.matrix(), max_dim), concat(a.dims(), b.dims()));
}

inline PureState tensor(const PureState& a, const PureState& b, Index max_dim = kDefaultMaxDim) {
  ComplexVector v = tensor(ComplexMatrix(a.amplitudes()), ComplexMatrix(b.amplitudes()), max_dim);
  return PureState::normalized(std::move(v), concat(a.dims(), b.dims()));
}

namespace detail {

inline std::vector<Index> strides(const Dims& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

/// Basis offsets contributed by every joint configuration of `subset`
/// (first listed subsystem most significant).
inline std::vector<Index> subset_offsets(const Dims& dims, std::span<const int> subset) {
  const auto st = strides(dims);
  std::vector<Index> out{0};
  for (int s : subset) {
    std::vector<Index> next;
    next.reserve(out.size() * dims[s]);
    for (Index base : out)
      for (int digit = 0; digit < dims[s]; ++digit) next.push_back(base + digit * st[s]);
    out = std::move(next);
  }
  return out;
}

inline std::vector<int> complement(int parties, std::span<const int> subset) {
  std::vector<int> out;
  for (int k = 0; k < parties; ++k)
    if (std::find(subset.begin(), subset.end(), k) == subset.end()) out.push_back(k);
  return out;
}

inline std::vector<int> normalize_subset(int parties, std::span<const int> subset) {
  std::vector<int> s(subset.begin(), subset.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (int k : s)
    if (k < 0 || k >= parties) throw Error(ErrorKind::invalid_argument, "no such subsystem");
  return s;
}

/// Basis permutation: entry i is the new index of old basis state i, where
/// new subsystem position p holds old subsystem order[p].
inline std::vector<Index> permutation_map(const Dims& dims, std::span<const int> order) {
  Dims new_dims;
  for (int k : order) new_dims.push_back(dims[k]);
  const auto new_st = strides(new_dims);
  const auto old_st = strides(dims);
  const Index d = total_dim(dims, std::numeric_limits<Index>::max());
  std::vector<Index> map(d);
  for (Index i = 0; i < d; ++i) {
    Index target = 0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      const int k = order[p];
      target += ((i / old_st[k]) % dims[k]) * new_st[p];
    }
    map[i] = target;
  }
  return map;
}

}  // namespace detail

/// Reorders subsystems: new position p holds old subsystem order[p].
inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, const Dims& dims, std::span<const int> order) {
  const auto map = detail::permutation_map(dims, order);
  const Index d = m.rows();
  ComplexMatrix out(d, m.cols());
  if (m.cols() == 1) {
    for (Index i = 0; i < d; ++i) out(map[i], 0) = m(i, 0);
    return out;
  }
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) out(map[i], map[j]) = m(i, j);
  return out;
}

inline Dims permute_dims(const Dims& dims, std::span<const int> order) {
  Dims out;
  for (int k : order) out.push_back(dims[k]);
  return out;
}

/// Reduced operator on `keep` (sorted into original order) of an operator on `dims`.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const Dims& dims, std::span<const int> keep) {
  const int parties = static_cast<int>(dims.size());
  const auto kept = detail::normalize_subset(parties, keep);
  if (kept.empty()) throw Error(ErrorKind::invalid_argument, "must keep at least one subsystem");
  const auto traced = detail::complement(parties, kept);
  const auto ko = detail::subset_offsets(dims, kept);
  const auto to = detail::subset_offsets(dims, traced);
  const Index dk = static_cast<Index>(ko.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Index j = 0; j < dk; ++j)
    for (Index i = 0; i < dk; ++i) {
      Complex acc = 0.0;
      for (Index t : to) acc += m(ko[i] + t, ko[j] + t);
      out(i, j) = acc;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const auto kept = detail::normalize_subset(rho.parties(), keep);
  ComplexMatrix r = partial_trace(rho.matrix(), rho.dims(), kept);
  Dims d;
  for (int k : kept) d.push_back(rho.dims()[k]);
  return DensityMatrix::assume_valid(std::move(r), std::move(d));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// Transposes the indices of `subsystems` only.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const Dims& dims, std::span<const int> subsystems) {
  const auto st = detail::strides(dims);
  const auto sub = detail::normalize_subset(static_cast<int>(dims.size()), subsystems);
  const Index d = m.rows();
  ComplexMatrix out(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      Index ii = i, jj = j;
      for (int k : sub) {
        const Index di = (i / st[k]) % dims[k];
        const Index dj = (j / st[k]) % dims[k];
        ii += (dj - di) * st[k];
        jj += (di - dj) * st[k];
      }
      out(ii, jj) = m(i, j);
    }
  return out;
}

/// Number of eigenvalues above the cutoff.
inline int numerical_rank(const Spectrum& s, double cutoff = tol::eig_cutoff) {
  return static_cast<int>((s.values.array() > cutoff).count());
}

/// Purification |psi> = sum_k sqrt(l_k) |e_k>|k> on dims ++ [rank].
inline PureState purify(const DensityMatrix& rho) {
  const Spectrum s = eigh(rho.matrix());
  const int r = numerical_rank(s);
  const Index d = rho.dim();
  ComplexVector v = ComplexVector::Zero(d * r);
  for (int k = 0; k < r; ++k) {
    const double w = std::sqrt(s.values(k));
    for (Index i = 0; i < d; ++i) v(i * r + k) = w * s.vectors(i, k);
  }
  Dims dims = rho.dims();
  dims.push_back(r);
  return PureState::normalized(std::move(v), std::move(dims));
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// (|00> + |11>)/sqrt(2).
inline PureState bell_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return PureState::normalized(std::move(v), {2, 2});
}

/// p |Phi><Phi| + (1-p) I/4.
inline DensityMatrix werner_state(double p) {
  if (!(p >= -1.0 / 3.0 - 1e-12 && p <= 1.0 + 1e-12))
    throw Error(ErrorKind::invalid_argument, "Werner parameter out of range");
  const auto bell = DensityMatrix::from_pure(bell_state());
  ComplexMatrix m = p * bell.matrix() + (1.0 - p) * ComplexMatrix::Identity(4, 4) / 4.0;
  return DensityMatrix(std::move(m), {2, 2});
}

}  // namespace qshare
