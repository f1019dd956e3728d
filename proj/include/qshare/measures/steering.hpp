// Ensemble parametrisation by measurements on the purifying system.
//
// For rho = sum_k l_k |e_k><e_k| of rank r, an isometry V (m x r, V^dag V = I)
// defines m unnormalised vectors psi_j = sum_k V_jk sqrt(l_k) e_k with
// sum_j |psi_j><psi_j| = rho. Grouping rows of V assigns vectors to ensemble
// members; every ensemble of rho arises this way for large enough m.
// V is the polar factor of an unconstrained complex matrix M, so the search
// runs over M's real and imaginary parts without constraints.

#pragma once

#include "qshare/measures/entropy.hpp"
#include "qshare/random.hpp"

namespace qshare::detail {

/// V = M (M^dag M)^{-1/2} and the adjoint of its derivative.
/// Parameter layout: real parts of M (column-major), then imaginary parts.
class PolarMap {
 public:
  PolarMap(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  Index size() const { return 2 * rows_ * cols_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  const ComplexMatrix& forward(const RealVector& x) {
    const Index n = rows_ * cols_;
    m_.resize(rows_, cols_);
    for (Index i = 0; i < n; ++i) m_.data()[i] = Complex(x(i), x(n + i));
    const ComplexMatrix gram = m_.adjoint() * m_;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
    w_ = es.eigenvectors();
    p_ = es.eigenvalues().cwiseMax(1e-300);
    q_ = w_ * p_.cwiseSqrt().cwiseInverse().asDiagonal() * w_.adjoint();
    v_ = m_ * q_;
    return v_;
  }

  /// Given G = df/d conj(V) at the last forward point, returns df/dx.
  RealVector backward(const ComplexMatrix& g) const {
    const Index r = cols_;
    RealVector isq = p_.cwiseSqrt().cwiseInverse();
    ComplexMatrix l(r, r);
    for (Index a = 0; a < r; ++a)
      for (Index b = 0; b < r; ++b) {
        const double den = p_(a) - p_(b);
        if (a == b || std::abs(den) < 1e-14 * std::max(p_(a), p_(b)))
          l(a, b) = -0.5 * isq(a) / p_(a);
        else
          l(a, b) = (isq(a) - isq(b)) / den;
      }
    const ComplexMatrix x = w_.adjoint() * g.adjoint() * m_ * w_;
    const ComplexMatrix rr = w_ * l.cwiseProduct(x) * w_.adjoint();
    const ComplexMatrix gamma = g * q_ + m_ * (rr + rr.adjoint());
    const Index n = rows_ * cols_;
    RealVector out(2 * n);
    for (Index i = 0; i < n; ++i) {
      out(i) = 2.0 * gamma.data()[i].real();
      out(n + i) = 2.0 * gamma.data()[i].imag();
    }
    return out;
  }

  RealVector random_point(Rng& rng) const {
    RealVector x(size());
    for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    return x;
  }

 private:
  Index rows_, cols_;
  ComplexMatrix m_, w_, q_, v_;
  RealVector p_;
};

/// Spectral data of a state in a fixed bipartite frame.
struct SteeringFrame {
  BipartiteView view;
  ComplexMatrix coeffs;  // D x r, columns sqrt(l_k) e_k
  int rank = 0;

  SteeringFrame(const ComplexMatrix& m, const Dims& dims, const Cut& cut) : view(bipartite_view(m, dims, cut)) {
    const Spectrum s = eigh(view.matrix);
    rank = std::max(1, numerical_rank(s));
    coeffs.resize(view.matrix.rows(), rank);
    for (int k = 0; k < rank; ++k) coeffs.col(k) = std::sqrt(std::max(0.0, s.values(k))) * s.vectors.col(k);
  }

  /// Columns psi_j = sum_k V_jk coeffs_k.
  ComplexMatrix vectors(const ComplexMatrix& v) const { return coeffs * v.transpose(); }

  /// df/d conj(V) from df/d conj(psi_j) stored as columns.
  ComplexMatrix pullback(const ComplexMatrix& grad_vectors) const {
    return (coeffs.adjoint() * grad_vectors).transpose();
  }

  /// Member in the original subsystem order.
  DensityMatrix member(const ComplexMatrix& unnormalised, double weight, const Dims& original_dims) const {
    ComplexMatrix m = permute_subsystems(unnormalised / weight, view.dims, inverse_order(view.order));
    m = 0.5 * (m + m.adjoint());
    return DensityMatrix::assume_valid(std::move(m), original_dims);
  }
};

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// tr(sigma) S of the first-group marginal of an unnormalised pure vector,
/// with its gradient with respect to conj(psi) when `grad` is non-null.
inline double pure_member_entropy(const Complex* psi, Index da, Index db, Complex* grad) {
  const Eigen::Map<const RowMajorMatrix> a(psi, da, db);
  const bool flip = da > db;
  const ComplexMatrix z = flip ? ComplexMatrix(a.transpose()) : ComplexMatrix(a);
  const ComplexMatrix gram = z * z.adjoint();
  if (!grad) return phi(gram);
  ComplexMatrix g;
  const double value = phi_with_gradient(gram, g);
  const ComplexMatrix gz = g * z;
  Eigen::Map<RowMajorMatrix> out(grad, da, db);
  if (flip)
    out = gz.transpose();
  else
    out = gz;
  return value;
}

/// tr(sigma) (1 - tr(sigma_A^2) / tr(sigma)^2): the linear-entropy analogue,
/// smooth at product states.
inline double pure_member_linear(const Complex* psi, Index da, Index db, Complex* grad) {
  const Eigen::Map<const RowMajorMatrix> a(psi, da, db);
  const bool flip = da > db;
  const ComplexMatrix z = flip ? ComplexMatrix(a.transpose()) : ComplexMatrix(a);
  const ComplexMatrix gram = z * z.adjoint();
  const double p = gram.trace().real();
  if (p < 1e-300) {
    if (grad) Eigen::Map<RowMajorMatrix>(grad, da, db).setZero();
    return 0.0;
  }
  const double purity = gram.squaredNorm();
  const double value = p - purity / p;
  if (grad) {
    const Index d = gram.rows();
    const ComplexMatrix g =
        (1.0 + purity / (p * p)) * ComplexMatrix::Identity(d, d) - (2.0 / p) * gram;
    const ComplexMatrix gz = g * z;
    Eigen::Map<RowMajorMatrix> out(grad, da, db);
    if (flip)
      out = gz.transpose();
    else
      out = gz;
  }
  return value;
}

}  // namespace qshare::detail
