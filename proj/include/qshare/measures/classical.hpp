// One-way classical correlation C<-(A:C): the largest drop in the entropy of
// A achievable by measuring C.
//
// Measurements are rank-1 POVMs with at most d_C^2 outcomes, written as the
// rows r_i of an isometry (E_i = r_i^dag r_i). Each restart first searches
// projective measurements (columns of a unitary U_0 exp(iH), H zero on the
// diagonal) and then refines inside the d_C^2-outcome Naimark extension
// starting from the best projective measurement.

#pragma once

#include "qshare/measures/steering.hpp"
#include "qshare/optimize.hpp"

#include <optional>

namespace qshare {

namespace detail {

/// exp(iH) for Hermitian H.
inline ComplexMatrix exp_i_hermitian(const ComplexMatrix& h) {
  if (h.rows() == 2) {
    const double h0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double hz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const Complex off = h(0, 1);
    const double norm = std::sqrt(hz * hz + std::norm(off));
    const Complex phase = std::polar(1.0, h0);
    const double c = std::cos(norm);
    const double s = norm > 1e-300 ? std::sin(norm) / norm : 1.0;
    const Complex i(0.0, 1.0);
    ComplexMatrix u(2, 2);
    u(0, 0) = phase * (c + i * s * hz);
    u(1, 1) = phase * (c - i * s * hz);
    u(0, 1) = phase * i * s * off;
    u(1, 0) = phase * i * s * std::conj(off);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  ComplexVector ph(h.rows());
  for (Index k = 0; k < h.rows(); ++k) ph(k) = std::polar(1.0, es.eigenvalues()(k));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// Hermitian matrix from real parameters: diagonal (if `with_diagonal`)
/// then (re, im) of each upper off-diagonal entry.
inline ComplexMatrix hermitian_from(const RealVector& x, Index d, bool with_diagonal) {
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  Index k = 0;
  if (with_diagonal)
    for (Index i = 0; i < d; ++i) h(i, i) = x(k++);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      h(i, j) = Complex(x(k), x(k + 1));
      h(j, i) = std::conj(h(i, j));
      k += 2;
    }
  return h;
}

/// Conditional-entropy functional for an unnormalised state sigma on A (x) C.
/// value(rows) = phi(sigma_A) - sum_i phi(tau_i), tau_i = tr_C[(I x E_i) sigma].
/// For a normalised state this is S(rho_A) - sum_i p_i S(rho_A^i).
class ConditionalProblem {
 public:
  ConditionalProblem(const ComplexMatrix& sigma, Index da, Index dc) : da_(da), dc_(dc) {
    // column c1*dc + c2 holds vec(sigma[(., c1), (., c2)]), column-major in A
    stacked_.resize(da * da, dc * dc);
    for (Index c1 = 0; c1 < dc; ++c1)
      for (Index c2 = 0; c2 < dc; ++c2)
        for (Index a2 = 0; a2 < da; ++a2)
          for (Index a1 = 0; a1 < da; ++a1) stacked_(a1 + a2 * da, c1 * dc + c2) = sigma(a1 * dc + c1, a2 * dc + c2);
    sigma_a_ = ComplexMatrix::Zero(da, da);
    for (Index c = 0; c < dc; ++c)
      sigma_a_ += Eigen::Map<const ComplexMatrix>(stacked_.col(c * dc + c).data(), da, da);
    phi_a_ = phi(sigma_a_);
  }

  Index da() const { return da_; }
  Index dc() const { return dc_; }
  double phi_a() const { return phi_a_; }
  const ComplexMatrix& sigma_a() const { return sigma_a_; }

  /// Post-measurement unnormalised A state for the outcome with row i.
  ComplexMatrix outcome(const ComplexMatrix& rows, Index i) const {
    ComplexVector k(dc_ * dc_);
    for (Index c1 = 0; c1 < dc_; ++c1)
      for (Index c2 = 0; c2 < dc_; ++c2) k(c1 * dc_ + c2) = rows(i, c1) * std::conj(rows(i, c2));
    const ComplexVector t = stacked_ * k;
    return Eigen::Map<const ComplexMatrix>(t.data(), da_, da_);
  }

  /// sum_i phi(tau_i); to be minimised.
  double conditional(const ComplexMatrix& rows) const {
    const Index n = rows.rows();
    coeff_.resize(dc_ * dc_, n);
    for (Index i = 0; i < n; ++i)
      for (Index c1 = 0; c1 < dc_; ++c1)
        for (Index c2 = 0; c2 < dc_; ++c2) coeff_(c1 * dc_ + c2, i) = rows(i, c1) * std::conj(rows(i, c2));
    taus_.noalias() = stacked_ * coeff_;
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Complex* t = taus_.col(i).data();
      if (da_ == 2) {
        const double a = t[0].real(), d = t[3].real();
        const double mid = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(t[2]));
        const double lo = mid - rad, hi = mid + rad;
        const double p = (lo > tol::eig_cutoff ? lo : 0.0) + (hi > tol::eig_cutoff ? hi : 0.0);
        if (p > 0.0) s += neg_xlog2x(lo) + neg_xlog2x(hi) + p * std::log2(p);
      } else if (da_ == 1) {
        s += 0.0;
      } else {
        s += phi(Eigen::Map<const ComplexMatrix>(t, da_, da_));
      }
    }
    return s;
  }

  double value(const ComplexMatrix& rows) const { return phi_a_ - conditional(rows); }

 private:
  Index da_, dc_;
  ComplexMatrix stacked_;
  ComplexMatrix sigma_a_;
  double phi_a_ = 0.0;
  mutable ComplexMatrix coeff_, taus_;
};

struct ConditionalOutcome {
  double value = 0.0;     // best phi_a - conditional
  ComplexMatrix rows;     // measurement rows achieving it
  RestartTracker tracker;  // over -value
};

struct ConditionalSearch {
  OptBudget budget;
  std::uint64_t seed = 0;
  bool refine = true;  // run the d_C^2-outcome refinement after each projective search
  const ComplexMatrix* warm_rows = nullptr;  // optional projective starting point (d_C x d_C)
};

/// Projective search in the chart U = base * exp(iH(x)); rows = U^dag.
inline LocalResult projective_search(const ConditionalProblem& prob, const ComplexMatrix& base, double step,
                                     const OptBudget& budget, ComplexMatrix& rows_out) {
  const Index d = prob.dc();
  const RealVector x0 = RealVector::Zero(d * (d - 1));
  auto rows_of = [&](const RealVector& x) -> ComplexMatrix {
    return (base * exp_i_hermitian(hermitian_from(x, d, false))).adjoint();
  };
  auto f = [&](const RealVector& x) { return prob.conditional(rows_of(x)); };
  LocalResult r = nelder_mead(f, x0, step, budget.iterations, budget.tol);
  rows_out = rows_of(r.x);
  return r;
}

/// Refinement over d_C^2-outcome rank-1 POVMs, starting at a projective one.
inline LocalResult povm_refine(const ConditionalProblem& prob, const ComplexMatrix& projective_rows,
                               const OptBudget& budget, ComplexMatrix& rows_out) {
  const Index d = prob.dc();
  const Index m = d * d;
  ComplexMatrix u0 = ComplexMatrix::Identity(m, m);
  u0.topLeftCorner(d, d) = projective_rows;
  auto rows_of = [&](const RealVector& x) -> ComplexMatrix {
    return (u0 * exp_i_hermitian(hermitian_from(x, m, true))).leftCols(d);
  };
  auto f = [&](const RealVector& x) { return prob.conditional(rows_of(x)); };
  LocalResult r = nelder_mead(f, RealVector::Zero(m * m), 0.1, budget.iterations, budget.tol);
  rows_out = rows_of(r.x);
  return r;
}

inline ConditionalOutcome maximize_conditional(const ConditionalProblem& prob, const ConditionalSearch& cfg) {
  const Index d = prob.dc();
  ConditionalOutcome out;
  out.value = -std::numeric_limits<double>::infinity();
  if (d == 1) {
    out.rows = ComplexMatrix::Identity(1, 1);
    out.value = prob.value(out.rows);
    out.tracker.offer(-out.value);
    return out;
  }
  auto consider = [&](double conditional, const ComplexMatrix& rows) {
    const double v = prob.phi_a() - conditional;
    if (out.tracker.offer(-v)) {
      out.value = v;
      out.rows = rows;
    }
  };
  auto one_restart = [&](const ComplexMatrix& base, double step) {
    ComplexMatrix proj;
    const LocalResult r1 = projective_search(prob, base, step, cfg.budget, proj);
    double best = r1.value;
    ComplexMatrix rows = proj;
    if (cfg.refine) {
      ComplexMatrix refined;
      const LocalResult r2 = povm_refine(prob, proj, cfg.budget, refined);
      if (r2.value < best) {
        best = r2.value;
        rows = refined;
      }
    }
    consider(best, rows);
  };
  if (cfg.warm_rows) one_restart(cfg.warm_rows->adjoint(), 0.2);
  for (int i = 0; i < cfg.budget.restarts; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    one_restart(random_unitary(d, rng), 0.5);
  }
  return out;
}

/// Projective part of a (possibly refined) row set, for warm starts.
inline ComplexMatrix projective_part(const ComplexMatrix& rows) {
  const Index d = rows.cols();
  if (rows.rows() == d) return rows;
  // Orthonormalise the d heaviest rows.
  std::vector<Index> idx(rows.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return rows.row(a).squaredNorm() > rows.row(b).squaredNorm(); });
  ComplexMatrix top(d, d);
  for (Index i = 0; i < d; ++i) top.row(i) = rows.row(idx[i]);
  Eigen::HouseholderQR<ComplexMatrix> qr(top.adjoint());
  return (qr.householderQ() * ComplexMatrix::Identity(d, d)).adjoint();
}

inline Povm povm_from_rows(const ComplexMatrix& rows, int subsystem) {
  Povm p;
  p.subsystem = subsystem;
  for (Index i = 0; i < rows.rows(); ++i) {
    const ComplexMatrix r = rows.row(i);
    if (r.squaredNorm() < 1e-24) continue;
    p.elements.push_back(r.adjoint() * r);
  }
  return p;
}

/// Bipartite frame with the measured subsystem last.
inline BipartiteView measured_last(const ComplexMatrix& m, const Dims& dims, int measured) {
  const int parties = static_cast<int>(dims.size());
  if (measured < 0 || measured >= parties) throw Error(ErrorKind::invalid_argument, "no such subsystem");
  if (parties < 2) throw Error(ErrorKind::invalid_argument, "bipartition must be non-trivial");
  return bipartite_view(m, dims, Cut{complement(parties, std::vector<int>{measured})});
}

}  // namespace detail

/// Best-found lower estimate of C<-(A:C), C = `measured`, A = all other
/// subsystems. Deterministic in (rho, measured, budget, seed).
inline OptResult classical_correlation(const DensityMatrix& rho, int measured, const OptBudget& budget,
                                       std::uint64_t seed = 0) {
  if (budget.restarts <= 0) throw Error(ErrorKind::invalid_argument, "empty budget");
  const auto view = detail::measured_last(rho.matrix(), rho.dims(), measured);
  const detail::ConditionalProblem prob(view.matrix, view.da, view.db);
  const auto best = detail::maximize_conditional(prob, {budget, seed, true, nullptr});
  OptResult res;
  res.value = std::clamp(best.value, 0.0, std::max(0.0, prob.phi_a()));
  res.argument = detail::povm_from_rows(best.rows, measured);
  res.restarts_used = budget.restarts;
  res.best_gap = best.tracker.gap();
  res.seed = seed;
  res.direction = Direction::lower;
  return res;
}

}  // namespace qshare
