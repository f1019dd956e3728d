// Convex-roof quantities: entanglement of formation over pure ensembles and
// G<-, the roof of C<- over mixed ensembles. Ensembles are generated by
// measurements on the purifier (see steering.hpp) and searched with L-BFGS
// from seeded random starting points.

#pragma once

#include "qshare/measures/classical.hpp"

namespace qshare {

/// Ensemble-size controls for the roof searches. Zero means "rank^2".
struct RoofOptions {
  int max_members = 0;
};

namespace detail {

/// Members with weight below this are dropped from reported ensembles.
inline constexpr double kMemberFloor = 1e-15;

using MemberFn = double (*)(const Complex*, Index, Index, Complex*);

/// sum_j f(psi_j) over the pure ensemble defined by x, with gradient.
inline double pure_roof_objective(const SteeringFrame& frame, PolarMap& polar, MemberFn f, const RealVector& x,
                                  RealVector& grad) {
  const ComplexMatrix& v = polar.forward(x);
  const ComplexMatrix psi = frame.vectors(v);
  ComplexMatrix gpsi(psi.rows(), psi.cols());
  double total = 0.0;
  for (Index j = 0; j < psi.cols(); ++j)
    total += f(psi.col(j).data(), frame.view.da, frame.view.db, gpsi.col(j).data());
  grad = polar.backward(frame.pullback(gpsi));
  return total;
}

inline Ensemble pure_ensemble(const SteeringFrame& frame, const ComplexMatrix& v, const Dims& dims) {
  const ComplexMatrix psi = frame.vectors(v);
  Ensemble e;
  double total = 0.0;
  for (Index j = 0; j < psi.cols(); ++j) {
    const double w = psi.col(j).squaredNorm();
    if (w < kMemberFloor) continue;
    e.weights.push_back(w);
    e.members.push_back(frame.member(psi.col(j) * psi.col(j).adjoint(), w, dims));
    total += w;
  }
  for (double& w : e.weights) w /= total;
  return e;
}

inline int roof_members(int rank, const RoofOptions& opts) {
  const int cap = rank * rank;
  return opts.max_members > 0 ? std::min(cap, std::max(1, opts.max_members)) : cap;
}

}  // namespace detail

/// Best-found upper estimate of E_f across `cut`: minimum over pure
/// ensembles of at most rank^2 members of the average entanglement.
/// Each restart first minimises the linear-entropy roof, which is smooth at
/// product decompositions, then the entropy roof from that point.
inline OptResult eof_convex_roof(const DensityMatrix& rho, const Cut& cut, const OptBudget& budget,
                                 std::uint64_t seed = 0, const RoofOptions& opts = {}) {
  if (budget.restarts <= 0) throw Error(ErrorKind::invalid_argument, "empty budget");
  const detail::SteeringFrame frame(rho.matrix(), rho.dims(), cut);
  OptResult res;
  res.seed = seed;
  res.direction = Direction::upper;
  res.restarts_used = budget.restarts;
  if (frame.rank == 1) {
    const Spectrum s = eigh(rho.matrix());
    const PureState psi = PureState::normalized(s.vectors.col(0), rho.dims());
    res.value = pure_entanglement(psi, cut);
    res.argument = Ensemble{{1.0}, {DensityMatrix::from_pure(psi)}};
    res.direction = Direction::exact;
    return res;
  }
  const int members = detail::roof_members(frame.rank, opts);
  detail::PolarMap polar(members, frame.rank);
  auto entropy_roof = [&](const RealVector& x, RealVector& g) {
    return detail::pure_roof_objective(frame, polar, detail::pure_member_entropy, x, g);
  };
  auto linear_roof = [&](const RealVector& x, RealVector& g) {
    return detail::pure_roof_objective(frame, polar, detail::pure_member_linear, x, g);
  };
  RestartTracker tracker;
  RealVector best_x;
  for (int i = 0; i < budget.restarts; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const RealVector x0 = polar.random_point(rng);
    const LocalResult pre = lbfgs(linear_roof, x0, budget.iterations, budget.tol * 1e-2);
    const LocalResult fin = lbfgs(entropy_roof, pre.x, budget.iterations, budget.tol);
    if (tracker.offer(fin.value)) best_x = fin.x;
  }
  const ComplexMatrix v = polar.forward(best_x);
  res.value = std::max(0.0, tracker.best());
  res.argument = detail::pure_ensemble(frame, v, rho.dims());
  res.best_gap = tracker.gap();
  return res;
}

namespace detail {

/// Mixed-ensemble search state for G<-: rows of V are grouped `rows_per_member`
/// at a time, so each member's purifier POVM element has rank <= rows_per_member.
class MixedRoof {
 public:
  MixedRoof(const SteeringFrame& frame, int members, int rows_per_member, const OptBudget& inner,
            std::uint64_t seed)
      : frame_(frame),
        members_(members),
        per_(rows_per_member),
        polar_(static_cast<Index>(members) * rows_per_member, frame.rank),
        inner_(inner),
        seed_(seed),
        warm_(members) {}

  PolarMap& polar() { return polar_; }

  /// sum_g max_POVM [phi(sigma_gA) - sum_i phi(tau_gi)] using projective
  /// inner searches; the gradient holds each member's maximiser fixed.
  double objective(const RealVector& x, RealVector& grad) {
    const ComplexMatrix& v = polar_.forward(x);
    const ComplexMatrix psi = frame_.vectors(v);
    const Index da = frame_.view.da, dc = frame_.view.db, dim = da * dc;
    ComplexMatrix gpsi = ComplexMatrix::Zero(psi.rows(), psi.cols());
    double total = 0.0;
    ++evaluations_;
    for (int g = 0; g < members_; ++g) {
      const auto block = psi.middleCols(static_cast<Index>(g) * per_, per_);
      const ComplexMatrix sigma = block * block.adjoint();
      if (sigma.trace().real() < 1e-14) continue;
      const ConditionalProblem prob(sigma, da, dc);
      // Once a member has a warm start, one fresh restart per evaluation is
      // enough to track jumps of the maximiser between basins.
      OptBudget search = inner_;
      if (warm_[g].size()) search.restarts = 1;
      ConditionalSearch cfg{search, derive_seed(seed_, evaluations_ * 131 + g), false,
                            warm_[g].size() ? &warm_[g] : nullptr};
      const ConditionalOutcome best = maximize_conditional(prob, cfg);
      warm_[g] = best.rows;
      total += best.value;

      ComplexMatrix gsig = ComplexMatrix::Zero(dim, dim);
      ComplexMatrix gphi;
      phi_with_gradient(prob.sigma_a(), gphi);
      gsig += tensor(gphi, ComplexMatrix::Identity(dc, dc));
      for (Index i = 0; i < best.rows.rows(); ++i) {
        const ComplexMatrix tau = prob.outcome(best.rows, i);
        if (tau.trace().real() < 1e-300) continue;
        phi_with_gradient(tau, gphi);
        const ComplexMatrix r = best.rows.row(i);
        gsig -= tensor(gphi, ComplexMatrix(r.adjoint() * r));
      }
      gpsi.middleCols(static_cast<Index>(g) * per_, per_) = gsig * block;
    }
    grad = polar_.backward(frame_.pullback(gpsi));
    return total;
  }

  /// Unnormalised member operators at x (reordered frame).
  std::vector<ComplexMatrix> members(const RealVector& x) {
    const ComplexMatrix psi = frame_.vectors(polar_.forward(x));
    std::vector<ComplexMatrix> out;
    for (int g = 0; g < members_; ++g) {
      const auto block = psi.middleCols(static_cast<Index>(g) * per_, per_);
      out.push_back(block * block.adjoint());
    }
    return out;
  }

 private:
  const SteeringFrame& frame_;
  int members_, per_;
  PolarMap polar_;
  OptBudget inner_;
  std::uint64_t seed_;
  std::uint64_t evaluations_ = 0;
  std::vector<ComplexMatrix> warm_;
};

/// Sum of fully optimised member C<- values for unnormalised members.
inline double score_members(const std::vector<ComplexMatrix>& members, Index da, Index dc,
                            const OptBudget& inner, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g].trace().real() < kMemberFloor) continue;
    const ConditionalProblem prob(members[g], da, dc);
    total += maximize_conditional(prob, {inner, derive_seed(seed, g), true, nullptr}).value;
  }
  return total;
}

}  // namespace detail

/// Best-found upper estimate of G<-(A:C), C = `measured`: the minimum over
/// ensembles {p_i, rho_i} of rho of sum_i p_i C<-(rho_i).
///
/// Candidates, all scored with fully optimised member C<- (nested budget):
///  - the trivial ensemble {rho};
///  - the best pure ensemble (C<- of a pure state equals its entanglement);
///  - `budget.restarts` mixed-ensemble searches with 2 .. rank^2 members.
inline OptResult g_arrow(const DensityMatrix& rho, int measured, const OptBudget& budget, std::uint64_t seed = 0,
                         const RoofOptions& opts = {}) {
  if (budget.restarts <= 0) throw Error(ErrorKind::invalid_argument, "empty budget");
  const int parties = rho.parties();
  if (measured < 0 || measured >= parties) throw Error(ErrorKind::invalid_argument, "no such subsystem");
  const Cut cut{detail::complement(parties, std::vector<int>{measured})};
  const detail::SteeringFrame frame(rho.matrix(), rho.dims(), cut);
  const Index da = frame.view.da, dc = frame.view.db;
  const OptBudget inner = budget.nested();

  OptResult res;
  res.seed = seed;
  res.direction = Direction::upper;
  res.restarts_used = budget.restarts;

  // trivial ensemble
  const detail::ConditionalProblem whole(frame.view.matrix, da, dc);
  double best = detail::maximize_conditional(whole, {inner, derive_seed(seed, 1000003), true, nullptr}).value;
  RestartTracker tracker;
  tracker.offer(best);
  Ensemble best_ensemble{{1.0}, {rho}};
  if (frame.rank == 1 || dc == 1) {
    // a pure state has only the trivial ensemble; a one-dimensional C carries no correlation
    res.value = std::max(0.0, best);
    res.argument = std::move(best_ensemble);
    if (dc == 1) res.direction = Direction::exact;
    return res;
  }

  // pure ensembles
  const OptResult pure = eof_convex_roof(rho, cut, budget, derive_seed(seed, 1000033), opts);
  if (tracker.offer(pure.value)) {
    best = pure.value;
    best_ensemble = std::get<Ensemble>(pure.argument);
  }

  // mixed ensembles
  const int cap = detail::roof_members(frame.rank, opts);
  for (int i = 0; i < budget.restarts && cap >= 2; ++i) {
    const std::uint64_t restart_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const int members = 2 + i % (cap - 1);
    detail::MixedRoof roof(frame, members, frame.rank, inner, restart_seed);
    auto f = [&](const RealVector& x, RealVector& g) { return roof.objective(x, g); };
    Rng rng(restart_seed);
    const LocalResult local = lbfgs(f, roof.polar().random_point(rng), budget.iterations, budget.tol);
    const auto ops = roof.members(local.x);
    const double value = detail::score_members(ops, da, dc, inner, derive_seed(restart_seed, 7));
    if (tracker.offer(value)) {
      best = value;
      Ensemble e;
      for (const auto& op : ops) {
        const double w = op.trace().real();
        if (w < detail::kMemberFloor) continue;
        e.weights.push_back(w);
        e.members.push_back(frame.member(op, w, rho.dims()));
      }
      double total = 0.0;
      for (double w : e.weights) total += w;
      for (double& w : e.weights) w /= total;
      best_ensemble = std::move(e);
    }
  }
  res.value = std::max(0.0, best);
  res.argument = std::move(best_ensemble);
  res.best_gap = tracker.gap();
  return res;
}

}  // namespace qshare
