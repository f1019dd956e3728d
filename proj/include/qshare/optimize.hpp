// optimize.hpp
// Local minimisers used by the measure optimisers: an adaptive Nelder-Mead
// simplex for the small measurement searches and a limited-memory BFGS for
// the ensemble searches, where analytic gradients are available.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace qshare {

/// Optimiser effort: independent random restarts, iteration cap per
/// restart, and the objective-change convergence threshold.
struct OptBudget {
  int restarts = 32;
  int iterations = 400;
  double tol = 1e-7;

  /// Budget for optimisations nested inside another objective.
  OptBudget nested() const { return {std::max(4, restarts / 4), iterations, tol}; }
};

struct LocalResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Returns the value and writes the gradient into the second argument.
using GradObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han 2012).
/// Converges when the simplex value spread drops below `ftol`; the simplex
/// is then rebuilt around the best vertex and the search resumed until a
/// rebuild no longer improves by more than `ftol`.
inline LocalResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, double step, int max_iter,
                               double ftol) {
  const Eigen::Index n = x0.size();
  LocalResult res;
  res.x = x0;
  if (n == 0) {
    res.value = f(x0);
    res.evaluations = 1;
    res.converged = true;
    return res;
  }
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 0.5 / dn;
  const double delta = 1.0 - 1.0 / dn;

  std::vector<Eigen::VectorXd> simplex(n + 1);
  std::vector<double> fv(n + 1);
  std::vector<int> order(n + 1);

  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  Eigen::VectorXd best = x0;
  double best_value = eval(x0);
  int rebuilds = 0;
  while (res.iterations < max_iter) {
    simplex[0] = best;
    fv[0] = best_value;
    for (Eigen::Index i = 0; i < n; ++i) {
      simplex[i + 1] = best;
      simplex[i + 1](i) += step;
      fv[i + 1] = eval(simplex[i + 1]);
    }
    bool converged = false;
    while (res.iterations < max_iter) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
      const int lo = order.front(), hi = order.back(), second = order[n - 1];
      if (fv[hi] - fv[lo] <= ftol) {
        converged = true;
        break;
      }
      ++res.iterations;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i <= n; ++i)
        if (i != hi) centroid += simplex[i];
      centroid /= dn;

      const Eigen::VectorXd xr = centroid + alpha * (centroid - simplex[hi]);
      const double fr = eval(xr);
      if (fr < fv[lo]) {
        const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[hi] = xe;
          fv[hi] = fe;
        } else {
          simplex[hi] = xr;
          fv[hi] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        simplex[hi] = xr;
        fv[hi] = fr;
        continue;
      }
      const bool outside = fr < fv[hi];
      const Eigen::VectorXd xc =
          outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                  : Eigen::VectorXd(centroid - gamma * (centroid - simplex[hi]));
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[hi])) {
        simplex[hi] = xc;
        fv[hi] = fc;
        continue;
      }
      for (int i = 0; i <= n; ++i) {
        if (i == lo) continue;
        simplex[i] = simplex[lo] + delta * (simplex[i] - simplex[lo]);
        fv[i] = eval(simplex[i]);
      }
    }
    const int lo = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    const double improvement = best_value - fv[lo];
    if (fv[lo] <= best_value) {
      best = simplex[lo];
      best_value = fv[lo];
    }
    if (!converged) break;
    if (rebuilds > 0 && improvement <= ftol) {
      res.converged = true;
      break;
    }
    if (++rebuilds > 4) {
      res.converged = true;
      break;
    }
  }
  res.x = best;
  res.value = best_value;
  return res;
}

/// L-BFGS with Armijo backtracking. Stops when the objective decrease stays
/// below `ftol` for two consecutive iterations or no descent step is found.
inline LocalResult lbfgs(const GradObjective& f, const Eigen::VectorXd& x0, int max_iter, double ftol,
                         int memory = 10) {
  const Eigen::Index n = x0.size();
  LocalResult res;
  res.x = x0;
  Eigen::VectorXd g(n);
  res.value = f(res.x, g);
  res.evaluations = 1;
  if (n == 0) {
    res.converged = true;
    return res;
  }

  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;
  int small_steps = 0;
  Eigen::VectorXd g_new(n), x_new(n), d(n);
  std::vector<double> a(memory);

  while (res.iterations < max_iter) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-12) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      a[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= a[i] * y_hist[i];
    }
    if (m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(d);
      d += (a[i] - b) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double t = (m == 0) ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = res.x + t * d;
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++res.iterations;
    if (!accepted) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
    }
    const double decrease = res.value - f_new;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    small_steps = decrease <= ftol ? small_steps + 1 : 0;
    if (small_steps >= 2) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Best and runner-up over a sequence of restart outcomes (minimisation).
class RestartTracker {
 public:
  /// Returns true when `value` becomes the new best.
  bool offer(double value) {
    ++count_;
    if (value < best_) {
      second_ = best_;
      best_ = value;
      return true;
    }
    if (value < second_) second_ = value;
    return false;
  }
  double best() const { return best_; }
  int count() const { return count_; }
  /// Spread between the two best outcomes; 0 with fewer than two restarts.
  double gap() const { return count_ < 2 ? 0.0 : second_ - best_; }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  double second_ = std::numeric_limits<double>::infinity();
  int count_ = 0;
};

}  // namespace qshare
