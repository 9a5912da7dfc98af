#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lazydual/problem.hpp"

namespace lazydual {

enum class InnerSolver { katyusha, agd, exact };

// Fixed evaluation budget for one outer iteration's subproblem solve.
// For katyusha, steps counts stochastic component-gradient evaluations
// (a full-gradient snapshot costs m, a variance-reduced step costs 2).
// For agd, steps counts full-gradient iterations.
struct InnerBudget {
  InnerSolver solver = InnerSolver::exact;
  long steps = 0;
  double c = 0.5;  // target contraction parameter
};

// steps = ceil(C_kat * (m + sqrt(m * kappa_max)) * log(2 kappa_max / c))
inline long katyusha_budget(int m, double kappa_max, double c,
                            double C_kat = 1.0) {
  if (m < 1 || kappa_max < 1.0 || !(c > 0.0 && c < 1.0))
    throw std::invalid_argument("katyusha_budget: bad arguments");
  const double raw = C_kat * (m + std::sqrt(m * kappa_max)) *
                     std::log(2.0 * kappa_max / c);
  return static_cast<long>(std::ceil(raw));
}

struct InnerResult {
  Eigen::VectorXd theta;
  long evals = 0;  // budget units actually consumed
};

namespace detail {

inline void check_finite(const Eigen::VectorXd& v, const char* where) {
  if (!v.allFinite())
    throw std::runtime_error(std::string("non-finite iterate in ") + where);
}

// Subproblem gradient: grad of f_i(theta) - <theta, x>, component j.
inline Eigen::VectorXd sub_component_grad(const LocalObjective& obj, int j,
                                          const Eigen::VectorXd& t,
                                          const Eigen::VectorXd& x) {
  return obj.component_gradient(j, t) - x;
}

inline Eigen::VectorXd sub_full_grad(const LocalObjective& obj,
                                     const Eigen::VectorXd& t,
                                     const Eigen::VectorXd& x) {
  return obj.gradient(t) - x;
}

// Nesterov AGD with constant momentum on the shifted objective.
inline InnerResult agd_fixed(const LocalObjective& obj,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& warm, long iters) {
  const double kappa = obj.L / obj.mu;
  const double coef = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  Eigen::VectorXd th = warm, w = warm;
  for (long t = 0; t < iters; ++t) {
    Eigen::VectorXd th_next = w - sub_full_grad(obj, w, x) / obj.L;
    w = th_next + coef * (th_next - th);
    th = std::move(th_next);
    check_finite(th, "agd");
  }
  return {std::move(th), iters};
}

// Strongly convex Katyusha with negative momentum tau2 = 1/2, epoch
// length 2m, snapshot updated as the geometric average of the epoch's
// y-iterates. Runs until the evaluation budget is exhausted.
inline InnerResult katyusha_fixed(const LocalObjective& obj,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& warm, long budget,
                                  std::mt19937_64& rng) {
  const int m = obj.m;
  const double L = obj.L, sigma = obj.mu;
  const double tau2 = 0.5;
  const double tau1 = std::min(std::sqrt(2.0 * m * sigma / (3.0 * L)), 0.5);
  const double alpha = 1.0 / (3.0 * tau1 * L);
  const double theta_w = 1.0 + alpha * sigma;  // epoch averaging weight base

  std::uniform_int_distribution<int> pick(0, m - 1);
  Eigen::VectorXd snap = warm, y = warm, z = warm;
  long remaining = budget;
  while (remaining >= m + 2) {
    remaining -= m;
    const Eigen::VectorXd snap_grad = sub_full_grad(obj, snap, x);
    Eigen::VectorXd y_accum = Eigen::VectorXd::Zero(obj.d);
    double w_accum = 0.0, w_cur = 1.0;
    for (int t = 0; t < 2 * m && remaining >= 2; ++t) {
      remaining -= 2;
      const Eigen::VectorXd xt = tau1 * z + tau2 * snap +
                                 (1.0 - tau1 - tau2) * y;
      const int j = pick(rng);
      const Eigen::VectorXd vr = snap_grad +
                                 sub_component_grad(obj, j, xt, x) -
                                 sub_component_grad(obj, j, snap, x);
      z -= alpha * vr;
      y = xt - vr / (3.0 * L);
      y_accum += w_cur * y;
      w_accum += w_cur;
      w_cur *= theta_w;
    }
    if (w_accum > 0.0) snap = y_accum / w_accum;
    check_finite(snap, "katyusha");
  }
  // whatever budget slack is left is spent by contract
  return {std::move(snap), budget};
}

}  // namespace detail

// Exact conjugate gradient grad f_i*(x): closed form for quadratics,
// high-accuracy deterministic solve otherwise.
inline Eigen::VectorXd exact_dual_gradient(const LocalObjective& obj,
                                           const Eigen::VectorXd& x,
                                           double tol = 1e-12,
                                           long max_iters = 2000000,
                                           const Eigen::VectorXd* start = nullptr) {
  if (obj.has_dual_oracle()) return obj.dual_gradient(x);
  const double kappa = obj.L / obj.mu;
  const double coef = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  Eigen::VectorXd th = start ? *start : Eigen::VectorXd::Zero(obj.d);
  Eigen::VectorXd w = th;
  const double target = tol * std::max(1.0, x.norm());
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd g = detail::sub_full_grad(obj, w, x);
    if (g.norm() <= target) return w;
    Eigen::VectorXd th_next = w - g / obj.L;
    w = th_next + coef * (th_next - th);
    th = std::move(th_next);
    detail::check_finite(th, "exact_dual_gradient");
  }
  throw std::runtime_error("exact_dual_gradient: no convergence within cap");
}

// Exact dual gradient with evaluation metering: closed forms are free,
// the iterative fallback charges m component gradients per full-gradient
// iteration.
inline InnerResult exact_dual_gradient_counted(const LocalObjective& obj,
                                               const Eigen::VectorXd& x,
                                               double tol = 1e-10,
                                               const Eigen::VectorXd* start =
                                                   nullptr) {
  if (obj.has_dual_oracle()) return {obj.dual_gradient(x), 0};
  const double kappa = obj.L / obj.mu;
  const double coef = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  Eigen::VectorXd th = start ? *start : Eigen::VectorXd::Zero(obj.d);
  Eigen::VectorXd w = th;
  const double target = tol * std::max(1.0, x.norm());
  const long max_iters = 2000000;
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd g = detail::sub_full_grad(obj, w, x);
    if (g.norm() <= target) return {w, it * static_cast<long>(obj.m)};
    Eigen::VectorXd th_next = w - g / obj.L;
    w = th_next + coef * (th_next - th);
    th = std::move(th_next);
    detail::check_finite(th, "exact_dual_gradient");
  }
  throw std::runtime_error("exact_dual_gradient: no convergence within cap");
}

// theta ~= argmin f_i(theta) - <theta, x>, warm started.
inline InnerResult solve_subproblem(const LocalObjective& obj,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& warm,
                                    const InnerBudget& budget,
                                    std::mt19937_64& rng) {
  if (!warm.allFinite())
    throw std::invalid_argument("solve_subproblem: non-finite warm start");
  switch (budget.solver) {
    case InnerSolver::exact: {
      Eigen::VectorXd th = exact_dual_gradient(obj, x, 1e-10, 2000000, &warm);
      // closed-form solves are free; iterative exact solves are not metered
      return {std::move(th), 0};
    }
    case InnerSolver::agd:
      if (budget.steps < 1)
        throw std::invalid_argument("solve_subproblem: zero budget");
      return detail::agd_fixed(obj, x, warm, budget.steps);
    case InnerSolver::katyusha:
      if (budget.steps < 1)
        throw std::invalid_argument("solve_subproblem: zero budget");
      return detail::katyusha_fixed(obj, x, warm, budget.steps, rng);
  }
  throw std::logic_error("unreachable");
}

}  // namespace lazydual
