#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lazydual/gossip.hpp"
#include "lazydual/graph.hpp"
#include "lazydual/outer.hpp"
#include "lazydual/problem.hpp"

namespace lazydual {

// Parameter schedule prescribed by the convergence theory.
struct TheoryParams {
  double gamma = 0.0;
  double c = 0.0;
  double eta = 0.0;
  double s = 1.0;
  double a = 0.0, b = 0.0, rho = 0.0;  // intermediate constants
  double kappa = 1.0;                  // governing condition number
  double alpha = 0.0, beta = 0.0;
};

namespace detail {

// (a + b) -> (rho, s, eta*beta) via the closed-form schedule.
inline void schedule_from_ab(TheoryParams& p) {
  const double ab = p.a + p.b;
  if (ab <= 0.0) throw std::invalid_argument("need a + b > 0");
  const double root = std::sqrt(2.0 + 1.0 / (12.0 * ab));
  p.rho = 2.0 + root;
  p.s = ((2.0 + root) / root) * (1.0 + 24.0 * ab * (2.0 + root));
  p.eta = (root / (1.0 + root)) / (1.0 + 24.0 * ab * (2.0 + root)) / p.beta;
}

inline TheoryParams schedule(double sigma1, double sigma_nm1, double zeta,
                             double mu_min, double L_max, double kappa_rate,
                             int D) {
  if (D < 2) throw std::invalid_argument("theory schedule requires D >= 2");
  TheoryParams p;
  p.alpha = sigma_nm1 / L_max;
  p.beta = sigma1 / mu_min;
  p.kappa = (L_max / mu_min) / zeta;
  const double norm4 = sigma1 * sigma1;  // ||sqrt(U)||^4
  const double base = p.alpha * p.beta * mu_min * mu_min / norm4;
  p.gamma = (base / (288.0 * D)) * std::exp(-2.0 * D / std::sqrt(kappa_rate));
  p.c = (base / (1200.0 * D)) *
        std::exp(-2.0 * (D + 1) / std::sqrt(kappa_rate));
  if (p.c >= 1.0) throw std::runtime_error("schedule produced c >= 1");
  p.eta = (2.0 / 15.0) / p.beta;
  p.s = 10.0;
  p.a = 1.0 / 48.0;
  p.b = 1.0 / 48.0;
  p.rho = 4.0;
  return p;
}

}  // namespace detail

// DLAG schedule: exponent uses kappa = kappa_F / zeta(U).
inline TheoryParams theorem1_params(const GossipMatrix& gm,
                                    const ProblemInstance& problem, int D) {
  const double kappa = problem.kappa_F / gm.zeta;
  return detail::schedule(gm.sigma1, gm.sigma_nm1, gm.zeta, problem.mu_min,
                          problem.L_max, kappa, D);
}

// General schedule for user-supplied (gamma, c): recovers s and eta from
// the intermediate constants a, b, rho.
inline TheoryParams theorem4_params(const GossipMatrix& gm,
                                    const ProblemInstance& problem, int D,
                                    double gamma, double c) {
  if (D < 2) throw std::invalid_argument("requires D >= 2");
  if (!(c < 1.0)) throw std::invalid_argument("requires c < 1");
  TheoryParams p;
  p.alpha = gm.sigma_nm1 / problem.L_max;
  p.beta = gm.sigma1 / problem.mu_min;
  p.kappa = problem.kappa_F / gm.zeta;
  if (!(p.kappa > 2.0)) throw std::invalid_argument("requires kappa > 2");
  p.gamma = gamma;
  p.c = c;
  const double norm4 = gm.sqrtU_norm4;
  const double denom = p.alpha * p.beta * problem.mu_min * problem.mu_min;
  p.a = (6.0 * norm4 / denom) * gamma * D *
        std::exp(2.0 * D / std::sqrt(p.kappa));
  p.b = (25.0 * norm4 / denom) * c * D *
        std::exp(2.0 * (D + 1) / std::sqrt(p.kappa));
  detail::schedule_from_ab(p);
  return p;
}

// MDLAG schedule: spectrum of P_K(U) replaces that of U and the exponent
// uses sqrt(kappa_F). Asserts the eigengap bound zeta(P_K(U)) >= 1/4.
inline TheoryParams mdlag_params(const GossipMatrix& gm,
                                 const ChebyshevPlan& plan,
                                 const ProblemInstance& problem, int D) {
  const Eigen::MatrixXd PK = chebyshev_operator(gm, plan);
  Spectrum sp = spectrum(PK);
  if (!plan.bypass && sp.zeta < 0.25 - 1e-9)
    throw std::runtime_error("zeta(P_K(U)) < 1/4: chebyshev plan invalid");
  return detail::schedule(sp.sigma1, sp.sigma_nm1, sp.zeta, problem.mu_min,
                          problem.L_max, problem.kappa_F, D);
}

// h_d(gamma) = (1/(2|E|)) sum_i m_i 1(H_i^2 <= gamma/d), H_i = mu_min/mu_i.
inline std::vector<double> heterogeneity_score(const ProblemInstance& problem,
                                               const Graph& graph,
                                               double gamma, int D) {
  if (D < 1) throw std::invalid_argument("D must be >= 1");
  const double two_E = 2.0 * static_cast<double>(graph.edges.size());
  std::vector<double> h(D, 0.0);
  for (int d = 1; d <= D; ++d) {
    double acc = 0.0;
    for (int i = 0; i < problem.n; ++i) {
      const double H = problem.mu_min / problem.objectives[i].mu;
      if (H * H <= gamma / d) acc += graph.degree(i);
    }
    h[d - 1] = acc / two_E;
  }
  return h;
}

// Per-iteration edge-utilization factor predicted by the communication
// bound: DLAG 1 - sum (1/d - 1/(d+1)) h_d; MDLAG K - sum(...).
inline double predicted_comm_factor(const std::vector<double>& h, int K,
                                    Method method) {
  double saving = 0.0;
  for (std::size_t d = 1; d <= h.size(); ++d)
    saving += (1.0 / d - 1.0 / (d + 1.0)) * h[d - 1];
  switch (method) {
    case Method::dlag: return 1.0 - saving;
    case Method::mdlag: return K - saving;
    case Method::ssda: return 1.0;
    case Method::msda: return static_cast<double>(K);
  }
  return 1.0;
}

// Corollary-style ratio against SSDA, including the sqrt(10) rate factor.
inline double predicted_comm_ratio_vs_ssda(const std::vector<double>& h) {
  return std::sqrt(10.0) * predicted_comm_factor(h, 1, Method::dlag);
}

struct ComparisonReport {
  double measured_utilization = 0.0;
  double predicted_factor = 0.0;
  double slack = 0.05;
  bool pass = false;
};

// Measured per-iteration edge utilization against the predicted factor.
inline ComparisonReport measured_vs_predicted(const RunTrace& trace,
                                              const Graph& graph,
                                              double predicted_factor,
                                              double slack = 0.05) {
  ComparisonReport rep;
  rep.predicted_factor = predicted_factor;
  rep.slack = slack;
  const double iters = static_cast<double>(trace.iterations());
  const double two_E = 2.0 * static_cast<double>(graph.edges.size());
  rep.measured_utilization =
      iters > 0 ? trace.total_messages() / (two_E * iters) : 0.0;
  rep.pass = rep.measured_utilization <= predicted_factor * (1.0 + slack);
  return rep;
}

}  // namespace lazydual
