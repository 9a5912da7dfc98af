#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lazydual/graph.hpp"

namespace lazydual {

// U = I - W for a mixing matrix W supported on the graph's edges.
// Symmetric PSD, null(U) = span{1}.
struct GossipMatrix {
  Eigen::MatrixXd U;
  double sigma1 = 0.0;      // largest eigenvalue
  double sigma_nm1 = 0.0;   // smallest nonzero eigenvalue
  double zeta = 0.0;        // sigma_nm1 / sigma1
  double sqrtU_norm4 = 0.0; // sigma1^2

  int n() const { return static_cast<int>(U.rows()); }
};

struct Spectrum {
  double sigma1;
  double sigma_nm1;
  double zeta;
};

// Dense symmetric eigensolve; zero-eigenvalue tolerance 1e-9 * sigma1.
// Throws if the rank deficiency exceeds 1.
inline Spectrum spectrum(const Eigen::MatrixXd& U) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed on gossip matrix");
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const int n = static_cast<int>(ev.size());
  const double s1 = ev(n - 1);
  const double tol = 1e-9 * s1;
  if (n < 2 || ev(1) <= tol)
    throw std::runtime_error("disconnected or invalid gossip matrix");
  const double snm1 = ev(1);
  return {s1, snm1, snm1 / s1};
}

namespace detail {

inline GossipMatrix finish_gossip(const Graph& g, Eigen::MatrixXd W) {
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(g.n, g.n) - W;
  GossipMatrix gm;
  gm.U = std::move(U);
  Spectrum sp = spectrum(gm.U);
  gm.sigma1 = sp.sigma1;
  gm.sigma_nm1 = sp.sigma_nm1;
  gm.zeta = sp.zeta;
  gm.sqrtU_norm4 = sp.sigma1 * sp.sigma1;
  return gm;
}

}  // namespace detail

// W_ij = 1/(1 + max(deg_i, deg_j)) on edges, diagonal fills the row to 1.
inline GossipMatrix metropolis_weights(const Graph& g) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(g.n, g.n);
  for (auto [i, j] : g.edges) {
    const double w = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < g.n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return detail::finish_gossip(g, std::move(W));
}

// W_ij = 1/(1 + max_k deg_k) on edges.
inline GossipMatrix max_degree_weights(const Graph& g) {
  int dmax = 0;
  for (int i = 0; i < g.n; ++i) dmax = std::max(dmax, g.degree(i));
  const double w = 1.0 / (1.0 + dmax);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(g.n, g.n);
  for (auto [i, j] : g.edges) {
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < g.n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return detail::finish_gossip(g, std::move(W));
}

// Chebyshev acceleration constants. When zeta(U) = 1 the constants divide
// by zero; that case degenerates to K = 1 with the raw gossip matrix
// (bypass flag), since there is nothing left to accelerate.
struct ChebyshevPlan {
  int K = 1;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double aK = 1.0;   // T_K(c2) via the a-recurrence
  bool bypass = false;
};

inline ChebyshevPlan chebyshev_plan(const GossipMatrix& gm) {
  ChebyshevPlan plan;
  const double z = gm.zeta;
  if (z >= 1.0 - 1e-12) {
    plan.K = 1;
    plan.bypass = true;
    return plan;
  }
  plan.K = std::max(1, static_cast<int>(std::floor(1.0 / std::sqrt(z))));
  plan.c1 = (1.0 - std::sqrt(z)) / (1.0 + std::sqrt(z));
  plan.c2 = (1.0 + z) / (1.0 - z);
  plan.c3 = 2.0 / ((1.0 + z) * gm.sigma1);
  double a_prev = 1.0, a_cur = plan.c2;
  for (int l = 1; l < plan.K; ++l) {
    const double a_next = 2.0 * plan.c2 * a_cur - a_prev;
    a_prev = a_cur;
    a_cur = a_next;
  }
  plan.aK = plan.K >= 1 ? a_cur : 1.0;
  return plan;
}

// Force a round count other than floor(1/sqrt(zeta)); refreshes aK.
inline void set_plan_rounds(ChebyshevPlan& plan, int K) {
  if (K < 1) throw std::invalid_argument("round count must be >= 1");
  if (plan.bypass) return;
  plan.K = K;
  double a_prev = 1.0, a_cur = plan.c2;
  for (int l = 1; l < K; ++l) {
    const double a_next = 2.0 * plan.c2 * a_cur - a_prev;
    a_prev = a_cur;
    a_cur = a_next;
  }
  plan.aK = a_cur;
}

// Dense reference: P_K(U) = I - T_K(c2 (I - c3 U)) / T_K(c2) as an
// explicit n x n matrix.
inline Eigen::MatrixXd chebyshev_operator(const GossipMatrix& gm,
                                          const ChebyshevPlan& plan) {
  if (plan.bypass) return gm.U;
  const int n = gm.n();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = plan.c2 * (I - plan.c3 * gm.U);
  Eigen::MatrixXd T_prev = I;  // T_0(M)
  Eigen::MatrixXd T_cur = M;   // T_1(M)
  for (int l = 1; l < plan.K; ++l) {
    Eigen::MatrixXd T_next = 2.0 * M * T_cur - T_prev;
    T_prev = std::move(T_cur);
    T_cur = std::move(T_next);
  }
  return I - T_cur / plan.aK;
}

// Z * P_K(U) by explicit dense polynomial evaluation (reference path).
inline Eigen::MatrixXd apply_pk(const Eigen::MatrixXd& Z,
                                const ChebyshevPlan& plan,
                                const GossipMatrix& gm) {
  if (Z.cols() != gm.n())
    throw std::invalid_argument("apply_pk: column count must match n");
  return Z * chebyshev_operator(gm, plan);
}

// Iterative Accelerated Gossip realization of Z * P_K(U).
// If first_round_aggregate P is supplied it stands in for Z*U in
// z_1 = c2 Z - c2 c3 P (the MDLAG lazy first round); otherwise P = Z*U.
inline Eigen::MatrixXd accelerated_gossip(
    const Eigen::MatrixXd& Z, const GossipMatrix& gm,
    const ChebyshevPlan& plan,
    const Eigen::MatrixXd* first_round_aggregate = nullptr) {
  if (Z.cols() != gm.n())
    throw std::invalid_argument("accelerated_gossip: column count mismatch");
  if (first_round_aggregate && (first_round_aggregate->rows() != Z.rows() ||
                                first_round_aggregate->cols() != Z.cols()))
    throw std::invalid_argument("accelerated_gossip: aggregate shape mismatch");
  const Eigen::MatrixXd ZU =
      first_round_aggregate ? *first_round_aggregate : Eigen::MatrixXd(Z * gm.U);
  if (plan.bypass) return ZU;

  Eigen::MatrixXd z_prev = Z;                               // z_0
  Eigen::MatrixXd z_cur = plan.c2 * Z - plan.c2 * plan.c3 * ZU;  // z_1
  for (int l = 1; l < plan.K; ++l) {
    // z_{l+1} = 2 c2 z_l (I - c3 U) - z_{l-1}
    Eigen::MatrixXd z_next =
        2.0 * plan.c2 * (z_cur - plan.c3 * (z_cur * gm.U)) - z_prev;
    z_prev = std::move(z_cur);
    z_cur = std::move(z_next);
  }
  return Z - z_cur / plan.aK;
}

}  // namespace lazydual
