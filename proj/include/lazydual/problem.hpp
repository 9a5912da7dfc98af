#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lazydual/libsvm.hpp"
#include "lazydual/partition.hpp"

namespace lazydual {

enum class ObjectiveKind { quadratic, logistic_l2 };

// One worker's finite-sum objective f_i = (1/m) sum_j f_{i,j}, with
// per-component smoothness L and strong convexity mu. Quadratic workers
// carry a closed-form conjugate-gradient oracle through the mean matrix.
class LocalObjective {
 public:
  ObjectiveKind kind = ObjectiveKind::quadratic;
  int m = 0;
  int d = 0;
  double L = 1.0;
  double mu = 1.0;

  // quadratic: f_{i,j}(t) = 1/2 t'A_j t - b_j' t
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> b;

  // logistic_l2: f_{i,j}(t) = log(1+exp(a_j' t)) - y_j a_j' t + lambda ||t||^2
  Eigen::MatrixXd rows;    // m x d
  Eigen::VectorXd labels;  // in {0,1}
  double lambda = 0.0;

  static LocalObjective quadratic(std::vector<Eigen::MatrixXd> As,
                                  std::vector<Eigen::VectorXd> bs) {
    if (As.empty() || As.size() != bs.size())
      throw std::invalid_argument("quadratic worker needs matching A, b lists");
    LocalObjective o;
    o.kind = ObjectiveKind::quadratic;
    o.m = static_cast<int>(As.size());
    o.d = static_cast<int>(As[0].rows());
    o.A = std::move(As);
    o.b = std::move(bs);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& Aj : o.A) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Aj);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    if (lo <= 0.0) throw std::invalid_argument("quadratic component not PD");
    o.mu = lo;
    o.L = hi;
    o.finalize();
    return o;
  }

  static LocalObjective logistic(Eigen::MatrixXd shard_rows,
                                 Eigen::VectorXd shard_labels, double lam) {
    if (shard_rows.rows() == 0) throw std::invalid_argument("empty worker shard");
    if (lam <= 0.0) throw std::invalid_argument("lambda must be positive");
    LocalObjective o;
    o.kind = ObjectiveKind::logistic_l2;
    o.m = static_cast<int>(shard_rows.rows());
    o.d = static_cast<int>(shard_rows.cols());
    o.rows = std::move(shard_rows);
    o.labels = std::move(shard_labels);
    o.lambda = lam;
    o.mu = 2.0 * lam;
    o.L = 2.0 * lam;
    for (int j = 0; j < o.m; ++j)
      o.L = std::max(o.L, o.rows.row(j).squaredNorm() / 4.0 + 2.0 * lam);
    return o;
  }

  bool has_dual_oracle() const { return kind == ObjectiveKind::quadratic; }

  double component_value(int j, const Eigen::VectorXd& t) const {
    if (kind == ObjectiveKind::quadratic)
      return 0.5 * t.dot(A[j] * t) - b[j].dot(t);
    const double z = rows.row(j).dot(t);
    // log(1+e^z) - y z, evaluated stably
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z))
                                  : std::log1p(std::exp(z));
    return softplus - labels(j) * z + lambda * t.squaredNorm();
  }

  Eigen::VectorXd component_gradient(int j, const Eigen::VectorXd& t) const {
    if (kind == ObjectiveKind::quadratic) return A[j] * t - b[j];
    const double z = rows.row(j).dot(t);
    const double sig = 1.0 / (1.0 + std::exp(-z));
    return (sig - labels(j)) * rows.row(j).transpose() + 2.0 * lambda * t;
  }

  double value(const Eigen::VectorXd& t) const {
    double v = 0.0;
    for (int j = 0; j < m; ++j) v += component_value(j, t);
    return v / m;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const {
    if (kind == ObjectiveKind::quadratic) return Abar_ * t - bbar_;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < m; ++j) g += component_gradient(j, t);
    return g / m;
  }

  // Closed-form conjugate gradient: grad f*(x) = Abar^{-1} (x + bbar).
  Eigen::VectorXd dual_gradient(const Eigen::VectorXd& x) const {
    if (!has_dual_oracle())
      throw std::runtime_error("no closed-form dual oracle for this objective");
    return Abar_ldlt_.solve(x + bbar_);
  }

  // Conjugate value f_i*(x) for quadratic workers (Lyapunov diagnostics).
  double conjugate_value(const Eigen::VectorXd& x) const {
    if (!has_dual_oracle())
      throw std::runtime_error("no closed-form conjugate for this objective");
    const Eigen::VectorXd v = x + bbar_;
    return 0.5 * v.dot(Abar_ldlt_.solve(v));
  }

  const Eigen::MatrixXd& mean_matrix() const { return Abar_; }
  const Eigen::VectorXd& mean_shift() const { return bbar_; }

 private:
  void finalize() {
    Abar_ = Eigen::MatrixXd::Zero(d, d);
    bbar_ = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < m; ++j) {
      Abar_ += A[j];
      bbar_ += b[j];
    }
    Abar_ /= m;
    bbar_ /= m;
    Abar_ldlt_.compute(Abar_);
  }

  Eigen::MatrixXd Abar_;
  Eigen::VectorXd bbar_;
  Eigen::LDLT<Eigen::MatrixXd> Abar_ldlt_;
};

struct ProblemInstance {
  int d = 0;
  int n = 0;
  std::vector<LocalObjective> objectives;
  double mu_min = 0.0, L_max = 0.0;
  double kappa_min = 1.0, kappa_max = 1.0, kappa_F = 1.0;

  // reference optimum of f(t) = sum_i f_i(t), filled by centralized_solve
  Eigen::VectorXd theta_star;
  double f_star = 0.0;
  bool has_reference = false;

  bool all_quadratic() const {
    for (const auto& o : objectives)
      if (o.kind != ObjectiveKind::quadratic) return false;
    return true;
  }

  double f(const Eigen::VectorXd& t) const {
    double v = 0.0;
    for (const auto& o : objectives) v += o.value(t);
    return v;
  }

  Eigen::VectorXd grad_f(const Eigen::VectorXd& t) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (const auto& o : objectives) g += o.gradient(t);
    return g;
  }

  // F*(x) = sum_i f_i*(x_i) for quadratic instances; columns of X are x_i.
  double conjugate_sum(const Eigen::MatrixXd& X) const {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += objectives[i].conjugate_value(X.col(i));
    return v;
  }
};

inline ProblemInstance make_problem(std::vector<LocalObjective> objs) {
  if (objs.empty()) throw std::invalid_argument("need at least one worker");
  ProblemInstance p;
  p.n = static_cast<int>(objs.size());
  p.d = objs[0].d;
  p.mu_min = std::numeric_limits<double>::infinity();
  p.L_max = 0.0;
  p.kappa_min = std::numeric_limits<double>::infinity();
  p.kappa_max = 1.0;
  for (const auto& o : objs) {
    if (o.d != p.d) throw std::invalid_argument("dimension mismatch");
    p.mu_min = std::min(p.mu_min, o.mu);
    p.L_max = std::max(p.L_max, o.L);
    p.kappa_min = std::min(p.kappa_min, o.L / o.mu);
    p.kappa_max = std::max(p.kappa_max, o.L / o.mu);
  }
  p.kappa_F = p.L_max / p.mu_min;
  p.objectives = std::move(objs);
  return p;
}

namespace detail {

inline Eigen::MatrixXd random_spd(int d, double mu, double L,
                                  std::mt19937_64& rng) {
  if (mu <= 0.0 || L < mu) throw std::invalid_argument("need 0 < mu <= L");
  std::uniform_real_distribution<double> unif(mu, L);
  Eigen::VectorXd ev(d);
  for (int k = 0; k < d; ++k) ev(k) = unif(rng);
  if (d >= 2) {
    ev(0) = mu;
    ev(d - 1) = L;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd G(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) G(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  return Q * ev.asDiagonal() * Q.transpose();
}

}  // namespace detail

// Seeded synthetic quadratic instance. conditioning holds per-worker
// (mu_i, L_i) targets; a single entry is broadcast to all workers.
inline ProblemInstance make_quadratic(
    int n, int m, int d, std::vector<std::pair<double, double>> conditioning,
    std::uint64_t seed) {
  if (d < 1 || n < 1 || m < 1) throw std::invalid_argument("bad sizes");
  if (conditioning.empty())
    throw std::invalid_argument("conditioning spec is empty");
  if (conditioning.size() == 1) conditioning.resize(n, conditioning[0]);
  if (static_cast<int>(conditioning.size()) != n)
    throw std::invalid_argument("conditioning size must be 1 or n");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<LocalObjective> objs;
  objs.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto [mu_i, L_i] = conditioning[i];
    std::vector<Eigen::MatrixXd> As;
    std::vector<Eigen::VectorXd> bs;
    for (int j = 0; j < m; ++j) {
      As.push_back(detail::random_spd(d, mu_i, L_i, rng));
      Eigen::VectorXd bj(d);
      for (int k = 0; k < d; ++k) bj(k) = gauss(rng);
      bs.push_back(bj);
    }
    objs.push_back(LocalObjective::quadratic(std::move(As), std::move(bs)));
  }
  return make_problem(std::move(objs));
}

// Shards the dataset rows in order by the partition counts.
inline ProblemInstance make_logistic(const Dataset& ds, double lambda,
                                     const PartitionSpec& partition) {
  const int n = static_cast<int>(partition.counts.size());
  int total = 0;
  for (int c : partition.counts) total += c;
  if (total != static_cast<int>(ds.num_samples()))
    throw std::invalid_argument("partition counts do not cover the dataset");
  std::vector<LocalObjective> objs;
  objs.reserve(n);
  int offset = 0;
  for (int i = 0; i < n; ++i) {
    const int cnt = partition.counts[i];
    objs.push_back(LocalObjective::logistic(
        ds.features.middleRows(offset, cnt), ds.labels.segment(offset, cnt),
        lambda));
    offset += cnt;
  }
  return make_problem(std::move(objs));
}

// Deterministic reference optimum: closed form for quadratics, full-gradient
// accelerated descent otherwise.
inline std::pair<Eigen::VectorXd, double> centralized_solve(
    ProblemInstance& p, double tol = 1e-12, long max_iters = 2000000) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  Eigen::VectorXd theta;
  if (p.all_quadratic()) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p.d, p.d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p.d);
    for (const auto& o : p.objectives) {
      H += o.mean_matrix();
      rhs += o.mean_shift();
    }
    theta = H.ldlt().solve(rhs);
  } else {
    double Lsum = 0.0, musum = 0.0;
    for (const auto& o : p.objectives) {
      Lsum += o.L;
      musum += o.mu;
    }
    const double coef = (std::sqrt(Lsum / musum) - 1.0) /
                        (std::sqrt(Lsum / musum) + 1.0);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(p.d), w = th;
    bool converged = false;
    for (long it = 0; it < max_iters; ++it) {
      const Eigen::VectorXd g = p.grad_f(w);
      if (g.norm() <= tol) {
        theta = w;
        converged = true;
        break;
      }
      Eigen::VectorXd th_next = w - g / Lsum;
      w = th_next + coef * (th_next - th);
      th = std::move(th_next);
    }
    if (!converged) {
      if (p.grad_f(th).norm() > tol)
        throw std::runtime_error("centralized_solve: iteration cap exceeded");
      theta = th;
    }
  }
  p.theta_star = theta;
  p.f_star = p.f(theta);
  p.has_reference = true;
  return {p.theta_star, p.f_star};
}

}  // namespace lazydual
