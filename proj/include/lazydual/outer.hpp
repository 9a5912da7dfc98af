#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lazydual/gossip.hpp"
#include "lazydual/graph.hpp"
#include "lazydual/inner.hpp"
#include "lazydual/lazy.hpp"
#include "lazydual/problem.hpp"

namespace lazydual {

enum class Method { ssda, msda, dlag, mdlag };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::ssda: return "ssda";
    case Method::msda: return "msda";
    case Method::dlag: return "dlag";
    case Method::mdlag: return "mdlag";
  }
  return "?";
}

inline Method method_from_name(const std::string& s) {
  if (s == "ssda") return Method::ssda;
  if (s == "msda") return Method::msda;
  if (s == "dlag") return Method::dlag;
  if (s == "mdlag") return Method::mdlag;
  throw std::invalid_argument("unknown method: " + s);
}

struct AlgoConfig {
  Method method = Method::ssda;
  double eta = 0.0;    // step size; 0 means "use 1/beta default"
  double s = 1.0;      // momentum inflation
  double gamma = 0.0;  // staleness tolerance
  double c = 0.0;      // inexactness parameter
  int D = 1;           // max delay
  int K_override = 0;  // force gossip round count (0 = floor(1/sqrt(zeta)))
  InnerBudget inner;
};

struct StopRule {
  long max_iters = 100;
  double target_subopt = -1.0;  // <= 0 disables the target
};

struct IterationReport {
  std::vector<char> sent;       // per-worker send flags this iteration
  std::vector<double> lazy_lhs;
  std::vector<double> lazy_rhs;
  long messages = 0;            // directed vector messages this iteration
  long grad_evals = 0;          // budget units this iteration
  int skips = 0;
};

struct TraceRow {
  long iter = 0;
  double subopt = 0.0;
  double consensus = 0.0;
  long messages = 0;    // cumulative
  long grad_evals = 0;  // cumulative
  int skips = 0;        // this iteration
  double dual_value = 0.0;  // F*(y^k), quadratic instances only
};

struct RunTrace {
  Method method = Method::ssda;
  std::uint64_t seed = 0;
  bool chebyshev_bypass = false;
  double eta = 0.0, s = 1.0, gamma = 0.0, c = 0.0;
  int D = 1, K = 1;
  double kappa = 1.0;  // governing condition number used for momentum
  std::string config_hash;
  std::vector<TraceRow> rows;
  std::vector<IterationReport> reports;

  long total_messages() const {
    return rows.empty() ? 0 : rows.back().messages;
  }
  long total_grad_evals() const {
    return rows.empty() ? 0 : rows.back().grad_evals;
  }
  long iterations() const {
    return rows.empty() ? 0 : rows.back().iter;
  }
};

// Barrier-synchronized round simulator over all n workers. State lives in
// d x n matrices whose column i is worker i's vector.
class Simulator {
 public:
  Simulator(const Graph& graph, const GossipMatrix& gm,
            const ProblemInstance& problem, const AlgoConfig& cfg,
            std::uint64_t seed)
      : graph_(graph), gm_(gm), problem_(problem), cfg_(cfg), seed_(seed) {
    if (problem_.n != gm_.n() || graph_.n != gm_.n())
      throw std::invalid_argument("graph / gossip / problem size mismatch");
    if (cfg_.D < 1) throw std::invalid_argument("delay cap must be >= 1");
    plan_ = chebyshev_plan(gm_);
    if (cfg_.K_override > 0) set_plan_rounds(plan_, cfg_.K_override);
    if (multi_step()) {
      pk_ = chebyshev_operator(gm_, plan_);
      Spectrum sp = spectrum(pk_);
      op_sigma1_ = sp.sigma1;
      op_zeta_ = sp.zeta;
    } else {
      op_sigma1_ = gm_.sigma1;
      op_zeta_ = gm_.zeta;
    }
    kappa_ = problem_.kappa_F / op_zeta_;
    eta_ = cfg_.eta > 0.0 ? cfg_.eta
                          : problem_.mu_min / op_sigma1_;  // 1/beta default
    const double sk = std::sqrt(cfg_.s * kappa_);
    momentum_ = (sk - 1.0) / (sk + 1.0);
    init();
  }

  bool multi_step() const {
    return cfg_.method == Method::msda || cfg_.method == Method::mdlag;
  }
  bool lazy() const {
    return cfg_.method == Method::dlag || cfg_.method == Method::mdlag;
  }

  const ChebyshevPlan& plan() const { return plan_; }
  double kappa() const { return kappa_; }
  double eta() const { return eta_; }
  long iteration() const { return k_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::MatrixXd& Y() const { return Y_; }
  const Eigen::MatrixXd& Theta() const { return Theta_; }
  const Eigen::MatrixXd& ThetaHat() const { return ThetaHat_; }
  const Eigen::MatrixXd& P() const { return P_; }
  const std::vector<int>& delays() const { return delay_; }
  const std::vector<LazyAccumulators>& accumulators() const { return acc_; }
  long init_grad_evals() const { return init_evals_; }

  // Cache coherence: P_i against the fresh recomputation sum_j U_ij thhat_j.
  double cache_residual() const {
    return (P_ - ThetaHat_ * gm_.U).norm();
  }

  Eigen::VectorXd theta_bar() const { return Theta_.rowwise().mean(); }

  double consensus_residual() const {
    const Eigen::VectorXd mean = theta_bar();
    return (Theta_.colwise() - mean).norm();
  }

  double suboptimality() const {
    if (!problem_.has_reference)
      throw std::runtime_error("problem has no reference optimum");
    return problem_.f(theta_bar()) - problem_.f_star;
  }

  // One synchronous round: apply the cached update direction, then solve
  // the subproblems at the new x, then run the lazy exchange.
  IterationReport step() {
    const int n = problem_.n;
    IterationReport rep;
    rep.sent.assign(n, 0);
    rep.lazy_lhs.assign(n, 0.0);
    rep.lazy_rhs.assign(n, 0.0);

    // update phase: y^{k+1} = x^k - eta * ThetaHat^k * Op(U)
    Eigen::MatrixXd dir;
    if (multi_step()) {
      dir = accelerated_gossip(ThetaHat_, gm_, plan_, &P_);
      rep.messages += static_cast<long>(plan_.K - 1) * 2 *
                      static_cast<long>(graph_.edges.size());
    } else {
      dir = P_;
    }
    Eigen::MatrixXd Ynew = X_ - eta_ * dir;
    Eigen::MatrixXd Xnew = Ynew + momentum_ * (Ynew - Y_);
    if (!Xnew.allFinite()) throw std::runtime_error("non-finite outer iterate");
    Eigen::VectorXd delta(n);
    for (int i = 0; i < n; ++i) delta(i) = (X_.col(i) - Xnew.col(i)).squaredNorm();
    Y_ = std::move(Ynew);
    X_ = std::move(Xnew);
    ++k_;

    // compute phase: fresh approximate dual gradients at x^{k}
    Eigen::MatrixXd ThetaNew(problem_.d, n);
    for (int i = 0; i < n; ++i) {
      std::mt19937_64 rng = worker_rng(i, k_);
      if (lazy()) {
        InnerResult r = solve_subproblem(problem_.objectives[i], X_.col(i),
                                         Theta_.col(i), cfg_.inner, rng);
        ThetaNew.col(i) = r.theta;
        rep.grad_evals += cfg_.inner.solver == InnerSolver::exact
                              ? r.evals
                              : cfg_.inner.steps;
      } else {
        const Eigen::VectorXd warm = Theta_.col(i);
        InnerResult r = exact_dual_gradient_counted(problem_.objectives[i],
                                                    X_.col(i), 1e-10, &warm);
        ThetaNew.col(i) = std::move(r.theta);
        rep.grad_evals += r.evals;
      }
    }

    // decide phase: per-worker lazy condition on round-start state
    std::vector<char> send(n, 1);
    for (int i = 0; i < n; ++i) {
      if (lazy()) {
        const double rhs = acc_[i].update(delta(i));
        const double lhs = (ThetaHat_.col(i) - ThetaNew.col(i)).squaredNorm();
        rep.lazy_lhs[i] = lhs;
        rep.lazy_rhs[i] = rhs;
        send[i] = lazy_check(lhs, rhs, delay_[i], cfg_.D) ? 0 : 1;
      }
    }

    // exchange phase: incremental Q-protocol cache update
    for (int i = 0; i < n; ++i) {
      if (send[i]) {
        const Eigen::VectorXd Q = ThetaNew.col(i) - ThetaHat_.col(i);
        for (int j : graph_.neighbors_with_self(i))
          P_.col(j) += gm_.U(j, i) * Q;
        ThetaHat_.col(i) = ThetaNew.col(i);
        delay_[i] = 0;
        rep.messages += graph_.degree(i);
        rep.sent[i] = 1;
      } else {
        ++delay_[i];
        ++rep.skips;
      }
      if (delay_[i] > cfg_.D)
        throw std::logic_error("delay bound violated");
    }
    Theta_ = std::move(ThetaNew);
    return rep;
  }

  RunTrace run(const StopRule& stop) {
    RunTrace trace;
    trace.method = cfg_.method;
    trace.seed = seed_;
    trace.chebyshev_bypass = plan_.bypass;
    trace.eta = eta_;
    trace.s = cfg_.s;
    trace.gamma = cfg_.gamma;
    trace.c = cfg_.c;
    trace.D = cfg_.D;
    trace.K = plan_.K;
    trace.kappa = kappa_;

    long messages = 0, evals = init_evals_;
    trace.rows.push_back(make_row(0, messages, evals, 0));
    const double initial_subopt = trace.rows[0].subopt;
    for (long t = 1; t <= stop.max_iters; ++t) {
      IterationReport rep = step();
      messages += rep.messages;
      evals += rep.grad_evals;
      trace.rows.push_back(make_row(t, messages, evals, rep.skips));
      trace.reports.push_back(std::move(rep));
      const double sub = trace.rows.back().subopt;
      if (initial_subopt > 0.0 && sub > 1e6 * initial_subopt)
        throw std::runtime_error("divergence guard tripped");
      if (stop.target_subopt > 0.0 && sub <= stop.target_subopt) break;
    }
    return trace;
  }

 private:
  void init() {
    const int n = problem_.n;
    X_ = Eigen::MatrixXd::Zero(problem_.d, n);
    Y_ = X_;
    Theta_.resize(problem_.d, n);
    init_evals_ = 0;
    for (int i = 0; i < n; ++i) {
      InnerResult r = exact_dual_gradient_counted(problem_.objectives[i],
                                                  X_.col(i), 1e-12);
      Theta_.col(i) = std::move(r.theta);
      init_evals_ += r.evals;
    }
    ThetaHat_ = Theta_;
    P_ = Theta_ * gm_.U;
    delay_.assign(n, 0);
    acc_.assign(n, LazyAccumulators(cfg_.c, cfg_.gamma, cfg_.D,
                                    problem_.mu_min));
    k_ = 0;
  }

  TraceRow make_row(long iter, long messages, long evals, int skips) const {
    TraceRow row;
    row.iter = iter;
    row.subopt = suboptimality();
    row.consensus = consensus_residual();
    row.messages = messages;
    row.grad_evals = evals;
    row.skips = skips;
    if (problem_.all_quadratic()) row.dual_value = problem_.conjugate_sum(Y_);
    return row;
  }

  // per-(worker, iteration) RNG stream
  std::mt19937_64 worker_rng(int worker, long iter) const {
    std::seed_seq seq{seed_, static_cast<std::uint64_t>(worker),
                      static_cast<std::uint64_t>(iter)};
    return std::mt19937_64(seq);
  }

  const Graph& graph_;
  const GossipMatrix& gm_;
  const ProblemInstance& problem_;
  AlgoConfig cfg_;
  std::uint64_t seed_;
  ChebyshevPlan plan_;
  Eigen::MatrixXd pk_;
  double op_sigma1_ = 1.0, op_zeta_ = 1.0;
  double kappa_ = 1.0, eta_ = 0.0, momentum_ = 0.0;

  Eigen::MatrixXd X_, Y_, Theta_, ThetaHat_, P_;
  std::vector<int> delay_;
  std::vector<LazyAccumulators> acc_;
  long k_ = 0;
  long init_evals_ = 0;
};

}  // namespace lazydual
