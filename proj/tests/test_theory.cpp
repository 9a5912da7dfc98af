#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lazydual/gossip.hpp"
#include "lazydual/graph.hpp"
#include "lazydual/problem.hpp"
#include "lazydual/theory.hpp"

using namespace lazydual;

namespace {

struct Setup {
  Graph graph;
  GossipMatrix gm;
  ProblemInstance problem;
};

Setup grid_setup(std::uint64_t seed = 4, double mu = 1.0, double L = 10.0) {
  Setup s{make_grid2d(2, 3), {}, {}};
  s.gm = metropolis_weights(s.graph);
  s.problem = make_quadratic(6, 2, 3, {{mu, L}}, seed);
  return s;
}

// worker 0 strongly heterogeneous (tiny mu), everyone else identical
Setup hetero_setup() {
  Setup s{make_path(4), {}, {}};
  s.gm = metropolis_weights(s.graph);
  s.problem = make_quadratic(
      4, 2, 3, {{1e-4, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}, 2);
  return s;
}

}  // namespace

TEST_CASE("prescribed schedule constants") {
  const Setup s = grid_setup();
  const int D = 4;
  const TheoryParams p = theorem1_params(s.gm, s.problem, D);

  const double alpha = s.gm.sigma_nm1 / s.problem.L_max;
  const double beta = s.gm.sigma1 / s.problem.mu_min;
  const double kappa = (s.problem.L_max / s.problem.mu_min) / s.gm.zeta;
  CHECK(p.alpha == Catch::Approx(alpha).margin(1e-14));
  CHECK(p.beta == Catch::Approx(beta).margin(1e-14));
  CHECK(p.kappa == Catch::Approx(kappa).margin(1e-10));

  // gamma and c recomputed from scratch
  const double base = alpha * beta * s.problem.mu_min * s.problem.mu_min /
                      (s.gm.sigma1 * s.gm.sigma1);
  const double gamma_expect =
      base / (288.0 * D) * std::exp(-2.0 * D / std::sqrt(kappa));
  const double c_expect =
      base / (1200.0 * D) * std::exp(-2.0 * (D + 1) / std::sqrt(kappa));
  CHECK(p.gamma == Catch::Approx(gamma_expect).epsilon(1e-12));
  CHECK(p.c == Catch::Approx(c_expect).epsilon(1e-12));
  CHECK(p.c < p.gamma);
  CHECK(p.c > 0.0);

  CHECK(p.s == 10.0);
  CHECK(p.eta == Catch::Approx(2.0 / (15.0 * beta)).epsilon(1e-14));
  CHECK(p.a == Catch::Approx(1.0 / 48.0).margin(1e-15));
  CHECK(p.b == Catch::Approx(1.0 / 48.0).margin(1e-15));
  CHECK(p.rho == 4.0);

  CHECK_THROWS(theorem1_params(s.gm, s.problem, 1));
}

TEST_CASE("general schedule closes over the prescribed one") {
  const Setup s = grid_setup();
  for (int D : {2, 4, 10, 25}) {
    const TheoryParams t1 = theorem1_params(s.gm, s.problem, D);
    const TheoryParams t4 =
        theorem4_params(s.gm, s.problem, D, t1.gamma, t1.c);
    CHECK(t4.a == Catch::Approx(1.0 / 48.0).epsilon(1e-12));
    CHECK(t4.b == Catch::Approx(1.0 / 48.0).epsilon(1e-12));
    CHECK(t4.rho == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(t4.s == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(t4.eta == Catch::Approx(2.0 / (15.0 * t4.beta)).epsilon(1e-12));
  }
}

TEST_CASE("general schedule argument checks") {
  const Setup s = grid_setup();
  CHECK_THROWS(theorem4_params(s.gm, s.problem, 1, 1e-6, 1e-6));
  CHECK_THROWS(theorem4_params(s.gm, s.problem, 4, 1e-6, 1.5));
  // well-conditioned instance on a dense graph: kappa <= 2 is rejected
  Setup easy{make_complete(4), {}, {}};
  easy.gm = metropolis_weights(easy.graph);
  easy.problem = make_quadratic(4, 2, 3, {{1.0, 1.0}}, 1);
  CHECK_THROWS(theorem4_params(easy.gm, easy.problem, 4, 1e-6, 1e-6));
}

TEST_CASE("looser tolerances cost momentum and step size") {
  const Setup s = grid_setup();
  const TheoryParams t1 = theorem1_params(s.gm, s.problem, 4);
  const TheoryParams tight = theorem4_params(s.gm, s.problem, 4, t1.gamma, t1.c);
  const TheoryParams loose =
      theorem4_params(s.gm, s.problem, 4, 10.0 * t1.gamma, 10.0 * t1.c);
  CHECK(loose.a > tight.a);
  CHECK(loose.s > tight.s);
  CHECK(loose.eta < tight.eta);
  CHECK(loose.rho < tight.rho);
}

TEST_CASE("multi-step schedule uses the chebyshev operator spectrum") {
  Setup s{make_path(10), {}, {}};
  s.gm = metropolis_weights(s.graph);
  s.problem = make_quadratic(10, 2, 3, {{1.0, 10.0}}, 6);
  const ChebyshevPlan plan = chebyshev_plan(s.gm);
  REQUIRE(plan.K > 1);
  const TheoryParams p = mdlag_params(s.gm, plan, s.problem, 4);
  const Spectrum sp = spectrum(chebyshev_operator(s.gm, plan));
  CHECK(p.alpha == Catch::Approx(sp.sigma_nm1 / s.problem.L_max).epsilon(1e-12));
  CHECK(p.beta == Catch::Approx(sp.sigma1 / s.problem.mu_min).epsilon(1e-12));
  CHECK(p.kappa == Catch::Approx(s.problem.kappa_F / sp.zeta).epsilon(1e-10));
  // better-conditioned operator: milder exponential cutoff than the
  // single-step schedule on the same poorly connected graph
  const TheoryParams single = theorem1_params(s.gm, s.problem, 4);
  CHECK(p.kappa < single.kappa);
}

TEST_CASE("heterogeneity score on a hand-built instance") {
  const Setup s = hetero_setup();
  // H_0 = 1, H_i = 1e-4 otherwise; gamma = 0.1 admits only the majority
  const std::vector<double> h = heterogeneity_score(s.problem, s.graph, 0.1, 3);
  REQUIRE(h.size() == 3);
  // 2|E| = 6, deg(0) = 1: h_d = 5/6 for every d
  for (double v : h) CHECK(v == Catch::Approx(5.0 / 6.0).margin(1e-15));

  // gamma = 0 admits nobody (H^2 > 0 for all workers)
  for (double v : heterogeneity_score(s.problem, s.graph, 0.0, 3))
    CHECK(v == 0.0);

  // huge gamma admits everyone, including the heterogeneous worker
  for (double v : heterogeneity_score(s.problem, s.graph, 10.0, 3))
    CHECK(v == Catch::Approx(1.0).margin(1e-15));

  // boundary: H^2 == gamma/d counts (non-strict inequality)
  const std::vector<double> hb =
      heterogeneity_score(s.problem, s.graph, 1.0, 1);
  CHECK(hb[0] == Catch::Approx(1.0).margin(1e-15));

  CHECK_THROWS(heterogeneity_score(s.problem, s.graph, 0.1, 0));
}

TEST_CASE("predicted communication factors") {
  const std::vector<double> h(3, 5.0 / 6.0);
  // sum_{d=1}^{3} (1/d - 1/(d+1)) = 3/4, saving = (5/6)(3/4) = 5/8
  CHECK(predicted_comm_factor(h, 1, Method::dlag) ==
        Catch::Approx(3.0 / 8.0).margin(1e-15));
  CHECK(predicted_comm_factor(h, 2, Method::mdlag) ==
        Catch::Approx(11.0 / 8.0).margin(1e-15));
  CHECK(predicted_comm_factor(h, 1, Method::ssda) == 1.0);
  CHECK(predicted_comm_factor(h, 3, Method::msda) == 3.0);
  CHECK(predicted_comm_ratio_vs_ssda(h) ==
        Catch::Approx(std::sqrt(10.0) * 3.0 / 8.0).margin(1e-12));

  // empty score vector: no saving
  CHECK(predicted_comm_factor({}, 1, Method::dlag) == 1.0);
  // full score with a long horizon approaches total saving h * 1
  const std::vector<double> full(1000, 1.0);
  CHECK(predicted_comm_factor(full, 1, Method::dlag) ==
        Catch::Approx(1.0 / 1001.0).margin(1e-12));
}

TEST_CASE("measured utilization versus the prediction") {
  const Graph g = make_path(4);  // 2|E| = 6
  RunTrace trace;
  TraceRow r0;
  trace.rows.push_back(r0);
  TraceRow r1;
  r1.iter = 10;
  r1.messages = 30;  // half of 6 * 10
  trace.rows.push_back(r1);

  const ComparisonReport ok = measured_vs_predicted(trace, g, 0.6);
  CHECK(ok.measured_utilization == Catch::Approx(0.5).margin(1e-15));
  CHECK(ok.pass);

  const ComparisonReport tight = measured_vs_predicted(trace, g, 0.4);
  CHECK_FALSE(tight.pass);
  // slack widens the acceptance band
  const ComparisonReport slacked = measured_vs_predicted(trace, g, 0.48, 0.05);
  CHECK(slacked.pass);
}
