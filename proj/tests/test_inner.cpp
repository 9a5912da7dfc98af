#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "lazydual/inner.hpp"
#include "lazydual/lazy.hpp"
#include "lazydual/problem.hpp"

using namespace lazydual;

namespace {

Eigen::VectorXd random_vec(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = gauss(rng);
  return v;
}

LocalObjective sample_quadratic(int m, int d, double mu, double L,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> As;
  std::vector<Eigen::VectorXd> bs;
  for (int j = 0; j < m; ++j) {
    As.push_back(detail::random_spd(d, mu, L, rng));
    bs.push_back(random_vec(d, rng));
  }
  return LocalObjective::quadratic(std::move(As), std::move(bs));
}

}  // namespace

TEST_CASE("katyusha budget formula") {
  // ceil((m + sqrt(m kappa)) log(2 kappa / c)) with m=10, kappa=100, c=0.5
  CHECK(katyusha_budget(10, 100.0, 0.5) == 250);
  CHECK(katyusha_budget(1, 1.0, 0.5) ==
        static_cast<long>(std::ceil(2.0 * std::log(4.0))));
  // C_kat scales the budget
  CHECK(katyusha_budget(10, 100.0, 0.5, 2.0) >=
        2 * katyusha_budget(10, 100.0, 0.5) - 1);
  // smaller contraction target costs more
  CHECK(katyusha_budget(10, 100.0, 0.1) > katyusha_budget(10, 100.0, 0.5));
  CHECK_THROWS(katyusha_budget(0, 100.0, 0.5));
  CHECK_THROWS(katyusha_budget(10, 0.5, 0.5));
  CHECK_THROWS(katyusha_budget(10, 100.0, 1.5));
}

TEST_CASE("exact dual gradient, quadratic closed form") {
  const LocalObjective o = sample_quadratic(3, 4, 0.5, 5.0, 21);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd x = random_vec(4, rng);
  const Eigen::VectorXd th = exact_dual_gradient(o, x);
  // first-order condition of argmin f(t) - <t, x>
  CHECK((o.gradient(th) - x).norm() <= 1e-10);

  const InnerResult r = exact_dual_gradient_counted(o, x);
  CHECK((r.theta - th).norm() == 0.0);
  CHECK(r.evals == 0);  // closed form is free
}

TEST_CASE("exact dual gradient, logistic fallback") {
  Eigen::MatrixXd rows(4, 3);
  rows << 0.5, -0.2, 0.1, 0.3, 0.7, -0.4, -0.6, 0.2, 0.2, 0.1, -0.1, 0.9;
  Eigen::VectorXd labels(4);
  labels << 1, 0, 1, 0;
  const LocalObjective o = LocalObjective::logistic(rows, labels, 0.05);

  std::mt19937_64 rng(8);
  const Eigen::VectorXd x = 0.1 * random_vec(3, rng);
  const Eigen::VectorXd th = exact_dual_gradient(o, x, 1e-12);
  CHECK((o.gradient(th) - x).norm() <= 1e-11);

  const InnerResult cold = exact_dual_gradient_counted(o, x, 1e-10);
  CHECK((o.gradient(cold.theta) - x).norm() <= 1e-9);
  CHECK(cold.evals % o.m == 0);  // m component gradients per iteration
  CHECK(cold.evals > 0);

  // warm starting at the answer costs (almost) nothing
  const InnerResult warm = exact_dual_gradient_counted(o, x, 1e-10, &th);
  CHECK(warm.evals <= o.m);
}

TEST_CASE("agd budgeted solve converges at the expected rate") {
  const LocalObjective o = sample_quadratic(2, 5, 1.0, 20.0, 55);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd x = random_vec(5, rng);
  const Eigen::VectorXd star = o.dual_gradient(x);
  const Eigen::VectorXd warm = Eigen::VectorXd::Zero(5);

  const InnerResult short_run = detail::agd_fixed(o, x, warm, 20);
  const InnerResult long_run = detail::agd_fixed(o, x, warm, 200);
  CHECK(short_run.evals == 20);
  CHECK(long_run.evals == 200);
  CHECK((long_run.theta - star).norm() <= 1e-10);
  CHECK((long_run.theta - star).norm() < (short_run.theta - star).norm());
}

TEST_CASE("katyusha consumes its budget exactly and is seed-deterministic") {
  const LocalObjective o = sample_quadratic(8, 4, 0.5, 10.0, 12);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = random_vec(4, rng);
  const Eigen::VectorXd warm = random_vec(4, rng);
  const long budget = katyusha_budget(o.m, o.L / o.mu, 0.5);

  std::mt19937_64 r1(77), r2(77), r3(78);
  const InnerResult a = detail::katyusha_fixed(o, x, warm, budget, r1);
  const InnerResult b = detail::katyusha_fixed(o, x, warm, budget, r2);
  const InnerResult c = detail::katyusha_fixed(o, x, warm, budget, r3);
  CHECK(a.evals == budget);
  CHECK((a.theta - b.theta).norm() == 0.0);
  CHECK((a.theta - c.theta).norm() > 0.0);
}

TEST_CASE("katyusha makes progress toward the subproblem optimum") {
  const LocalObjective o = sample_quadratic(10, 4, 1.0, 30.0, 41);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd x = random_vec(4, rng);
  const Eigen::VectorXd star = o.dual_gradient(x);
  const Eigen::VectorXd warm = star + random_vec(4, rng);
  const double before = (warm - star).squaredNorm();

  const long budget = katyusha_budget(o.m, o.L / o.mu, 0.1);
  double mean_after = 0.0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 r(1000 + rep);
    const InnerResult res = detail::katyusha_fixed(o, x, warm, budget, r);
    mean_after += (res.theta - star).squaredNorm();
  }
  mean_after /= reps;
  // budget sized for contraction c/2 = 0.05; allow Monte Carlo slack
  CHECK(mean_after <= 0.25 * before);
}

TEST_CASE("solve_subproblem dispatch and validation") {
  const LocalObjective o = sample_quadratic(4, 3, 1.0, 8.0, 91);
  std::mt19937_64 rng(2);
  const Eigen::VectorXd x = random_vec(3, rng);
  const Eigen::VectorXd warm = Eigen::VectorXd::Zero(3);

  InnerBudget exact{InnerSolver::exact, 0, 0.5};
  const InnerResult re = solve_subproblem(o, x, warm, exact, rng);
  CHECK((re.theta - o.dual_gradient(x)).norm() <= 1e-12);
  CHECK(re.evals == 0);

  InnerBudget agd{InnerSolver::agd, 50, 0.5};
  const InnerResult ra = solve_subproblem(o, x, warm, agd, rng);
  CHECK(ra.evals == 50);
  CHECK((ra.theta - o.dual_gradient(x)).norm() <= 1e-6);

  InnerBudget kat{InnerSolver::katyusha, katyusha_budget(4, 8.0, 0.5), 0.5};
  const InnerResult rk = solve_subproblem(o, x, warm, kat, rng);
  CHECK(rk.evals == kat.steps);

  InnerBudget zero{InnerSolver::agd, 0, 0.5};
  CHECK_THROWS(solve_subproblem(o, x, warm, zero, rng));
  Eigen::VectorXd bad = warm;
  bad(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(solve_subproblem(o, x, bad, exact, rng));
}

TEST_CASE("lazy accumulators match direct summation") {
  const double c = 0.9, gamma = 0.05, mu_min = 0.3;
  const int D = 7;
  LazyAccumulators acc(c, gamma, D, mu_min);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  std::vector<double> deltas;
  for (int k = 1; k <= 400; ++k) {
    deltas.push_back(unif(rng));
    acc.update(deltas.back());
    // direct sums: delta_j for j = 0..k-1, zero before that
    double direct_A = 0.0, direct_B = 0.0, direct_W = 0.0;
    for (int j = 0; j < k; ++j) {
      direct_A += std::pow(c, k - j) * deltas[j];
      if (j <= k - D - 1) direct_B += std::pow(c, k - D - j) * deltas[j];
      if (j >= k - D) direct_W += deltas[j];
    }
    const double scale = std::max(1.0, direct_A);
    CHECK(std::abs(acc.acc_A() - direct_A) <= 1e-12 * scale);
    CHECK(std::abs(acc.acc_B() - direct_B) <= 1e-12 * scale);
    CHECK(std::abs(acc.window_sum() - direct_W) <= 1e-12 * scale);
    const double expect_rhs =
        (3.0 / (mu_min * mu_min)) *
        (direct_B + direct_A + (c + gamma) * direct_W);
    CHECK(acc.rhs() == Catch::Approx(expect_rhs).margin(1e-10));
  }
}

TEST_CASE("lazy accumulators degenerate settings") {
  // c = gamma = 0 forces rhs = 0: never skip
  LazyAccumulators acc(0.0, 0.0, 3, 1.0);
  for (int k = 0; k < 10; ++k) CHECK(acc.update(1.0) == 0.0);
  CHECK_THROWS(LazyAccumulators(0.5, 0.0, 0, 1.0));
  LazyAccumulators neg(0.5, 0.0, 3, 1.0);
  CHECK_THROWS(neg.update(-1.0));
}

TEST_CASE("lazy check boundary semantics") {
  CHECK(lazy_check(1.0, 1.0, 0, 3));       // lhs == rhs may skip
  CHECK_FALSE(lazy_check(1.0, 0.5, 0, 3));  // moved too far
  CHECK_FALSE(lazy_check(0.0, 1.0, 3, 3));  // delay cap reached
  CHECK(lazy_check(0.0, 1.0, 2, 3));
}
