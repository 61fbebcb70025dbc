// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "irswpcn/allocation.hpp"
#include "irswpcn/convex_kernel.hpp"

namespace irswpcn::kernel {
namespace {

TEST(Kernel, ExpConstraint) {
  ConvexSubproblem p;
  const int x = p.add_variables(1);
  p.linear_objective.add(x, 1.0);
  p.exponentials.push_back({x, LinearExpr{}.shift(2.0)});
  const auto r = solve_subproblem(p, Eigen::VectorXd::Constant(1, -1.0), 1e-10);
  EXPECT_EQ(r.report.status, SolverStatus::optimal);
  EXPECT_NEAR(r.point(0), std::log(2.0), 1e-8);
}

TEST(Kernel, DiskMaximizer) {
  ConvexSubproblem p;
  Eigen::VectorXcd c(3);
  c << cplx(1.0, 2.0), cplx(-0.5, 0.1), cplx(0.0, -3.0);
  const int z = p.add_complex_block(3);
  for (int n = 0; n < 3; ++n) {
    p.linear_objective.add(z + 2 * n, c(n).real()).add(z + 2 * n + 1, c(n).imag());
  }
  const auto r = solve_subproblem(p, Eigen::VectorXd::Zero(6), 1e-10);
  EXPECT_NEAR(r.report.objective, c.cwiseAbs().sum(), 1e-8);
  for (int n = 0; n < 3; ++n) {
    const cplx zn(r.point(z + 2 * n), r.point(z + 2 * n + 1));
    EXPECT_NEAR(std::abs(zn - c(n) / std::abs(c(n))), 0.0, 1e-4);
    EXPECT_LE(std::abs(zn), 1.0);
  }
}

TEST(Kernel, InversePowers) {
  // min x + y s.t. 1/x <= y  ->  x = y = 1
  ConvexSubproblem p;
  p.add_variables(2);
  p.linear_objective.add(0, -1.0).add(1, -1.0);
  p.inverse_powers.push_back({0, 1.0, 1.0, LinearExpr{}.add(1, 1.0)});
  const auto r = solve_subproblem(p, Eigen::Vector2d(2.0, 2.0), 1e-10);
  EXPECT_NEAR(r.point(0), 1.0, 1e-6);
  EXPECT_NEAR(r.report.objective, -2.0, 1e-8);

  // min x + y s.t. x^{-1/2} <= y  ->  x = 2^{-2/3}
  ConvexSubproblem q = p;
  q.inverse_powers[0].power = 0.5;
  const auto s = solve_subproblem(q, Eigen::Vector2d(2.0, 2.0), 1e-10);
  const double xs = std::pow(0.5, 2.0 / 3.0);
  EXPECT_NEAR(s.point(0), xs, 1e-6);
  EXPECT_NEAR(s.report.objective, -(xs + 1.0 / std::sqrt(xs)), 1e-8);
}

TEST(Kernel, EqualityConstraint) {
  // max log2(1 + s/t) t  with s <= 4, t + u == 1, u >= 0.2
  ConvexSubproblem p;
  const int t = p.add_variables(3);
  p.perspective.push_back({t, t + 1, 1.0, 1.0});
  p.inequalities.push_back(LinearExpr{}.add(t + 1, -1.0).shift(4.0));
  p.inequalities.push_back(LinearExpr{}.add(t + 2, 1.0).shift(-0.2));
  p.equalities.push_back(LinearExpr{}.add(t, 1.0).add(t + 2, 1.0).shift(-1.0));
  const auto r = solve_subproblem(p, Eigen::Vector3d(0.5, 1.0, 0.5), 1e-10);
  EXPECT_NEAR(r.point(0), 0.8, 1e-7);
  EXPECT_NEAR(r.report.objective, 0.8 * std::log2(1.0 + 4.0 / 0.8), 1e-8);
  EXPECT_NEAR(r.point(0) + r.point(2), 1.0, 1e-12);
}

TEST(Kernel, MatchesAllocationOracle) {
  // variables: tau0, tau_k, s_k with s_k <= c_k tau0 and tau0 + sum tau_k <= 1
  const std::vector<double> c{2.0, 40.0, 700.0};
  ConvexSubproblem p;
  const int tau0 = p.add_variables(1);
  const int tau = p.add_variables(3);
  const int s = p.add_variables(3);
  LinearExpr budget;
  budget.shift(1.0).add(tau0, -1.0);
  for (int k = 0; k < 3; ++k) {
    p.perspective.push_back({tau + k, s + k, 1.0, 1.0});
    p.inequalities.push_back(LinearExpr{}.add(tau0, c[static_cast<std::size_t>(k)]).add(s + k, -1.0));
    budget.add(tau + k, -1.0);
  }
  p.inequalities.push_back(budget);
  Eigen::VectorXd x0(7);
  x0 << 0.5, 0.1, 0.1, 0.1, 0.5, 0.5, 0.5;
  const auto r = solve_subproblem(p, x0, 1e-10);
  const auto oracle = allocate({c, {}}, 1.0);
  EXPECT_NEAR(r.report.objective, oracle.throughput, 1e-6);
  EXPECT_NEAR(r.point(tau0), oracle.tau0, 1e-4);
  EXPECT_LE(p.max_violation(r.point), 1e-9);
}

TEST(Kernel, PsdBlock) {
  // max Re(w) s.t. [[1, w], [conj w, 1]] PSD  ->  w = 1
  ConvexSubproblem p;
  const int w = p.add_variables(2);
  p.linear_objective.add(w, 1.0);
  PsdConstraint blk;
  blk.dim = 2;
  blk.constant = Eigen::MatrixXcd::Identity(2, 2);
  blk.terms.push_back({w, 0, 1, cplx(1.0, 0.0)});
  blk.terms.push_back({w + 1, 0, 1, cplx(0.0, 1.0)});
  p.psd.push_back(blk);
  const auto r = solve_subproblem(p, Eigen::Vector2d(0.0, 0.3), 1e-10);
  EXPECT_NEAR(r.report.objective, 1.0, 1e-8);
  EXPECT_NEAR(r.point(1), 0.0, 1e-4);
}

TEST(Kernel, PsdDiagonalVariable) {
  // max  x01 - 0.5 d  with W = [[d, x01], [x01, 1]] PSD  ->  x01^2 <= d, optimum d = 1, x01 = 1, value 0.5
  ConvexSubproblem p;
  const int d = p.add_variables(2);
  p.linear_objective.add(d, -0.5).add(d + 1, 1.0);
  PsdConstraint blk;
  blk.dim = 2;
  blk.constant = Eigen::MatrixXcd::Zero(2, 2);
  blk.constant(1, 1) = 1.0;
  blk.terms.push_back({d, 0, 0, cplx(1.0, 0.0)});
  blk.terms.push_back({d + 1, 0, 1, cplx(1.0, 0.0)});
  p.psd.push_back(blk);
  const auto r = solve_subproblem(p, Eigen::Vector2d(2.0, 0.0), 1e-10);
  EXPECT_NEAR(r.report.objective, 0.5, 1e-8);
  EXPECT_NEAR(r.point(0), 1.0, 1e-4);
}

TEST(Kernel, InfeasibleStartThrows) {
  ConvexSubproblem p;
  p.add_variables(1);
  p.exponentials.push_back({0, LinearExpr{}.shift(2.0)});
  EXPECT_THROW(solve_subproblem(p, Eigen::VectorXd::Constant(1, 1.0), 1e-8), InfeasibleStartError);
  ConvexSubproblem q;
  q.add_variables(2);
  q.equalities.push_back(LinearExpr{}.add(0, 1.0).add(1, 1.0).shift(-1.0));
  EXPECT_THROW(solve_subproblem(q, Eigen::Vector2d(0.2, 0.2), 1e-8), InfeasibleStartError);
}

TEST(Kernel, NeverDescends) {
  // Near-optimal start: the returned objective must not fall below it.
  ConvexSubproblem p;
  const int z = p.add_complex_block(1);
  p.linear_objective.add(z, 1.0);
  Eigen::VectorXd x0(2);
  x0 << 1.0 - 1e-13, 0.0;
  const auto r = solve_subproblem(p, x0, 1e-8);
  EXPECT_GE(r.report.objective, p.objective(x0));
}

}  // namespace
}  // namespace irswpcn::kernel
