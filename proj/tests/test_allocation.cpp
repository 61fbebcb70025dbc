// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "irswpcn/allocation.hpp"

namespace irswpcn {
namespace {

double split_objective(const std::vector<double>& a, const std::vector<double>& tau, const std::vector<double>& w) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r += w[k] * detail::perspective_log2(tau[k], a[k]);
  return r;
}

// Best value over a uniform grid of the UL split, for K <= 3.
double grid_split(const std::vector<double>& a, double ul, const std::vector<double>& w, int steps) {
  const std::size_t k_count = a.size();
  double best = 0.0;
  if (k_count == 1) return split_objective(a, {ul}, w);
  for (int i = 0; i <= steps; ++i) {
    const double t1 = ul * i / steps;
    if (k_count == 2) {
      best = std::max(best, split_objective(a, {t1, ul - t1}, w));
      continue;
    }
    for (int j = 0; j <= steps - i; ++j) {
      const double t2 = ul * j / steps;
      best = std::max(best, split_objective(a, {t1, t2, ul - t1 - t2}, w));
    }
  }
  return best;
}

TEST(InnerSplit, Symmetric) {
  const std::vector<double> a{3.0, 3.0};
  const auto tau = inner_split(a, 0.8);
  EXPECT_NEAR(tau[0], 0.4, 1e-15);
  EXPECT_NEAR(tau[1], 0.4, 1e-15);
}

TEST(InnerSplit, SingleDeviceTakesAll) {
  const std::vector<double> a{2.5};
  EXPECT_DOUBLE_EQ(inner_split(a, 0.3)[0], 0.3);
}

TEST(InnerSplit, ZeroCoefficientGetsNoTime) {
  const std::vector<double> a{0.0, 2.0};
  const auto tau = inner_split(a, 1.0);
  EXPECT_EQ(tau[0], 0.0);
  EXPECT_DOUBLE_EQ(tau[1], 1.0);
}

TEST(InnerSplit, RejectsNegativeBudget) {
  const std::vector<double> a{1.0};
  EXPECT_THROW(inner_split(a, -0.1), std::invalid_argument);
}

TEST(InnerSplit, MatchesGridSearch) {
  const std::vector<double> a{1.0, 4.0};
  const std::vector<double> w{1.0, 1.0};
  const auto tau = inner_split(a, 1.0);
  const double grid = grid_split(a, 1.0, w, 10000);
  EXPECT_NEAR(split_objective(a, tau, w), grid, 1e-4);
  EXPECT_GE(split_objective(a, tau, w), grid - 1e-12);
}

TEST(InnerSplit, WeightedMatchesGridAndSumsToBudget) {
  RandomStream rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<double> a{5.0 * rng.uniform(), 50.0 * rng.uniform(), 0.5 * rng.uniform()};
    const std::vector<double> w{0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()};
    const double ul = 0.1 + rng.uniform();
    const auto tau = inner_split(a, ul, w);
    double sum = 0.0;
    for (double t : tau) sum += t;
    EXPECT_NEAR(sum, ul, 1e-10);
    EXPECT_GE(split_objective(a, tau, w), grid_split(a, ul, w, 400) - 1e-9);
  }
}

TEST(Allocate, SingleUserClosedForm) {
  const auto r = allocate({{1.0}, {}}, 1.0);
  EXPECT_NEAR(r.tau0, 1.0 - 1.0 / std::numbers::e, 1e-6);
  EXPECT_NEAR(r.throughput, std::numbers::log2e / std::numbers::e, 1e-10);
  EXPECT_NEAR(r.tau0 + r.tau[0], 1.0, 1e-12);
}

TEST(Allocate, ZeroCoefficients) {
  const auto r = allocate({{0.0, 0.0}, {}}, 1.0);
  EXPECT_EQ(r.throughput, 0.0);
  EXPECT_EQ(r.tau0, 0.0);
}

TEST(Allocate, MatchesNestedGrid) {
  RandomStream rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k_count = 1 + trial % 3;
    std::vector<double> c(k_count);
    std::vector<double> w(k_count, 1.0);
    for (auto& v : c) v = std::pow(10.0, 4.0 * rng.uniform() - 1.0);
    const auto r = allocate({c, {}}, 1.0);
    double best = 0.0;
    for (int i = 1; i < 200; ++i) {
      const double tau0 = i / 200.0;
      std::vector<double> a(k_count);
      for (std::size_t k = 0; k < k_count; ++k) a[k] = c[k] * tau0;
      best = std::max(best, grid_split(a, 1.0 - tau0, w, 200));
    }
    EXPECT_NEAR(r.throughput, best, 1e-3 * best);
    EXPECT_GE(r.throughput, best - 1e-12);
  }
}

TEST(Allocate, ConcaveProfileAndMonotone) {
  const std::vector<double> c{3.0, 30.0, 300.0};
  const auto base = allocate({c, {}}, 1.0);
  // The golden-section optimum beats every point of a fine grid.
  for (int i = 1; i < 2000; ++i) {
    const double tau0 = i / 2000.0;
    std::vector<double> a(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) a[k] = c[k] * tau0;
    const auto tau = inner_split(a, 1.0 - tau0);
    EXPECT_LE(split_objective(a, tau, {1.0, 1.0, 1.0}), base.throughput + 1e-12);
  }
  auto bigger = c;
  bigger[1] *= 1.5;
  EXPECT_GT(allocate({bigger, {}}, 1.0).throughput, base.throughput);
  EXPECT_GT(allocate({c, {}}, 1.2).throughput, base.throughput);
}

TEST(FinishSolution, SingleUserAlignedPlan) {
  SystemConfig cfg;
  cfg.num_devices = 1;
  cfg.num_elements = 6;
  cfg.seed = 3;
  const auto s = generate_scenario(cfg);
  const auto al = align_phases(s.direct(0), s.q(0));
  const auto sol = finish_solution(s, PhasePlan::single(al.phases, 1));
  const double c = s.efficiency(0) * s.hap_power() * al.gain * al.gain / s.noise_power();
  EXPECT_NEAR(sol.throughput, allocate({{c}, {}}, 1.0).throughput, 1e-9);
  EXPECT_NEAR(sol.alloc.total_time(), 1.0, 1e-12);
  EXPECT_NEAR(sol.throughput, evaluate_throughput(s, sol.plan, sol.alloc), 1e-12);
  EXPECT_LE(constraint_violation(s, sol.plan, sol.alloc), 1e-12);
}

TEST(FinishSolution, ZeroReflectionIsNoIrs) {
  SystemConfig cfg;
  cfg.seed = 5;
  const auto s = generate_scenario(cfg).without_irs();
  RandomStream rng(1);
  Eigen::VectorXcd v(cfg.num_elements);
  for (auto& x : v) x = rng.unit_phase();
  const auto a = finish_solution(s, PhasePlan::single(PhaseVector::bare(v), cfg.num_devices));
  const auto b = finish_solution(s, PhasePlan::single(PhaseVector::ones(cfg.num_elements), cfg.num_devices));
  EXPECT_NEAR(a.throughput, b.throughput, 1e-12);
}

TEST(FinishSolution, RejectsBadAssignment) {
  SystemConfig cfg;
  const auto s = generate_scenario(cfg);
  auto plan = PhasePlan::single(PhaseVector::ones(cfg.num_elements), cfg.num_devices);
  plan.assignment[1] = 2;
  EXPECT_THROW(finish_solution(s, plan), AssignmentError);
  plan.assignment.pop_back();
  EXPECT_THROW(finish_solution(s, plan), AssignmentError);
}

}  // namespace
}  // namespace irswpcn
