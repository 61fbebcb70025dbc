// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "irswpcn/sca.hpp"

namespace irswpcn {
namespace {

Scenario make(int n, int k, std::uint64_t seed) {
  SystemConfig c;
  c.num_elements = n;
  c.num_devices = k;
  c.seed = seed;
  return generate_scenario(c);
}

double single_user_closed_form(const Scenario& s, double gain_dl, double gain_ul) {
  EffectiveRates r;
  r.c = {s.efficiency(0) * s.hap_power() * gain_dl * gain_ul / s.noise_power()};
  r.weights = {1.0};
  return allocate(r, s.total_time()).throughput;
}

void expect_nondecreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    EXPECT_GE(trace[i], trace[i - 1] - 1e-9 * std::max(1.0, std::abs(trace[i - 1]))) << "at iteration " << i;
  }
}

void expect_feasible(const Scenario& s, const Solution& sol) {
  EXPECT_LE(constraint_violation(s, sol.plan, sol.alloc), 1e-9);
  EXPECT_NEAR(evaluate_throughput(s, sol.plan, sol.alloc), sol.throughput, 1e-9);
  auto check = [](const PhaseVector& v) {
    ASSERT_TRUE(v.is_augmented());
    for (const auto& x : v.values()) EXPECT_NEAR(std::abs(x), 1.0, 1e-9);
    EXPECT_EQ(v.values()(v.size() - 1), cplx(1.0, 0.0));
  };
  check(sol.plan.downlink);
  for (const auto& v : sol.plan.uplink) check(v);
}

TEST(Static, SingleUserMatchesClosedFormAndUserAdaptive) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Scenario s = make(8, 1, seed);
    const double gamma = align_phases(s.direct(0), s.q(0)).gain;
    const double oracle = single_user_closed_form(s, gamma, gamma);
    const Solution st = solve_static(s);
    const Solution ua = solve_user_adaptive(s, {}, &st);
    EXPECT_NEAR(ua.throughput, oracle, 1e-6 * oracle);
    EXPECT_NEAR(st.throughput, ua.throughput, 1e-4 * ua.throughput);
  }
}

TEST(Static, NoReflectionEqualsNoIrsBaseline) {
  const Scenario s = make(6, 3, 4).without_irs();
  EXPECT_NEAR(solve_static(s).throughput, baseline_no_irs(s).throughput, 1e-9);
}

TEST(Static, TracesAscendAndSolutionIsFeasible) {
  for (std::uint64_t seed : {1, 2}) {
    const Scenario s = make(12, 3, seed);
    const Solution st = solve_static(s);
    EXPECT_EQ(st.diagnostics.restarts_used, 5);
    for (const auto& tr : st.diagnostics.restart_traces) {
      expect_nondecreasing(tr);
      EXPECT_LE(tr.size(), 50u);
    }
    expect_feasible(s, st);
    for (int slot : st.plan.assignment) EXPECT_EQ(slot, 0);
  }
}

TEST(Static, BeatsNoIrsAndRandomPhases) {
  const Scenario s = make(12, 3, 5);
  const double st = solve_static(s).throughput;
  EXPECT_GE(st, baseline_no_irs(s).throughput);
  EXPECT_GE(st, baseline_random_phases(s, 10).throughput - 1e-4);
}

TEST(Static, WritesTraceCsv) {
  const std::string path = ::testing::TempDir() + "irswpcn_trace.csv";
  std::remove(path.c_str());
  ScaOptions o;
  o.restarts = 2;
  o.trace_path = path;
  solve_static(make(6, 2, 1), o);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "scheme,restart,iteration,objective,step_norm");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_GT(rows, 2);
}

TEST(UserAdaptive, DominatesStatic) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Scenario s = make(10, 3, seed);
    const Solution st = solve_static(s);
    const Solution ua = solve_user_adaptive(s, {}, &st);
    EXPECT_GE(ua.throughput, st.throughput - 1e-4);
    expect_feasible(s, ua);
    for (const auto& tr : ua.diagnostics.restart_traces) expect_nondecreasing(tr);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(ua.plan.assignment[static_cast<std::size_t>(k)], k + 1);
  }
}

TEST(Hybrid, EndpointsMatchStaticAndUserAdaptive) {
  const Scenario s = make(8, 3, 7);
  const Solution st = solve_static(s);
  const Solution ua = solve_user_adaptive(s, {}, &st);
  EXPECT_DOUBLE_EQ(solve_hybrid(s, 0, {}, &st).throughput, st.throughput);
  EXPECT_DOUBLE_EQ(solve_hybrid(s, 3, {}, &st).throughput, ua.throughput);
  EXPECT_THROW(solve_hybrid(s, 4), std::invalid_argument);
  const Solution h1 = solve_hybrid(s, 1, {}, &st);
  expect_feasible(s, h1);
  EXPECT_EQ(h1.plan.assignment[static_cast<std::size_t>(strength_order(s).front())], 1);
}

TEST(General, ZeroVectorsIsStatic) {
  const Scenario s = make(8, 2, 3);
  const Solution st = solve_static(s);
  EXPECT_NEAR(solve_general(s, 0).throughput, st.throughput, 1e-6);
}

TEST(General, FullVectorsMatchesUserAdaptive) {
  for (std::uint64_t seed : {1, 2}) {
    const Scenario s = make(8, 2, seed);
    const Solution st = solve_static(s);
    const Solution ua = solve_user_adaptive(s, {}, &st);
    const Solution g = solve_general(s, 2, {}, {}, &st);
    EXPECT_NEAR(g.throughput, ua.throughput, 0.01 * ua.throughput);
    expect_feasible(s, g);
    EXPECT_GE(g.throughput, g.diagnostics.pre_rounding_throughput - 1e-9);
    for (const auto& tr : g.diagnostics.restart_traces) expect_nondecreasing(tr);
  }
}

TEST(General, DecoupledSingleVectorMatchesStatic) {
  const Scenario s = make(8, 3, 2);
  const Solution st = solve_static(s);
  GeneralOptions decoupled;
  decoupled.uplink_reuses_downlink = false;
  const Solution g = solve_general(s, 1, {}, decoupled, &st);
  EXPECT_NEAR(g.throughput, st.throughput, 0.01 * st.throughput);
  for (int slot : g.plan.assignment) EXPECT_EQ(slot, 1);
  EXPECT_THROW(solve_general(s, 0, {}, decoupled), std::invalid_argument);
}

// A feasible solution in which device 0 splits its time and energy evenly
// between slot 0 and slot 1.
Solution split_device_zero(const Scenario& s, const PhaseVector& ul) {
  PhasePlan plan = PhasePlan::single(align_phases(s.direct(0), s.q(0)).phases, s.num_devices());
  Solution base = finish_solution(s, plan);
  plan.uplink.push_back(ul);
  Solution out;
  out.plan = plan;
  out.alloc.tau0 = base.alloc.tau0;
  out.alloc.time = Eigen::MatrixXd::Zero(s.num_devices(), 2);
  out.alloc.energy = Eigen::MatrixXd::Zero(s.num_devices(), 2);
  out.alloc.time.col(0) = base.alloc.time.col(0);
  out.alloc.energy.col(0) = base.alloc.energy.col(0);
  for (int j = 0; j < 2; ++j) {
    out.alloc.time(0, j) = 0.5 * base.alloc.time(0, 0);
    out.alloc.energy(0, j) = 0.5 * base.alloc.energy(0, 0);
  }
  out.throughput = evaluate_throughput(s, out.plan, out.alloc);
  return out;
}

TEST(RoundAssociation, PoolsOntoBetterSlot) {
  const Scenario s = make(8, 2, 6);
  // DL aligned to device 1 and slot 1 aligned to device 0, so slot 1 is device 0's best.
  PhasePlan plan = PhasePlan::single(align_phases(s.direct(1), s.q(1)).phases, 2);
  Solution base = finish_solution(s, plan);
  plan.uplink.push_back(align_phases(s.direct(0), s.q(0)).phases.as_augmented());
  Solution split;
  split.plan = plan;
  split.alloc.tau0 = base.alloc.tau0;
  split.alloc.time = Eigen::MatrixXd::Zero(2, 2);
  split.alloc.energy = Eigen::MatrixXd::Zero(2, 2);
  split.alloc.time.col(0) = base.alloc.time.col(0);
  split.alloc.energy.col(0) = base.alloc.energy.col(0);
  split.alloc.time(0, 0) = split.alloc.time(0, 1) = 0.5 * base.alloc.time(0, 0);
  split.alloc.energy(0, 0) = split.alloc.energy(0, 1) = 0.5 * base.alloc.energy(0, 0);
  split.throughput = evaluate_throughput(s, split.plan, split.alloc);
  ASSERT_LE(constraint_violation(s, split.plan, split.alloc), 1e-12);
  ASSERT_GT(slot_gain(s, plan, 0, 1), slot_gain(s, plan, 0, 0));

  const Solution r = round_association(split, s);
  EXPECT_EQ(r.plan.assignment[0], 1);
  EXPECT_GT(r.throughput, split.throughput);
  // Pooling alone, before re-optimizing, already does not lose throughput.
  const Allocation pooled = pool_allocation(split.alloc, r.plan.assignment);
  EXPECT_GE(evaluate_throughput(s, r.plan, pooled), split.throughput - 1e-9);
  EXPECT_DOUBLE_EQ(r.diagnostics.pre_rounding_throughput, split.throughput);
}

TEST(RoundAssociation, TieGoesToLowerSlot) {
  const Scenario s = make(8, 2, 6);
  const PhaseVector dl = align_phases(s.direct(0), s.q(0)).phases.as_augmented();
  const Solution split = split_device_zero(s, dl);
  const Solution r = round_association(split, s);
  EXPECT_EQ(r.plan.assignment[0], 0);
  EXPECT_NEAR(r.throughput, split.throughput, 1e-9);
}

TEST(RoundAssociation, BinarySolutionIsFixedPoint) {
  const Scenario s = make(8, 3, 1);
  const Solution ua = solve_user_adaptive(s);
  const Solution r = round_association(ua, s);
  EXPECT_EQ(r.plan.assignment, ua.plan.assignment);
  EXPECT_NEAR(r.throughput, ua.throughput, 1e-9);
}

TEST(Baselines, NoIrsMatchesZeroedRandomAndClosedForm) {
  const Scenario s = make(6, 3, 8);
  EXPECT_NEAR(baseline_no_irs(s).throughput, baseline_random_phases(s.without_irs(), 3).throughput, 1e-12);
  const Scenario one = make(6, 1, 8);
  const double g = std::norm(one.direct(0));
  EXPECT_NEAR(baseline_no_irs(one).throughput, single_user_closed_form(one, g, g), 1e-12);
  EXPECT_THROW(baseline_random_phases(s, 0), std::invalid_argument);
}

TEST(Baselines, RandomPhasesBelowStaticOnAverage) {
  double gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario s = make(8, 2, seed);
    ScaOptions o;
    o.restarts = 2;
    gap += solve_static(s, o).throughput - baseline_random_phases(s, 1).throughput;
  }
  EXPECT_GE(gap / 5.0, -1e-4);
}

TEST(Options, RejectsNonPositive) {
  ScaOptions o;
  o.restarts = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.max_outer_iters = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  EXPECT_THROW(solve_general(make(4, 1, 1), -1), std::invalid_argument);
}

}  // namespace
}  // namespace irswpcn
