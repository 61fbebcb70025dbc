// SPDX-License-Identifier: Apache-2.0
//
// Successive convex approximation solvers for the IRS phase vectors and the
// harvest-then-transmit allocation.
//
//   solve_static          one vector for DL and every UL transmission
//   solve_user_adaptive   one DL vector plus a dedicated aligned UL vector per device
//   solve_hybrid          the J strongest devices get dedicated vectors, the rest share the DL one
//   solve_general         J jointly optimized UL vectors with split time, then rounded
//
// Channels are rescaled inside every subproblem so that the strongest aligned
// gain is 1; energies and signal slacks are rescaled to match, which keeps
// the barrier Newton systems well conditioned at -80 dBm noise.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irswpcn/allocation.hpp"
#include "irswpcn/convex_kernel.hpp"
#include "irswpcn/effective_channel.hpp"
#include "irswpcn/random.hpp"
#include "irswpcn/scenario.hpp"
#include "irswpcn/solution.hpp"
#include "irswpcn/surrogates.hpp"

namespace irswpcn {

struct ScaOptions {
  int max_outer_iters = 50;
  double convergence_tol = 1e-6;  // relative change of the surrogate objective
  int restarts = 5;
  double subproblem_tol = 1e-9;
  std::uint64_t seed = 0;  // mixed into the restart phase draws
  std::string trace_path;  // per-iteration CSV, appended; empty disables

  void validate() const {
    if (max_outer_iters < 1) throw std::invalid_argument("ScaOptions: max_outer_iters must be >= 1");
    if (!(convergence_tol > 0.0)) throw std::invalid_argument("ScaOptions: convergence_tol must be > 0");
    if (restarts < 1) throw std::invalid_argument("ScaOptions: restarts must be >= 1");
    if (!(subproblem_tol > 0.0)) throw std::invalid_argument("ScaOptions: subproblem_tol must be > 0");
  }
};

/// Devices sorted by descending aligned gain, ties to the lower index.
inline std::vector<int> strength_order(const Scenario& s) {
  std::vector<int> order(static_cast<std::size_t>(s.num_devices()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gain(order.size());
  for (int k = 0; k < s.num_devices(); ++k) gain[static_cast<std::size_t>(k)] = align_phases(s.direct(k), s.q(k)).gain;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gain[static_cast<std::size_t>(a)] > gain[static_cast<std::size_t>(b)]; });
  return order;
}

/// Moves every device onto its best slot, pooling its time and energy there,
/// then re-optimizes the allocation for the resulting binary association.
inline Solution round_association(const Solution& sol, const Scenario& s) {
  const int k_count = s.num_devices();
  PhasePlan plan = sol.plan;
  const int first = plan.uplink_reuses_downlink ? 0 : 1;
  for (int k = 0; k < k_count; ++k) {
    int best = first;
    double best_gain = slot_gain(s, plan, k, first);
    for (int j = first + 1; j < plan.num_slots(); ++j) {
      const double g = slot_gain(s, plan, k, j);
      if (g > best_gain) {
        best_gain = g;
        best = j;
      }
    }
    plan.assignment[static_cast<std::size_t>(k)] = best;
  }
  Solution out = finish_solution(s, plan);
  out.diagnostics = sol.diagnostics;
  out.diagnostics.pre_rounding_throughput = sol.throughput;
  return out;
}

/// The pooled (not re-optimized) allocation used by round_association: each
/// device's total time and energy moved onto its assigned slot.
inline Allocation pool_allocation(const Allocation& alloc, const std::vector<int>& assignment) {
  Allocation out;
  out.tau0 = alloc.tau0;
  out.time = Eigen::MatrixXd::Zero(alloc.time.rows(), alloc.time.cols());
  out.energy = Eigen::MatrixXd::Zero(alloc.energy.rows(), alloc.energy.cols());
  for (Eigen::Index k = 0; k < alloc.time.rows(); ++k) {
    const int j = assignment[static_cast<std::size_t>(k)];
    out.time(k, j) = alloc.time.row(k).sum();
    out.energy(k, j) = alloc.energy.row(k).sum();
  }
  return out;
}

inline Solution baseline_no_irs(const Scenario& s) {
  return finish_solution(s.without_irs(), PhasePlan::single(PhaseVector::ones(s.num_elements()), s.num_devices()));
}

inline Solution baseline_random_phases(const Scenario& s, int trials, std::uint64_t seed = 0) {
  if (trials < 1) throw std::invalid_argument("baseline_random_phases: trials must be >= 1");
  Solution best;
  best.throughput = -1.0;
  for (int t = 0; t < trials; ++t) {
    auto rng = RandomStream::derive(s.config().seed, "random_phases", static_cast<std::uint64_t>(t)).fork("opt", seed);
    Eigen::VectorXcd v(s.num_elements());
    for (auto& x : v) x = rng.unit_phase();
    Solution sol = finish_solution(s, PhasePlan::single(PhaseVector::bare(std::move(v)), s.num_devices()));
    if (sol.throughput > best.throughput) best = std::move(sol);
  }
  return best;
}

namespace detail {

using kernel::ConvexSubproblem;
using kernel::LinearExpr;

inline constexpr double kShrink = 1e-3;  // interior margin for SCA start points

struct Normalizer {
  double rho2 = 1.0;                 // strongest aligned gain
  double noise = 1.0;                // sigma^2 / (P rho^4)
  std::vector<Eigen::VectorXcd> qt;  // q_bar / rho
  std::vector<double> gamma;         // aligned gains / rho^2

  explicit Normalizer(const Scenario& s) {
    const int k_count = s.num_devices();
    std::vector<double> raw(static_cast<std::size_t>(k_count));
    double strongest = 0.0;
    for (int k = 0; k < k_count; ++k) {
      raw[static_cast<std::size_t>(k)] = align_phases(s.direct(k), s.q(k)).gain;
      strongest = std::max(strongest, raw[static_cast<std::size_t>(k)]);
    }
    rho2 = strongest > 0.0 ? strongest : 1.0;
    const double rho = std::sqrt(rho2);
    noise = s.noise_power() / (s.hap_power() * rho2 * rho2);
    for (int k = 0; k < k_count; ++k) {
      qt.push_back(s.q_bar(k) / rho);
      gamma.push_back(raw[static_cast<std::size_t>(k)] / rho2);
    }
  }
  double energy_scale(const Scenario& s) const { return s.hap_power() * rho2; }
};

/// Adds Re{lin^H v} * scale for the interleaved complex block starting at `block`.
inline void add_real_inner(LinearExpr& e, int block, const Eigen::VectorXcd& lin, double scale = 1.0) {
  for (Eigen::Index n = 0; n < lin.size(); ++n) {
    e.add(block + 2 * static_cast<int>(n), scale * lin(n).real());
    e.add(block + 2 * static_cast<int>(n) + 1, scale * lin(n).imag());
  }
}

inline Eigen::VectorXcd read_block(const Eigen::VectorXd& x, int block, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(x(block + 2 * i), x(block + 2 * i + 1));
  return v;
}

inline void write_block(Eigen::VectorXd& x, int block, const Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    x(block + 2 * i) = v(i).real();
    x(block + 2 * i + 1) = v(i).imag();
  }
}

/// Appends (scheme, restart, iteration, objective, step_norm) rows to a CSV.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, std::string scheme) : scheme_(std::move(scheme)) {
    if (path.empty()) return;
    const bool fresh = !std::ifstream(path).good();
    out_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*out_) throw std::runtime_error("cannot open trace file " + path);
    if (fresh) *out_ << "scheme,restart,iteration,objective,step_norm\n";
  }
  void row(int restart, int iteration, double objective, double step) {
    if (!out_) return;
    *out_ << scheme_ << ',' << restart << ',' << iteration << ',';
    out_->precision(17);
    *out_ << objective << ',' << step << '\n';
  }

 private:
  std::string scheme_;
  std::unique_ptr<std::ofstream> out_;
};

struct ScaRun {
  Solution solution;
  std::vector<double> trace;
  int iterations = 0;
  ScaStatus status = ScaStatus::converged;
};

/// True when the relative change between consecutive surrogate values is small.
inline bool settled(double prev, double next, double tol) {
  return std::abs(next - prev) <= tol * std::max(std::abs(next), 1e-300);
}

// ---------------------------------------------------------------------------
// One DL vector: static, hybrid and user-adaptive schemes.
//
// Devices flagged `dedicated` transmit under a fixed aligned vector with gain
// gamma_k and only their harvested energy depends on v0 (DL-energy surrogate);
// the others transmit under v0 and see the quartic term (quartic surrogate).
// ---------------------------------------------------------------------------

struct SingleDlSetup {
  std::vector<bool> dedicated;
  std::function<PhasePlan(const PhaseVector&)> make_plan;
};

inline ScaRun run_single_dl(const Scenario& s, const Normalizer& nz, const SingleDlSetup& setup,
                            const PhaseVector& start, const ScaOptions& opts, TraceWriter& trace, int restart) {
  const int k_count = s.num_devices();
  const Eigen::Index dim = s.num_elements() + 1;
  const double total = s.total_time();

  ScaRun run;
  const Solution initial = finish_solution(s, setup.make_plan(start));

  // Iterate state: relaxed v, tau0, per-device times.
  Eigen::VectorXcd v = start.as_augmented().values();
  double tau0 = initial.alloc.tau0;
  Eigen::VectorXd tau = initial.alloc.device_time();
  {
    // Strict interior for the first subproblem.
    const double floor = 1e-6 * total;
    for (Eigen::Index k = 0; k < tau.size(); ++k) tau(k) = std::max(tau(k), floor);
    tau0 = std::clamp(tau0, floor, total);
    const double used = tau0 + tau.sum();
    const double scale = (1.0 - 1e-4) * total / used;
    tau0 *= scale;
    tau *= scale;
  }

  const int i_tau0 = 0;
  const int i_tau = 1;
  const int i_sig = 1 + k_count;
  const int i_v = 1 + 2 * k_count;
  double prev = -std::numeric_limits<double>::infinity();
  run.status = ScaStatus::max_iterations;

  for (int it = 0; it < opts.max_outer_iters; ++it) {
    ConvexSubproblem p;
    p.add_variables(1 + 2 * k_count);
    p.add_complex_block(static_cast<int>(dim));
    LinearExpr budget;
    budget.shift(total).add(i_tau0, -1.0);
    Eigen::VectorXd x0(p.num_vars);
    x0(i_tau0) = tau0;
    const Eigen::VectorXcd v_start = (1.0 - kShrink) * v;
    write_block(x0, i_v, v_start);
    for (int k = 0; k < k_count; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      p.perspective.push_back({i_tau + k, i_sig + k, nz.noise, s.weight(k)});
      budget.add(i_tau + k, -1.0);
      const double eta = s.efficiency(k);
      SurrogateDescriptor f = setup.dedicated[ku] ? surrogate_dl_energy(nz.qt[ku], v, tau0)
                                                  : surrogate_quartic(nz.qt[ku], v, tau0);
      const double mult = setup.dedicated[ku] ? eta * nz.gamma[ku] : eta;
      // mult * f(v, tau0) - S_k >= 0
      kernel::InversePowerConstraint c;
      c.var = i_tau0;
      c.beta = mult * f.inverse_coef;
      c.power = f.power;
      add_real_inner(c.bound, i_v, f.linear, mult);
      c.bound.shift(mult * f.constant).add(i_sig + k, -1.0);
      p.inverse_powers.push_back(c);
      x0(i_tau + k) = tau(k);
      x0(i_sig + k) = (1.0 - kShrink) * mult * f(v_start, tau0);
    }
    p.inequalities.push_back(budget);

    const auto result = kernel::solve_subproblem(p, x0, opts.subproblem_tol);
    const double value = result.report.objective;
    if (value < prev) {
      // The subproblem could not reproduce the previous point to solver accuracy.
      run.status = ScaStatus::converged;
      break;
    }
    const Eigen::VectorXcd v_next = read_block(result.point, i_v, dim);
    const double step = (v_next - v).norm();
    v = v_next;
    tau0 = result.point(i_tau0);
    for (int k = 0; k < k_count; ++k) tau(k) = result.point(i_tau + k);
    run.trace.push_back(value);
    run.iterations = it + 1;
    trace.row(restart, it + 1, value, step);
    if (result.report.status == kernel::SolverStatus::numerical_failure) {
      run.status = ScaStatus::numerical_failure;
      break;
    }
    if (settled(prev, value, opts.convergence_tol)) {
      run.status = ScaStatus::converged;
      break;
    }
    prev = value;
  }

  std::size_t zeros = 0;
  const PhaseVector projected = project_unit_modulus(v, PhaseVector::Kind::augmented, &zeros);
  Solution sol = finish_solution(s, setup.make_plan(projected));
  if (initial.throughput > sol.throughput) sol = initial;  // projection lost more than SCA gained
  sol.diagnostics.zero_phase_entries = zeros;
  run.solution = std::move(sol);
  return run;
}

/// Start vectors: aligned to the strongest device, then uniform random phases.
inline std::vector<PhaseVector> restart_vectors(const Scenario& s, const ScaOptions& opts) {
  std::vector<PhaseVector> starts;
  const int strongest = strength_order(s).front();
  starts.push_back(align_phases(s.direct(strongest), s.q(strongest)).phases.as_augmented());
  for (int r = 1; r < opts.restarts; ++r) {
    auto rng = RandomStream::derive(s.config().seed, "sca_restart", static_cast<std::uint64_t>(r)).fork("opt", opts.seed);
    Eigen::VectorXcd v(s.num_elements());
    for (auto& x : v) x = rng.unit_phase();
    starts.push_back(PhaseVector::bare(std::move(v)).as_augmented());
  }
  return starts;
}

inline Solution run_restarts(const Scenario& s, const SingleDlSetup& setup, const std::vector<PhaseVector>& starts,
                             const ScaOptions& opts, const char* scheme) {
  const Normalizer nz(s);
  TraceWriter trace(opts.trace_path, scheme);
  Solution best;
  best.throughput = -1.0;
  Diagnostics diag;
  int restart = 0;
  for (const auto& start : starts) {
    ScaRun run = run_single_dl(s, nz, setup, start, opts, trace, restart);
    diag.restart_traces.push_back(run.trace);
    diag.restart_statuses.push_back(run.status);
    if (run.solution.throughput > best.throughput) {
      best = std::move(run.solution);
      diag.trace = run.trace;
      diag.outer_iterations = run.iterations;
      diag.status = run.status;
      diag.zero_phase_entries = best.diagnostics.zero_phase_entries;
    }
    ++restart;
  }
  diag.restarts_used = restart;
  best.diagnostics = std::move(diag);
  return best;
}

}  // namespace detail

inline Solution solve_static(const Scenario& s, const ScaOptions& opts = {}) {
  opts.validate();
  detail::SingleDlSetup setup;
  setup.dedicated.assign(static_cast<std::size_t>(s.num_devices()), false);
  const int k_count = s.num_devices();
  setup.make_plan = [k_count](const PhaseVector& v) { return PhasePlan::single(v, k_count); };
  return detail::run_restarts(s, setup, detail::restart_vectors(s, opts), opts, "static");
}

namespace detail {

/// Starts for the dedicated-vector schemes: the static optimum first, then the
/// static restart vectors.
inline std::vector<PhaseVector> warm_starts(const Scenario& s, const ScaOptions& opts, const Solution& static_sol) {
  std::vector<PhaseVector> starts{static_sol.plan.downlink};
  auto rest = restart_vectors(s, opts);
  for (std::size_t i = 0; i + 1 < rest.size(); ++i) starts.push_back(rest[i]);
  return starts;
}

}  // namespace detail

/// Dedicated aligned UL vector per device (device k on slot k+1); v0 optimized.
inline Solution solve_user_adaptive(const Scenario& s, const ScaOptions& opts = {},
                                    const Solution* static_hint = nullptr) {
  opts.validate();
  const int k_count = s.num_devices();
  std::vector<PhaseVector> aligned;
  for (int k = 0; k < k_count; ++k) aligned.push_back(align_phases(s.direct(k), s.q(k)).phases.as_augmented());
  detail::SingleDlSetup setup;
  setup.dedicated.assign(static_cast<std::size_t>(k_count), true);
  setup.make_plan = [aligned, k_count](const PhaseVector& v) {
    PhasePlan plan;
    plan.downlink = v;
    plan.uplink = aligned;
    plan.assignment.resize(static_cast<std::size_t>(k_count));
    std::iota(plan.assignment.begin(), plan.assignment.end(), 1);
    return plan;
  };
  const Solution static_sol = static_hint != nullptr ? *static_hint : solve_static(s, opts);
  return detail::run_restarts(s, setup, detail::warm_starts(s, opts, static_sol), opts, "user_adaptive");
}

/// The J strongest devices get dedicated aligned vectors (slot j for the j-th
/// strongest); the others transmit under the DL vector.
inline Solution solve_hybrid(const Scenario& s, int num_vectors, const ScaOptions& opts = {},
                             const Solution* static_hint = nullptr) {
  opts.validate();
  const int k_count = s.num_devices();
  if (num_vectors < 0 || num_vectors > k_count) throw std::invalid_argument("solve_hybrid: J must lie in [0, K]");
  if (num_vectors == 0) return static_hint != nullptr ? *static_hint : solve_static(s, opts);
  if (num_vectors == k_count) return solve_user_adaptive(s, opts, static_hint);

  const auto order = strength_order(s);
  std::vector<PhaseVector> aligned;
  std::vector<int> slot(static_cast<std::size_t>(k_count), 0);
  detail::SingleDlSetup setup;
  setup.dedicated.assign(static_cast<std::size_t>(k_count), false);
  for (int j = 0; j < num_vectors; ++j) {
    const int k = order[static_cast<std::size_t>(j)];
    aligned.push_back(align_phases(s.direct(k), s.q(k)).phases.as_augmented());
    slot[static_cast<std::size_t>(k)] = j + 1;
    setup.dedicated[static_cast<std::size_t>(k)] = true;
  }
  setup.make_plan = [aligned, slot](const PhaseVector& v) {
    PhasePlan plan;
    plan.downlink = v;
    plan.uplink = aligned;
    plan.assignment = slot;
    return plan;
  };
  const Solution static_sol = static_hint != nullptr ? *static_hint : solve_static(s, opts);
  return detail::run_restarts(s, setup, detail::warm_starts(s, opts, static_sol), opts, "hybrid");
}

namespace detail {

// ---------------------------------------------------------------------------
// General scheme: J UL vectors optimized jointly with split times.
// ---------------------------------------------------------------------------

struct GeneralState {
  std::vector<Eigen::VectorXcd> v;  // J+1 relaxed augmented vectors, v[0] is DL
  double tau0 = 0.0;
  Eigen::MatrixXd t;  // K x (J+1)
  Eigen::MatrixXd e;  // K x (J+1), normalized energies
};

inline ScaRun run_general(const Scenario& s, const Normalizer& nz, const PhasePlan& init, const ScaOptions& opts,
                          TraceWriter& trace, int restart) {
  const int k_count = s.num_devices();
  const int slots = init.num_slots();
  const int first = init.uplink_reuses_downlink ? 0 : 1;
  const Eigen::Index dim = s.num_elements() + 1;
  const double total = s.total_time();
  const double e_scale = nz.energy_scale(s);

  ScaRun run;
  const Solution initial = finish_solution(s, init);

  GeneralState st;
  for (int j = 0; j < slots; ++j) st.v.push_back(init.slot(j).values());
  st.tau0 = initial.alloc.tau0;
  st.t = initial.alloc.time;
  st.e = initial.alloc.energy / e_scale;
  {
    // Give every (device, slot) pair a strictly positive share.
    const double floor = 1e-6 * total;
    st.tau0 = std::clamp(st.tau0, floor, total);
    for (int k = 0; k < k_count; ++k) {
      for (int j = first; j < slots; ++j) st.t(k, j) = std::max(st.t(k, j), floor);
    }
    const double scale = (1.0 - 1e-4) * total / (st.tau0 + st.t.sum());
    st.tau0 *= scale;
    st.t *= scale;
    for (int k = 0; k < k_count; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double budget = s.efficiency(k) * st.tau0 * std::norm(nz.qt[ku].dot(st.v[0]));
      for (int j = first; j < slots; ++j) st.e(k, j) = std::max(st.e(k, j), 1e-6 * budget);
      const double row = st.e.row(k).sum();
      if (row > budget) st.e.row(k) *= budget / row;
    }
  }

  const int pairs_per_device = slots - first;
  const int i_tau0 = 0;
  // Per pair (k, j): t, e, S, x, y laid out contiguously.
  auto pair_base = [&](int k, int j) { return 1 + 5 * (k * pairs_per_device + (j - first)); };
  const int i_v = 1 + 5 * k_count * pairs_per_device;
  auto block = [&](int j) { return i_v + 2 * static_cast<int>(dim) * j; };

  double prev = -std::numeric_limits<double>::infinity();
  run.status = ScaStatus::max_iterations;
  for (int it = 0; it < opts.max_outer_iters; ++it) {
    ConvexSubproblem p;
    p.add_variables(1 + 5 * k_count * pairs_per_device);
    for (int j = 0; j < slots; ++j) p.add_complex_block(static_cast<int>(dim));
    Eigen::VectorXd x0(p.num_vars);
    x0(i_tau0) = st.tau0;
    std::vector<Eigen::VectorXcd> v_start;
    for (int j = 0; j < slots; ++j) {
      v_start.push_back((1.0 - kShrink) * st.v[static_cast<std::size_t>(j)]);
      write_block(x0, block(j), v_start.back());
    }
    LinearExpr budget;
    budget.shift(total).add(i_tau0, -1.0);

    for (int k = 0; k < k_count; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double eta = s.efficiency(k);
      // Harvested energy: sum_j e_kj <= eta * (DL-energy surrogate).
      const SurrogateDescriptor dl = surrogate_dl_energy(nz.qt[ku], st.v[0], st.tau0);
      kernel::InversePowerConstraint harvest;
      harvest.var = i_tau0;
      harvest.beta = eta * dl.inverse_coef;
      harvest.power = dl.power;
      add_real_inner(harvest.bound, block(0), dl.linear, eta);
      const double harvest_start = eta * dl(v_start[0], st.tau0);
      const double row_sum = st.e.row(k).segment(first, pairs_per_device).sum();
      const double e_factor = row_sum > 0.0 ? (1.0 - kShrink) * harvest_start / row_sum : 0.0;

      for (int j = first; j < slots; ++j) {
        const int b = pair_base(k, j);
        const int it_t = b;
        const int it_e = b + 1;
        const int it_s = b + 2;
        const int it_x = b + 3;
        const int it_y = b + 4;
        budget.add(it_t, -1.0);
        harvest.bound.add(it_e, -1.0);
        p.perspective.push_back({it_t, it_s, nz.noise, s.weight(k)});

        const auto& w = st.v[static_cast<std::size_t>(j)];
        const cplx a = nz.qt[ku].dot(w);
        const double A = std::norm(a);
        const double x_hat = std::log(st.e(k, j));
        const double y_hat = std::log(A);
        const ExpProductSurrogate prod = surrogate_exp_product(x_hat, y_hat);

        // exp(x) <= e
        p.exponentials.push_back({it_x, LinearExpr{}.add(it_e, 1.0)});
        // exp(y) <= 2 Re{w^H Q v_j} - w^H Q w
        LinearExpr gain;
        add_real_inner(gain, block(j), (2.0 * a) * nz.qt[ku]);
        gain.shift(-A);
        p.exponentials.push_back({it_y, gain});
        // S <= exp(x_hat + y_hat) (1 + x + y - x_hat - y_hat)
        const double sc = prod.scale();
        p.inequalities.push_back(
            LinearExpr{}.shift(sc * (1.0 - x_hat - y_hat)).add(it_x, sc).add(it_y, sc).add(it_s, -1.0));

        const double e0 = e_factor * st.e(k, j);
        const double x_s = std::log(e0) - kShrink;
        const double y_s = std::log(gain.eval(x0)) - kShrink;
        x0(it_t) = st.t(k, j);
        x0(it_e) = e0;
        x0(it_x) = x_s;
        x0(it_y) = y_s;
        x0(it_s) = (1.0 - kShrink) * prod(x_s, y_s);
      }
      p.inverse_powers.push_back(harvest);
    }
    p.inequalities.push_back(budget);

    const auto result = kernel::solve_subproblem(p, x0, opts.subproblem_tol);
    const double value = result.report.objective;
    if (value < prev) {
      run.status = ScaStatus::converged;
      break;
    }
    double step = 0.0;
    for (int j = 0; j < slots; ++j) {
      Eigen::VectorXcd next = read_block(result.point, block(j), dim);
      step += (next - st.v[static_cast<std::size_t>(j)]).squaredNorm();
      st.v[static_cast<std::size_t>(j)] = std::move(next);
    }
    st.tau0 = result.point(i_tau0);
    for (int k = 0; k < k_count; ++k) {
      for (int j = first; j < slots; ++j) {
        st.t(k, j) = result.point(pair_base(k, j));
        st.e(k, j) = result.point(pair_base(k, j) + 1);
      }
    }
    run.trace.push_back(value);
    run.iterations = it + 1;
    trace.row(restart, it + 1, value, std::sqrt(step));
    if (result.report.status == kernel::SolverStatus::numerical_failure) {
      run.status = ScaStatus::numerical_failure;
      break;
    }
    if (settled(prev, value, opts.convergence_tol)) {
      run.status = ScaStatus::converged;
      break;
    }
    prev = value;
  }

  // Unit-modulus projection of every vector, then energies trimmed to what
  // the projected DL vector actually delivers.
  std::size_t zeros = 0;
  PhasePlan plan = init;
  plan.downlink = project_unit_modulus(st.v[0], PhaseVector::Kind::augmented, &zeros);
  for (int j = 1; j < slots; ++j) {
    plan.uplink[static_cast<std::size_t>(j - 1)] =
        project_unit_modulus(st.v[static_cast<std::size_t>(j)], PhaseVector::Kind::augmented, &zeros);
  }
  Solution split;
  split.plan = plan;
  split.alloc.tau0 = st.tau0;
  split.alloc.time = st.t;
  split.alloc.energy = st.e * e_scale;
  for (int k = 0; k < k_count; ++k) {
    split.alloc.time(k, 0) = first == 0 ? split.alloc.time(k, 0) : 0.0;
    if (first == 1) split.alloc.energy(k, 0) = 0.0;
    const double budget = harvested_energy(s, plan, st.tau0, k);
    const double used = split.alloc.energy.row(k).sum();
    if (used > budget) split.alloc.energy.row(k) *= budget / used;
  }
  split.throughput = evaluate_throughput(s, plan, split.alloc);
  split.diagnostics.zero_phase_entries = zeros;

  Solution rounded = round_association(split, s);
  if (initial.throughput > rounded.throughput) {
    const double pre = rounded.diagnostics.pre_rounding_throughput;
    rounded = initial;
    rounded.diagnostics.pre_rounding_throughput = pre;
  }
  rounded.diagnostics.zero_phase_entries = zeros;
  run.solution = std::move(rounded);
  return run;
}

/// Assigns every device to its best slot of `plan`.
inline PhasePlan best_slot_plan(const Scenario& s, PhasePlan plan) {
  const int first = plan.uplink_reuses_downlink ? 0 : 1;
  plan.assignment.assign(static_cast<std::size_t>(s.num_devices()), first);
  for (int k = 0; k < s.num_devices(); ++k) {
    double best = slot_gain(s, plan, k, first);
    for (int j = first + 1; j < plan.num_slots(); ++j) {
      const double g = slot_gain(s, plan, k, j);
      if (g > best) {
        best = g;
        plan.assignment[static_cast<std::size_t>(k)] = j;
      }
    }
  }
  return plan;
}

}  // namespace detail

struct GeneralOptions {
  // false: slot 0 (the DL vector) carries no UL traffic, so with J = 1 the UL
  // vector is fully decoupled from the DL one.
  bool uplink_reuses_downlink = true;
};

/// J UL vectors optimized jointly with per-(device, vector) time and energy,
/// then rounded to a binary association. Two initializations are run: UL
/// vectors aligned to the J strongest devices, and every UL vector equal to
/// the static optimum; the better result is kept.
inline Solution solve_general(const Scenario& s, int num_vectors, const ScaOptions& opts = {},
                              const GeneralOptions& gopts = {}, const Solution* static_hint = nullptr) {
  opts.validate();
  if (num_vectors < 0) throw std::invalid_argument("solve_general: J must be >= 0");
  if (num_vectors == 0) {
    if (!gopts.uplink_reuses_downlink) throw std::invalid_argument("solve_general: J = 0 needs slot 0 for UL");
    return static_hint != nullptr ? *static_hint : solve_static(s, opts);
  }
  const Solution static_sol = static_hint != nullptr ? *static_hint : solve_static(s, opts);
  const PhaseVector v0 = static_sol.plan.downlink;
  const auto order = strength_order(s);

  PhasePlan aligned_init;
  aligned_init.downlink = v0;
  aligned_init.uplink_reuses_downlink = gopts.uplink_reuses_downlink;
  PhasePlan reuse_init = aligned_init;
  for (int j = 0; j < num_vectors; ++j) {
    if (j < s.num_devices()) {
      const int k = order[static_cast<std::size_t>(j)];
      aligned_init.uplink.push_back(align_phases(s.direct(k), s.q(k)).phases.as_augmented());
    } else {
      aligned_init.uplink.push_back(v0);
    }
    reuse_init.uplink.push_back(v0);
  }

  const detail::Normalizer nz(s);
  detail::TraceWriter trace(opts.trace_path, "general");
  Solution best;
  best.throughput = -1.0;
  Diagnostics diag;
  int restart = 0;
  for (const PhasePlan& init : {aligned_init, reuse_init}) {
    auto run = detail::run_general(s, nz, detail::best_slot_plan(s, init), opts, trace, restart);
    diag.restart_traces.push_back(run.trace);
    diag.restart_statuses.push_back(run.status);
    if (run.solution.throughput > best.throughput) {
      best = std::move(run.solution);
      diag.trace = run.trace;
      diag.outer_iterations = run.iterations;
      diag.status = run.status;
      diag.zero_phase_entries = best.diagnostics.zero_phase_entries;
      diag.pre_rounding_throughput = best.diagnostics.pre_rounding_throughput;
    }
    ++restart;
  }
  diag.restarts_used = restart;
  best.diagnostics = std::move(diag);
  return best;
}

}  // namespace irswpcn
