// SPDX-License-Identifier: Apache-2.0
//
// Exact time/energy allocation for fixed phase vectors. With the phases fixed
// the harvest-then-transmit program is concave: every device's UL energy equals
// what it harvested, the remaining time is split by a water-filling style KKT
// condition, and the charging time tau0 is found by golden-section search.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irswpcn/effective_channel.hpp"
#include "irswpcn/scenario.hpp"
#include "irswpcn/solution.hpp"

namespace irswpcn {

class AssignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-device composite coefficients c_k = eta_k P_A gamma_dl gamma_ul / sigma^2.
struct EffectiveRates {
  std::vector<double> c;
  std::vector<double> weights;  // empty means all ones
};

namespace detail {

inline double weight_or_one(std::span<const double> w, std::size_t k) { return w.empty() ? 1.0 : w[k]; }

/// tau * log2(1 + a / tau), continuous extension 0 at tau = 0.
inline double perspective_log2(double tau, double a) {
  if (!(tau > 0.0) || !(a > 0.0)) return 0.0;
  return tau * std::log1p(a / tau) / std::numbers::ln2;
}

// phi(u) = ln(1+u) - u/(1+u), increasing from 0 on u > 0.
inline double kkt_phi(double u) { return std::log1p(u) - u / (1.0 + u); }

/// Solves phi(u) = r for u > 0 by safeguarded Newton in log u.
inline double kkt_phi_inverse(double r) {
  double lo = -745.0;
  double hi = 745.0;
  // Initial guess from the asymptotes phi ~ u^2/2 and phi ~ ln u - 1.
  double s = r < 0.5 ? 0.5 * std::log(2.0 * r) : r + 1.0;
  s = std::clamp(s, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double u = std::exp(s);
    const double f = kkt_phi(u) - r;
    if (f > 0.0) hi = s; else lo = s;
    const double slope = u * u / ((1.0 + u) * (1.0 + u));  // d phi / d log u
    double next = s - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(s))) return std::exp(next);
    s = next;
    if (hi - lo < 1e-15) break;
  }
  return std::exp(s);
}

}  // namespace detail

/// Splits an UL budget among devices to maximize sum_k w_k tau_k log2(1 + a_k / tau_k)
/// subject to sum_k tau_k = ul_time. Devices with a_k = 0 or w_k = 0 get no time.
inline std::vector<double> inner_split(std::span<const double> a, double ul_time, std::span<const double> w = {}) {
  if (ul_time < 0.0) throw std::invalid_argument("inner_split: negative UL time");
  if (!w.empty() && w.size() != a.size()) throw std::invalid_argument("inner_split: weight size mismatch");
  const std::size_t k_count = a.size();
  std::vector<double> tau(k_count, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (a[k] < 0.0) throw std::invalid_argument("inner_split: negative coefficient");
    if (a[k] > 0.0 && detail::weight_or_one(w, k) > 0.0) active.push_back(k);
  }
  if (active.empty() || ul_time == 0.0) return tau;

  const double w0 = detail::weight_or_one(w, active.front());
  const bool equal_weights = std::all_of(active.begin(), active.end(),
                                         [&](std::size_t k) { return detail::weight_or_one(w, k) == w0; });
  if (equal_weights) {
    // Common SNR per unit time: tau_k proportional to a_k.
    double sum_a = 0.0;
    for (auto k : active) sum_a += a[k];
    for (auto k : active) tau[k] = ul_time * a[k] / sum_a;
    return tau;
  }

  // Shared multiplier nu: w_k phi(a_k / tau_k) = nu. Total time decreases in nu.
  auto total_for = [&](double log_nu) {
    double total = 0.0;
    for (auto k : active) {
      const double u = detail::kkt_phi_inverse(std::exp(log_nu) / detail::weight_or_one(w, k));
      tau[k] = a[k] / u;
      total += tau[k];
    }
    return total;
  };
  double lo = -60.0;
  double hi = 60.0;
  while (total_for(lo) < ul_time && lo > -700.0) lo -= 60.0;
  while (total_for(hi) > ul_time && hi < 700.0) hi += 60.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double total = total_for(mid);
    if (std::abs(total - ul_time) <= 1e-12 * ul_time) break;
    if (total > ul_time) lo = mid; else hi = mid;
  }
  double total = 0.0;
  for (auto k : active) total += tau[k];
  for (auto k : active) tau[k] *= ul_time / total;
  return tau;
}

struct AllocationResult {
  double tau0 = 0.0;
  std::vector<double> tau;
  double throughput = 0.0;  // bits/Hz
};

/// Maximizes sum_k w_k tau_k log2(1 + c_k tau0 / tau_k) over tau0 + sum tau_k = T.
/// The value as a function of tau0 is concave, so golden-section search with a
/// fixed 100 iterations locates it to far below double precision of T.
inline AllocationResult allocate(const EffectiveRates& rates, double total_time) {
  if (!(total_time > 0.0)) throw std::invalid_argument("allocate: total time must be positive");
  const std::size_t k_count = rates.c.size();
  if (!rates.weights.empty() && rates.weights.size() != k_count) {
    throw std::invalid_argument("allocate: weight size mismatch");
  }
  bool any = false;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!(rates.c[k] >= 0.0)) throw std::invalid_argument("allocate: coefficients must be nonnegative");
    any = any || (rates.c[k] > 0.0 && detail::weight_or_one(rates.weights, k) > 0.0);
  }
  AllocationResult out;
  out.tau.assign(k_count, 0.0);
  if (!any) return out;

  std::vector<double> a(k_count);
  auto value = [&](double tau0, std::vector<double>* tau_out) {
    for (std::size_t k = 0; k < k_count; ++k) a[k] = rates.c[k] * tau0;
    auto tau = inner_split(a, total_time - tau0, rates.weights);
    double r = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      r += detail::weight_or_one(rates.weights, k) * detail::perspective_log2(tau[k], a[k]);
    }
    if (tau_out != nullptr) *tau_out = std::move(tau);
    return r;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = total_time;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = value(x1, nullptr);
  double f2 = value(x2, nullptr);
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = value(x2, nullptr);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = value(x1, nullptr);
    }
  }
  out.tau0 = f1 >= f2 ? x1 : x2;
  out.throughput = value(out.tau0, &out.tau);
  return out;
}

/// Effective gain of device k under slot j of the plan.
inline double slot_gain(const Scenario& s, const PhasePlan& plan, int k, int j) {
  return effective_gain(s.direct(k), s.q(k), plan.slot(j));
}

/// Weighted sum throughput sum_k w_k sum_j t_kj log2(1 + e_kj G_kj / (t_kj sigma^2)).
inline std::vector<double> device_throughputs(const Scenario& s, const PhasePlan& plan, const Allocation& alloc) {
  const int k_count = s.num_devices();
  std::vector<double> out(static_cast<std::size_t>(k_count), 0.0);
  for (int k = 0; k < k_count; ++k) {
    for (int j = 0; j < alloc.time.cols(); ++j) {
      const double t = alloc.time(k, j);
      if (!(t > 0.0)) continue;
      const double snr_energy = alloc.energy(k, j) * slot_gain(s, plan, k, j) / s.noise_power();
      out[static_cast<std::size_t>(k)] += detail::perspective_log2(t, snr_energy);
    }
  }
  return out;
}

inline double evaluate_throughput(const Scenario& s, const PhasePlan& plan, const Allocation& alloc) {
  const auto per_device = device_throughputs(s, plan, alloc);
  double r = 0.0;
  for (int k = 0; k < s.num_devices(); ++k) r += s.weight(k) * per_device[static_cast<std::size_t>(k)];
  return r;
}

/// Energy harvested by device k during tau0 under the plan's DL vector.
inline double harvested_energy(const Scenario& s, const PhasePlan& plan, double tau0, int k) {
  return s.efficiency(k) * s.hap_power() * slot_gain(s, plan, k, 0) * tau0;
}

/// Largest violation of the time budget (seconds) or of energy causality
/// (relative to the harvested energy). <= 0 when feasible.
inline double constraint_violation(const Scenario& s, const PhasePlan& plan, const Allocation& alloc) {
  double worst = alloc.total_time() - s.total_time();
  for (int k = 0; k < s.num_devices(); ++k) {
    const double used = alloc.energy.row(k).sum();
    const double budget = harvested_energy(s, plan, alloc.tau0, k);
    const double excess = budget > 0.0 ? (used - budget) / budget : used;
    worst = std::max(worst, excess);
  }
  if (alloc.tau0 < 0.0 || (alloc.time.array() < 0.0).any() || (alloc.energy.array() < 0.0).any()) {
    worst = std::max(worst, 1.0);
  }
  return worst;
}

inline void validate_plan(const Scenario& s, const PhasePlan& plan) {
  if (plan.assignment.size() != static_cast<std::size_t>(s.num_devices())) {
    throw AssignmentError("plan: assignment must list every device");
  }
  if (!plan.downlink.is_augmented() || plan.downlink.elements() != s.num_elements()) {
    throw DimensionError("plan: DL vector must be augmented with N elements");
  }
  for (const auto& v : plan.uplink) {
    if (!v.is_augmented() || v.elements() != s.num_elements()) {
      throw DimensionError("plan: UL vectors must be augmented with N elements");
    }
  }
  for (int slot : plan.assignment) {
    if (slot < 0 || slot >= plan.num_slots()) throw AssignmentError("plan: device is not assigned to a valid slot");
    if (slot == 0 && !plan.uplink_reuses_downlink) {
      throw AssignmentError("plan: slot 0 carries no uplink traffic in this plan");
    }
  }
}

/// Exact allocation for a fixed plan: energy causality met with equality and
/// the time budget fully used.
inline Solution finish_solution(const Scenario& s, const PhasePlan& plan) {
  validate_plan(s, plan);
  const int k_count = s.num_devices();
  EffectiveRates rates;
  rates.c.resize(static_cast<std::size_t>(k_count));
  rates.weights.resize(static_cast<std::size_t>(k_count));
  std::vector<double> dl_gain(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    dl_gain[ku] = slot_gain(s, plan, k, 0);
    const double ul_gain = slot_gain(s, plan, k, plan.assignment[ku]);
    rates.c[ku] = s.efficiency(k) * s.hap_power() * dl_gain[ku] * ul_gain / s.noise_power();
    rates.weights[ku] = s.weight(k);
  }
  const auto result = allocate(rates, s.total_time());

  Solution sol;
  sol.plan = plan;
  sol.alloc.tau0 = result.tau0;
  sol.alloc.time = Eigen::MatrixXd::Zero(k_count, plan.num_slots());
  sol.alloc.energy = Eigen::MatrixXd::Zero(k_count, plan.num_slots());
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double t = result.tau[ku];
    if (t > 0.0) {
      sol.alloc.time(k, plan.assignment[ku]) = t;
      sol.alloc.energy(k, plan.assignment[ku]) = s.efficiency(k) * s.hap_power() * dl_gain[ku] * result.tau0;
    }
  }
  sol.throughput = evaluate_throughput(s, plan, sol.alloc);
  return sol;
}

}  // namespace irswpcn
