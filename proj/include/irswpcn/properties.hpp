// SPDX-License-Identifier: Apache-2.0
//
// Property suite: system-level checks over seeded scenario batches plus
// the module invariants. Each check reports pass/fail with a short measured
// detail; nothing throws on failure.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "irswpcn/allocation.hpp"
#include "irswpcn/config_io.hpp"
#include "irswpcn/experiments.hpp"
#include "irswpcn/parallel.hpp"
#include "irswpcn/sca.hpp"
#include "irswpcn/sdr.hpp"
#include "irswpcn/surrogates.hpp"

namespace irswpcn {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PropertyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }

  json to_json() const {
    json j;
    j["passed"] = all_passed();
    j["checks"] = json::array();
    for (const auto& c : checks) j["checks"].push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
  }
};

struct PropertyOptions {
  int seeds = 20;        // seeds of the scenario batches
  int trend_seeds = 10;  // seeds per point of the trend sweeps
  int threads = thread_count();
  ScaOptions sca;
};

namespace detail {

inline std::string format(const char* fmt_str, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt_str, args...);
  return buf;
}

inline bool ascending(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - 1e-9 * std::max(1.0, std::abs(trace[i - 1]))) return false;
  }
  return true;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Lazily computed scenario batches shared by the checks. The base config
/// supplies every parameter not pinned by a check.
class PropertySuite {
 public:
  explicit PropertySuite(SystemConfig base, PropertyOptions opts = {}) : base_(std::move(base)), opts_(std::move(opts)) {
    base_.validate();
  }

  // 1. user-adaptive >= static - 1e-4 on every instance, under 5 minutes.
  CheckResult user_adaptive_dominates_static() {
    const auto& runs = desk();
    int ok = 0;
    double worst = 1e300;
    double total_ms = 0.0;
    for (const auto& r : runs) {
      const double margin = r.ua.throughput - r.st.throughput;
      worst = std::min(worst, margin);
      ok += margin >= -1e-4 ? 1 : 0;
      total_ms += r.static_ua_ms;
    }
    const bool pass = ok == static_cast<int>(runs.size()) && total_ms < 300e3;
    return {"1", "user-adaptive >= static", pass,
            detail::format("%d/%zu instances, worst margin %.3g, static+user-adaptive compute %.1f s", ok, runs.size(),
                           worst, total_ms / 1e3)};
  }

  // 2. decoupled single UL vector agrees with static within 1% on >= 90% of instances.
  CheckResult ul_adaptive_equals_static() {
    const auto& runs = desk();
    int ok = 0;
    double worst = 0.0;
    for (const auto& r : runs) {
      const double rel = std::abs(r.general_decoupled.throughput - r.st.throughput) / r.st.throughput;
      worst = std::max(worst, rel);
      ok += rel <= 0.01 ? 1 : 0;
    }
    const int need = static_cast<int>(std::ceil(0.9 * static_cast<double>(runs.size())));
    return {"2", "UL-adaptive (decoupled J=1) == static", ok >= need,
            detail::format("%d/%zu within 1%% (need %d), worst relative gap %.3g", ok, runs.size(), need, worst)};
  }

  // 3. general(J=K) within 1% of user-adaptive on N=8, K=2; rounding never loses.
  CheckResult general_matches_user_adaptive() {
    const auto& runs = small();
    int ok = 0;
    double worst = 0.0;
    for (const auto& r : runs) {
      const double rel = std::abs(r.general_k.throughput - r.ua.throughput) / r.ua.throughput;
      worst = std::max(worst, rel);
      ok += rel <= 0.01 ? 1 : 0;
    }
    const auto rounding = rounding_fuzz();
    const bool pass = ok == static_cast<int>(runs.size()) && rounding.second == 0;
    return {"3", "general(J=K) == user-adaptive; rounding never decreases", pass,
            detail::format("%d/%zu within 1%%, worst gap %.3g; rounding decreases %d of %d checks", ok, runs.size(), worst,
                           rounding.second, rounding.first)};
  }

  // 4. general(J=K+2) <= 1.01 general(J=K).
  CheckResult sufficiency() {
    int total = 0;
    int ok = 0;
    double worst = 0.0;
    for (const auto& r : small()) {
      const double ratio = r.general_k2.throughput / r.general_k.throughput;
      worst = std::max(worst, ratio);
      ok += ratio <= 1.01 ? 1 : 0;
      ++total;
    }
    const auto& jr = j_sweep();
    const int k = jr.k;
    for (std::size_t i = 0; i < jr.general.size(); ++i) {
      const double ratio = jr.general[i][static_cast<std::size_t>(k + 2)].throughput /
                           jr.general[i][static_cast<std::size_t>(k)].throughput;
      worst = std::max(worst, ratio);
      ok += ratio <= 1.01 ? 1 : 0;
      ++total;
    }
    return {"4", "K vectors suffice", ok == total,
            detail::format("%d/%d instances, largest R(K+2)/R(K) = %.6f", ok, total, worst)};
  }

  // 5. bound dominates every scheme (N <= 16); single-user gap <= 1e-4.
  CheckResult bound_dominance() {
    int ok = 0;
    int total = 0;
    double worst = 1e300;
    for (const auto& r : desk()) {
      if (!r.bound) continue;
      const double ub = r.bound->upper_bound;
      for (const Solution* sol : {&r.st, &r.ua, &r.hybrid, &r.general_decoupled, &r.general_full, &r.random, &r.no_irs}) {
        const double margin = ub - sol->throughput;
        worst = std::min(worst, margin);
        ok += margin >= -1e-6 * std::max(1.0, ub) ? 1 : 0;
        ++total;
      }
    }
    SystemConfig one = base_;
    one.num_devices = 1;
    one.num_elements = std::min(one.num_elements, 16);
    one.device_positions.clear();
    one.efficiencies.resize(std::min<std::size_t>(one.efficiencies.size(), 1));
    one.weights.resize(std::min<std::size_t>(one.weights.size(), 1));
    std::vector<double> gaps(static_cast<std::size_t>(opts_.seeds), 0.0);
    one.validate();
    parallel_for(
        gaps.size(),
        [&](std::size_t i) {
          SystemConfig c = one;
          c.seed = base_.seed + i;
          const Scenario s = generate_scenario(c);
          const double ua = solve_user_adaptive(s, opts_.sca).throughput;
          gaps[i] = std::abs(solve_relaxed(s).upper_bound - ua) / ua;
        },
        opts_.threads);
    const double worst_gap = *std::max_element(gaps.begin(), gaps.end());
    const bool pass = total > 0 && ok == total && worst_gap <= 1e-4;
    return {"5", "upper bound dominance", pass,
            detail::format("%d/%d scheme results below the bound (worst margin %.3g); K=1 worst gap %.3g", ok, total,
                           worst, worst_gap)};
  }

  // 6. allocation against a nested 200 x 200 grid; single-user closed form.
  CheckResult allocation_oracle() {
    int ok = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      auto rng = RandomStream::derive(base_.seed, "allocation_oracle", static_cast<std::uint64_t>(i));
      const int k_count = 1 + static_cast<int>(rng.uniform() * 3.0);
      EffectiveRates rates;
      for (int k = 0; k < k_count; ++k) {
        rates.c.push_back(std::pow(10.0, 3.0 * rng.uniform() - 1.0));
        rates.weights.push_back(1.0);
      }
      const double got = allocate(rates, 1.0).throughput;
      const double grid = grid_allocation(rates.c, 200);
      const double rel = (grid - got) / grid;
      worst = std::max(worst, std::abs(rel));
      ok += (got >= grid - 1e-12 && std::abs(rel) <= 1e-3) ? 1 : 0;
    }
    const auto single = allocate({{1.0}, {1.0}}, 1.0);
    const bool closed = std::abs(single.tau0 - (1.0 - 1.0 / std::numbers::e)) <= 1e-6 &&
                        std::abs(single.throughput - 0.5307) <= 1e-4;
    return {"6", "allocation oracle", ok == 100 && closed,
            detail::format("%d/100 within 1e-3 (worst %.3g); single user tau0 = %.8f, R = %.6f", ok, worst, single.tau0,
                           single.throughput)};
  }

  // 7. quartic, exp-product and DL-energy minorants on 1e5 samples each.
  CheckResult surrogate_suite() {
    constexpr int kSamples = 100000;
    auto rng = RandomStream::derive(base_.seed, "surrogate_suite");
    int violations[3] = {0, 0, 0};
    double loose = 0.0;
    auto disk_point = [&](int n) {
      Eigen::VectorXcd v(n + 1);
      for (int i = 0; i < n; ++i) v(i) = std::sqrt(rng.uniform()) * rng.unit_phase();
      v(n) = 1.0;
      return v;
    };
    for (int i = 0; i < kSamples; ++i) {
      Eigen::VectorXcd q(5);
      for (auto& x : q) x = rng.complex_normal();
      const Eigen::VectorXcd w = disk_point(4);
      const Eigen::VectorXcd v = disk_point(4);
      const double t0 = 1e-3 + rng.uniform();
      const double tau = 1e-3 + 2.0 * rng.uniform();
      const double a = std::norm(q.dot(v));
      const double a0 = std::norm(q.dot(w));
      const auto fq = surrogate_quartic(q, w, t0);
      const auto fe = surrogate_dl_energy(q, w, t0);
      const double tq = tau * a * a;
      const double te = tau * a;
      violations[0] += fq(v, tau) > tq + 1e-9 * std::max(1.0, tq) ? 1 : 0;
      violations[2] += fe(v, tau) > te + 1e-9 * std::max(1.0, te) ? 1 : 0;
      loose = std::max(loose, std::abs(fq(w, t0) - t0 * a0 * a0) / std::max(1.0, t0 * a0 * a0));
      loose = std::max(loose, std::abs(fe(w, t0) - t0 * a0) / std::max(1.0, t0 * a0));
      const double xh = 8.0 * (rng.uniform() - 0.5);
      const double yh = 8.0 * (rng.uniform() - 0.5);
      const double x = 8.0 * (rng.uniform() - 0.5);
      const double y = 8.0 * (rng.uniform() - 0.5);
      const auto fx = surrogate_exp_product(xh, yh);
      violations[1] += fx(x, y) > std::exp(x + y) * (1.0 + 1e-12) ? 1 : 0;
      loose = std::max(loose, std::abs(fx(xh, yh) - std::exp(xh + yh)) / std::exp(xh + yh));
    }
    const bool pass = violations[0] == 0 && violations[1] == 0 && violations[2] == 0 && loose <= 1e-9;
    return {"7", "surrogate bounds and tightness", pass,
            detail::format("violations quartic/exp-product/dl-energy = %d/%d/%d of %d; worst tightness error %.3g",
                           violations[0], violations[1], violations[2], kSamples, loose)};
  }

  // 8. every restart of every solver ascends and converges within the cap.
  CheckResult sca_convergence() {
    int traces = 0;
    int bad_ascent = 0;
    int not_converged = 0;
    std::size_t longest = 0;
    auto scan = [&](const Solution& sol) {
      const auto& d = sol.diagnostics;
      for (std::size_t i = 0; i < d.restart_traces.size(); ++i) {
        ++traces;
        bad_ascent += detail::ascending(d.restart_traces[i]) ? 0 : 1;
        longest = std::max(longest, d.restart_traces[i].size());
        const bool converged = i < d.restart_statuses.size() && d.restart_statuses[i] == ScaStatus::converged;
        not_converged += converged ? 0 : 1;
      }
    };
    for (const auto& r : desk()) {
      for (const Solution* sol : {&r.st, &r.ua, &r.hybrid, &r.general_decoupled, &r.general_full}) scan(*sol);
    }
    for (const auto& r : small()) {
      for (const Solution* sol : {&r.general_k, &r.general_k2}) scan(*sol);
    }
    const bool pass = traces > 0 && bad_ascent == 0 && not_converged == 0 &&
                      longest <= static_cast<std::size_t>(opts_.sca.max_outer_iters);
    return {"8", "SCA ascent and convergence", pass,
            detail::format("%d restart traces: %d not ascending, %d not converged, longest %zu iterations", traces,
                           bad_ascent, not_converged, longest)};
  }

  // 9. trend shapes of the sweeps.
  CheckResult trends() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
      if (!ok) failures.push_back(what);
    };
    auto by_axis = [](const std::vector<SummaryRow>& summary, const std::string& scheme, auto field) {
      std::vector<double> out;
      for (const auto& s : summary) {
        if (s.scheme == scheme) out.push_back(field(s));
      }
      return out;
    };
    auto increasing = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
      }
      return v.size() > 1;
    };
    auto decreasing = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
      }
      return v.size() > 1;
    };
    const auto thr = [](const SummaryRow& s) { return s.mean_throughput; };
    const auto tau = [](const SummaryRow& s) { return s.mean_tau0; };
    const auto harvest = [](const SummaryRow& s) { return s.mean_harvested; };

    const auto power = summarize(power_sweep());
    for (const char* scheme : {"static", "user_adaptive", "hybrid", "random", "no_irs"}) {
      expect(increasing(by_axis(power, scheme, thr)), std::string("throughput vs P_A for ") + scheme);
    }
    const auto st = by_axis(power, "static", thr);
    const auto rnd = by_axis(power, "random", thr);
    const auto none = by_axis(power, "no_irs", thr);
    double worst_share = -1e300;
    for (std::size_t i = 0; i < st.size(); ++i) worst_share = std::max(worst_share, (rnd[i] - none[i]) / (st[i] - none[i]));
    expect(worst_share <= 0.1, "random-phase gain share " + std::to_string(worst_share));

    const auto elements = summarize(element_sweep());
    for (const char* scheme : {"static", "user_adaptive", "hybrid"}) {
      expect(increasing(by_axis(elements, scheme, thr)), std::string("throughput vs N for ") + scheme);
      expect(decreasing(by_axis(elements, scheme, tau)), std::string("tau0 vs N for ") + scheme);
    }
    for (const char* scheme : {"user_adaptive", "hybrid"}) {
      expect(increasing(by_axis(elements, scheme, harvest)), std::string("harvested energy vs N for ") + scheme);
    }

    const auto& jr = j_sweep();
    std::vector<double> r_mean(jr.general.front().size(), 0.0);
    std::vector<double> t_mean(r_mean.size(), 0.0);
    for (const auto& per_seed : jr.general) {
      for (std::size_t j = 0; j < per_seed.size(); ++j) {
        r_mean[j] += per_seed[j].throughput / static_cast<double>(jr.general.size());
        t_mean[j] += per_seed[j].alloc.tau0 / static_cast<double>(jr.general.size());
      }
    }
    const auto k = static_cast<std::size_t>(jr.k);
    for (std::size_t j = 1; j < r_mean.size(); ++j) {
      expect(r_mean[j] >= r_mean[j - 1] - 1e-4, "throughput vs J at J=" + std::to_string(j));
      expect(t_mean[j] <= t_mean[j - 1] + 1e-6, "tau0 vs J at J=" + std::to_string(j));
    }
    expect(r_mean[k] > r_mean[0], "throughput gain from J=0 to J=K");
    expect(t_mean[k] < t_mean[0], "tau0 drop from J=0 to J=K");
    expect(r_mean.back() <= 1.01 * r_mean[k], "plateau after J=K");

    std::string detail = detail::format(
        "P_A %zu pts, N %zu pts, J 0..%d; R(J): %.4f -> %.4f -> %.4f; tau0(J): %.4f -> %.4f; random gain share %.3f",
        st.size(), by_axis(elements, "static", thr).size(), jr.k + 2, r_mean[0], r_mean[k], r_mean.back(), t_mean[0],
        t_mean[k], worst_share);
    for (const auto& f : failures) detail += "; FAILED " + f;
    return {"9", "trend reproduction", failures.empty(), detail};
  }

  // 10. relative throughput gain of the far device exceeds the near device's.
  CheckResult doubly_near_far() {
    ExperimentSpec spec;
    spec.base = base_;
    spec.base.num_devices = 2;
    spec.base.device_positions = {{7.0, 0.0, 0.0}, {10.0, 0.0, 0.0}};
    spec.base.efficiencies.resize(std::min<std::size_t>(spec.base.efficiencies.size(), 1));
    spec.base.weights.resize(std::min<std::size_t>(spec.base.weights.size(), 1));
    spec.axis = SweepAxis::irs_x;
    spec.values = {10.0};
    spec.schemes = {Scheme::user_adaptive, Scheme::no_irs};
    spec.seeds = seed_list(opts_.seeds);
    spec.sca = opts_.sca;
    const auto rows = run_sweep_rows(spec, opts_.threads).rows;
    double with[2] = {0.0, 0.0};
    double without[2] = {0.0, 0.0};
    for (const auto& r : rows) {
      double* acc = r.scheme == "no_irs" ? without : with;
      for (int k = 0; k < 2; ++k) acc[k] += r.device_throughputs[static_cast<std::size_t>(k)];
    }
    const double near_gain = with[0] / without[0];
    const double far_gain = with[1] / without[1];
    const double min_with = std::min(with[0], with[1]);
    const double min_without = std::min(without[0], without[1]);
    const bool pass = far_gain > near_gain && min_with > min_without;
    const double n = static_cast<double>(opts_.seeds);
    return {"10", "doubly-near-far mitigation", pass,
            detail::format("mean near %.4f -> %.4f (x%.3f), far %.4f -> %.4f (x%.3f)", without[0] / n, with[0] / n,
                           near_gain, without[1] / n, with[1] / n, far_gain)};
  }

  // 11. 1 + ab <= sqrt((1 + a^2)(1 + b^2)), equality iff a = b.
  CheckResult product_inequality_fuzz() {
    constexpr int kDraws = 100000;
    auto rng = RandomStream::derive(base_.seed, "product_inequality_fuzz");
    int violated = 0;
    int equal_miss = 0;
    int strict_miss = 0;
    for (int i = 0; i < kDraws; ++i) {
      const double a = 10.0 * rng.uniform();
      const double b = i % 10 == 0 ? a : 10.0 * rng.uniform();
      const double lhs = 1.0 + a * b;
      const double rhs = std::sqrt((1.0 + a * a) * (1.0 + b * b));
      const double tol = 1e-9 * rhs;
      if (lhs > rhs + tol) ++violated;
      const bool equal = std::abs(rhs - lhs) <= tol;
      // (rhs - lhs) / rhs = (a - b)^2 / (rhs (rhs + lhs)), which clears the 1e-9
      // equality tolerance once |a - b| > 1e-4 rhs.
      if (a == b && !equal) ++equal_miss;
      if (std::abs(a - b) > 1e-4 * rhs && equal) ++strict_miss;
    }
    return {"11", "product inequality fuzz", violated == 0 && equal_miss == 0 && strict_miss == 0,
            detail::format("%d draws: %d violations, %d equal pairs not tight, %d distinct pairs tight", kDraws, violated,
                           equal_miss, strict_miss)};
  }

  std::vector<CheckResult> acceptance() {
    return {user_adaptive_dominates_static(), ul_adaptive_equals_static(),  general_matches_user_adaptive(), sufficiency(),    bound_dominance(), allocation_oracle(),
            surrogate_suite(), sca_convergence(), trends(),            doubly_near_far(), product_inequality_fuzz()};
  }

  /// Module invariants beyond the acceptance criteria.
  std::vector<CheckResult> invariants() {
    std::vector<CheckResult> out;
    out.push_back(fading_statistics());
    out.push_back(cascaded_consistency());
    out.push_back(alignment_dominance());
    out.push_back(solution_feasibility());
    out.push_back(randomization_below_bound());
    out.push_back(sweep_reproducible());
    return out;
  }

  PropertyReport run_all() {
    PropertyReport report;
    for (auto& c : acceptance()) report.checks.push_back(std::move(c));
    for (auto& c : invariants()) report.checks.push_back(std::move(c));
    return report;
  }

 private:
  struct DeskRun {
    Scenario scenario;
    Solution st, ua, hybrid, general_decoupled, general_full, random, no_irs;
    std::optional<RelaxedResult> bound;
    double static_ua_ms = 0.0;
  };
  struct SmallRun {
    Solution ua, general_k, general_k2;
  };
  struct JSweep {
    int k = 0;
    std::vector<std::vector<Solution>> general;  // per seed, J = 0..K+2
  };

  std::vector<std::uint64_t> seed_list(int count) const {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < count; ++i) out.push_back(base_.seed + static_cast<std::uint64_t>(i));
    return out;
  }

  SystemConfig with_seed(SystemConfig c, std::uint64_t seed) const {
    c.seed = seed;
    return c;
  }

  const std::vector<DeskRun>& desk() {
    if (desk_) return *desk_;
    const auto seeds = seed_list(opts_.seeds);
    std::vector<std::optional<DeskRun>> runs(seeds.size());
    const int k_count = base_.num_devices;
    parallel_for(
        seeds.size(),
        [&](std::size_t i) {
          const Scenario s = generate_scenario(with_seed(base_, seeds[i]));
          const auto t0 = std::chrono::steady_clock::now();
          Solution st = solve_static(s, opts_.sca);
          Solution ua = solve_user_adaptive(s, opts_.sca, &st);
          const double ms = detail::elapsed_ms(t0);
          GeneralOptions decoupled;
          decoupled.uplink_reuses_downlink = false;
          DeskRun r{s,
                    st,
                    ua,
                    solve_hybrid(s, (k_count + 1) / 2, opts_.sca, &st),
                    solve_general(s, 1, opts_.sca, decoupled, &st),
                    solve_general(s, k_count, opts_.sca, {}, &st),
                    baseline_random_phases(s, 1, opts_.sca.seed),
                    baseline_no_irs(s),
                    std::nullopt,
                    ms};
          if (s.num_elements() <= 16) r.bound = solve_relaxed(s);
          runs[i] = std::move(r);
        },
        opts_.threads);
    desk_.emplace();
    for (auto& r : runs) desk_->push_back(std::move(*r));
    return *desk_;
  }

  const std::vector<SmallRun>& small() {
    if (small_) return *small_;
    SystemConfig c = base_;
    c.num_elements = 8;
    c.num_devices = 2;
    c.device_positions.clear();
    c.efficiencies.resize(std::min<std::size_t>(c.efficiencies.size(), 1));
    c.weights.resize(std::min<std::size_t>(c.weights.size(), 1));
    const auto seeds = seed_list(opts_.seeds);
    std::vector<SmallRun> runs(seeds.size());
    parallel_for(
        seeds.size(),
        [&](std::size_t i) {
          const Scenario s = generate_scenario(with_seed(c, seeds[i]));
          const Solution st = solve_static(s, opts_.sca);
          runs[i] = {solve_user_adaptive(s, opts_.sca, &st), solve_general(s, 2, opts_.sca, {}, &st),
                     solve_general(s, 4, opts_.sca, {}, &st)};
        },
        opts_.threads);
    small_ = std::move(runs);
    return *small_;
  }

  // General scheme for J = 0..K+2 on N = 8, K = 4.
  const JSweep& j_sweep() {
    if (j_sweep_) return *j_sweep_;
    SystemConfig c = base_;
    c.num_elements = 8;
    c.num_devices = 4;
    c.device_positions.clear();
    c.efficiencies.resize(std::min<std::size_t>(c.efficiencies.size(), 1));
    c.weights.resize(std::min<std::size_t>(c.weights.size(), 1));
    JSweep out;
    out.k = c.num_devices;
    const auto seeds = seed_list(opts_.trend_seeds);
    out.general.resize(seeds.size());
    const std::size_t per_seed = static_cast<std::size_t>(out.k) + 3;
    std::vector<Solution> static_sols(seeds.size());
    parallel_for(
        seeds.size(),
        [&](std::size_t i) { static_sols[i] = solve_static(generate_scenario(with_seed(c, seeds[i])), opts_.sca); },
        opts_.threads);
    for (auto& g : out.general) g.resize(per_seed);
    parallel_for(
        seeds.size() * per_seed,
        [&](std::size_t item) {
          const std::size_t i = item / per_seed;
          const int j = static_cast<int>(item % per_seed);
          const Scenario s = generate_scenario(with_seed(c, seeds[i]));
          out.general[i][static_cast<std::size_t>(j)] = solve_general(s, j, opts_.sca, {}, &static_sols[i]);
        },
        opts_.threads);
    j_sweep_ = std::move(out);
    return *j_sweep_;
  }

  ExperimentSpec trend_spec(SweepAxis axis, std::vector<double> values, std::vector<Scheme> schemes) const {
    ExperimentSpec spec;
    spec.base = base_;
    spec.axis = axis;
    spec.values = std::move(values);
    spec.schemes = std::move(schemes);
    spec.seeds = seed_list(opts_.trend_seeds);
    spec.num_vectors = (base_.num_devices + 1) / 2;
    spec.sca = opts_.sca;
    return spec;
  }

  std::vector<ResultRow> power_sweep() {
    return run_sweep_rows(trend_spec(SweepAxis::hap_power_dbm, {30, 32, 34, 36, 38, 40, 42, 44},
                                     {Scheme::static_phase, Scheme::user_adaptive, Scheme::hybrid, Scheme::random,
                                      Scheme::no_irs}),
                          opts_.threads)
        .rows;
  }

  std::vector<ResultRow> element_sweep() {
    return run_sweep_rows(trend_spec(SweepAxis::num_elements, {4, 8, 16, 24, 32},
                                     {Scheme::static_phase, Scheme::user_adaptive, Scheme::hybrid}),
                          opts_.threads)
        .rows;
  }

  // Best value of the allocation objective over tau0 in {i/steps} with the UL
  // time split on a grid of the same resolution (T = 1).
  static double grid_allocation(const std::vector<double>& c, int steps) {
    const std::size_t k_count = c.size();
    double best = 0.0;
    for (int i = 1; i < steps; ++i) {
      const double tau0 = static_cast<double>(i) / steps;
      const double ul = 1.0 - tau0;
      auto value = [&](const std::vector<double>& tau) {
        double r = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) r += detail::perspective_log2(tau[k], c[k] * tau0);
        return r;
      };
      if (k_count == 1) {
        best = std::max(best, value({ul}));
        continue;
      }
      for (int a = 0; a <= steps; ++a) {
        const double t1 = ul * a / steps;
        if (k_count == 2) {
          best = std::max(best, value({t1, ul - t1}));
          continue;
        }
        for (int b = 0; b <= steps - a; ++b) {
          const double t2 = ul * b / steps;
          best = std::max(best, value({t1, t2, ul - t1 - t2}));
        }
      }
    }
    return best;
  }

  // Random split solutions: device k spreads its time and energy over the
  // slots of a random plan. Returns (checks, decreases).
  std::pair<int, int> rounding_fuzz() {
    int checks = 0;
    int decreases = 0;
    for (const auto& r : desk()) {
      ++checks;
      if (r.general_full.throughput < r.general_full.diagnostics.pre_rounding_throughput - 1e-9) ++decreases;
    }
    SystemConfig c = base_;
    c.num_elements = 6;
    c.num_devices = 3;
    c.device_positions.clear();
    c.efficiencies.resize(std::min<std::size_t>(c.efficiencies.size(), 1));
    c.weights.resize(std::min<std::size_t>(c.weights.size(), 1));
    for (int i = 0; i < 200; ++i) {
      const Scenario s = generate_scenario(with_seed(c, base_.seed + static_cast<std::uint64_t>(i)));
      auto rng = RandomStream::derive(base_.seed, "rounding_fuzz", static_cast<std::uint64_t>(i));
      auto random_vector = [&] {
        Eigen::VectorXcd v(6);
        for (auto& x : v) x = rng.unit_phase();
        return PhaseVector::bare(v).as_augmented();
      };
      PhasePlan plan = PhasePlan::single(random_vector(), 3);
      plan.uplink = {random_vector(), random_vector()};
      Solution split;
      split.plan = plan;
      split.alloc.tau0 = 0.2 + 0.6 * rng.uniform();
      split.alloc.time = Eigen::MatrixXd::Zero(3, 3);
      split.alloc.energy = Eigen::MatrixXd::Zero(3, 3);
      Eigen::MatrixXd share(3, 3);
      for (auto& x : share.reshaped()) x = rng.uniform();
      const double ul = 1.0 - split.alloc.tau0;
      const double time_scale = ul / share.sum();
      for (int k = 0; k < 3; ++k) {
        const double budget = harvested_energy(s, plan, split.alloc.tau0, k);
        for (int j = 0; j < 3; ++j) {
          split.alloc.time(k, j) = time_scale * share(k, j);
          split.alloc.energy(k, j) = budget * share(k, j) / share.row(k).sum();
        }
      }
      split.throughput = evaluate_throughput(s, plan, split.alloc);
      const Solution rounded = round_association(split, s);
      ++checks;
      if (rounded.throughput < split.throughput - 1e-9) ++decreases;
      // The pooled allocation itself, before any re-optimization.
      ++checks;
      const Allocation pooled = pool_allocation(split.alloc, rounded.plan.assignment);
      if (evaluate_throughput(s, rounded.plan, pooled) < split.throughput - 1e-9) ++decreases;
    }
    return {checks, decreases};
  }

  CheckResult fading_statistics() {
    constexpr int kDraws = 10000;
    SystemConfig c = base_;
    c.num_elements = 4;
    c.num_devices = 1;
    c.device_positions = {c.device_region.center};
    c.efficiencies.resize(std::min<std::size_t>(c.efficiencies.size(), 1));
    c.weights.resize(std::min<std::size_t>(c.weights.size(), 1));
    double hd = 0.0;
    double g = 0.0;
    double hr = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const Scenario s = generate_scenario(with_seed(c, static_cast<std::uint64_t>(i) + 1));
      hd += std::norm(s.direct(0));
      g += s.g().squaredNorm() / 4.0;
      hr += s.h_r(0).squaredNorm() / 4.0;
    }
    const Vec3 dev = c.device_positions.front();
    const double e_hd = pathloss(distance(c.hap_pos, dev), c.exponents.hap_device, c.ref_loss_db);
    const double e_g = pathloss(distance(c.hap_pos, c.irs_pos), c.exponents.hap_irs, c.ref_loss_db);
    const double e_hr = pathloss(distance(c.irs_pos, dev), c.exponents.irs_device, c.ref_loss_db);
    const double worst = std::max({std::abs(hd / kDraws / e_hd - 1.0), std::abs(g / kDraws / e_g - 1.0),
                                   std::abs(hr / kDraws / e_hr - 1.0)});
    return {"inv-fading", "fading power matches pathloss", worst <= 0.05,
            detail::format("worst relative deviation %.4f over %d draws", worst, kDraws)};
  }

  CheckResult cascaded_consistency() {
    double worst = 0.0;
    for (const auto& r : desk()) {
      const Scenario& s = r.scenario;
      auto rng = RandomStream::derive(s.config().seed, "cascaded_check");
      Eigen::VectorXcd v(s.num_elements());
      for (auto& x : v) x = rng.unit_phase();
      for (int k = 0; k < s.num_devices(); ++k) {
        const cplx stored = s.q(k).dot(v);
        const cplx raw = (s.h_r(k).adjoint() * v.asDiagonal() * s.g())(0);
        worst = std::max(worst, std::abs(stored - raw) / std::max(1e-300, std::abs(raw)));
      }
    }
    return {"inv-cascade", "stored cascaded channel matches raw product", worst <= 1e-12,
            detail::format("worst relative error %.3g", worst)};
  }

  CheckResult alignment_dominance() {
    int beaten = 0;
    double identity = 0.0;
    for (const auto& r : desk()) {
      const Scenario& s = r.scenario;
      auto rng = RandomStream::derive(s.config().seed, "alignment_check");
      for (int k = 0; k < s.num_devices(); ++k) {
        const auto al = align_phases(s.direct(k), s.q(k));
        const double closed = std::pow(std::abs(s.direct(k)) + s.q(k).cwiseAbs().sum(), 2);
        identity = std::max(identity, std::abs(al.gain - closed) / closed);
        for (int t = 0; t < 1000; ++t) {
          Eigen::VectorXcd v(s.num_elements());
          for (auto& x : v) x = rng.unit_phase();
          if (effective_gain(s.direct(k), s.q(k), PhaseVector::bare(v)) > al.gain * (1.0 + 1e-12)) ++beaten;
        }
      }
    }
    return {"inv-align", "aligned gain is the closed form and dominates random phases", beaten == 0 && identity <= 1e-12,
            detail::format("%d random vectors beat alignment; identity error %.3g", beaten, identity)};
  }

  CheckResult solution_feasibility() {
    int bad = 0;
    int total = 0;
    double worst_time_slack = 0.0;
    for (const auto& r : desk()) {
      const Scenario& s = r.scenario;
      for (const Solution* sol : {&r.st, &r.ua, &r.hybrid, &r.general_decoupled, &r.general_full, &r.random}) {
        ++total;
        const bool feasible = constraint_violation(s, sol->plan, sol->alloc) <= 1e-9;
        const bool consistent = std::abs(evaluate_throughput(s, sol->plan, sol->alloc) - sol->throughput) <= 1e-9;
        bool unit = true;
        for (int j = 0; j < sol->plan.num_slots(); ++j) {
          const auto& v = sol->plan.slot(j).values();
          unit = unit && (v.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-9 && v(v.size() - 1) == cplx(1.0, 0.0);
        }
        // Exact allocation uses the whole frame and all harvested energy.
        double causality_gap = 0.0;
        for (int k = 0; k < s.num_devices(); ++k) {
          if (sol->alloc.time.row(k).sum() <= 0.0) continue;
          const double h = harvested_energy(s, sol->plan, sol->alloc.tau0, k);
          causality_gap = std::max(causality_gap, std::abs(sol->alloc.energy.row(k).sum() - h) / h);
        }
        const double slack = std::abs(sol->alloc.total_time() - s.total_time());
        worst_time_slack = std::max(worst_time_slack, slack);
        if (!(feasible && consistent && unit && causality_gap <= 1e-9 && slack <= 1e-9)) ++bad;
      }
    }
    return {"inv-feasible", "solutions feasible, unit-modulus, tight, self-consistent", bad == 0,
            detail::format("%d/%d failing; worst time-budget slack %.3g", bad, total, worst_time_slack)};
  }

  CheckResult randomization_below_bound() {
    int bad = 0;
    int total = 0;
    double worst_ratio = 1e300;
    for (const auto& r : desk()) {
      if (!r.bound) continue;
      const Solution g = gaussian_randomize(r.bound->lifted, r.scenario, 200, opts_.sca.seed);
      ++total;
      if (g.throughput > r.bound->upper_bound + 1e-9) ++bad;
      worst_ratio = std::min(worst_ratio, g.throughput / r.ua.throughput);
      // Lift invariants: constant diagonal and PSD.
      const auto& w = r.bound->lifted.w;
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(w);
      const double diag = (w.diagonal().real().array() - r.bound->lifted.tau0).abs().maxCoeff();
      if (eig.eigenvalues().minCoeff() < -1e-9 || diag > 1e-9) ++bad;
    }
    return {"inv-sdr", "lift is PSD with constant diagonal; randomization below the bound", bad == 0,
            detail::format("%d/%d failing; randomized / user-adaptive >= %.4f", bad, total,
                           total > 0 ? worst_ratio : 1.0)};
  }

  CheckResult sweep_reproducible() {
    ExperimentSpec spec;
    spec.base = base_;
    spec.base.num_elements = std::min(spec.base.num_elements, 8);
    spec.axis = SweepAxis::hap_power_dbm;
    spec.values = {34, 40};
    spec.schemes = {Scheme::static_phase, Scheme::hybrid, Scheme::random, Scheme::no_irs};
    spec.seeds = seed_list(3);
    spec.sca = opts_.sca;
    spec.sca.restarts = 2;
    auto strip = [](std::vector<ResultRow> rows) {
      std::string out;
      for (auto& r : rows) {
        r.runtime_ms = 0.0;
        out += detail::format_row(r) + '\n';
      }
      return out;
    };
    const std::string a = strip(run_sweep_rows(spec, 1).rows);
    const std::string b = strip(run_sweep_rows(spec, std::max(2, opts_.threads)).rows);
    return {"inv-repro", "sweep output independent of thread count", a == b,
            detail::format("%zu bytes compared", a.size())};
  }

  SystemConfig base_;
  PropertyOptions opts_;
  std::optional<std::vector<DeskRun>> desk_;
  std::optional<std::vector<SmallRun>> small_;
  std::optional<JSweep> j_sweep_;
};

inline PropertyReport run_property_suite(const SystemConfig& base, const PropertyOptions& opts = {}) {
  return PropertySuite(base, opts).run_all();
}

}  // namespace irswpcn
