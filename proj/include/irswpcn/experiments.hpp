// SPDX-License-Identifier: Apache-2.0
//
// Sweep harness: one row per (axis value, seed, scheme), written as CSV in a
// fixed order, plus a per-axis-point summary with mean and standard deviation.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "irswpcn/config_io.hpp"
#include "irswpcn/parallel.hpp"
#include "irswpcn/sca.hpp"
#include "irswpcn/sdr.hpp"

namespace irswpcn {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Scheme { upper_bound, user_adaptive, ul_adaptive, static_phase, general, hybrid, random, no_irs };

inline constexpr Scheme kAllSchemes[] = {Scheme::upper_bound, Scheme::user_adaptive, Scheme::ul_adaptive,
                                         Scheme::static_phase, Scheme::general,       Scheme::hybrid,
                                         Scheme::random,      Scheme::no_irs};

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::upper_bound: return "upper_bound";
    case Scheme::user_adaptive: return "user_adaptive";
    case Scheme::ul_adaptive: return "ul_adaptive";
    case Scheme::static_phase: return "static";
    case Scheme::general: return "general";
    case Scheme::hybrid: return "hybrid";
    case Scheme::random: return "random";
    case Scheme::no_irs: return "no_irs";
  }
  return "unknown";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : kAllSchemes) {
    if (scheme_name(s) == name) return s;
  }
  throw SpecError("unknown scheme '" + name + "'");
}

enum class SweepAxis { hap_power_dbm, num_elements, num_vectors, irs_x };

inline std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::hap_power_dbm: return "P_A_dbm";
    case SweepAxis::num_elements: return "N";
    case SweepAxis::num_vectors: return "J";
    case SweepAxis::irs_x: return "irs_x";
  }
  return "unknown";
}

inline SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::hap_power_dbm, SweepAxis::num_elements, SweepAxis::num_vectors, SweepAxis::irs_x}) {
    if (axis_name(a) == name) return a;
  }
  throw SpecError("unknown sweep axis '" + name + "' (expected P_A_dbm, N, J or irs_x)");
}

struct ExperimentSpec {
  SystemConfig base;
  SweepAxis axis = SweepAxis::hap_power_dbm;
  std::vector<double> values;
  std::vector<Scheme> schemes;
  std::vector<std::uint64_t> seeds;
  std::string output = "results.csv";
  int num_vectors = 1;  // J of general/hybrid when the axis is not J
  int random_trials = 1;
  int randomization_samples = 200;
  ScaOptions sca;

  void validate() const {
    if (values.empty()) throw SpecError("spec: axis values must not be empty");
    if (schemes.empty()) throw SpecError("spec: schemes must not be empty");
    if (seeds.empty()) throw SpecError("spec: seeds must not be empty");
    if (num_vectors < 0) throw SpecError("spec: num_vectors must be >= 0");
    if (random_trials < 1) throw SpecError("spec: random_trials must be >= 1");
    if (randomization_samples < 1) throw SpecError("spec: randomization_samples must be >= 1");
    for (double v : values) {
      const bool integral = v == std::floor(v);
      if (axis == SweepAxis::num_elements && !(integral && v >= 1)) throw SpecError("spec: N values must be integers >= 1");
      if (axis == SweepAxis::num_vectors && !(integral && v >= 0)) throw SpecError("spec: J values must be integers >= 0");
    }
    sca.validate();
  }
};

/// Parses a sweep spec. `base_config` is either a path (relative to base_dir)
/// or an inline config object; without it `profile` picks desk or full.
inline ExperimentSpec spec_from_json(const json& j, const std::filesystem::path& base_dir = ".") {
  ExperimentSpec spec;
  try {
    if (j.contains("base_config")) {
      const json& b = j["base_config"];
      if (b.is_string()) {
        std::filesystem::path p = b.get<std::string>();
        spec.base = load_config((p.is_absolute() ? p : base_dir / p).string());
      } else {
        spec.base = config_from_json(b);
      }
    } else {
      const std::string profile = j.value("profile", "desk");
      if (profile == "desk") {
        spec.base = desk_profile();
      } else if (profile == "full") {
        spec.base = full_profile();
      } else {
        throw SpecError("spec: unknown profile '" + profile + "' (expected desk or full)");
      }
    }
    spec.axis = parse_axis(j.at("axis").get<std::string>());
    spec.values = j.at("values").get<std::vector<double>>();
    for (const auto& name : j.at("schemes").get<std::vector<std::string>>()) spec.schemes.push_back(parse_scheme(name));
    const json& seeds = j.at("seeds");
    if (seeds.is_object()) {
      const auto first = seeds.value("first", std::uint64_t{1});
      const auto count = seeds.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i) spec.seeds.push_back(first + i);
    } else {
      spec.seeds = seeds.get<std::vector<std::uint64_t>>();
    }
    spec.output = j.value("output", spec.output);
    spec.num_vectors = j.value("num_vectors", spec.num_vectors);
    spec.random_trials = j.value("random_trials", spec.random_trials);
    spec.randomization_samples = j.value("randomization_samples", spec.randomization_samples);
    spec.sca.restarts = j.value("restarts", spec.sca.restarts);
    spec.sca.max_outer_iters = j.value("max_outer_iters", spec.sca.max_outer_iters);
    spec.sca.convergence_tol = j.value("convergence_tol", spec.sca.convergence_tol);
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError("spec " + path + ": " + e.what());
  }
  auto spec = spec_from_json(j, std::filesystem::path(path).parent_path());
  return spec;
}

struct ResultRow {
  std::string scheme;
  std::uint64_t seed = 0;
  double axis_value = 0.0;
  int n = 0;
  int k = 0;
  int j = 0;
  double hap_power_dbm = 0.0;
  double throughput = 0.0;  // bits/Hz
  double tau0 = 0.0;
  double harvested_energy = 0.0;  // J, all devices
  double hap_energy = 0.0;        // J, P_A tau0
  int outer_iters = 0;
  double runtime_ms = 0.0;
  std::string status;
  std::vector<double> device_throughputs;
};

inline constexpr const char* kCsvHeader =
    "scheme,seed,axis_value,N,K,J,P_A_dbm,throughput_bps_hz,tau0_s,harvested_energy_total_j,hap_energy_j,"
    "outer_iters,runtime_ms,status,device_throughputs";

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string format_row(const ResultRow& r) {
  std::string devices;
  for (std::size_t i = 0; i < r.device_throughputs.size(); ++i) {
    if (i > 0) devices += ';';
    devices += fmt(r.device_throughputs[i]);
  }
  std::ostringstream os;
  os << r.scheme << ',' << r.seed << ',' << fmt(r.axis_value) << ',' << r.n << ',' << r.k << ',' << r.j << ','
     << fmt(r.hap_power_dbm) << ',' << fmt(r.throughput) << ',' << fmt(r.tau0) << ',' << fmt(r.harvested_energy) << ','
     << fmt(r.hap_energy) << ',' << r.outer_iters << ',' << fmt(r.runtime_ms) << ',' << r.status << ',' << devices;
  return os.str();
}

inline void apply_axis(SystemConfig& c, int& num_vectors, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::hap_power_dbm: c.hap_power_dbm = value; break;
    case SweepAxis::num_elements: c.num_elements = static_cast<int>(value); break;
    case SweepAxis::num_vectors: num_vectors = static_cast<int>(value); break;
    case SweepAxis::irs_x: c.irs_pos.x = value; break;
  }
}

inline ResultRow row_from_solution(const Scenario& s, const Solution& sol, Scheme scheme, int j) {
  ResultRow r;
  r.scheme = scheme_name(scheme);
  r.n = s.num_elements();
  r.k = s.num_devices();
  r.j = j;
  r.hap_power_dbm = s.config().hap_power_dbm;
  r.throughput = sol.throughput;
  r.tau0 = sol.alloc.tau0;
  for (int k = 0; k < s.num_devices(); ++k) r.harvested_energy += harvested_energy(s, sol.plan, sol.alloc.tau0, k);
  r.hap_energy = s.hap_power() * sol.alloc.tau0;
  r.outer_iters = sol.diagnostics.outer_iterations;
  r.status = to_string(sol.diagnostics.status);
  r.device_throughputs = device_throughputs(s, sol.plan, sol.alloc);
  // Every reported solution must reproduce under exact allocation of its plan.
  const double again = finish_solution(s, sol.plan).throughput;
  if (std::abs(again - sol.throughput) > 1e-9 * std::max(1.0, sol.throughput)) r.status = "revalidation_mismatch";
  return r;
}

inline ResultRow row_from_relaxed(const Scenario& s, const RelaxedResult& rel) {
  ResultRow r;
  r.scheme = scheme_name(Scheme::upper_bound);
  r.n = s.num_elements();
  r.k = s.num_devices();
  r.j = s.num_devices();
  r.hap_power_dbm = s.config().hap_power_dbm;
  r.throughput = rel.upper_bound;
  r.tau0 = rel.alloc.tau0;
  r.hap_energy = s.hap_power() * rel.alloc.tau0;
  r.outer_iters = rel.report.iterations;
  r.status = kernel::to_string(rel.report.status);
  for (int k = 0; k < s.num_devices(); ++k) {
    const double gamma = align_phases(s.direct(k), s.q(k)).gain;
    const double e = rel.alloc.energy(k, 0);
    r.harvested_energy += e;
    r.device_throughputs.push_back(detail::perspective_log2(rel.alloc.time(k, 0), e * gamma / s.noise_power()));
  }
  return r;
}

}  // namespace detail

/// Rows of one (axis value, seed) work item, in the spec's scheme order.
/// Schemes that do not apply (hybrid with J > K, the bound above its size
/// limit) produce no row and a note instead.
inline std::vector<ResultRow> run_item(const ExperimentSpec& spec, double value, std::uint64_t seed,
                                       std::vector<std::string>* notes = nullptr) {
  SystemConfig c = spec.base;
  int num_vectors = spec.num_vectors;
  detail::apply_axis(c, num_vectors, spec.axis, value);
  c.seed = seed;
  c.validate();
  const Scenario s = generate_scenario(c);
  const int k_count = s.num_devices();

  using clock = std::chrono::steady_clock;
  auto elapsed_ms = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  std::optional<Solution> static_sol;
  double static_ms = 0.0;
  auto need_static = [&] {
    if (!static_sol) {
      const auto t0 = clock::now();
      static_sol = solve_static(s, spec.sca);
      static_ms = elapsed_ms(t0);
    }
    return &*static_sol;
  };

  std::vector<ResultRow> rows;
  for (Scheme scheme : spec.schemes) {
    const auto t0 = clock::now();
    ResultRow row;
    switch (scheme) {
      case Scheme::upper_bound: {
        if (s.num_elements() > kMaxRelaxedElements) {
          if (notes != nullptr) notes->push_back("upper_bound skipped for N = " + std::to_string(s.num_elements()));
          continue;
        }
        row = detail::row_from_relaxed(s, solve_relaxed(s));
        break;
      }
      case Scheme::static_phase:
      case Scheme::ul_adaptive: {
        const Solution* st = need_static();
        row = detail::row_from_solution(s, *st, scheme, scheme == Scheme::ul_adaptive ? 1 : 0);
        row.runtime_ms = static_ms;
        break;
      }
      case Scheme::user_adaptive: {
        const Solution* st = need_static();
        const auto t1 = clock::now();
        row = detail::row_from_solution(s, solve_user_adaptive(s, spec.sca, st), scheme, k_count);
        row.runtime_ms = elapsed_ms(t1);
        break;
      }
      case Scheme::general: {
        const Solution* st = need_static();
        const auto t1 = clock::now();
        row = detail::row_from_solution(s, solve_general(s, num_vectors, spec.sca, {}, st), scheme, num_vectors);
        row.runtime_ms = elapsed_ms(t1);
        break;
      }
      case Scheme::hybrid: {
        if (num_vectors > k_count) {
          if (notes != nullptr) notes->push_back("hybrid skipped for J = " + std::to_string(num_vectors) + " > K");
          continue;
        }
        const Solution* st = need_static();
        const auto t1 = clock::now();
        row = detail::row_from_solution(s, solve_hybrid(s, num_vectors, spec.sca, st), scheme, num_vectors);
        row.runtime_ms = elapsed_ms(t1);
        break;
      }
      case Scheme::random:
        row = detail::row_from_solution(s, baseline_random_phases(s, spec.random_trials, spec.sca.seed), scheme, 0);
        break;
      case Scheme::no_irs: {
        const Solution sol = baseline_no_irs(s);
        row = detail::row_from_solution(s.without_irs(), sol, scheme, 0);
        break;
      }
    }
    if (row.runtime_ms == 0.0) row.runtime_ms = elapsed_ms(t0);
    row.seed = seed;
    row.axis_value = value;
    rows.push_back(std::move(row));
  }
  return rows;
}

struct SweepResult {
  std::vector<ResultRow> rows;  // axis value major, then seed, then scheme
  std::vector<std::string> notes;
};

/// Runs every (axis value, seed) item in parallel; the row order does not
/// depend on the thread count.
inline SweepResult run_sweep_rows(const ExperimentSpec& spec, int threads = thread_count()) {
  spec.validate();
  const std::size_t items = spec.values.size() * spec.seeds.size();
  std::vector<std::vector<ResultRow>> per_item(items);
  std::vector<std::vector<std::string>> per_notes(items);
  parallel_for(
      items,
      [&](std::size_t i) {
        const double value = spec.values[i / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[i % spec.seeds.size()];
        per_item[i] = run_item(spec, value, seed, &per_notes[i]);
      },
      threads);
  SweepResult out;
  for (std::size_t i = 0; i < items; ++i) {
    for (auto& r : per_item[i]) out.rows.push_back(std::move(r));
    for (auto& n : per_notes[i]) {
      if (std::find(out.notes.begin(), out.notes.end(), n) == out.notes.end()) out.notes.push_back(std::move(n));
    }
  }
  return out;
}

struct SummaryRow {
  std::string scheme;
  double axis_value = 0.0;
  int count = 0;
  double mean_throughput = 0.0;
  double std_throughput = 0.0;
  double mean_tau0 = 0.0;
  double std_tau0 = 0.0;
  double mean_harvested = 0.0;
  double std_harvested = 0.0;
  double mean_hap_energy = 0.0;
  double mean_runtime_ms = 0.0;
};

/// Mean and sample standard deviation per (scheme, axis value), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.scheme, r.axis_value}];
    if (g.empty()) out.push_back({r.scheme, r.axis_value});
    g.push_back(&r);
  }
  auto mean_std = [](const std::vector<const ResultRow*>& g, auto field) {
    double m = 0.0;
    for (const auto* r : g) m += field(*r);
    m /= static_cast<double>(g.size());
    double v = 0.0;
    for (const auto* r : g) v += (field(*r) - m) * (field(*r) - m);
    const double sd = g.size() > 1 ? std::sqrt(v / static_cast<double>(g.size() - 1)) : 0.0;
    return std::pair{m, sd};
  };
  for (auto& s : out) {
    const auto& g = groups[{s.scheme, s.axis_value}];
    s.count = static_cast<int>(g.size());
    std::tie(s.mean_throughput, s.std_throughput) = mean_std(g, [](const ResultRow& r) { return r.throughput; });
    std::tie(s.mean_tau0, s.std_tau0) = mean_std(g, [](const ResultRow& r) { return r.tau0; });
    std::tie(s.mean_harvested, s.std_harvested) = mean_std(g, [](const ResultRow& r) { return r.harvested_energy; });
    s.mean_hap_energy = mean_std(g, [](const ResultRow& r) { return r.hap_energy; }).first;
    s.mean_runtime_ms = mean_std(g, [](const ResultRow& r) { return r.runtime_ms; }).first;
  }
  return out;
}

inline void write_rows(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << detail::format_row(r) << '\n';
}

inline std::string summary_path(const std::string& output) {
  std::filesystem::path p(output);
  return (p.parent_path() / (p.stem().string() + ".summary.csv")).string();
}

inline void write_summary(const std::vector<SummaryRow>& summary, SweepAxis axis, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "scheme,axis,axis_value,count,mean_throughput,std_throughput,mean_tau0,std_tau0,mean_harvested_j,"
         "std_harvested_j,mean_hap_energy_j,mean_runtime_ms\n";
  using detail::fmt;
  for (const auto& s : summary) {
    out << s.scheme << ',' << axis_name(axis) << ',' << fmt(s.axis_value) << ',' << s.count << ','
        << fmt(s.mean_throughput) << ',' << fmt(s.std_throughput) << ',' << fmt(s.mean_tau0) << ',' << fmt(s.std_tau0)
        << ',' << fmt(s.mean_harvested) << ',' << fmt(s.std_harvested) << ',' << fmt(s.mean_hap_energy) << ','
        << fmt(s.mean_runtime_ms) << '\n';
  }
}

/// Runs the sweep and writes the CSV and its summary next to it.
inline SweepResult run_sweep(const ExperimentSpec& spec, int threads = thread_count()) {
  auto result = run_sweep_rows(spec, threads);
  write_rows(result.rows, spec.output);
  write_summary(summarize(result.rows), spec.axis, summary_path(spec.output));
  return result;
}

inline std::vector<ResultRow> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error(path + ": unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() == 14) f.emplace_back();
    if (f.size() != 15) throw std::runtime_error(path + ": malformed row '" + line + "'");
    ResultRow r;
    try {
      r.scheme = f[0];
      r.seed = std::stoull(f[1]);
      r.axis_value = std::stod(f[2]);
      r.n = std::stoi(f[3]);
      r.k = std::stoi(f[4]);
      r.j = std::stoi(f[5]);
      r.hap_power_dbm = std::stod(f[6]);
      r.throughput = std::stod(f[7]);
      r.tau0 = std::stod(f[8]);
      r.harvested_energy = std::stod(f[9]);
      r.hap_energy = std::stod(f[10]);
      r.outer_iters = std::stoi(f[11]);
      r.runtime_ms = std::stod(f[12]);
      r.status = f[13];
      std::stringstream ds(f[14]);
      for (std::string d; std::getline(ds, d, ';');) r.device_throughputs.push_back(std::stod(d));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace irswpcn
