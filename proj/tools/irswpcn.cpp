// SPDX-License-Identifier: Apache-2.0
//
// irswpcn: config generation, sweeps, the property suite and CSV comparison.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "irswpcn/config_io.hpp"
#include "irswpcn/experiments.hpp"
#include "irswpcn/properties.hpp"

namespace {

using namespace irswpcn;

int gen_config(const std::string& profile, const std::string& out, const std::string& spec_out) {
  const SystemConfig c = profile == "full" ? full_profile() : desk_profile();
  save_config(c, out);
  std::printf("wrote %s (%s profile, N = %d, K = %d)\n", out.c_str(), profile.c_str(), c.num_elements, c.num_devices);
  if (!spec_out.empty()) {
    json spec;
    spec["base_config"] = std::filesystem::relative(std::filesystem::absolute(out),
                                                    std::filesystem::absolute(spec_out).parent_path())
                              .string();
    spec["axis"] = "P_A_dbm";
    spec["values"] = {30, 32, 34, 36, 38, 40, 42, 44};
    spec["schemes"] = {"upper_bound", "user_adaptive", "ul_adaptive", "static", "general", "hybrid", "random", "no_irs"};
    spec["seeds"] = {{"first", 1}, {"count", 20}};
    spec["num_vectors"] = 1;
    spec["restarts"] = 5;
    spec["output"] = "power_sweep.csv";
    std::ofstream os(spec_out);
    if (!os) throw std::runtime_error("cannot write " + spec_out);
    os << spec.dump(2) << '\n';
    std::printf("wrote %s\n", spec_out.c_str());
  }
  return 0;
}

int run(const std::string& spec_path, const std::string& output, int threads) {
  ExperimentSpec spec = load_spec(spec_path);
  if (!output.empty()) spec.output = output;
  const auto result = run_sweep(spec, threads);
  for (const auto& note : result.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
  std::printf("%zu rows -> %s\nsummary -> %s\n", result.rows.size(), spec.output.c_str(),
              summary_path(spec.output).c_str());
  for (const auto& s : summarize(result.rows)) {
    std::printf("  %-14s %s=%-8g mean %.5f  std %.5f  tau0 %.5f\n", s.scheme.c_str(), axis_name(spec.axis).c_str(),
                s.axis_value, s.mean_throughput, s.std_throughput, s.mean_tau0);
  }
  return 0;
}

int props(const std::string& config_path, const std::string& report_path, PropertyOptions opts) {
  const SystemConfig base = load_config(config_path);
  PropertySuite suite(base, opts);
  PropertyReport report;
  for (auto& c : suite.acceptance()) {
    std::printf("%-12s %s  %s: %s\n", c.id.c_str(), c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    report.checks.push_back(std::move(c));
  }
  for (auto& c : suite.invariants()) {
    std::printf("%-12s %s  %s: %s\n", c.id.c_str(), c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    report.checks.push_back(std::move(c));
  }
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    if (!os) throw std::runtime_error("cannot write " + report_path);
    os << report.to_json().dump(2) << '\n';
  }
  std::printf("%s\n", report.all_passed() ? "all checks passed" : "some checks FAILED");
  return report.all_passed() ? 0 : 1;
}

// Mean throughput per (scheme, axis value), one column per file.
int compare(const std::vector<std::string>& files) {
  std::vector<std::map<std::pair<std::string, double>, std::pair<double, int>>> tables;
  std::set<std::pair<std::string, double>> keys;
  for (const auto& f : files) {
    auto& t = tables.emplace_back();
    for (const auto& r : read_rows(f)) {
      auto& cell = t[{r.scheme, r.axis_value}];
      cell.first += r.throughput;
      cell.second += 1;
      keys.insert({r.scheme, r.axis_value});
    }
  }
  std::printf("%-14s %-10s", "scheme", "axis");
  for (std::size_t i = 0; i < files.size(); ++i) std::printf(" %14s", ("file" + std::to_string(i + 1)).c_str());
  if (files.size() > 1) std::printf(" %12s", "max_rel_diff");
  std::printf("\n");
  for (const auto& key : keys) {
    std::printf("%-14s %-10g", key.first.c_str(), key.second);
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& t : tables) {
      const auto it = t.find(key);
      if (it == t.end()) {
        std::printf(" %14s", "-");
        continue;
      }
      const double mean = it->second.first / it->second.second;
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
      std::printf(" %14.6f", mean);
    }
    if (files.size() > 1) std::printf(" %12.3g", hi >= lo && hi > 0.0 ? (hi - lo) / hi : 0.0);
    std::printf("\n");
  }
  for (std::size_t i = 0; i < files.size(); ++i) std::printf("file%zu = %s\n", i + 1, files[i].c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-aided wireless powered network optimizer"};
  app.require_subcommand(1);
  int threads = thread_count();
  app.add_option("--threads", threads, "worker threads (default: IRSWPCN_THREADS or hardware concurrency)")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-config", "write a default system config");
  std::string profile = "desk";
  std::string config_out = "config.json";
  std::string spec_out;
  gen->add_option("--profile", profile, "desk (N=16, K=4) or full (N=50, K=10)")
      ->check(CLI::IsMember({"desk", "full"}));
  gen->add_option("-o,--output", config_out, "config path");
  gen->add_option("--spec", spec_out, "also write an example sweep spec here");

  auto* run_cmd = app.add_subcommand("run", "run a sweep spec");
  std::string spec_path;
  std::string output;
  run_cmd->add_option("spec", spec_path, "sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", output, "override the spec's output CSV");

  auto* props_cmd = app.add_subcommand("props", "run the property suite; exit 0 iff every check passes");
  std::string config_path;
  std::string report_path = "props_report.json";
  PropertyOptions popts;
  props_cmd->add_option("config", config_path, "base config (JSON)")->required()->check(CLI::ExistingFile);
  props_cmd->add_option("--report", report_path, "JSON report path (empty to skip)");
  props_cmd->add_option("--seeds", popts.seeds, "scenarios per batch")->check(CLI::PositiveNumber);
  props_cmd->add_option("--trend-seeds", popts.trend_seeds, "seeds per trend point")->check(CLI::PositiveNumber);
  props_cmd->add_option("--restarts", popts.sca.restarts, "SCA restarts")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "compare mean throughput across result CSVs");
  std::vector<std::string> files;
  cmp->add_option("csv", files, "result CSVs")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_config(profile, config_out, spec_out);
    if (*run_cmd) return run(spec_path, output, threads);
    if (*props_cmd) {
      popts.threads = threads;
      return props(config_path, report_path, popts);
    }
    if (*cmp) return compare(files);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
