// SPDX-License-Identifier: Apache-2.0
//
// Network instance: geometry, large-scale pathloss, Rayleigh small-scale fading
// and the system constants of a single-antenna HAP, an N-element IRS and K
// wirelessly powered devices.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "irswpcn/random.hpp"

namespace irswpcn {

using cplx = std::complex<double>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

/// Linear power gain of a link: 10^(-ref_loss_db/10) * d^(-exponent).
inline double pathloss(double distance_m, double exponent, double ref_loss_db) {
  if (!(distance_m > 0.0)) {
    throw GeometryError("pathloss: distance must be positive, got " + std::to_string(distance_m));
  }
  return std::pow(10.0, -ref_loss_db / 10.0) * std::pow(distance_m, -exponent);
}

struct PathlossExponents {
  double hap_irs = 2.2;
  double irs_device = 2.2;
  double hap_device = 3.4;
};

struct DeviceRegion {
  Vec3 center{10.0, 0.0, 0.0};
  double radius = 1.5;
};

struct SystemConfig {
  int num_elements = 16;
  int num_devices = 4;
  double hap_power_dbm = 40.0;
  double noise_power_dbm = -80.0;
  double total_time = 1.0;
  // Empty means 0.8 for every device; a single entry is broadcast.
  std::vector<double> efficiencies;
  // Empty means 1 for every device; a single entry is broadcast.
  std::vector<double> weights;
  Vec3 hap_pos{0.0, 0.0, 0.0};
  Vec3 irs_pos{10.0, 0.0, 4.0};
  DeviceRegion device_region;
  // When non-empty, overrides device_region and must have num_devices entries.
  std::vector<Vec3> device_positions;
  PathlossExponents exponents;
  double ref_loss_db = 30.0;
  std::uint64_t seed = 1;

  double hap_power() const { return dbm_to_watts(hap_power_dbm); }
  double noise_power() const { return dbm_to_watts(noise_power_dbm); }

  double efficiency(int k) const {
    if (efficiencies.empty()) return 0.8;
    return efficiencies.size() == 1 ? efficiencies.front() : efficiencies.at(static_cast<std::size_t>(k));
  }
  double weight(int k) const {
    if (weights.empty()) return 1.0;
    return weights.size() == 1 ? weights.front() : weights.at(static_cast<std::size_t>(k));
  }

  void validate() const {
    if (num_elements < 1) throw ConfigError("num_elements must be >= 1");
    if (num_devices < 1) throw ConfigError("num_devices must be >= 1");
    if (!std::isfinite(hap_power_dbm)) throw ConfigError("hap_power_dbm must be finite");
    if (!std::isfinite(noise_power_dbm)) throw ConfigError("noise_power_dbm must be finite");
    if (!(total_time > 0.0)) throw ConfigError("total_time must be > 0");
    auto check_size = [&](const auto& v, const char* name) {
      if (v.size() > 1 && v.size() != static_cast<std::size_t>(num_devices)) {
        throw ConfigError(std::string(name) + " must have 1 or num_devices entries");
      }
    };
    check_size(efficiencies, "efficiencies");
    check_size(weights, "weights");
    for (int k = 0; k < num_devices; ++k) {
      const double eta = efficiency(k);
      if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("efficiencies must lie in (0, 1]");
      if (!(weight(k) >= 0.0)) throw ConfigError("weights must be nonnegative");
    }
    if (!(device_region.radius >= 0.0)) throw ConfigError("device_region.radius must be >= 0");
    if (!device_positions.empty() && device_positions.size() != static_cast<std::size_t>(num_devices)) {
      throw ConfigError("device_positions must have num_devices entries");
    }
    if (!(exponents.hap_irs > 0.0 && exponents.irs_device > 0.0 && exponents.hap_device > 0.0)) {
      throw ConfigError("pathloss exponents must be > 0");
    }
    if (!std::isfinite(ref_loss_db)) throw ConfigError("ref_loss_db must be finite");
  }
};

/// Immutable problem instance. Cascaded channels are stored so that
/// `q(k).dot(v)` (conjugating q) equals h_{r,k}^H diag(v) g, and
/// `direct(k)` is the scalar that adds to it: the effective gain for a
/// phase vector v is |direct(k) + q(k)^H v|^2.
class Scenario {
 public:
  Scenario(SystemConfig config, Eigen::VectorXcd g, std::vector<Eigen::VectorXcd> h_r,
           std::vector<cplx> h_d, std::vector<Vec3> positions)
      : config_(std::move(config)),
        g_(std::move(g)),
        h_r_(std::move(h_r)),
        h_d_(std::move(h_d)),
        positions_(std::move(positions)) {
    config_.validate();
    const auto n = static_cast<Eigen::Index>(config_.num_elements);
    const auto k_count = static_cast<std::size_t>(config_.num_devices);
    if (g_.size() != n || h_r_.size() != k_count || h_d_.size() != k_count ||
        positions_.size() != k_count) {
      throw ConfigError("Scenario: channel dimensions do not match the configuration");
    }
    q_.reserve(k_count);
    q_bar_.reserve(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      if (h_r_[k].size() != n) throw ConfigError("Scenario: h_r dimension mismatch");
      // q^H = h_r^H diag(g)  =>  q[n] = h_r[n] * conj(g[n]).
      Eigen::VectorXcd q = h_r_[k].cwiseProduct(g_.conjugate());
      Eigen::VectorXcd qb(n + 1);
      qb.head(n) = q;
      qb(n) = std::conj(h_d_[k]);
      if (!q.allFinite() || !std::isfinite(h_d_[k].real()) || !std::isfinite(h_d_[k].imag())) {
        throw ConfigError("Scenario: non-finite channel coefficient");
      }
      q_.push_back(std::move(q));
      q_bar_.push_back(std::move(qb));
    }
  }

  const SystemConfig& config() const { return config_; }
  int num_elements() const { return config_.num_elements; }
  int num_devices() const { return config_.num_devices; }
  double hap_power() const { return config_.hap_power(); }
  double noise_power() const { return config_.noise_power(); }
  double total_time() const { return config_.total_time; }
  double efficiency(int k) const { return config_.efficiency(k); }
  double weight(int k) const { return config_.weight(k); }

  const Eigen::VectorXcd& g() const { return g_; }
  const Eigen::VectorXcd& h_r(int k) const { return h_r_.at(static_cast<std::size_t>(k)); }
  cplx direct(int k) const { return h_d_.at(static_cast<std::size_t>(k)); }
  const Eigen::VectorXcd& q(int k) const { return q_.at(static_cast<std::size_t>(k)); }
  /// Augmented cascaded channel: q_bar^H [v; 1] = direct + q^H v.
  const Eigen::VectorXcd& q_bar(int k) const { return q_bar_.at(static_cast<std::size_t>(k)); }
  const Vec3& device_position(int k) const { return positions_.at(static_cast<std::size_t>(k)); }

  /// Copy with every IRS-reflected channel set to zero.
  Scenario without_irs() const {
    std::vector<Eigen::VectorXcd> zero(h_r_.size(), Eigen::VectorXcd::Zero(g_.size()));
    return Scenario(config_, g_, std::move(zero), h_d_, positions_);
  }

  friend bool operator==(const Scenario& a, const Scenario& b) {
    if (a.g_ != b.g_ || a.h_d_ != b.h_d_) return false;
    for (std::size_t k = 0; k < a.h_r_.size(); ++k) {
      if (a.h_r_[k] != b.h_r_[k]) return false;
    }
    return a.positions_ == b.positions_;
  }

 private:
  SystemConfig config_;
  Eigen::VectorXcd g_;
  std::vector<Eigen::VectorXcd> h_r_;
  std::vector<cplx> h_d_;
  std::vector<Vec3> positions_;
  std::vector<Eigen::VectorXcd> q_;
  std::vector<Eigen::VectorXcd> q_bar_;
};

/// Device positions: explicit ones when configured, otherwise uniform in the
/// disk around device_region.center (same height as the center).
inline std::vector<Vec3> device_positions(const SystemConfig& config) {
  if (!config.device_positions.empty()) return config.device_positions;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(config.num_devices));
  for (int k = 0; k < config.num_devices; ++k) {
    auto rng = RandomStream::derive(config.seed, "position", static_cast<std::uint64_t>(k));
    const double r = config.device_region.radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const Vec3& c = config.device_region.center;
    out.push_back({c.x + r * std::cos(phi), c.y + r * std::sin(phi), c.z});
  }
  return out;
}

/// Draws the channels for `config`. Every link has its own stream keyed by the
/// seed, so the first n elements of an N-element draw do not depend on N.
inline Scenario generate_scenario(const SystemConfig& config) {
  config.validate();
  const int n = config.num_elements;
  const int k_count = config.num_devices;
  const auto positions = device_positions(config);

  const double pl_hap_irs = pathloss(distance(config.hap_pos, config.irs_pos), config.exponents.hap_irs,
                                     config.ref_loss_db);
  Eigen::VectorXcd g(n);
  {
    auto rng = RandomStream::derive(config.seed, "hap_irs");
    const double amp = std::sqrt(pl_hap_irs);
    for (int i = 0; i < n; ++i) g(i) = amp * rng.complex_normal();
  }

  std::vector<Eigen::VectorXcd> h_r;
  std::vector<cplx> h_d;
  h_r.reserve(static_cast<std::size_t>(k_count));
  h_d.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const auto& pos = positions[static_cast<std::size_t>(k)];
    const double amp_r =
        std::sqrt(pathloss(distance(config.irs_pos, pos), config.exponents.irs_device, config.ref_loss_db));
    const double amp_d =
        std::sqrt(pathloss(distance(config.hap_pos, pos), config.exponents.hap_device, config.ref_loss_db));
    auto rng_r = RandomStream::derive(config.seed, "irs_device", static_cast<std::uint64_t>(k));
    Eigen::VectorXcd hr(n);
    for (int i = 0; i < n; ++i) hr(i) = amp_r * rng_r.complex_normal();
    h_r.push_back(std::move(hr));
    auto rng_d = RandomStream::derive(config.seed, "hap_device", static_cast<std::uint64_t>(k));
    h_d.push_back(amp_d * rng_d.complex_normal());
  }
  return Scenario(config, std::move(g), std::move(h_r), std::move(h_d), positions);
}

}  // namespace irswpcn
