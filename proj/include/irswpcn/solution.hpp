// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irswpcn/effective_channel.hpp"

namespace irswpcn {

/// The DL phase vector plus J UL vectors, and which slot each device uses.
/// Slot 0 is the DL vector itself; slot j >= 1 is uplink[j-1].
struct PhasePlan {
  PhaseVector downlink;              // augmented
  std::vector<PhaseVector> uplink;   // augmented, J entries
  std::vector<int> assignment;       // device -> slot in [0, J]
  bool uplink_reuses_downlink = true;  // false: slot 0 carries no UL traffic

  int num_slots() const { return static_cast<int>(uplink.size()) + 1; }
  int num_uplink_vectors() const { return static_cast<int>(uplink.size()); }

  const PhaseVector& slot(int j) const {
    if (j < 0 || j > static_cast<int>(uplink.size())) throw std::out_of_range("PhasePlan: slot out of range");
    return j == 0 ? downlink : uplink[static_cast<std::size_t>(j - 1)];
  }

  /// Static plan: every device transmits under the DL vector.
  static PhasePlan single(PhaseVector downlink, int num_devices) {
    return {downlink.as_augmented(), {}, std::vector<int>(static_cast<std::size_t>(num_devices), 0), true};
  }
};

/// Harvest-then-transmit allocation. time/energy are K x (J+1): entry (k, j)
/// is the UL time / energy of device k under slot j.
struct Allocation {
  double tau0 = 0.0;
  Eigen::MatrixXd time;
  Eigen::MatrixXd energy;

  double total_time() const { return tau0 + time.sum(); }
  Eigen::VectorXd device_time() const { return time.rowwise().sum(); }
  Eigen::VectorXd device_energy() const { return energy.rowwise().sum(); }

  /// p = e / t, zero where t == 0.
  Eigen::MatrixXd power() const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(time.rows(), time.cols());
    for (Eigen::Index k = 0; k < time.rows(); ++k) {
      for (Eigen::Index j = 0; j < time.cols(); ++j) {
        if (time(k, j) > 0.0) p(k, j) = energy(k, j) / time(k, j);
      }
    }
    return p;
  }
};

enum class ScaStatus { converged, max_iterations, numerical_failure };

inline const char* to_string(ScaStatus s) {
  switch (s) {
    case ScaStatus::converged: return "converged";
    case ScaStatus::max_iterations: return "max_iterations";
    case ScaStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct Diagnostics {
  // Surrogate objective per outer iteration of the restart that was kept.
  std::vector<double> trace;
  // Traces of every restart, kept for convergence checks.
  std::vector<std::vector<double>> restart_traces;
  std::vector<ScaStatus> restart_statuses;
  int outer_iterations = 0;
  int restarts_used = 0;
  ScaStatus status = ScaStatus::converged;
  std::size_t zero_phase_entries = 0;
  // Throughput of the split (pre-rounding) solution, when rounding happened.
  double pre_rounding_throughput = std::numeric_limits<double>::quiet_NaN();
};

struct Solution {
  PhasePlan plan;
  Allocation alloc;
  double throughput = 0.0;  // weighted sum throughput, bits/Hz
  Diagnostics diagnostics;
};

}  // namespace irswpcn
