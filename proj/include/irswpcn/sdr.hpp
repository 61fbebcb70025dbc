// SPDX-License-Identifier: Apache-2.0
//
// Rank-relaxed upper bound for the user-adaptive problem. With every UL vector
// aligned, the DL vector only enters through tau0 * |q_bar^H v|^2, which is
// linear in the lifted matrix W = tau0 v v^H. Dropping rank(W) = 1 leaves a
// convex program: a perspective-log objective, linear energy constraints,
// diag(W) = tau0 and W PSD.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "irswpcn/allocation.hpp"
#include "irswpcn/convex_kernel.hpp"
#include "irswpcn/random.hpp"
#include "irswpcn/sca.hpp"
#include "irswpcn/scenario.hpp"
#include "irswpcn/solution.hpp"

namespace irswpcn {

struct LiftedMatrix {
  Eigen::MatrixXcd w;  // tau0 * V, (N+1) x (N+1)
  double tau0 = 0.0;
};

struct RelaxedResult {
  LiftedMatrix lifted;
  Allocation alloc;  // K x 1: time and UL energy per device
  double upper_bound = 0.0;
  kernel::SolverReport report;
};

/// Largest N accepted by solve_relaxed; the dense Newton cost grows as (N+1)^6.
inline constexpr int kMaxRelaxedElements = 32;

inline RelaxedResult solve_relaxed(const Scenario& s, double tol = 1e-9) {
  const int n = s.num_elements();
  if (n > kMaxRelaxedElements) {
    throw std::invalid_argument("solve_relaxed: N = " + std::to_string(n) + " exceeds the supported maximum of " +
                                std::to_string(kMaxRelaxedElements));
  }
  const int dim = n + 1;
  const int k_count = s.num_devices();
  const detail::Normalizer nz(s);
  const double total = s.total_time();

  kernel::ConvexSubproblem p;
  const int i_tau0 = p.add_variables(1);
  const int i_tau = p.add_variables(k_count);
  const int i_sig = p.add_variables(k_count);
  // Strict upper triangle of W, (re, im) per entry, row-major.
  const int i_off = p.add_variables(dim * (dim - 1));
  auto off_index = [&](int r, int c) {
    // position of (r, c), r < c, in the row-major strict upper triangle
    const int before = r * dim - r * (r + 1) / 2;
    return i_off + 2 * (before + (c - r - 1));
  };

  kernel::PsdConstraint psd;
  psd.dim = dim;
  psd.constant = Eigen::MatrixXcd::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    psd.terms.push_back({i_tau0, r, r, cplx(1.0, 0.0)});
    for (int c = r + 1; c < dim; ++c) {
      psd.terms.push_back({off_index(r, c), r, c, cplx(1.0, 0.0)});
      psd.terms.push_back({off_index(r, c) + 1, r, c, cplx(0.0, 1.0)});
    }
  }
  p.psd.push_back(std::move(psd));

  kernel::LinearExpr budget;
  budget.shift(total).add(i_tau0, -1.0);
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    p.perspective.push_back({i_tau + k, i_sig + k, nz.noise, s.weight(k)});
    budget.add(i_tau + k, -1.0);
    // S_k <= eta_k gamma_k Tr(Q_k W), Tr(Q W) = q^H W q
    const Eigen::VectorXcd& q = nz.qt[ku];
    const double mult = s.efficiency(k) * nz.gamma[ku];
    kernel::LinearExpr e;
    e.add(i_tau0, mult * q.squaredNorm());
    for (int r = 0; r < dim; ++r) {
      for (int c = r + 1; c < dim; ++c) {
        const cplx coef = std::conj(q(r)) * q(c);  // Re{coef * W_rc} appears twice
        e.add(off_index(r, c), 2.0 * mult * coef.real());
        e.add(off_index(r, c) + 1, -2.0 * mult * coef.imag());
      }
    }
    e.add(i_sig + k, -1.0);
    p.inequalities.push_back(std::move(e));
  }
  p.inequalities.push_back(budget);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p.num_vars);
  x0(i_tau0) = 0.5 * total;
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    x0(i_tau + k) = 0.49 * total / k_count;
    x0(i_sig + k) = 0.5 * s.efficiency(k) * nz.gamma[ku] * x0(i_tau0) * nz.qt[ku].squaredNorm();
  }
  // Devices with no channel at all cannot carry a positive signal slack.
  for (int k = 0; k < k_count; ++k) {
    if (!(x0(i_sig + k) > 0.0)) throw std::invalid_argument("solve_relaxed: device with an all-zero channel");
  }

  kernel::SolverOptions kopts;
  kopts.tol = tol;
  const auto result = kernel::solve_subproblem(p, x0, kopts);
  const Eigen::VectorXd& x = result.point;

  RelaxedResult out;
  out.report = result.report;
  out.upper_bound = result.report.objective;
  out.lifted.tau0 = x(i_tau0);
  out.lifted.w = Eigen::MatrixXcd::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    out.lifted.w(r, r) = x(i_tau0);
    for (int c = r + 1; c < dim; ++c) {
      const cplx v(x(off_index(r, c)), x(off_index(r, c) + 1));
      out.lifted.w(r, c) = v;
      out.lifted.w(c, r) = std::conj(v);
    }
  }
  out.alloc.tau0 = x(i_tau0);
  out.alloc.time = Eigen::MatrixXd::Zero(k_count, 1);
  out.alloc.energy = Eigen::MatrixXd::Zero(k_count, 1);
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.alloc.time(k, 0) = x(i_tau + k);
    // S = e * gamma  =>  e = S / gamma in physical units
    out.alloc.energy(k, 0) = x(i_sig + k) * nz.energy_scale(s) / nz.gamma[ku];
  }
  return out;
}

inline constexpr double kEigenFloor = 1e-12;

/// Plan with the given DL vector and the aligned UL vector of every device.
inline PhasePlan user_adaptive_plan(const Scenario& s, const PhaseVector& downlink) {
  PhasePlan plan;
  plan.downlink = downlink.as_augmented();
  for (int k = 0; k < s.num_devices(); ++k) {
    plan.uplink.push_back(align_phases(s.direct(k), s.q(k)).phases.as_augmented());
    plan.assignment.push_back(k + 1);
  }
  return plan;
}

/// Draws candidates from CN(0, W / tau0), projects each to unit modulus and
/// keeps the best after exact allocation with aligned UL vectors.
inline Solution gaussian_randomize(const LiftedMatrix& lifted, const Scenario& s, int samples = 200,
                                   std::uint64_t seed = 0) {
  if (samples < 1) throw std::invalid_argument("gaussian_randomize: samples must be >= 1");
  if (!(lifted.tau0 > 0.0)) throw std::invalid_argument("gaussian_randomize: degenerate lift with tau0 = 0");
  const Eigen::MatrixXcd v = lifted.w / lifted.tau0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(v);
  // Eigenvalues under the floor are numerical drift and carry no direction.
  const Eigen::VectorXd lambda = (eig.eigenvalues().array() > kEigenFloor).select(eig.eigenvalues(), 0.0);
  const Eigen::MatrixXcd factor = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();

  Solution best;
  best.throughput = -1.0;
  const Eigen::Index dim = v.rows();
  for (int i = 0; i < samples; ++i) {
    auto rng = RandomStream::derive(s.config().seed, "gaussian_randomization", static_cast<std::uint64_t>(i))
                   .fork("opt", seed);
    Eigen::VectorXcd z(dim);
    for (auto& c : z) c = rng.complex_normal();
    const Eigen::VectorXcd xi = factor * z;
    Solution sol = finish_solution(s, user_adaptive_plan(s, project_unit_modulus(xi, PhaseVector::Kind::augmented)));
    if (sol.throughput > best.throughput) best = std::move(sol);
  }
  best.diagnostics.restarts_used = samples;
  return best;
}

}  // namespace irswpcn
