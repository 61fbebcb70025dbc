// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "irswpcn/effective_channel.hpp"
#include "irswpcn/random.hpp"

namespace irswpcn {
namespace {

using std::numbers::pi;

Eigen::VectorXcd random_phases(RandomStream& rng, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.unit_phase();
  return v;
}

TEST(PhaseVector, RejectsNonUnitEntries) {
  Eigen::VectorXcd v(2);
  v << 1.0, 0.5;
  EXPECT_THROW(PhaseVector::bare(v), std::invalid_argument);
  v << 1.0, cplx(0.0, 1.0);
  EXPECT_THROW(PhaseVector::augmented(v), std::invalid_argument);
  v << cplx(0.0, 1.0), 1.0;
  EXPECT_NO_THROW(PhaseVector::augmented(v));
}

TEST(EffectiveGain, NoReflectedPath) {
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(3);
  RandomStream rng(1);
  EXPECT_DOUBLE_EQ(effective_gain(1.0, q, PhaseVector::bare(random_phases(rng, 3))), 1.0);
}

TEST(EffectiveGain, Cancellation) {
  Eigen::VectorXcd q(2);
  q << 1.0, 1.0;
  Eigen::VectorXcd v(2);
  v << 1.0, -1.0;
  EXPECT_DOUBLE_EQ(effective_gain(0.0, q, PhaseVector::bare(v)), 0.0);
}

TEST(EffectiveGain, DimensionMismatch) {
  Eigen::VectorXcd q = Eigen::VectorXcd::Ones(3);
  EXPECT_THROW(effective_gain(1.0, q, PhaseVector::ones(2)), DimensionError);
}

TEST(AlignPhases, HandExample) {
  // q^H = [j, -1]  =>  q = [-j, -1]
  Eigen::VectorXcd q(2);
  q << cplx(0.0, -1.0), -1.0;
  const auto a = align_phases(1.0, q);
  EXPECT_NEAR(std::abs(a.phases.values()(0) - cplx(0.0, -1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a.phases.values()(1) - cplx(-1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(a.gain, 9.0, 1e-12);
  EXPECT_NEAR(effective_gain(1.0, q, a.phases), 9.0, 1e-12);
}

TEST(AlignPhases, ZeroReflection) {
  const auto a = align_phases(cplx(0.3, 0.4), Eigen::VectorXcd::Zero(4));
  EXPECT_NEAR(a.gain, 0.25, 1e-15);
  EXPECT_EQ(a.phases.values(), Eigen::VectorXcd::Ones(4));
}

TEST(AlignPhases, DominatesRandomSearch) {
  // q^H = [0.3 e^{j pi/3}, 0.5 e^{-j pi/4}]
  Eigen::VectorXcd q(2);
  q << std::polar(0.3, -pi / 3.0), std::polar(0.5, pi / 4.0);
  const cplx h_d = 0.6;
  const auto a = align_phases(h_d, q);
  EXPECT_NEAR(a.gain, 1.96, 1e-12);
  EXPECT_NEAR(effective_gain(h_d, q, a.phases), 1.96, 1e-12);
  RandomStream rng(5);
  double best = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const cplx r = h_d + std::conj(q(0)) * rng.unit_phase() + std::conj(q(1)) * rng.unit_phase();
    best = std::max(best, std::norm(r));
  }
  EXPECT_LE(best, a.gain + 1e-12);
  EXPECT_GT(best, a.gain - 1e-3);
}

TEST(AlignPhases, IdentityAndRotationInvariance) {
  RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXcd q(6);
    double amp = 0.0;
    for (int n = 0; n < 6; ++n) {
      q(n) = rng.complex_normal();
      amp += std::abs(q(n));
    }
    const cplx h_d = rng.complex_normal();
    amp += std::abs(h_d);
    const auto a = align_phases(h_d, q);
    EXPECT_NEAR(a.gain, amp * amp, 1e-12 * amp * amp);
    EXPECT_NEAR(effective_gain(h_d, q, a.phases), a.gain, 1e-12 * a.gain);
    const cplx rot = rng.unit_phase();
    const auto b = align_phases(h_d * rot, q * rot);
    EXPECT_NEAR(b.gain, a.gain, 1e-12 * a.gain);
    for (int i = 0; i < 5; ++i) {
      EXPECT_LE(effective_gain(h_d, q, PhaseVector::bare(random_phases(rng, 6))), a.gain * (1.0 + 1e-12));
    }
  }
}

TEST(Projection, Examples) {
  Eigen::VectorXcd v(2);
  v << 2.0, cplx(0.0, -3.0);
  const auto p = project_unit_modulus(v, PhaseVector::Kind::bare);
  EXPECT_NEAR(std::abs(p.values()(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.values()(1) - cplx(0.0, -1.0)), 0.0, 1e-15);
}

TEST(Projection, Idempotent) {
  RandomStream rng(3);
  const Eigen::VectorXcd v = random_phases(rng, 10);
  const auto p = project_unit_modulus(v, PhaseVector::Kind::bare);
  const auto pp = project_unit_modulus(p.values(), PhaseVector::Kind::bare);
  EXPECT_LE((p.values() - v).norm(), 1e-14);
  EXPECT_EQ(p.values(), pp.values());
}

TEST(Projection, AugmentedEndsWithOne) {
  Eigen::VectorXcd v(3);
  v << std::polar(2.0, pi / 4.0), std::polar(0.1, 1.0), std::polar(0.5, -2.0);
  const auto p = project_unit_modulus(v, PhaseVector::Kind::augmented);
  EXPECT_EQ(p.values()(2), cplx(1.0, 0.0));
  EXPECT_NEAR(std::arg(p.values()(0)), pi / 4.0 + 2.0, 1e-12);
  EXPECT_NEAR(std::arg(p.values()(1)), 3.0, 1e-12);
}

TEST(Projection, ZeroEntriesCounted) {
  Eigen::VectorXcd v(3);
  v << 0.0, 2.0, 0.0;
  std::size_t zeros = 0;
  const auto p = project_unit_modulus(v, PhaseVector::Kind::bare, &zeros);
  EXPECT_EQ(zeros, 2U);
  EXPECT_EQ(p.values()(0), cplx(1.0, 0.0));
}

}  // namespace
}  // namespace irswpcn
