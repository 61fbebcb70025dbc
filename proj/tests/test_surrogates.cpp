// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "irswpcn/random.hpp"
#include "irswpcn/surrogates.hpp"

namespace irswpcn {
namespace {

constexpr int kSamples = 100000;

Eigen::VectorXcd random_vector(RandomStream& rng, int n, double scale = 1.0) {
  Eigen::VectorXcd v(n);
  for (auto& c : v) c = scale * rng.complex_normal();
  return v;
}

// A point in the relaxed domain: entries inside the unit disk, last one 1.
Eigen::VectorXcd random_disk_point(RandomStream& rng, int n) {
  Eigen::VectorXcd v(n + 1);
  for (int i = 0; i < n; ++i) v(i) = std::sqrt(rng.uniform()) * rng.unit_phase();
  v(n) = 1.0;
  return v;
}

double quartic(const Eigen::VectorXcd& q, const Eigen::VectorXcd& v, double tau) {
  return tau * std::pow(std::norm(q.dot(v)), 2);
}

double dl_energy(const Eigen::VectorXcd& q, const Eigen::VectorXcd& v, double tau) { return tau * std::norm(q.dot(v)); }

TEST(SurrogateQuartic, TightAtExpansionPoint) {
  auto rng = RandomStream::derive(1, "quartic_tight");
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXcd q = random_vector(rng, 6);
    const Eigen::VectorXcd w = random_disk_point(rng, 5);
    const double t0 = 0.01 + rng.uniform();
    const auto f = surrogate_quartic(q, w, t0);
    const double target = quartic(q, w, t0);
    EXPECT_NEAR(f(w, t0), target, 1e-9 * std::max(1.0, target));
  }
}

TEST(SurrogateQuartic, NeverExceedsTarget) {
  auto rng = RandomStream::derive(2, "quartic_bound");
  int violations = 0;
  for (int i = 0; i < kSamples; ++i) {
    const Eigen::VectorXcd q = random_vector(rng, 5);
    const Eigen::VectorXcd w = random_disk_point(rng, 4);
    const Eigen::VectorXcd v = (i % 2 == 0) ? random_disk_point(rng, 4) : random_vector(rng, 5, 2.0);
    const double t0 = 1e-3 + rng.uniform();
    const double tau = 1e-3 + 2.0 * rng.uniform();
    const double target = quartic(q, v, tau);
    if (surrogate_quartic(q, w, t0)(v, tau) > target + 1e-9 * std::max(1.0, target)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(SurrogateQuartic, ZeroChannelIsZero) {
  const Eigen::VectorXcd q = Eigen::VectorXcd::Zero(4);
  const Eigen::VectorXcd w = Eigen::VectorXcd::Ones(4);
  const auto f = surrogate_quartic(q, w, 0.5);
  EXPECT_EQ(f(Eigen::VectorXcd::Ones(4), 0.3), 0.0);
  EXPECT_THROW(surrogate_quartic(q, w, 0.0), std::invalid_argument);
}

TEST(SurrogateDlEnergy, TightAndBounded) {
  auto rng = RandomStream::derive(3, "dl_energy");
  int violations = 0;
  double worst_tight = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const Eigen::VectorXcd q = random_vector(rng, 5);
    const Eigen::VectorXcd w = random_disk_point(rng, 4);
    const Eigen::VectorXcd v = (i % 2 == 0) ? random_disk_point(rng, 4) : random_vector(rng, 5, 2.0);
    const double t0 = 1e-3 + rng.uniform();
    const double tau = 1e-3 + 2.0 * rng.uniform();
    const auto f = surrogate_dl_energy(q, w, t0);
    const double at_point = dl_energy(q, w, t0);
    worst_tight = std::max(worst_tight, std::abs(f(w, t0) - at_point) / std::max(1.0, at_point));
    const double target = dl_energy(q, v, tau);
    if (f(v, tau) > target + 1e-9 * std::max(1.0, target)) ++violations;
  }
  EXPECT_EQ(violations, 0);
  EXPECT_LE(worst_tight, 1e-9);
}

TEST(SurrogateDlEnergy, ZeroChannelIsZero) {
  const auto f = surrogate_dl_energy(Eigen::VectorXcd::Zero(3), Eigen::VectorXcd::Ones(3), 0.2);
  EXPECT_EQ(f(Eigen::VectorXcd::Ones(3), 0.7), 0.0);
  EXPECT_THROW(surrogate_dl_energy(Eigen::VectorXcd::Zero(3), Eigen::VectorXcd::Ones(3), -1.0), std::invalid_argument);
}

TEST(SurrogateExpProduct, KnownValues) {
  const auto f = surrogate_exp_product(0.0, 0.0);
  EXPECT_DOUBLE_EQ(f(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(f(1.0, 0.0), 2.0);
  EXPECT_LT(f(1.0, 0.0), std::exp(1.0));
}

TEST(SurrogateExpProduct, TightAndBounded) {
  auto rng = RandomStream::derive(4, "exp_product");
  int violations = 0;
  for (int i = 0; i < kSamples; ++i) {
    const double xh = 10.0 * (rng.uniform() - 0.5);
    const double yh = 10.0 * (rng.uniform() - 0.5);
    const auto f = surrogate_exp_product(xh, yh);
    EXPECT_NEAR(f(xh, yh), std::exp(xh + yh), 1e-9 * std::exp(xh + yh));
    const double x = 10.0 * (rng.uniform() - 0.5);
    const double y = 10.0 * (rng.uniform() - 0.5);
    if (f(x, y) > std::exp(x + y) * (1.0 + 1e-12)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

}  // namespace
}  // namespace irswpcn
