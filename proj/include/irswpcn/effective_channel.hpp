// SPDX-License-Identifier: Apache-2.0
//
// Cascaded-channel arithmetic: effective gains |h_d + q^H v|^2, the closed-form
// coherent phase alignment and unit-modulus projection.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace irswpcn {

using cplx = std::complex<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kUnitModulusTol = 1e-9;

/// A phase-shift vector with unit-modulus entries. Augmented vectors carry an
/// extra trailing entry (the direct-path slot) which is exactly 1.
class PhaseVector {
 public:
  enum class Kind { bare, augmented };

  PhaseVector() = default;

  static PhaseVector bare(Eigen::VectorXcd v) { return PhaseVector(std::move(v), Kind::bare); }
  static PhaseVector augmented(Eigen::VectorXcd v) { return PhaseVector(std::move(v), Kind::augmented); }
  static PhaseVector ones(Eigen::Index n) { return bare(Eigen::VectorXcd::Ones(n)); }

  Kind kind() const { return kind_; }
  bool is_augmented() const { return kind_ == Kind::augmented; }
  const Eigen::VectorXcd& values() const { return v_; }
  Eigen::Index size() const { return v_.size(); }
  /// Number of IRS elements (excludes the augmented slot).
  Eigen::Index elements() const { return is_augmented() ? v_.size() - 1 : v_.size(); }

  /// The IRS part only.
  PhaseVector as_bare() const { return is_augmented() ? bare(v_.head(v_.size() - 1)) : *this; }
  PhaseVector as_augmented() const {
    if (is_augmented()) return *this;
    Eigen::VectorXcd out(v_.size() + 1);
    out.head(v_.size()) = v_;
    out(v_.size()) = 1.0;
    return augmented(std::move(out));
  }

  friend bool operator==(const PhaseVector& a, const PhaseVector& b) { return a.kind_ == b.kind_ && a.v_ == b.v_; }

 private:
  PhaseVector(Eigen::VectorXcd v, Kind kind) : v_(std::move(v)), kind_(kind) {
    for (Eigen::Index n = 0; n < v_.size(); ++n) {
      if (!(std::abs(std::abs(v_(n)) - 1.0) <= kUnitModulusTol)) {
        throw std::invalid_argument("PhaseVector: entry " + std::to_string(n) + " is not unit-modulus");
      }
    }
    if (kind_ == Kind::augmented && (v_.size() == 0 || v_(v_.size() - 1) != cplx(1.0, 0.0))) {
      throw std::invalid_argument("PhaseVector: augmented vector must end with exactly 1");
    }
  }

  Eigen::VectorXcd v_;
  Kind kind_ = Kind::bare;
};

/// |h_d + q^H v|^2 for a bare v (length N), or |q_bar^H v| for an augmented one
/// when `q` is passed with N entries and v has N+1 (the trailing slot multiplies 1).
inline double effective_gain(cplx h_d, const Eigen::VectorXcd& q, const PhaseVector& v) {
  const Eigen::VectorXcd& vals = v.values();
  if (q.size() != v.elements()) {
    throw DimensionError("effective_gain: channel has " + std::to_string(q.size()) + " entries, phase vector " +
                         std::to_string(v.elements()));
  }
  const cplx reflected = q.dot(vals.head(q.size()));
  return std::norm(h_d + reflected);
}

/// |q_bar^H v|^2 for an arbitrary (possibly relaxed) augmented point.
inline double augmented_gain(const Eigen::VectorXcd& q_bar, const Eigen::VectorXcd& v) {
  if (q_bar.size() != v.size()) throw DimensionError("augmented_gain: dimension mismatch");
  return std::norm(q_bar.dot(v));
}

struct Alignment {
  PhaseVector phases;
  double gain = 0.0;
};

/// Coherent alignment of every reflected path with the direct one:
/// v_n = exp(j(arg h_d - arg conj(q_n))). Returns the vector and its gain
/// (|h_d| + sum |q_n|)^2.
inline Alignment align_phases(cplx h_d, const Eigen::VectorXcd& q) {
  const double ref = std::arg(h_d);  // arg(0) == 0
  Eigen::VectorXcd v(q.size());
  double amplitude = std::abs(h_d);
  for (Eigen::Index n = 0; n < q.size(); ++n) {
    v(n) = q(n) == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : std::polar(1.0, ref - std::arg(std::conj(q(n))));
    amplitude += std::abs(q(n));
  }
  return {PhaseVector::bare(std::move(v)), amplitude * amplitude};
}

/// Entrywise v_n / |v_n|. Augmented inputs are first rotated so the trailing
/// entry is real positive, which makes it exactly 1 after projection. Zero
/// entries map to phase 0 and are counted in `zero_entries` when given.
inline PhaseVector project_unit_modulus(const Eigen::VectorXcd& v, PhaseVector::Kind kind,
                                        std::size_t* zero_entries = nullptr) {
  Eigen::VectorXcd rotated = v;
  if (kind == PhaseVector::Kind::augmented) {
    if (v.size() == 0) throw DimensionError("project_unit_modulus: empty augmented vector");
    const cplx last = v(v.size() - 1);
    if (std::abs(last) > 0.0) rotated *= std::polar(1.0, -std::arg(last));
  }
  std::size_t zeros = 0;
  for (Eigen::Index n = 0; n < rotated.size(); ++n) {
    const double mag = std::abs(rotated(n));
    if (mag > 0.0 && std::isfinite(mag)) {
      rotated(n) /= mag;
      // Renormalize once more so the modulus is 1 to the last ulp.
      rotated(n) /= std::abs(rotated(n));
    } else {
      rotated(n) = 1.0;
      ++zeros;
    }
  }
  if (kind == PhaseVector::Kind::augmented) rotated(rotated.size() - 1) = 1.0;
  if (zero_entries != nullptr) *zero_entries += zeros;
  return kind == PhaseVector::Kind::augmented ? PhaseVector::augmented(std::move(rotated))
                                              : PhaseVector::bare(std::move(rotated));
}

}  // namespace irswpcn
