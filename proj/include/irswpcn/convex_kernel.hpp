// SPDX-License-Identifier: Apache-2.0
//
// Log-barrier interior-point solver for the small convex programs produced by
// every SCA iteration and by the rank-relaxed upper bound:
//
//   maximize   c^T x + sum_i w_i t_i log2(1 + s_i / (n_i t_i))
//   subject to a^T x + b >= 0,  a^T x + b == 0,
//              exp(x_v) <= a^T x + b,
//              x_re^2 + x_im^2 <= r^2,
//              beta * x_v^(-p) <= a^T x + b,
//              C + sum_v x_v B_v  is positive definite (Hermitian blocks).
//
// Complex unknowns are carried as (re, im) pairs of real variables.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace irswpcn::kernel {

using cplx = std::complex<double>;

struct LinearExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinearExpr& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
  LinearExpr& shift(double c) {
    constant += c;
    return *this;
  }
  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [i, c] : terms) v += c * x(i);
    return v;
  }
};

/// weight * t * log2(1 + s / (noise * t)); t > 0 and s > 0 are enforced.
struct PerspectiveTerm {
  int time = 0;
  int signal = 0;
  double noise = 1.0;
  double weight = 1.0;
};

/// exp(x[var]) <= bound(x)
struct ExpConstraint {
  int var = 0;
  LinearExpr bound;
};

/// x[re]^2 + x[im]^2 <= radius^2
struct DiskConstraint {
  int re = 0;
  int im = 0;
  double radius = 1.0;
};

/// beta * x[var]^(-power) <= bound(x), with x[var] > 0.
struct InversePowerConstraint {
  int var = 0;
  double beta = 0.0;
  double power = 1.0;
  LinearExpr bound;
};

/// x[var] * coef placed at (row, col) and its conjugate at (col, row).
/// Diagonal terms use the real part of coef.
struct HermitianTerm {
  int var = 0;
  int row = 0;
  int col = 0;
  cplx coef{1.0, 0.0};
};

/// constant + sum_terms x[var] * B_term must stay positive definite.
struct PsdConstraint {
  int dim = 0;
  Eigen::MatrixXcd constant;
  std::vector<HermitianTerm> terms;
};

struct ConvexSubproblem {
  int num_vars = 0;
  LinearExpr linear_objective;
  std::vector<PerspectiveTerm> perspective;
  std::vector<LinearExpr> inequalities;  // expr >= 0
  std::vector<LinearExpr> equalities;    // expr == 0
  std::vector<ExpConstraint> exponentials;
  std::vector<DiskConstraint> disks;
  std::vector<InversePowerConstraint> inverse_powers;
  std::vector<PsdConstraint> psd;

  int add_variables(int n) {
    const int first = num_vars;
    num_vars += n;
    return first;
  }

  /// Adds a block of n complex unknowns (re/im interleaved) with |z| <= 1.
  int add_complex_block(int n, bool unit_disk = true) {
    const int first = add_variables(2 * n);
    if (unit_disk) {
      for (int i = 0; i < n; ++i) disks.push_back({first + 2 * i, first + 2 * i + 1, 1.0});
    }
    return first;
  }

  double objective(const Eigen::VectorXd& x) const {
    double f = linear_objective.eval(x);
    for (const auto& p : perspective) {
      const double t = x(p.time);
      const double s = x(p.signal);
      if (t > 0.0 && s > 0.0) f += p.weight * t * std::log1p(s / (p.noise * t)) / std::numbers::ln2;
    }
    return f;
  }

  /// Largest constraint violation at x (<= 0 means feasible, < 0 strictly).
  double max_violation(const Eigen::VectorXd& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& e : inequalities) worst = std::max(worst, -e.eval(x));
    for (const auto& e : equalities) worst = std::max(worst, std::abs(e.eval(x)));
    for (const auto& c : exponentials) worst = std::max(worst, std::exp(x(c.var)) - c.bound.eval(x));
    for (const auto& d : disks) worst = std::max(worst, std::hypot(x(d.re), x(d.im)) - d.radius);
    for (const auto& c : inverse_powers) {
      if (!(x(c.var) > 0.0)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, c.beta * std::pow(x(c.var), -c.power) - c.bound.eval(x));
    }
    for (const auto& p : perspective) worst = std::max({worst, -x(p.time), -x(p.signal)});
    return worst;
  }
};

enum class SolverStatus { optimal, max_iterations, numerical_failure };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::max_iterations: return "max-iters";
    case SolverStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct SolverReport {
  SolverStatus status = SolverStatus::optimal;
  double objective = 0.0;
  int iterations = 0;  // Newton steps
  double gap = 0.0;    // barrier duality-gap bound m / t at exit
};

struct SolverOptions {
  double tol = 1e-8;
  double initial_weight = 1.0;
  double weight_factor = 10.0;
  int max_newton_steps = 800;
  double newton_tol = 1e-8;  // on lambda^2 / 2
};

struct SolveResult {
  Eigen::VectorXd point;
  SolverReport report;
};

class InfeasibleStartError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct SparseGrad {
  std::vector<std::pair<int, double>> entries;
  void from(const LinearExpr& e) { entries = e.terms; }
};

inline void add_outer(Eigen::MatrixXd& h, const std::vector<std::pair<int, double>>& g, double scale) {
  for (const auto& [i, gi] : g) {
    const double si = scale * gi;
    for (const auto& [j, gj] : g) h(i, j) += si * gj;
  }
}

inline void add_scaled(Eigen::VectorXd& v, const std::vector<std::pair<int, double>>& g, double scale) {
  for (const auto& [i, gi] : g) v(i) += scale * gi;
}

struct ExpandedEntry {
  int row;
  int col;
  cplx value;
};

/// Per-variable expansion of a Hermitian block into plain matrix entries.
struct PsdLayout {
  int dim = 0;
  Eigen::MatrixXcd constant;
  std::vector<int> vars;
  std::vector<std::vector<ExpandedEntry>> entries;

  explicit PsdLayout(const PsdConstraint& c) : dim(c.dim), constant(c.constant) {
    if (constant.size() == 0) constant = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<int> index_of;
    for (const auto& t : c.terms) {
      if (static_cast<int>(index_of.size()) <= t.var) index_of.resize(static_cast<std::size_t>(t.var) + 1, -1);
      int& slot = index_of[static_cast<std::size_t>(t.var)];
      if (slot < 0) {
        slot = static_cast<int>(vars.size());
        vars.push_back(t.var);
        entries.emplace_back();
      }
      auto& list = entries[static_cast<std::size_t>(slot)];
      if (t.row == t.col) {
        list.push_back({t.row, t.row, cplx(t.coef.real(), 0.0)});
      } else {
        list.push_back({t.row, t.col, t.coef});
        list.push_back({t.col, t.row, std::conj(t.coef)});
      }
    }
  }

  Eigen::MatrixXcd assemble(const Eigen::VectorXd& x) const {
    Eigen::MatrixXcd w = constant;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const double xi = x(vars[i]);
      for (const auto& e : entries[i]) w(e.row, e.col) += xi * e.value;
    }
    return w;
  }
};

class Barrier {
 public:
  explicit Barrier(const ConvexSubproblem& p) : p_(p) {
    std::set<int> pos;
    for (const auto& t : p.perspective) {
      pos.insert(t.time);
      pos.insert(t.signal);
    }
    positive_.assign(pos.begin(), pos.end());
    for (const auto& c : p.psd) psd_.emplace_back(c);
  }

  /// Number of barrier terms, counting each PSD block by its dimension.
  double weight_count() const {
    double m = static_cast<double>(p_.inequalities.size() + p_.exponentials.size() + p_.disks.size() +
                                   p_.inverse_powers.size() + positive_.size());
    for (const auto& b : psd_) m += b.dim;
    return m;
  }

  /// phi(x) = -tb * F(x) - sum log(slacks) - sum log det; nullopt outside the domain.
  std::optional<double> value(const Eigen::VectorXd& x, double tb) const {
    double b = 0.0;
    for (int i : positive_) {
      if (!(x(i) > 0.0)) return std::nullopt;
      b -= std::log(x(i));
    }
    for (const auto& e : p_.inequalities) {
      const double g = e.eval(x);
      if (!(g > 0.0)) return std::nullopt;
      b -= std::log(g);
    }
    for (const auto& c : p_.exponentials) {
      const double g = c.bound.eval(x) - std::exp(x(c.var));
      if (!(g > 0.0)) return std::nullopt;
      b -= std::log(g);
    }
    for (const auto& d : p_.disks) {
      const double g = d.radius * d.radius - x(d.re) * x(d.re) - x(d.im) * x(d.im);
      if (!(g > 0.0)) return std::nullopt;
      b -= std::log(g);
    }
    for (const auto& c : p_.inverse_powers) {
      const double xv = x(c.var);
      if (!(xv > 0.0)) return std::nullopt;
      const double g = c.bound.eval(x) - c.beta * std::pow(xv, -c.power);
      if (!(g > 0.0)) return std::nullopt;
      b -= std::log(g);
    }
    for (const auto& blk : psd_) {
      Eigen::LLT<Eigen::MatrixXcd> llt(blk.assemble(x));
      if (llt.info() != Eigen::Success) return std::nullopt;
      const auto& l = llt.matrixLLT();
      for (int i = 0; i < blk.dim; ++i) {
        const double d = l(i, i).real();
        if (!(d > 0.0)) return std::nullopt;
        b -= 2.0 * std::log(d);
      }
    }
    const double f = p_.objective(x);
    if (!std::isfinite(f) || !std::isfinite(b)) return std::nullopt;
    return -tb * f + b;
  }

  /// Gradient and Hessian of phi at a point inside the domain.
  void derivatives(const Eigen::VectorXd& x, double tb, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const int n = p_.num_vars;
    grad.setZero(n);
    hess.setZero(n, n);

    for (const auto& [i, c] : p_.linear_objective.terms) grad(i) -= tb * c;
    for (const auto& t : p_.perspective) {
      const double tt = x(t.time);
      const double s = x(t.signal);
      const double d = t.noise * tt + s;
      const double k = t.weight / std::numbers::ln2;
      // F = k t ln(1 + s/(n t))
      grad(t.time) -= tb * k * (std::log1p(s / (t.noise * tt)) - s / d);
      grad(t.signal) -= tb * k * tt / d;
      const double inv_d2 = 1.0 / (d * d);
      hess(t.time, t.time) += tb * k * s * s / tt * inv_d2;
      hess(t.signal, t.signal) += tb * k * tt * inv_d2;
      hess(t.time, t.signal) -= tb * k * s * inv_d2;
      hess(t.signal, t.time) -= tb * k * s * inv_d2;
    }

    for (int i : positive_) {
      grad(i) -= 1.0 / x(i);
      hess(i, i) += 1.0 / (x(i) * x(i));
    }
    for (const auto& e : p_.inequalities) {
      const double g = e.eval(x);
      add_scaled(grad, e.terms, -1.0 / g);
      add_outer(hess, e.terms, 1.0 / (g * g));
    }
    std::vector<std::pair<int, double>> scratch;
    for (const auto& c : p_.exponentials) {
      const double ex = std::exp(x(c.var));
      const double g = c.bound.eval(x) - ex;
      scratch = c.bound.terms;
      scratch.emplace_back(c.var, -ex);
      add_scaled(grad, scratch, -1.0 / g);
      add_outer(hess, scratch, 1.0 / (g * g));
      hess(c.var, c.var) += ex / g;
    }
    for (const auto& d : p_.disks) {
      const double a = x(d.re);
      const double b = x(d.im);
      const double g = d.radius * d.radius - a * a - b * b;
      scratch.assign({{d.re, -2.0 * a}, {d.im, -2.0 * b}});
      add_scaled(grad, scratch, -1.0 / g);
      add_outer(hess, scratch, 1.0 / (g * g));
      hess(d.re, d.re) += 2.0 / g;
      hess(d.im, d.im) += 2.0 / g;
    }
    for (const auto& c : p_.inverse_powers) {
      const double xv = x(c.var);
      const double g = c.bound.eval(x) - c.beta * std::pow(xv, -c.power);
      scratch = c.bound.terms;
      scratch.emplace_back(c.var, c.beta * c.power * std::pow(xv, -c.power - 1.0));
      add_scaled(grad, scratch, -1.0 / g);
      add_outer(hess, scratch, 1.0 / (g * g));
      hess(c.var, c.var) += c.beta * c.power * (c.power + 1.0) * std::pow(xv, -c.power - 2.0) / g;
    }
    for (const auto& blk : psd_) {
      Eigen::LLT<Eigen::MatrixXcd> llt(blk.assemble(x));
      const Eigen::MatrixXcd z = llt.solve(Eigen::MatrixXcd::Identity(blk.dim, blk.dim));
      const std::size_t nv = blk.vars.size();
      for (std::size_t i = 0; i < nv; ++i) {
        cplx tr = 0.0;
        for (const auto& e : blk.entries[i]) tr += e.value * z(e.col, e.row);
        grad(blk.vars[i]) -= tr.real();
      }
      // d^2(-log det W) = tr(Z B_i Z B_j) = sum a b Z(s,p) Z(q,r)
      for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = i; j < nv; ++j) {
          cplx acc = 0.0;
          for (const auto& ei : blk.entries[i]) {
            for (const auto& ej : blk.entries[j]) {
              acc += ei.value * ej.value * z(ej.col, ei.row) * z(ei.col, ej.row);
            }
          }
          const double v = acc.real();
          hess(blk.vars[i], blk.vars[j]) += v;
          if (i != j) hess(blk.vars[j], blk.vars[i]) += v;
        }
      }
    }
  }

 private:
  const ConvexSubproblem& p_;
  std::vector<int> positive_;
  std::vector<PsdLayout> psd_;
};

/// Newton step for min phi subject to eq * dx = 0. The Hessian is
/// symmetrically scaled to unit diagonal first; barrier Hessians near the
/// boundary span many orders of magnitude.
inline std::optional<Eigen::VectorXd> newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                                                       const Eigen::MatrixXd& eq) {
  const Eigen::Index n = hess.rows();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = hess(i, i);
    d(i) = h > 0.0 && std::isfinite(h) ? 1.0 / std::sqrt(h) : 1.0;
  }
  const Eigen::MatrixXd hs = d.asDiagonal() * hess * d.asDiagonal();
  const Eigen::VectorXd gs = d.cwiseProduct(grad);
  if (eq.rows() == 0) {
    double reg = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd h = hs;
      if (reg > 0.0) h.diagonal().array() += reg;
      Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        Eigen::VectorXd y = llt.solve(-gs);
        if (y.allFinite()) return Eigen::VectorXd(d.cwiseProduct(y));
      }
      reg = reg == 0.0 ? 1e-14 : reg * 100.0;
    }
    return std::nullopt;
  }
  const Eigen::Index m = eq.rows();
  const Eigen::MatrixXd as = eq * d.asDiagonal();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = hs;
  kkt.topRightCorner(n, m) = as.transpose();
  kkt.bottomLeftCorner(m, n) = as;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.head(n) = -gs;
  Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
  if (!sol.allFinite()) return std::nullopt;
  return Eigen::VectorXd(d.cwiseProduct(sol.head(n)));
}

}  // namespace detail

/// Solves the subproblem starting from a strictly feasible point. The
/// returned point is strictly feasible and its objective is never below the
/// start's.
inline SolveResult solve_subproblem(const ConvexSubproblem& p, const Eigen::VectorXd& start,
                                    const SolverOptions& opts = {}) {
  if (start.size() != p.num_vars) throw std::invalid_argument("solve_subproblem: start has wrong dimension");
  detail::Barrier barrier(p);
  if (!barrier.value(start, 1.0)) throw InfeasibleStartError("solve_subproblem: start is not strictly feasible");

  Eigen::MatrixXd eq(static_cast<Eigen::Index>(p.equalities.size()), p.num_vars);
  eq.setZero();
  for (std::size_t r = 0; r < p.equalities.size(); ++r) {
    const auto& e = p.equalities[r];
    if (std::abs(e.eval(start)) > 1e-9) throw InfeasibleStartError("solve_subproblem: start violates an equality");
    for (const auto& [i, c] : e.terms) eq(static_cast<Eigen::Index>(r), i) += c;
  }

  const double m = std::max(1.0, barrier.weight_count());
  double tb = opts.initial_weight;
  Eigen::VectorXd x = start;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  SolverReport report;
  bool failed = false;
  bool exhausted = false;

  while (true) {
    // Centering.
    for (;;) {
      if (report.iterations >= opts.max_newton_steps) {
        exhausted = true;
        break;
      }
      barrier.derivatives(x, tb, grad, hess);
      const auto dir = detail::newton_direction(hess, grad, eq);
      if (!dir) {
        failed = true;
        break;
      }
      const double decrement = -grad.dot(*dir);
      ++report.iterations;
      if (!(decrement >= 0.0) || decrement / 2.0 <= opts.newton_tol) break;
      const double phi0 = *barrier.value(x, tb);
      double step = 1.0;
      bool accepted = false;
      bool at_precision = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Eigen::VectorXd cand = x + step * *dir;
        const auto phi = barrier.value(cand, tb);
        if (phi && *phi <= phi0 - 0.25 * step * decrement) {
          x = cand;
          accepted = true;
          // Decrease lost in the rounding of phi: no further progress is measurable.
          at_precision = phi0 - *phi <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(phi0);
          break;
        }
        step *= 0.5;
      }
      if (at_precision) break;
      if (!accepted) break;  // phi is flat to rounding: centered as well as it can be
    }
    if (failed || exhausted) break;
    if (m / tb <= opts.tol) break;
    tb *= opts.weight_factor;
  }

  report.gap = m / tb;
  if (failed) {
    report.status = SolverStatus::numerical_failure;
  } else if (exhausted) {
    report.status = SolverStatus::max_iterations;
  } else {
    report.status = SolverStatus::optimal;
  }
  if (!x.allFinite()) {
    x = start;
    report.status = SolverStatus::numerical_failure;
  }
  if (p.objective(x) < p.objective(start)) x = start;
  report.objective = p.objective(x);
  return {x, report};
}

inline SolveResult solve_subproblem(const ConvexSubproblem& p, const Eigen::VectorXd& start, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return solve_subproblem(p, start, opts);
}

}  // namespace irswpcn::kernel
