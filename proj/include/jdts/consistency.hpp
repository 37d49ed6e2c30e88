#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jdts/curve_family.hpp"
#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/jump_measure.hpp"
#include "jdts/model.hpp"

namespace jdts {

// Discounted curve move caused by a state jump of size xi:
//   [G(tau, x+xi) - G(tau, x)] * exp(-(IG(tau, x+xi) - IG(tau, x))).
inline double delta0(const CurveFamily& family, const Vec& x, double tau,
                     const Vec& xi) {
  if (tau < 0.0) throw InvalidInput("delta0: negative time to maturity");
  family.domain().require(x, "delta0");
  const Vec y = x + xi;
  family.domain().require(y, "delta0 (jumped state)");
  const double d = family.value(tau, y) - family.value(tau, x);
  if (d == 0.0) return 0.0;
  const double s = family.integral(tau, y) - family.integral(tau, x);
  const double es = std::exp(-s);
  // Suppression underflow: curve families integrate G into IG, so whenever
  // the difference d is astronomically large the exponent s outgrows log|d|;
  // with es below 1e-308 and |d| <= DBL_MAX the true product is under 1e-35.
  if (es == 0.0) return 0.0;
  return d * es;
}

// int delta0(x, tau, xi) Q(dxi), evaluated by the measure's quadrature.
inline double jump_integral(const CurveFamily& family, const JumpMeasure& Q,
                            const Vec& x, double tau, double tol) {
  if (Q.dim() != family.dim())
    throw InvalidInput("jump_integral: measure/family dimension mismatch");
  if (Q.is_dirac_zero()) return 0.0;
  try {
    return expect(
        Q, [&](const Vec& xi) { return delta0(family, x, tau, xi); }, tol);
  } catch (const DivergentIntegral& e) {
    throw RegularityError(
        std::string("jump integral diverges; the jump measure is too heavy "
                    "for this curve family: ") +
        e.what());
  } catch (const AccuracyError& e) {
    throw RegularityError(std::string("jump integral did not converge: ") +
                          e.what());
  }
}

// One evaluation of the drift condition, split into its five terms. The
// residual is stored as the exact floating-point sum of the terms.
struct ConsistencyResidual {
  double dtau_term = 0.0;       // -dG/dtau
  double drift_term = 0.0;      // sum_i dG/dx_i b_i
  double diffusion_term = 0.0;  // sum_ij a_ij d2G/dx_i dx_j
  double cross_term = 0.0;      // -2 sum_ij a_ij dG/dx_i Igrad_j
  double jump_term = 0.0;       // lambda int delta0 dQ
  double residual = 0.0;
};

// Residual of the drift condition at (tau, x): zero for every (tau, x) iff
// the model's short-rate dynamics reproduce the curve family exactly.
inline ConsistencyResidual consistency_residual(const JumpDiffusionModel& model,
                                                const CurveFamily& family,
                                                const Vec& x, double tau,
                                                double tol = 1e-10) {
  if (model.dim() != family.dim())
    throw InvalidInput("consistency_residual: model/family dimension mismatch");
  ConsistencyResidual out;
  out.dtau_term = -family.dtau(tau, x);
  const Vec g = family.grad(tau, x);
  const Mat hess = family.hess(tau, x);
  const Vec ig = family.grad_integral(tau, x);
  const Vec b = model.drift(x);
  const Mat a = model.a(x);
  out.drift_term = g.dot(b);
  out.diffusion_term = (a.array() * hess.array()).sum();
  out.cross_term = -2.0 * g.dot(a * ig);
  const double lam = model.intensity(x);
  out.jump_term =
      lam == 0.0 ? 0.0 : lam * jump_integral(family, model.jumps(), x, tau, tol);
  out.residual = out.dtau_term + out.drift_term + out.diffusion_term +
                 out.cross_term + out.jump_term;
  return out;
}

struct ResidualNode {
  double tau = 0.0;
  Vec x;
  ConsistencyResidual terms;
};

struct FailedNode {
  double tau = 0.0;
  Vec x;
  std::string what;
};

struct ResidualReport {
  std::vector<ResidualNode> nodes;
  std::vector<FailedNode> failures;
  double max_abs = 0.0;
  double rms = 0.0;

  bool consistent(double eps = 1e-6) const {
    return failures.empty() && max_abs < eps;
  }
};

inline std::vector<double> default_tau_grid() {
  return {0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0};
}

// Residual swept over a (tau, x) grid. Failing nodes are recorded, not fatal;
// aggregates cover the nodes that evaluated.
inline ResidualReport residual_report(const JumpDiffusionModel& model,
                                      const CurveFamily& family,
                                      std::vector<double> tau_grid = {},
                                      std::vector<Vec> x_points = {},
                                      double tol = 1e-10) {
  if (tau_grid.empty()) tau_grid = default_tau_grid();
  if (x_points.empty()) x_points = probe_points(family.domain(), 16);
  ResidualReport rep;
  double sumsq = 0.0;
  for (double tau : tau_grid) {
    for (const Vec& x : x_points) {
      try {
        ResidualNode node{tau, x, consistency_residual(model, family, x, tau, tol)};
        rep.max_abs = std::max(rep.max_abs, std::abs(node.terms.residual));
        sumsq += node.terms.residual * node.terms.residual;
        rep.nodes.push_back(std::move(node));
      } catch (const Error& e) {
        rep.failures.push_back({tau, x, e.what()});
      }
    }
  }
  if (!rep.nodes.empty())
    rep.rms = std::sqrt(sumsq / static_cast<double>(rep.nodes.size()));
  return rep;
}

struct RecoveredCoefficients {
  Mat a;                        // symmetric n-by-n diffusion table at x
  Vec b;                        // drift at x
  double lambda = 0.0;          // jump intensity at x (may be negative)
  double residual_norm = 0.0;   // least-squares misfit
  double condition = 0.0;       // design matrix conditioning
  bool rank_deficient = false;  // condition >= 1e10: solution is minimum-norm
};

// Recovers (a, b, lambda) at a fixed state x by regressing dG/dtau on the
// drift-condition columns across maturities. Each maturity contributes one
// row: columns dG/dx_i for b, then for each i <= j the symmetrized column
//   i == j:  d2G/dx_i^2 - 2 dG/dx_i Igrad_i
//   i  < j:  2 d2G/dx_i dx_j - 2 (dG/dx_i Igrad_j + dG/dx_j Igrad_i)
// and finally the jump integral column for lambda.
inline RecoveredCoefficients recover_coefficients(const CurveFamily& family,
                                                  const JumpMeasure& Q, const Vec& x,
                                                  const std::vector<double>& tau_samples,
                                                  double tol = 1e-10) {
  const auto n = static_cast<Eigen::Index>(family.dim());
  const Eigen::Index p = n + n * (n + 1) / 2 + 1;
  const auto rows = static_cast<Eigen::Index>(tau_samples.size());
  if (rows < p)
    throw InvalidInput("recover_coefficients: need at least one maturity per unknown");

  Mat design(rows, p);
  Vec y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double tau = tau_samples[static_cast<std::size_t>(r)];
    y[r] = family.dtau(tau, x);
    const Vec g = family.grad(tau, x);
    const Mat hess = family.hess(tau, x);
    const Vec ig = family.grad_integral(tau, x);
    design.row(r).head(n) = g.transpose();
    Eigen::Index col = n;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j, ++col)
        design(r, col) = i == j ? hess(i, i) - 2.0 * g[i] * ig[i]
                                : 2.0 * hess(i, j) -
                                      2.0 * (g[i] * ig[j] + g[j] * ig[i]);
    design(r, p - 1) = jump_integral(family, Q, x, tau, tol);
  }

  Eigen::JacobiSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  RecoveredCoefficients out;
  out.condition = sv.minCoeff() > 0.0
                      ? sv.maxCoeff() / sv.minCoeff()
                      : std::numeric_limits<double>::infinity();
  out.rank_deficient = !(out.condition < 1e10);
  svd.setThreshold(1e-12);  // small singular values drop out: minimum norm
  const Vec w = svd.solve(y);
  out.residual_norm = (design * w - y).norm();

  out.b = w.head(n);
  out.a = Mat(n, n);
  Eigen::Index col = n;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j, ++col) {
      out.a(i, j) = w[col];
      out.a(j, i) = w[col];
    }
  out.lambda = w[p - 1];
  return out;
}

struct RegularityCheck {
  bool finite = false;
  double bound = 0.0;  // largest absolute-moment estimate that converged
};

// Confirms the jump integral stays absolutely convergent on a log-spaced
// maturity grid up to tau_max. Any evaluation failure yields false.
inline RegularityCheck regularity_check(const CurveFamily& family,
                                        const JumpMeasure& Q, const Vec& x,
                                        double tau_max, double tol = 1e-8) {
  if (!(tau_max > 0.0)) throw InvalidInput("regularity_check: need tau_max > 0");
  RegularityCheck out;
  if (Q.is_dirac_zero()) {
    out.finite = true;
    return out;
  }
  for (int k = 7; k >= 0; --k) {
    const double tau = tau_max * std::pow(2.0, -k);
    try {
      const double m = expect(
          Q, [&](const Vec& xi) { return std::abs(delta0(family, x, tau, xi)); },
          tol);
      out.bound = std::max(out.bound, m);
    } catch (const Error&) {
      return out;  // finite stays false
    }
  }
  out.finite = true;
  return out;
}

}  // namespace jdts
