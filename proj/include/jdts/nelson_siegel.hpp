#pragma once

#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jdts/consistency.hpp"
#include "jdts/curve_family.hpp"
#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/jump_measure.hpp"
#include "jdts/model.hpp"

namespace jdts {

// Four-factor exponential-decay curve state: level, short-end offset, hump
// slope, and a strictly positive decay rate.
struct NSState {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
  double x4 = 0.0;

  Vec vec() const {
    Vec v(4);
    v << x1, x2, x3, x4;
    return v;
  }

  static NSState from_vec(const Vec& v) {
    if (v.size() != 4) throw InvalidInput("curve state: need four components");
    return {v[0], v[1], v[2], v[3]};
  }
};

namespace detail {
inline void ns_check(const NSState& s) {
  if (!(s.x4 > 0.0))
    throw DomainViolation("curve state: decay rate must be strictly positive");
}

// (1 - e^{-s tau}) / s and friends, stable against cancellation at small s*tau
inline double ns_F1(double s, double tau) { return -std::expm1(-s * tau) / s; }

inline double ns_F2(double s, double tau) {
  const double st = s * tau;
  return (-std::expm1(-st) - st * std::exp(-st)) / (s * s);
}

inline double ns_F3(double s, double tau) {
  const double st = s * tau;
  return (-2.0 * std::expm1(-st) - st * (2.0 + st) * std::exp(-st)) / (s * s * s);
}
}  // namespace detail

inline double ns_G(const NSState& s, double tau) {
  detail::ns_check(s);
  if (tau < 0.0) throw InvalidInput("ns_G: negative time to maturity");
  return s.x1 + (s.x2 + s.x3 * tau) * std::exp(-s.x4 * tau);
}

inline double ns_dtau(const NSState& s, double tau) {
  detail::ns_check(s);
  return (s.x3 - s.x4 * s.x2 - s.x3 * s.x4 * tau) * std::exp(-s.x4 * tau);
}

inline Vec ns_grad(const NSState& s, double tau) {
  detail::ns_check(s);
  const double e = std::exp(-s.x4 * tau);
  Vec g(4);
  g << 1.0, e, tau * e, -tau * (s.x2 + s.x3 * tau) * e;
  return g;
}

inline Mat ns_hess(const NSState& s, double tau) {
  detail::ns_check(s);
  const double e = std::exp(-s.x4 * tau);
  Mat h = Mat::Zero(4, 4);
  h(1, 3) = h(3, 1) = -tau * e;
  h(2, 3) = h(3, 2) = -tau * tau * e;
  h(3, 3) = tau * tau * (s.x2 + s.x3 * tau) * e;
  return h;
}

inline double ns_integral(const NSState& s, double tau) {
  detail::ns_check(s);
  return s.x1 * tau + s.x2 * detail::ns_F1(s.x4, tau) +
         s.x3 * detail::ns_F2(s.x4, tau);
}

inline Vec ns_grad_integral(const NSState& s, double tau) {
  detail::ns_check(s);
  const double f2 = detail::ns_F2(s.x4, tau);
  Vec g(4);
  g << tau, detail::ns_F1(s.x4, tau), f2,
      -s.x2 * f2 - s.x3 * detail::ns_F3(s.x4, tau);
  return g;
}

// Exponent of the discounted jump factor: -int_0^tau [G(u, x+xi) - G(u, x)] du
// in closed form. Requires the jumped decay rate to stay positive.
inline double ns_log_f(const NSState& s, const Vec& xi, double tau) {
  detail::ns_check(s);
  if (xi.size() != 4) throw InvalidInput("ns_log_f: jump must have four components");
  const double beta = s.x4 + xi[3];
  if (!(beta > 0.0))
    throw DomainViolation("ns_log_f: jumped decay rate must stay positive");
  return -xi[0] * tau - (s.x2 + xi[1]) * detail::ns_F1(beta, tau) -
         (s.x3 + xi[2]) * detail::ns_F2(beta, tau) +
         s.x2 * detail::ns_F1(s.x4, tau) + s.x3 * detail::ns_F2(s.x4, tau);
}

// Discounted curve move under a state jump, specialized closed form.
inline double ns_delta0(const NSState& s, const Vec& xi, double tau) {
  const double lf = ns_log_f(s, xi, tau);
  const double d = ns_G(NSState{s.x1 + xi[0], s.x2 + xi[1], s.x3 + xi[2],
                                s.x4 + xi[3]},
                        tau) -
                   ns_G(s, tau);
  if (d == 0.0) return 0.0;
  const double f = std::exp(lf);
  if (f == 0.0) return 0.0;  // suppression underflow, as in the generic form
  return d * f;
}

// Coefficients of the drift-condition bands: the non-jump side collapses to
//   (q0_0 + q0_1 t) + (sum_i q1_i t^i) e^{-x4 t} + (sum_i q2_i t^i) e^{-2 x4 t}.
// qB_i multiplies tau^i inside the e^{-B x4 tau} band.
struct NSQCoefficients {
  double q0_0 = 0.0, q0_1 = 0.0;
  double q1_0 = 0.0, q1_1 = 0.0, q1_2 = 0.0, q1_3 = 0.0;
  double q2_0 = 0.0, q2_1 = 0.0, q2_2 = 0.0, q2_3 = 0.0, q2_4 = 0.0;
  double x4 = 0.0;  // decay rate of the state the coefficients belong to

  double band0(double tau) const { return q0_0 + q0_1 * tau; }
  double band1(double tau) const {
    return q1_0 + tau * (q1_1 + tau * (q1_2 + tau * q1_3));
  }
  double band2(double tau) const {
    return q2_0 + tau * (q2_1 + tau * (q2_2 + tau * (q2_3 + tau * q2_4)));
  }
  double value(double tau) const {
    const double e = std::exp(-x4 * tau);
    return band0(tau) + e * (band1(tau) + e * band2(tau));
  }

  Vec flat() const {
    Vec v(11);
    v << q0_0, q0_1, q1_0, q1_1, q1_2, q1_3, q2_0, q2_1, q2_2, q2_3, q2_4;
    return v;
  }

  static const std::array<const char*, 11>& names() {
    static const std::array<const char*, 11> n{"q0_0", "q0_1", "q1_0", "q1_1",
                                               "q1_2", "q1_3", "q2_0", "q2_1",
                                               "q2_2", "q2_3", "q2_4"};
    return n;
  }
};

namespace detail {
inline void ns_check_tables(const Mat& a, const Vec& b) {
  if (a.rows() != 4 || a.cols() != 4 || b.size() != 4)
    throw InvalidInput("band coefficients: need a 4x4 diffusion table and a 4-vector drift");
}
}  // namespace detail

// Band coefficients re-derived from the closed-form curve calculus; these are
// the authoritative values validated against the directly evaluated left side.
inline NSQCoefficients ns_q_verified(const NSState& st, const Mat& a, const Vec& b) {
  detail::ns_check(st);
  detail::ns_check_tables(a, b);
  const double x2 = st.x2, x3 = st.x3, s = st.x4;
  const double s2 = s * s, s3 = s2 * s;
  NSQCoefficients q;
  q.x4 = s;

  q.q0_0 = 2.0 * a(0, 1) / s + 2.0 * a(0, 2) / s2 - 2.0 * a(0, 3) * x2 / s2 -
           4.0 * a(0, 3) * x3 / s3 - b[0];
  q.q0_1 = 2.0 * a(0, 0);

  q.q1_0 = -2.0 * a(0, 1) / s - 2.0 * a(0, 2) / s2 + 2.0 * a(0, 3) * x2 / s2 +
           4.0 * a(0, 3) * x3 / s3 + 2.0 * a(1, 1) / s + 2.0 * a(1, 2) / s2 -
           2.0 * a(1, 3) * x2 / s2 - 4.0 * a(1, 3) * x3 / s3 - b[1] - x2 * s + x3;
  q.q1_1 = 2.0 * a(0, 1) - 2.0 * a(0, 2) / s + 2.0 * a(0, 3) * x2 / s +
           4.0 * a(0, 3) * x3 / s2 + 2.0 * a(1, 2) / s - 2.0 * a(1, 3) * x2 / s +
           2.0 * a(1, 3) + 2.0 * a(2, 2) / s2 - 4.0 * a(2, 3) * x2 / s2 -
           4.0 * a(2, 3) * x3 / s3 + 2.0 * a(3, 3) * x2 * x2 / s2 +
           4.0 * a(3, 3) * x2 * x3 / s3 - b[2] + b[3] * x2 - x3 * s;
  q.q1_2 = 2.0 * a(0, 2) - 2.0 * a(0, 3) * x2 + 2.0 * a(0, 3) * x3 / s -
           2.0 * a(1, 3) * x3 / s - 2.0 * a(2, 3) * x3 / s2 + 2.0 * a(2, 3) +
           2.0 * a(3, 3) * x2 * x3 / s2 - a(3, 3) * x2 +
           4.0 * a(3, 3) * x3 * x3 / s3 + b[3] * x3;
  q.q1_3 = -x3 * (2.0 * a(0, 3) + a(3, 3));

  q.q2_0 = 2.0 * (-a(1, 1) * s2 - a(1, 2) * s + a(1, 3) * x2 * s +
                  2.0 * a(1, 3) * x3) /
           s3;
  q.q2_1 = 2.0 *
           (-2.0 * a(1, 2) * s2 + 2.0 * a(1, 3) * x2 * s2 +
            2.0 * a(1, 3) * x3 * s - a(2, 2) * s + 2.0 * a(2, 3) * x2 * s +
            2.0 * a(2, 3) * x3 - a(3, 3) * x2 * x2 * s -
            2.0 * a(3, 3) * x2 * x3) /
           s3;
  q.q2_2 = 4.0 * a(1, 3) * x3 / s - 2.0 * a(2, 2) / s + 4.0 * a(2, 3) * x2 / s +
           6.0 * a(2, 3) * x3 / s2 - 2.0 * a(3, 3) * x2 * x2 / s -
           6.0 * a(3, 3) * x2 * x3 / s2 - 4.0 * a(3, 3) * x3 * x3 / s3;
  q.q2_3 = 4.0 * x3 * (a(2, 3) * s - a(3, 3) * x2 * s - a(3, 3) * x3) / s2;
  q.q2_4 = -2.0 * a(3, 3) * x3 * x3 / s;
  return q;
}

// Band coefficients exactly as printed in the source derivation, kept for the
// discrepancy report. Seven of the eleven differ from the verified set.
inline NSQCoefficients ns_q_paper(const NSState& st, const Mat& a, const Vec& b) {
  detail::ns_check(st);
  detail::ns_check_tables(a, b);
  const double x2 = st.x2, x3 = st.x3, s = st.x4;
  const double s2 = s * s, s3 = s2 * s;
  NSQCoefficients q;
  q.x4 = s;

  q.q0_0 = -b[0] + 2.0 * a(0, 1) / s + 2.0 * a(0, 2) / s2 - 2.0 * x2 / s -
           4.0 * a(0, 3) * x3 / s3;
  q.q0_1 = 2.0 * a(0, 0);

  q.q1_0 = -b[1] - x2 * s + x3 + 2.0 * a(1, 1) / s - 2.0 * a(0, 1) / s -
           2.0 * a(1, 3) * x2 / s2 - 2.0 * a(1, 3) * x3 / s3 -
           2.0 * a(0, 2) / s2 + 2.0 * a(0, 3) * x2 / s2 +
           4.0 * a(0, 3) * x3 / s3 + 2.0 * a(1, 2) / s2;
  q.q1_1 = -b[2] + b[3] * x2 - x3 * s + 2.0 * a(0, 1) + 2.0 * a(1, 3) -
           2.0 * a(0, 2) / s + 2.0 * a(2, 2) / s2 + 4.0 * a(2, 3) * x2 / s2 +
           2.0 * a(2, 3) * x3 / s2 + 2.0 * a(3, 3) * x2 * x2 / s2 +
           4.0 * a(3, 3) * x2 * x3 / s3 + 2.0 * a(0, 3) * x2 / s +
           4.0 * a(0, 3) * x3 / s2 + 2.0 * a(1, 2) / s2 - 2.0 * a(1, 3) * x2 / s;
  q.q1_2 = b[3] * x3 - a(3, 3) * x2 + 2.0 * a(0, 2) + 2.0 * a(2, 3) -
           2.0 * a(0, 3) * x2 - 2.0 * a(1, 3) * x3 / s - 2.0 * a(2, 3) * x3 / s2 +
           2.0 * a(3, 3) * x2 * x3 / s2 + 4.0 * a(3, 3) * x3 * x3 / s3 +
           2.0 * a(0, 3) * x3 / s;
  q.q1_3 = -a(3, 3) * x3 - 2.0 * a(0, 3) * x3;

  q.q2_0 = -2.0 * a(1, 1) / s - 2.0 * a(1, 2) / s2 + 2.0 * a(1, 3) * x2 / s +
           4.0 * a(1, 3) * x3 / s3;
  q.q2_1 = -4.0 * a(1, 2) / s + 4.0 * a(1, 3) * x2 / s + 4.0 * a(1, 3) * x3 / s2 -
           2.0 * a(2, 2) / s2 - 4.0 * a(2, 3) * x2 / s2 -
           4.0 * a(2, 3) * x3 / s3 - 2.0 * a(3, 3) * x2 * x2 / s3 -
           4.0 * a(3, 3) * x2 * x3 / s3;
  q.q2_2 = 4.0 * a(1, 3) * x3 / s - 2.0 * a(2, 2) / s - 4.0 * a(2, 3) * x2 / s -
           6.0 * a(2, 3) * x3 / s2 - 2.0 * a(3, 3) * x2 * x2 / s -
           4.0 * a(3, 3) * x2 * x3 / s2 - 2.0 * a(3, 3) * x2 * x3 / s -
           4.0 * a(3, 3) * x3 * x3 / s3;
  q.q2_3 = -4.0 * a(2, 3) * x3 / s - 4.0 * a(3, 3) * x2 * x3 / s -
           4.0 * a(3, 3) * x3 * x3 / s2;
  q.q2_4 = -2.0 * a(3, 3) * x3 * x3 / s;
  return q;
}

struct NSQDiscrepancy {
  std::string name;
  double paper = 0.0;
  double verified = 0.0;
  double abs_diff = 0.0;
};

inline std::vector<NSQDiscrepancy> ns_q_discrepancies(const NSState& st,
                                                      const Mat& a, const Vec& b) {
  const Vec p = ns_q_paper(st, a, b).flat();
  const Vec v = ns_q_verified(st, a, b).flat();
  std::vector<NSQDiscrepancy> out;
  for (std::size_t i = 0; i < NSQCoefficients::names().size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out.push_back({NSQCoefficients::names()[i], p[idx], v[idx],
                   std::abs(p[idx] - v[idx])});
  }
  return out;
}

// Non-jump side of the drift condition with the cross term moved over:
//   dG/dtau - <grad G, b> - <a, Hess G> + 2 grad G^T a Igrad.
// Equal to the band polynomial of ns_q_verified for every tau.
inline double ns_direct_lhs(const NSState& st, const Mat& a, const Vec& b,
                            double tau) {
  detail::ns_check_tables(a, b);
  const Vec g = ns_grad(st, tau);
  const Mat h = ns_hess(st, tau);
  const Vec ig = ns_grad_integral(st, tau);
  return ns_dtau(st, tau) - g.dot(b) - (a.array() * h.array()).sum() +
         2.0 * g.dot(a * ig);
}

// Drift that makes the diffusion-free, jump-free dynamics reproduce the curve:
// solves the linear system forcing every verified band coefficient to zero.
inline Vec ns_fitted_drift(const NSState& st) {
  detail::ns_check(st);
  const Mat a0 = Mat::Zero(4, 4);
  const Vec r = ns_q_verified(st, a0, Vec::Zero(4)).flat();
  Mat m(11, 4);
  for (Eigen::Index j = 0; j < 4; ++j)
    m.col(j) = ns_q_verified(st, a0, Vec::Unit(4, j)).flat() - r;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve((-r).eval());
}

// Closed-form curve family over states (x1, x2, x3, x4 > x4_min).
class NelsonSiegelCurve final : public CurveFamily {
 public:
  explicit NelsonSiegelCurve(double x4_min = 1e-6)
      : box_(make_box(x4_min)) {
    if (!(x4_min > 0.0))
      throw InvalidInput("curve family: decay-rate floor must be positive");
  }

  std::size_t dim() const override { return 4; }
  const DomainBox& domain() const override { return box_; }

  double value(double tau, const Vec& x) const override {
    return ns_G(NSState::from_vec(x), tau);
  }
  double dtau(double tau, const Vec& x) const override {
    return ns_dtau(NSState::from_vec(x), tau);
  }
  Vec grad(double tau, const Vec& x) const override {
    return ns_grad(NSState::from_vec(x), tau);
  }
  Mat hess(double tau, const Vec& x) const override {
    return ns_hess(NSState::from_vec(x), tau);
  }
  double integral(double tau, const Vec& x) const override {
    return ns_integral(NSState::from_vec(x), tau);
  }
  Vec grad_integral(double tau, const Vec& x) const override {
    return ns_grad_integral(NSState::from_vec(x), tau);
  }

 private:
  static DomainBox make_box(double x4_min) {
    const double inf = std::numeric_limits<double>::infinity();
    Vec lo(4), hi(4);
    lo << -inf, -inf, -inf, x4_min;
    hi << inf, inf, inf, inf;
    return DomainBox{lo, hi};
  }
  DomainBox box_;
};

// Full drift-condition residual for this family: directly evaluated non-jump
// side minus the intensity-weighted jump integral. The jump measure must not
// push the decay rate down.
inline double ns_consistency_residual(const JumpDiffusionModel& model,
                                      const NSState& st, double tau,
                                      double tol = 1e-10) {
  detail::ns_check(st);
  if (model.dim() != 4)
    throw InvalidInput("ns_consistency_residual: model must have four state factors");
  if (!support_nonnegative(model.jumps(), 3))
    throw InvalidInput(
        "ns_consistency_residual: jump measure must keep the decay rate "
        "from falling (no mass on negative fourth coordinate)");
  const Vec x = st.vec();
  const double lhs = ns_direct_lhs(st, model.a(x), model.drift(x), tau);
  const double lam = model.intensity(x);
  if (lam == 0.0 || model.jumps().is_dirac_zero()) return lhs;
  double jump = 0.0;
  try {
    jump = expect(
        model.jumps(), [&](const Vec& xi) { return ns_delta0(st, xi, tau); }, tol);
  } catch (const DivergentIntegral& e) {
    throw RegularityError(std::string("jump integral diverges for this curve: ") +
                          e.what());
  }
  return lhs - lam * jump;
}

struct NSRegularity {
  bool ok = false;
  double bound = 0.0;  // largest converged probe value
  std::optional<std::pair<double, double>> failed_probe;
};

// Moment condition on the jump measure: (1 + |xi_4|^3) e^{-r2 xi2 - r3 xi3}
// must integrate for every probed (r2, r3) >= 0. Coordinates are independent
// under every supported measure, so the transform and cubic-moment factors
// are checked separately.
inline NSRegularity ns_regularity_check(const JumpMeasure& Q,
                                        const std::vector<std::pair<double, double>>& probes,
                                        double tol = 1e-9) {
  if (Q.dim() != 4) throw InvalidInput("ns_regularity_check: measure must be four-dimensional");
  if (probes.empty()) throw InvalidInput("ns_regularity_check: need at least one probe");
  NSRegularity out;
  double m4 = 0.0;
  try {
    m4 = expect_marginal(Q, 3, [](double t) { return std::abs(t) * t * t; }, tol);
  } catch (const Error&) {
    out.failed_probe = probes.front();
    return out;
  }
  for (const auto& [r2, r3] : probes) {
    if (r2 < 0.0 || r3 < 0.0)
      throw InvalidInput("ns_regularity_check: probes must be non-negative");
    Vec v = Vec::Zero(4);
    v[1] = r2;
    v[2] = r3;
    try {
      const double transform = laplace(Q, v);
      out.bound = std::max(out.bound, transform * (1.0 + m4));
    } catch (const Error&) {
      out.failed_probe = {r2, r3};
      return out;
    }
  }
  out.ok = true;
  return out;
}

struct NSScanNode {
  NSState state;
  double tau = 0.0;
  double residual = 0.0;
};

struct NSScanReport {
  double max_residual = 0.0;
  bool trivial_dynamics = false;  // a = 0 on grid, and no effective jumps
  bool consistent = false;
  std::vector<NSScanNode> nodes;

  const char* verdict() const { return consistent ? "consistent" : "inconsistent"; }
};

// Sweeps the residual over a state/maturity grid. The impossibility result
// predicts: consistent verdicts occur only for trivial dynamics.
inline NSScanReport ns_impossibility_scan(const JumpDiffusionModel& model,
                                          const std::vector<NSState>& states,
                                          const std::vector<double>& tau_grid,
                                          double tol = 1e-6) {
  if (states.empty() || tau_grid.empty())
    throw InvalidInput("ns_impossibility_scan: empty grid");
  NSScanReport rep;
  bool a_zero = true;
  bool lam_zero = true;
  for (const auto& st : states) {
    const Vec x = st.vec();
    if (model.a(x).cwiseAbs().maxCoeff() > 1e-12) a_zero = false;
    if (std::abs(model.intensity(x)) > 1e-12) lam_zero = false;
    for (double tau : tau_grid) {
      const double r = ns_consistency_residual(model, st, tau);
      rep.max_residual = std::max(rep.max_residual, std::abs(r));
      rep.nodes.push_back({st, tau, r});
    }
  }
  rep.trivial_dynamics = a_zero && (lam_zero || model.jumps().is_dirac_zero());
  rep.consistent = rep.max_residual < tol;
  return rep;
}

}  // namespace jdts
