#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/quadrature.hpp"

namespace jdts {

// A parametrized forward-rate surface: value(tau, x) is the instantaneous
// forward rate at time-to-maturity tau when the state is x. Derivative and
// antiderivative evaluators are part of the contract because the consistency
// machinery consumes them directly; integral(0, x) and grad_integral(0, x)
// must be exactly zero.
class CurveFamily {
 public:
  virtual ~CurveFamily() = default;

  virtual std::size_t dim() const = 0;
  virtual const DomainBox& domain() const = 0;

  virtual double value(double tau, const Vec& x) const = 0;
  virtual double dtau(double tau, const Vec& x) const = 0;
  virtual Vec grad(double tau, const Vec& x) const = 0;
  virtual Mat hess(double tau, const Vec& x) const = 0;
  // integral(tau, x)   = int_0^tau value(u, x) du
  virtual double integral(double tau, const Vec& x) const = 0;
  // grad_integral(tau, x) = int_0^tau grad(u, x) du
  virtual Vec grad_integral(double tau, const Vec& x) const = 0;
};

// Curve with closed-form affine structure value = h0(tau) + sum_k hk(tau) x_k.
// Callers supply h and its antiderivatives H (H_k(0) = 0). Used as a
// hand-checkable reference; solver-produced affine families live elsewhere.
class AffineClosedFormCurve final : public CurveFamily {
 public:
  using TauFn = std::function<double(double)>;

  AffineClosedFormCurve(std::vector<TauFn> h, std::vector<TauFn> H, DomainBox box)
      : h_(std::move(h)), H_(std::move(H)), box_(std::move(box)) {
    if (h_.size() != H_.size() || h_.size() != box_.dim() + 1)
      throw InvalidInput("affine curve: need n+1 loadings and antiderivatives");
  }

  std::size_t dim() const override { return box_.dim(); }
  const DomainBox& domain() const override { return box_; }

  double value(double tau, const Vec& x) const override {
    double s = h_[0](tau);
    for (std::size_t k = 1; k < h_.size(); ++k)
      s += h_[k](tau) * x[static_cast<Eigen::Index>(k - 1)];
    return s;
  }

  double dtau(double tau, const Vec& x) const override {
    const double eps = 1e-6 * std::max(1.0, std::abs(tau));
    const double lo = std::max(0.0, tau - eps);
    return (value(tau + eps, x) - value(lo, x)) / (tau + eps - lo);
  }

  Vec grad(double tau, const Vec& x) const override {
    Vec g(static_cast<Eigen::Index>(dim()));
    (void)x;
    for (std::size_t k = 1; k < h_.size(); ++k)
      g[static_cast<Eigen::Index>(k - 1)] = h_[k](tau);
    return g;
  }

  Mat hess(double, const Vec&) const override {
    const auto n = static_cast<Eigen::Index>(dim());
    return Mat::Zero(n, n);
  }

  double integral(double tau, const Vec& x) const override {
    double s = H_[0](tau);
    for (std::size_t k = 1; k < H_.size(); ++k)
      s += H_[k](tau) * x[static_cast<Eigen::Index>(k - 1)];
    return s;
  }

  Vec grad_integral(double tau, const Vec& x) const override {
    Vec g(static_cast<Eigen::Index>(dim()));
    (void)x;
    for (std::size_t k = 1; k < H_.size(); ++k)
      g[static_cast<Eigen::Index>(k - 1)] = H_[k](tau);
    return g;
  }

 private:
  std::vector<TauFn> h_, H_;
  DomainBox box_;
};

// Fallback for curves given only as an evaluable value(tau, x): derivatives
// by central differences, antiderivatives by adaptive Simpson. Accuracy is
// limited by the difference steps (~1e-7 noise floor on gradients).
class NumericCurve final : public CurveFamily {
 public:
  using Fn = std::function<double(double, const Vec&)>;

  NumericCurve(Fn g, DomainBox box, double quad_tol = 1e-10)
      : g_(std::move(g)), box_(std::move(box)), quad_tol_(quad_tol) {
    if (!g_) throw InvalidInput("numeric curve: empty evaluator");
  }

  std::size_t dim() const override { return box_.dim(); }
  const DomainBox& domain() const override { return box_; }

  double value(double tau, const Vec& x) const override { return g_(tau, x); }

  double dtau(double tau, const Vec& x) const override {
    const double h = 1e-6 * std::max(1.0, std::abs(tau));
    if (tau >= h)
      return (g_(tau + h, x) - g_(tau - h, x)) / (2.0 * h);
    // one-sided second-order stencil keeps tau >= 0
    return (-3.0 * g_(tau, x) + 4.0 * g_(tau + h, x) - g_(tau + 2.0 * h, x)) /
           (2.0 * h);
  }

  Vec grad(double tau, const Vec& x) const override {
    const auto n = static_cast<Eigen::Index>(dim());
    Vec g(n);
    Vec xp = x, xm = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g[i] = (g_(tau, xp) - g_(tau, xm)) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  }

  Mat hess(double tau, const Vec& x) const override {
    const auto n = static_cast<Eigen::Index>(dim());
    Mat hmat(n, n);
    const double f0 = g_(tau, x);
    Vec xt = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double hi = 1e-4 * std::max(1.0, std::abs(x[i]));
      xt[i] = x[i] + hi;
      const double fp = g_(tau, xt);
      xt[i] = x[i] - hi;
      const double fm = g_(tau, xt);
      xt[i] = x[i];
      hmat(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double hj = 1e-4 * std::max(1.0, std::abs(x[j]));
        xt[i] = x[i] + hi;
        xt[j] = x[j] + hj;
        const double fpp = g_(tau, xt);
        xt[j] = x[j] - hj;
        const double fpm = g_(tau, xt);
        xt[i] = x[i] - hi;
        const double fmm = g_(tau, xt);
        xt[j] = x[j] + hj;
        const double fmp = g_(tau, xt);
        xt[i] = x[i];
        xt[j] = x[j];
        hmat(i, j) = hmat(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      }
    }
    return hmat;
  }

  double integral(double tau, const Vec& x) const override {
    if (tau == 0.0) return 0.0;
    return adaptive_simpson([&](double u) { return g_(u, x); }, 0.0, tau,
                            quad_tol_);
  }

  Vec grad_integral(double tau, const Vec& x) const override {
    const auto n = static_cast<Eigen::Index>(dim());
    Vec g = Vec::Zero(n);
    if (tau == 0.0) return g;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = adaptive_simpson(
                 [&](double u) { return g_(u, xp) - g_(u, xm); }, 0.0, tau,
                 quad_tol_ * h) /
             (2.0 * h);
    }
    return g;
  }

 private:
  Fn g_;
  DomainBox box_;
  double quad_tol_;
};

// Max discrepancy between a family's derivative/antiderivative evaluators and
// finite-difference/quadrature reconstructions from value() alone. Closed-form
// families should come back below ~1e-5.
inline double family_self_check(const CurveFamily& fam, double tau, const Vec& x) {
  double worst = 0.0;
  auto track = [&](double d) { worst = std::max(worst, std::abs(d)); };

  const double ht = 1e-6 * std::max(1.0, tau);
  if (tau >= ht)
    track(fam.dtau(tau, x) -
          (fam.value(tau + ht, x) - fam.value(tau - ht, x)) / (2.0 * ht));

  const auto n = static_cast<Eigen::Index>(fam.dim());
  const Vec g = fam.grad(tau, x);
  const Mat hmat = fam.hess(tau, x);
  track((hmat - hmat.transpose()).cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    track(g[i] - (fam.value(tau, xp) - fam.value(tau, xm)) / (2.0 * h));
    track(fam.grad_integral(tau, x)[i] -
          (fam.integral(tau, xp) - fam.integral(tau, xm)) / (2.0 * h));
  }

  track(fam.integral(0.0, x));
  track(fam.grad_integral(0.0, x).cwiseAbs().maxCoeff());
  if (tau > 0.0)
    track(fam.integral(tau, x) -
          adaptive_simpson([&](double u) { return fam.value(u, x); }, 0.0, tau,
                           1e-11));
  return worst;
}

}  // namespace jdts
