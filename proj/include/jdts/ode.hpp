#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "jdts/domain.hpp"
#include "jdts/errors.hpp"

namespace jdts {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.0;        // 0 = unrestricted
  double fixed_step = 0.0;      // >0 disables adaptivity (step-doubling studies)
  double explosion_limit = 1e8;
  long max_steps = 2'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  double max_scaled_error = 0.0;  // of accepted steps; <= 1 by construction
};

// Nodes of an adaptive solve plus the derivative at each node; evaluation
// between nodes is cubic Hermite, which matches the integrator's 5th-order
// accuracy only if steps stay moderate (interpolation error ~ h^4).
class DenseSolution {
 public:
  DenseSolution(std::vector<double> t, std::vector<Vec> y, std::vector<Vec> f)
      : t_(std::move(t)), y_(std::move(y)), f_(std::move(f)) {}

  double t_max() const { return t_.back(); }
  std::size_t nodes() const { return t_.size(); }
  double node_t(std::size_t i) const { return t_[i]; }
  const Vec& node_y(std::size_t i) const { return y_[i]; }
  const Vec& node_f(std::size_t i) const { return f_[i]; }

  Vec eval(double t) const { return interp(t, false); }
  Vec deriv(double t) const { return interp(t, true); }

 private:
  Vec interp(double t, bool want_deriv) const {
    if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
      throw InvalidInput("ode solution: evaluation outside the solved range");
    t = std::clamp(t, t_.front(), t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - t_.begin());
    if (j == 0) j = 1;
    if (j >= t_.size()) j = t_.size() - 1;
    const double t0 = t_[j - 1], t1 = t_[j], h = t1 - t0;
    const double th = (t - t0) / h;
    const Vec &y0 = y_[j - 1], &y1 = y_[j], &f0 = f_[j - 1], &f1 = f_[j];
    if (!want_deriv) {
      const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
      const double h10 = th * (1.0 - th) * (1.0 - th);
      const double h01 = th * th * (3.0 - 2.0 * th);
      const double h11 = th * th * (th - 1.0);
      return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
    }
    const double d00 = 6.0 * th * (th - 1.0) / h;
    const double d10 = (3.0 * th - 1.0) * (th - 1.0);
    const double d11 = th * (3.0 * th - 2.0);
    return d00 * y0 + d10 * f0 - d00 * y1 + d11 * f1;
  }

  std::vector<double> t_;
  std::vector<Vec> y_;
  std::vector<Vec> f_;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (5th-order propagated minus 4th-order embedded)
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
  static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
  static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
  static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
  static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
  static constexpr double e7 = -1.0 / 40;
};

}  // namespace detail

// Integrates y' = f(t, y) from 0 to t_end. Throws ExplosionError when the
// solution norm passes options.explosion_limit (the error carries the t
// reached), AccuracyError if the step budget runs out.
inline DenseSolution solve_ode(const std::function<Vec(double, const Vec&)>& f,
                               Vec y0, double t_end, const OdeOptions& opt = {},
                               OdeStats* stats = nullptr) {
  using T = detail::Dopri5;
  if (!(t_end > 0.0)) throw InvalidInput("solve_ode: t_end must be positive");
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
    throw InvalidInput("solve_ode: tolerances must be positive");

  const auto n = y0.size();
  std::vector<double> ts{0.0};
  std::vector<Vec> ys{y0};
  std::vector<Vec> fs;

  double t = 0.0;
  Vec y = std::move(y0);
  Vec k1 = f(t, y);
  fs.push_back(k1);

  auto scaled_norm = [&](const Vec& e, const Vec& ya, const Vec& yb) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = e[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / static_cast<double>(n));
  };

  // initial step: match the scale of y and f, then refine with one Euler probe
  double h;
  if (opt.fixed_step > 0.0) {
    h = opt.fixed_step;
  } else {
    const double d0 = scaled_norm(y, y, y), d1 = scaled_norm(k1, y, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end);
    Vec y1 = y + h0 * k1;
    Vec f1 = f(h0, y1);
    const double d2 = scaled_norm(f1 - k1, y, y) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100.0 * h0, h1, t_end});
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  }

  long steps = 0;
  while (t < t_end) {
    if (++steps > opt.max_steps)
      throw AccuracyError("solve_ode: step budget exhausted", t, t_end - t);
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (!(t + h > t))
      throw AccuracyError("solve_ode: step size collapsed", t, t_end - t);

    const Vec k2 = f(t + T::c2 * h, y + h * (T::a21 * k1));
    const Vec k3 = f(t + T::c3 * h, y + h * (T::a31 * k1 + T::a32 * k2));
    const Vec k4 =
        f(t + T::c4 * h, y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
    const Vec k5 = f(t + T::c5 * h, y + h * (T::a51 * k1 + T::a52 * k2 +
                                             T::a53 * k3 + T::a54 * k4));
    const Vec k6 = f(t + h, y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 +
                                     T::a64 * k4 + T::a65 * k5));
    Vec ynew = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 +
                        T::b6 * k6);
    const Vec k7 = f(t + h, ynew);  // FSAL
    const Vec errv = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 +
                          T::e6 * k6 + T::e7 * k7);

    // a non-finite trial is just a rejected step in adaptive mode; the
    // explosion verdict is only reached through accepted steps
    const bool finite = ynew.allFinite() && errv.allFinite();
    if (!finite && opt.fixed_step > 0.0)
      throw ExplosionError("solve_ode: solution left the finite range", t);
    const double err =
        finite ? scaled_norm(errv, y, ynew) : std::numeric_limits<double>::infinity();
    const bool accept = opt.fixed_step > 0.0 || err <= 1.0;
    if (accept) {
      t = last ? t_end : t + h;
      y = std::move(ynew);
      k1 = k7;
      ts.push_back(t);
      ys.push_back(y);
      fs.push_back(k1);
      if (stats) {
        ++stats->accepted;
        stats->max_scaled_error = std::max(stats->max_scaled_error, err);
      }
      if (y.cwiseAbs().maxCoeff() > opt.explosion_limit)
        throw ExplosionError("solve_ode: solution exceeded the blow-up threshold",
                             t);
    } else if (stats) {
      ++stats->rejected;
    }
    if (opt.fixed_step <= 0.0) {
      const double fac =
          std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
      h *= fac;
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    }
  }
  return DenseSolution(std::move(ts), std::move(ys), std::move(fs));
}

}  // namespace jdts
