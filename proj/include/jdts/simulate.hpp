#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "jdts/curve_family.hpp"
#include "jdts/model.hpp"
#include "jdts/quadrature.hpp"
#include "jdts/rng.hpp"
#include "jdts/summation.hpp"

namespace jdts {

struct JumpEvent {
  double time = 0.0;
  Vec mark;
};

struct SimPath {
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<JumpEvent> jumps;
  bool left_domain = false;     // some node fell outside the model box
  double max_jump_prob = 0.0;   // largest per-step lambda*dt encountered
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample stddev / sqrt(n)
  std::size_t n_paths = 0;
  std::size_t flagged = 0;  // paths that left the domain box
  double max_jump_prob = 0.0;
};

namespace detail {

// Euler stepping state shared by the path generators. Models whose drift and
// intensity are affine tables and whose diffusion factor is constant run the
// precomputed branch, which performs no per-step allocation; everything else
// goes through the coefficient functions.
class EulerEngine {
 public:
  explicit EulerEngine(const JumpDiffusionModel& model)
      : model_(&model), n_(static_cast<Eigen::Index>(model.dim())) {
    const auto& drift = model.drift_fn();
    const auto& lam = model.intensity_fn();
    bool const_c = false;
    if (model.c_fn() && model.c_fn()->is_affine() &&
        model.c_fn()->linear_part().cwiseAbs().maxCoeff() == 0.0) {
      c_const_ = unflatten(model.c_fn()->constant_part(), n_, n_);
      const_c = true;
    } else if (model.a_fn() && model.a_fn()->is_affine() &&
               model.a_fn()->linear_part().cwiseAbs().maxCoeff() == 0.0) {
      c_const_ = diffusion_from_a(unflatten(model.a_fn()->constant_part(), n_, n_));
      const_c = true;
    }
    affine_ = drift.is_affine() && lam.is_affine() && const_c;
    if (affine_) {
      b0_ = drift.constant_part();
      bx_ = drift.linear_part();
      lam0_ = lam.constant_part()[0];
      lamv_ = lam.linear_part().row(0).transpose();
      jumps_active_ = !model.jumps().is_dirac_zero() &&
                      (lam0_ != 0.0 || lamv_.cwiseAbs().maxCoeff() != 0.0);
    } else {
      jumps_active_ = !model.jumps().is_dirac_zero();
    }
    z_.resize(n_);
    w_.resize(n_);
    cz_.resize(n_);
  }

  // One Euler step of size h, in place. Returns the jump probability used;
  // *jumped is set when a mark fired (the mark is already added to x).
  double step(Vec& x, double h, Rng& rng, bool* jumped, Vec* mark) {
    double prob = 0.0;
    const double sh = std::sqrt(h);
    if (affine_ && n_ == 1) {
      const double xv = x[0];
      prob = jumps_active_ ? (lam0_ + lamv_[0] * xv) * h : 0.0;
      x[0] = xv + h * (b0_[0] + bx_(0, 0) * xv) + sh * c_const_(0, 0) * rng.normal();
    } else if (affine_) {
      for (Eigen::Index i = 0; i < n_; ++i) z_[i] = rng.normal();
      prob = jumps_active_ ? (lam0_ + lamv_.dot(x)) * h : 0.0;
      w_.noalias() = bx_ * x;
      cz_.noalias() = c_const_ * z_;
      x += h * (b0_ + w_) + sh * cz_;
    } else {
      for (Eigen::Index i = 0; i < n_; ++i) z_[i] = rng.normal();
      prob = jumps_active_ ? model_->intensity(x) * h : 0.0;
      x += h * model_->drift(x) + sh * (model_->c(x) * z_);
    }
    *jumped = false;
    if (jumps_active_) {
      if (prob > 1.0)
        throw InvalidInput(
            "simulate: per-step jump probability exceeds 1; reduce dt");
      const double u = rng.uniform01();
      if (u < prob) {
        *mark = sample(model_->jumps(), rng);
        x += *mark;
        *jumped = true;
      }
    }
    return prob;
  }

 private:
  const JumpDiffusionModel* model_;
  Eigen::Index n_;
  bool affine_ = false;
  bool jumps_active_ = false;
  Vec b0_;
  Mat bx_;
  Mat c_const_;
  double lam0_ = 0.0;
  Vec lamv_;
  Vec z_, w_, cz_;
};

inline void check_grid(const JumpDiffusionModel& model, const Vec& x0, double T,
                       double dt) {
  if (!(dt > 0.0)) throw InvalidInput("simulate: dt must be positive");
  if (!(T >= dt)) throw InvalidInput("simulate: horizon must cover at least one step");
  if (static_cast<std::size_t>(x0.size()) != model.dim())
    throw InvalidInput("simulate: initial state dimension mismatch");
  model.domain().require(x0, "simulate: initial state");
}

// Walks one path on the uniform grid (last step shortened to land exactly on
// the horizon), invoking visit(t, x) at every node including t = 0.
template <class Visit, class OnJump>
void euler_walk(EulerEngine& eng, const JumpDiffusionModel& model, Vec x,
                double T, double dt, Rng& rng, bool& left_domain,
                double& max_prob, Visit&& visit, OnJump&& on_jump) {
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  left_domain = !model.domain().contains(x);
  max_prob = 0.0;
  visit(0.0, x);
  bool jumped = false;
  Vec mark;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t0 = static_cast<double>(i) * dt;
    const double t1 = (i + 1 == steps) ? T : t0 + dt;
    max_prob = std::max(max_prob, eng.step(x, t1 - t0, rng, &jumped, &mark));
    if (jumped) on_jump(t1, mark);
    if (!left_domain && !model.domain().contains(x)) left_domain = true;
    visit(t1, x);
  }
}

}  // namespace detail

// Euler path of the state dynamics with one Bernoulli(lambda dt) jump chance
// per step. The same seed/stream pair always yields the same path; stream i
// here equals path i of the estimator runs below.
inline SimPath simulate_state(const JumpDiffusionModel& model, const Vec& x0,
                              double T, double dt, std::uint64_t seed,
                              std::uint64_t stream = 0) {
  detail::check_grid(model, x0, T, dt);
  detail::EulerEngine eng(model);
  Rng rng(seed, stream);
  SimPath path;
  path.dt = dt;
  path.horizon = T;
  path.seed = seed;
  path.stream = stream;
  detail::euler_walk(
      eng, model, x0, T, dt, rng, path.left_domain, path.max_jump_prob,
      [&](double t, const Vec& x) {
        path.times.push_back(t);
        path.states.push_back(x);
      },
      [&](double t, const Vec& mark) { path.jumps.push_back({t, mark}); });
  return path;
}

// Monte Carlo zero-coupon price E[exp(-int_0^T r(X_s) ds)], trapezoid rule
// along each path. Pairwise aggregation keeps the result independent of any
// future batching of the path loop.
inline MCEstimate mc_bond_price(const JumpDiffusionModel& model,
                                const std::function<double(const Vec&)>& short_rate,
                                const Vec& x0, double T, double dt,
                                std::size_t n_paths, std::uint64_t seed) {
  if (!short_rate) throw InvalidInput("mc_bond_price: short-rate function required");
  if (n_paths < 100) throw InvalidInput("mc_bond_price: need at least 100 paths");
  detail::check_grid(model, x0, T, dt);
  detail::EulerEngine eng(model);
  std::vector<double> discounts(n_paths);
  MCEstimate est;
  est.n_paths = n_paths;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng rng(seed, i);
    double integral = 0.0;
    double r_prev = 0.0, t_prev = 0.0;
    bool left = false;
    double mp = 0.0;
    detail::euler_walk(
        eng, model, x0, T, dt, rng, left, mp,
        [&](double t, const Vec& x) {
          const double r = short_rate(x);
          if (t > 0.0) integral += 0.5 * (r_prev + r) * (t - t_prev);
          r_prev = r;
          t_prev = t;
        },
        [](double, const Vec&) {});
    discounts[i] = std::exp(-integral);
    if (left) ++est.flagged;
    est.max_jump_prob = std::max(est.max_jump_prob, mp);
  }
  const MeanVar mv = pairwise_mean_var(discounts);
  est.mean = mv.mean;
  est.std_error = n_paths > 1 ? std::sqrt(mv.variance / (static_cast<double>(n_paths) - 1.0))
                              : 0.0;
  return est;
}

struct MartingaleReport {
  MCEstimate discounted;   // E[P(t,T) / money-market account at t]
  double reference = 0.0;  // P(0,T) from the curve family
  double z = 0.0;          // (mean - reference) / std_error; 0 when both vanish
};

// Checks E[P(t,T) exp(-int_0^t r ds)] = P(0,T) for the family-implied rates
// r(s) = G(0, X_s) and prices P(t,T) = exp(-int_0^{T-t} G(u, X_t) du).
inline MartingaleReport martingale_test(const JumpDiffusionModel& model,
                                        const CurveFamily& family, const Vec& x0,
                                        double t, double T, double dt,
                                        std::size_t n_paths, std::uint64_t seed) {
  if (!(0.0 < t && t < T))
    throw InvalidInput("martingale_test: need 0 < t < T");
  if (family.dim() != model.dim())
    throw InvalidInput("martingale_test: family/model dimension mismatch");
  if (n_paths < 100) throw InvalidInput("martingale_test: need at least 100 paths");
  detail::check_grid(model, x0, t, dt);
  family.domain().require(x0, "martingale_test: initial state");

  detail::EulerEngine eng(model);
  std::vector<double> ds(n_paths);
  MartingaleReport rep;
  rep.discounted.n_paths = n_paths;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng rng(seed, i);
    double integral = 0.0;
    double r_prev = 0.0, t_prev = 0.0;
    Vec xt;
    bool left = false;
    double mp = 0.0;
    detail::euler_walk(
        eng, model, x0, t, dt, rng, left, mp,
        [&](double u, const Vec& x) {
          const double r = family.value(0.0, x);
          if (u > 0.0) integral += 0.5 * (r_prev + r) * (u - t_prev);
          r_prev = r;
          t_prev = u;
          if (u == t) xt = x;
        },
        [](double, const Vec&) {});
    const double price = std::exp(-family.integral(T - t, xt));
    ds[i] = price * std::exp(-integral);
    if (left) ++rep.discounted.flagged;
    rep.discounted.max_jump_prob = std::max(rep.discounted.max_jump_prob, mp);
  }
  const MeanVar mv = pairwise_mean_var(ds);
  rep.discounted.mean = mv.mean;
  rep.discounted.std_error =
      n_paths > 1 ? std::sqrt(mv.variance / (static_cast<double>(n_paths) - 1.0))
                  : 0.0;
  rep.reference = std::exp(-family.integral(T, x0));
  const double diff = rep.discounted.mean - rep.reference;
  if (rep.discounted.std_error == 0.0) {
    // degenerate variance: deterministic dynamics reproduce the reference
    // only to rounding, so score 0 at rounding scale and infinity beyond
    const double eps = 1e-13 * std::max(1.0, std::abs(rep.reference));
    rep.z = std::abs(diff) <= eps
                ? 0.0
                : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    rep.z = diff / rep.discounted.std_error;
  }
  return rep;
}

// Forward-rate volatility inputs: deterministic sigma(t, T), jump loading
// rho(t, T, y), and a compensator of finite total rate times a mark law.
struct HJMInputs {
  std::function<double(double, double)> sigma;
  std::function<double(double, double, const Vec&)> rho;
  double rate = 0.0;
  JumpMeasure marks = JumpMeasure::dirac_zero(1);
};

// No-arbitrage drift of the forward rate:
//   sigma(t,T) int_t^T sigma(t,s) ds
//     - rate * E[ rho(t,T,y) exp(-int_t^T rho(t,u,y) du) ].
inline double hjm_drift(const HJMInputs& in, double t, double T,
                        double tol = 1e-10) {
  if (!in.sigma) throw InvalidInput("hjm_drift: volatility function required");
  if (!(t <= T)) throw InvalidInput("hjm_drift: need t <= T");
  if (!(in.rate >= 0.0) || !std::isfinite(in.rate))
    throw InvalidInput("hjm_drift: compensator rate must be finite and nonnegative");
  if (t == T) return 0.0;

  const double inner_sigma =
      integrate_adaptive([&](double s) { return in.sigma(t, s); }, t, T, tol).value;
  double out = in.sigma(t, T) * inner_sigma;

  if (in.rate > 0.0) {
    if (!in.rho) throw InvalidInput("hjm_drift: jump loading required when rate > 0");
    const double jump_part = expect(
        in.marks,
        [&](const Vec& y) {
          const double ir =
              integrate_adaptive([&](double u) { return in.rho(t, u, y); }, t, T,
                                 tol)
                  .value;
          return in.rho(t, T, y) * std::exp(-ir);
        },
        tol);
    out -= in.rate * jump_part;
  }
  return out;
}

}  // namespace jdts
