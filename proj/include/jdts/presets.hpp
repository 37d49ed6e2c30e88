#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jdts/model.hpp"
#include "jdts/nelson_siegel.hpp"

namespace jdts {

// A ready-to-run model fixture: the model, a starting state, and a default
// solve horizon. Presets double as regression fixtures for the tool tests.
struct Preset {
  std::string name;
  JumpDiffusionModel model;
  Vec x0;
  double tau_max = 30.0;
};

namespace detail {

inline Vec vec1(double v) {
  Vec x(1);
  x << v;
  return x;
}

inline Preset preset_vasicek() {
  const double kappa = 0.5, mu = 0.04, sigma = 0.02;
  auto drift =
      CoefficientFunction::affine(vec1(kappa * mu), -kappa * Mat::Identity(1, 1));
  auto c = CoefficientFunction::constant(vec1(sigma), 1);
  auto lam = CoefficientFunction::constant(vec1(0.0), 1);
  return {"vasicek",
          JumpDiffusionModel::with_c(DomainBox::unbounded(1), drift, c, lam,
                                     JumpMeasure::dirac_zero(1)),
          vec1(0.03), 30.0};
}

inline Preset preset_cir_like() {
  // square-root diffusion: a(x) = sigma^2 x / 2 is affine on [0, inf);
  // the simulator sees the full-truncation factor c(x) = sigma sqrt(max(x,0))
  const double kappa = 0.6, mu = 0.05, sigma = 0.15;
  auto drift =
      CoefficientFunction::affine(vec1(kappa * mu), -kappa * Mat::Identity(1, 1));
  auto c = CoefficientFunction::callable(
      [sigma](const Vec& x) { return vec1(sigma * std::sqrt(std::max(x[0], 0.0))); },
      1, 1);
  auto lam = CoefficientFunction::constant(vec1(0.0), 1);
  DomainBox box(vec1(0.0), vec1(std::numeric_limits<double>::infinity()));
  return {"cir-like",
          JumpDiffusionModel::with_c(std::move(box), drift, c, lam,
                                     JumpMeasure::dirac_zero(1)),
          vec1(0.04), 30.0};
}

inline Preset preset_pure_jump() {
  auto drift = CoefficientFunction::constant(vec1(0.0), 1);
  auto c = CoefficientFunction::constant(vec1(0.0), 1);
  auto lam = CoefficientFunction::constant(vec1(0.5), 1);
  DomainBox box(vec1(0.0), vec1(std::numeric_limits<double>::infinity()));
  return {"pure-jump",
          JumpDiffusionModel::with_c(std::move(box), drift, c, lam,
                                     JumpMeasure::exponential_product(vec1(40.0))),
          vec1(0.05), 30.0};
}

inline Preset preset_jump_vasicek() {
  const double kappa = 0.5, mu = 0.06, sigma = 0.015;
  auto drift =
      CoefficientFunction::affine(vec1(kappa * mu), -kappa * Mat::Identity(1, 1));
  auto c = CoefficientFunction::constant(vec1(sigma), 1);
  auto lam = CoefficientFunction::constant(vec1(0.3), 1);
  return {"jump-vasicek",
          JumpDiffusionModel::with_c(DomainBox::unbounded(1), drift, c, lam,
                                     JumpMeasure::exponential_product(vec1(50.0))),
          vec1(0.05), 30.0};
}

// Exponential-decay curve state with the drift that makes the deterministic
// flow reproduce the curve exactly: the one consistent configuration.
inline Preset preset_ns_trivial() {
  auto drift = CoefficientFunction::callable(
      [](const Vec& x) { return ns_fitted_drift(NSState::from_vec(x)); }, 4, 4);
  auto a = CoefficientFunction::constant(flatten(Mat::Zero(4, 4)), 4);
  auto lam = CoefficientFunction::constant(vec1(0.0), 4);
  const double inf = std::numeric_limits<double>::infinity();
  Vec lo(4), hi(4);
  lo << -inf, -inf, -inf, 1e-4;
  hi << inf, inf, inf, inf;
  Vec x0(4);
  x0 << 0.03, -0.01, 0.02, 0.5;
  return {"ns-trivial",
          JumpDiffusionModel::with_a(DomainBox(lo, hi), drift, a, lam,
                                     JumpMeasure::dirac_zero(4)),
          x0, 10.0};
}

// State-linear diffusion table a(x) = a0 - x on [0, x_max], which turns the
// level equation into dH/dtau = 1 + H^2: finite-time blow-up at pi/2.
inline Preset preset_explode() {
  const double x_max = 0.02;
  auto drift = CoefficientFunction::constant(vec1(0.0), 1);
  Mat lin(1, 1);
  lin << -1.0;
  auto a = CoefficientFunction::affine(vec1(x_max), lin);
  auto lam = CoefficientFunction::constant(vec1(0.0), 1);
  return {"explode",
          JumpDiffusionModel::with_a(DomainBox(vec1(0.0), vec1(x_max)), drift, a,
                                     lam, JumpMeasure::dirac_zero(1)),
          vec1(0.01), 2.0};
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"vasicek", "cir-like", "pure-jump", "jump-vasicek", "ns-trivial",
          "explode"};
}

inline Preset load_preset(const std::string& name) {
  if (name == "vasicek") return detail::preset_vasicek();
  if (name == "cir-like") return detail::preset_cir_like();
  if (name == "pure-jump") return detail::preset_pure_jump();
  if (name == "jump-vasicek") return detail::preset_jump_vasicek();
  if (name == "ns-trivial") return detail::preset_ns_trivial();
  if (name == "explode") return detail::preset_explode();
  throw InvalidInput("unknown preset '" + name + "'");
}

}  // namespace jdts
