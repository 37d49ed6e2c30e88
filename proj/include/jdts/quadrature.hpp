#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "jdts/errors.hpp"

namespace jdts {

struct QuadOutcome {
  double value = 0.0;
  double error_bound = 0.0;
  std::int64_t evals = 0;
};

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGlNode[8] = {
    0.0000000000000000, 0.2011940939974345, 0.3941513470775634,
    0.5709721726085388, 0.7244177313601701, 0.8482065834104272,
    0.9372733924007060, 0.9879925180204854};
inline constexpr double kGlWeight[8] = {
    0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
    0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
    0.0703660474881081, 0.0307532419961173};

template <class F>
double gl15(F&& f, double a, double b, std::int64_t& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = kGlWeight[0] * f(c);
  for (int i = 1; i < 8; ++i) {
    const double d = h * kGlNode[i];
    s += kGlWeight[i] * (f(c - d) + f(c + d));
  }
  evals += 15;
  return s * h;
}

}  // namespace detail

// Adaptive Gauss-Legendre bisection on [a, b] with a width-proportional
// absolute error budget. Throws DivergentIntegral on non-finite integrand
// values and AccuracyError (with best estimate) when refinement is exhausted.
template <class F>
QuadOutcome integrate_adaptive(F&& f, double a, double b, double tol,
                               int max_depth = 44) {
  QuadOutcome out;
  if (a == b) return out;
  const double total_width = std::abs(b - a);
  bool failed = false;

  struct Frame {
    double a, b, whole;
    int depth;
  };
  std::int64_t evals = 0;
  const double whole0 = detail::gl15(f, a, b, evals);
  if (!std::isfinite(whole0))
    throw DivergentIntegral("integrate_adaptive: integrand not finite");

  // explicit stack; recursion depth can reach max_depth
  std::vector<Frame> stack{{a, b, whole0, 0}};
  double value = 0.0, bound = 0.0;
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    const double m = 0.5 * (fr.a + fr.b);
    const double left = detail::gl15(f, fr.a, m, evals);
    const double right = detail::gl15(f, m, fr.b, evals);
    if (!std::isfinite(left) || !std::isfinite(right))
      throw DivergentIntegral("integrate_adaptive: integrand not finite");
    const double two = left + right;
    const double err = std::abs(two - fr.whole);
    const double budget = tol * (std::abs(fr.b - fr.a) / total_width);
    const double floor_ = 8.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(two) + std::abs(value));
    if (err <= budget || err <= floor_ || fr.depth >= max_depth) {
      value += two;
      bound += err;
      if (err > budget && err > floor_) failed = true;
    } else {
      stack.push_back({fr.a, m, left, fr.depth + 1});
      stack.push_back({m, fr.b, right, fr.depth + 1});
    }
    if (evals > 50'000'000)
      throw AccuracyError("integrate_adaptive: evaluation budget exhausted",
                          value, bound + std::abs(two));
  }
  out.value = value;
  out.error_bound = bound;
  out.evals = evals;
  if (failed)
    throw AccuracyError("integrate_adaptive: tolerance not reached", value, bound);
  return out;
}

// Adaptive Simpson. Deliberately a different scheme from the Gauss-Legendre
// path; used where the contract calls for a second, independent quadrature.
namespace detail {
template <class F>
double simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta))
    throw DivergentIntegral("adaptive_simpson: integrand not finite");
  if (depth <= 0) {
    if (std::abs(delta) > 15.0 * tol)
      throw AccuracyError("adaptive_simpson: tolerance not reached",
                          left + right + delta / 15.0, std::abs(delta));
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol,
                        int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace jdts
