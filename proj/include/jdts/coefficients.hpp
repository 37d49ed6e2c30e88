#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "jdts/domain.hpp"
#include "jdts/errors.hpp"

namespace jdts {

// Coefficient of a model: x in R^n -> value in R^m, either an affine table
// (constant + linear*x, exact structure available to solvers) or an opaque
// callable. Matrix-valued coefficients are stored flattened column-major.
class CoefficientFunction {
 public:
  static CoefficientFunction affine(Vec constant, Mat linear) {
    if (constant.size() != linear.rows())
      throw InvalidInput("coefficient: constant/linear row mismatch");
    CoefficientFunction cf;
    cf.out_ = static_cast<std::size_t>(linear.rows());
    cf.in_ = static_cast<std::size_t>(linear.cols());
    cf.constant_ = std::move(constant);
    cf.linear_ = std::move(linear);
    return cf;
  }

  static CoefficientFunction constant(Vec value, std::size_t in_dim) {
    const auto m = value.size();
    return affine(std::move(value), Mat::Zero(m, static_cast<Eigen::Index>(in_dim)));
  }

  static CoefficientFunction callable(std::function<Vec(const Vec&)> f,
                                      std::size_t out_dim, std::size_t in_dim) {
    if (!f) throw InvalidInput("coefficient: empty callable");
    CoefficientFunction cf;
    cf.out_ = out_dim;
    cf.in_ = in_dim;
    cf.fn_ = std::move(f);
    return cf;
  }

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  bool is_affine() const { return !fn_; }

  const Vec& constant_part() const {
    require_affine("constant_part");
    return constant_;
  }
  const Mat& linear_part() const {
    require_affine("linear_part");
    return linear_;
  }

  Vec operator()(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != in_)
      throw InvalidInput("coefficient: argument dimension mismatch");
    if (fn_) {
      Vec y = fn_(x);
      if (static_cast<std::size_t>(y.size()) != out_)
        throw InvalidInput("coefficient: callable returned wrong dimension");
      return y;
    }
    return constant_ + linear_ * x;
  }

 private:
  CoefficientFunction() = default;
  void require_affine(const char* what) const {
    if (fn_)
      throw InvalidInput(std::string("coefficient: ") + what +
                         " requires the affine variant");
  }
  std::size_t out_ = 0, in_ = 0;
  Vec constant_;
  Mat linear_;
  std::function<Vec(const Vec&)> fn_;
};

// Probes a coefficient for affine structure: fits constant + linear*x from
// n+1 evaluations around the box's probe window, then cross-checks at
// quasi-random points. Already-affine tables pass through unchanged.
inline std::optional<std::pair<Vec, Mat>> extract_affine(
    const CoefficientFunction& cf, const DomainBox& box, double rel_tol = 1e-8) {
  if (cf.is_affine()) return std::make_pair(cf.constant_part(), cf.linear_part());
  const auto n = static_cast<Eigen::Index>(cf.in_dim());
  const auto m = static_cast<Eigen::Index>(cf.out_dim());
  Vec x0(n);
  Vec h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [a, b] = box.probe_bounds(static_cast<std::size_t>(i));
    x0[i] = 0.5 * (a + b);
    h[i] = 0.25 * (b - a);
  }
  const Vec f0 = cf(x0);
  Mat lin(m, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec xp = x0;
    xp[i] += h[i];
    lin.col(i) = (cf(xp) - f0) / h[i];
  }
  const Vec c0 = f0 - lin * x0;
  double scale = 1.0 + f0.cwiseAbs().maxCoeff();
  for (const Vec& x : probe_points(box, 16)) {
    const Vec err = cf(x) - (c0 + lin * x);
    scale = std::max(scale, 1.0 + cf(x).cwiseAbs().maxCoeff());
    if (err.cwiseAbs().maxCoeff() > rel_tol * scale) return std::nullopt;
  }
  return std::make_pair(c0, lin);
}

inline Vec flatten(const Mat& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

inline Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw InvalidInput("unflatten: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

}  // namespace jdts
