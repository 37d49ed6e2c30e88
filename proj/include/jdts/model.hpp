#pragma once

#include <Eigen/Eigenvalues>
#include <optional>
#include <string>
#include <utility>

#include "jdts/coefficients.hpp"
#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/jump_measure.hpp"

namespace jdts {

// a = (1/2) c c^T.
inline Mat make_diffusion_matrix(const Mat& c_value) {
  if (c_value.rows() != c_value.cols())
    throw InvalidInput("make_diffusion_matrix: square matrix required");
  if (!c_value.allFinite())
    throw InvalidInput("make_diffusion_matrix: non-finite entries");
  return 0.5 * c_value * c_value.transpose();
}

// Symmetric square root of 2a, so that (1/2) c c^T recovers a. Eigenvalues
// of a slightly below zero (roundoff) are clamped.
inline Mat diffusion_from_a(const Mat& a) {
  Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success)
    throw InvalidInput("diffusion_from_a: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + sym.cwiseAbs().maxCoeff()))
    throw DomainViolation("diffusion_from_a: matrix is not positive semi-definite");
  Vec sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt() * std::sqrt(2.0);
  return es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
}

// State dynamics dX = b dt + c dW + jumps(lambda, Q) on a domain box.
// Exactly one of (c, a) is primary; the other is derived so both the
// simulator (needs c) and the analysis (needs a) stay consistent.
class JumpDiffusionModel {
 public:
  static JumpDiffusionModel with_c(DomainBox box, CoefficientFunction drift,
                                   CoefficientFunction diffusion_c,
                                   CoefficientFunction intensity, JumpMeasure jumps) {
    return JumpDiffusionModel(std::move(box), std::move(drift),
                              std::move(diffusion_c), std::nullopt,
                              std::move(intensity), std::move(jumps));
  }

  static JumpDiffusionModel with_a(DomainBox box, CoefficientFunction drift,
                                   CoefficientFunction diffusion_a,
                                   CoefficientFunction intensity, JumpMeasure jumps) {
    return JumpDiffusionModel(std::move(box), std::move(drift), std::nullopt,
                              std::move(diffusion_a), std::move(intensity),
                              std::move(jumps));
  }

  std::size_t dim() const { return n_; }
  const DomainBox& domain() const { return box_; }
  const JumpMeasure& jumps() const { return jumps_; }

  Vec drift(const Vec& x) const { return drift_(x); }
  double intensity(const Vec& x) const { return intensity_(x)[0]; }

  Mat c(const Vec& x) const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (c_fn_) return unflatten((*c_fn_)(x), n, n);
    return diffusion_from_a(unflatten((*a_fn_)(x), n, n));
  }

  Mat a(const Vec& x) const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (a_fn_) {
      Mat a = unflatten((*a_fn_)(x), n, n);
      return 0.5 * (a + a.transpose());
    }
    return make_diffusion_matrix(unflatten((*c_fn_)(x), n, n));
  }

  const CoefficientFunction& drift_fn() const { return drift_; }
  const CoefficientFunction& intensity_fn() const { return intensity_; }
  // a as a coefficient function when it was given directly; callers needing
  // affine structure of a derived from constant c can probe via a().
  const std::optional<CoefficientFunction>& a_fn() const { return a_fn_; }
  const std::optional<CoefficientFunction>& c_fn() const { return c_fn_; }

 private:
  JumpDiffusionModel(DomainBox box, CoefficientFunction drift,
                     std::optional<CoefficientFunction> c_fn,
                     std::optional<CoefficientFunction> a_fn,
                     CoefficientFunction intensity, JumpMeasure jumps)
      : n_(drift.in_dim()),
        box_(std::move(box)),
        drift_(std::move(drift)),
        c_fn_(std::move(c_fn)),
        a_fn_(std::move(a_fn)),
        intensity_(std::move(intensity)),
        jumps_(std::move(jumps)) {
    if (box_.dim() != n_) throw InvalidInput("model: domain box dimension mismatch");
    if (drift_.out_dim() != n_)
      throw InvalidInput("model: drift must map R^n to R^n");
    if (intensity_.in_dim() != n_ || intensity_.out_dim() != 1)
      throw InvalidInput("model: intensity must map R^n to R");
    const auto& diff = c_fn_ ? *c_fn_ : *a_fn_;
    if (diff.in_dim() != n_ || diff.out_dim() != n_ * n_)
      throw InvalidInput("model: diffusion must map R^n to n-by-n matrices");
    if (jumps_.dim() != n_)
      throw InvalidInput("model: jump measure dimension mismatch");
    validate_probes();
  }

  void validate_probes() const {
    const double eig_tol = -1e-10;
    for (const Vec& x : probe_points(box_, 100)) {
      const Vec b = drift_(x);
      if (!b.allFinite())
        throw InvalidInput("model: drift not finite at a probed domain point");
      const double lam = intensity_(x)[0];
      if (!std::isfinite(lam) || lam < -1e-12)
        throw DomainViolation("model: intensity must be nonnegative on the domain");
      const Mat ax = a(x);
      if (!ax.allFinite())
        throw InvalidInput("model: diffusion not finite at a probed domain point");
      Eigen::SelfAdjointEigenSolver<Mat> es(ax);
      const double scale = 1.0 + ax.cwiseAbs().maxCoeff();
      if (es.eigenvalues().minCoeff() < eig_tol * scale)
        throw DomainViolation(
            "model: diffusion matrix not positive semi-definite on the domain");
    }
  }

  std::size_t n_;
  DomainBox box_;
  CoefficientFunction drift_;
  std::optional<CoefficientFunction> c_fn_;
  std::optional<CoefficientFunction> a_fn_;
  CoefficientFunction intensity_;
  JumpMeasure jumps_;
};

}  // namespace jdts
