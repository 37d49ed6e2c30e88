#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "jdts/errors.hpp"

namespace jdts {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Per-coordinate box, possibly unbounded. Probe windows clamp infinite
// sides so validation and scans always have a finite region to sample.
class DomainBox {
 public:
  DomainBox() = default;

  DomainBox(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size())
      throw InvalidInput("domain box: lo/hi dimension mismatch");
    for (Eigen::Index i = 0; i < lo_.size(); ++i)
      if (!(lo_[i] < hi_[i]))
        throw InvalidInput("domain box: lo[" + std::to_string(i) +
                           "] must be below hi[" + std::to_string(i) + "]");
  }

  static DomainBox unbounded(std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    return DomainBox(Vec::Constant(static_cast<Eigen::Index>(n), -inf),
                     Vec::Constant(static_cast<Eigen::Index>(n), inf));
  }

  std::size_t dim() const { return static_cast<std::size_t>(lo_.size()); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  bool contains(const Vec& x) const {
    if (x.size() != lo_.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
    return true;
  }

  void require(const Vec& x, const char* where) const {
    if (!contains(x))
      throw DomainViolation(std::string(where) + ": point outside domain box");
  }

  // Finite window for probing: infinite sides are clamped to width 2 around
  // the finite side, or to [-1, 1] when both sides are infinite.
  std::pair<double, double> probe_bounds(std::size_t i) const {
    double a = lo_[static_cast<Eigen::Index>(i)];
    double b = hi_[static_cast<Eigen::Index>(i)];
    const bool ainf = std::isinf(a), binf = std::isinf(b);
    if (ainf && binf) return {-1.0, 1.0};
    if (ainf) return {b - 2.0, b};
    if (binf) return {a, a + 2.0};
    return {a, b};
  }

 private:
  Vec lo_;
  Vec hi_;
};

// Additive-recurrence low-discrepancy sequence (generalized golden ratio).
// Deterministic, dimension-wise irrational rotations; used wherever the
// contract says "quasi-random points".
class LowDiscrepancy {
 public:
  explicit LowDiscrepancy(std::size_t dim) : dim_(dim), alpha_(dim), state_(dim, 0.5) {
    // alpha_j = 1/phi_d^(j+1) where phi_d solves x^(d+1) = x + 1.
    double g = 2.0;
    for (int it = 0; it < 64; ++it)
      g = std::pow(1.0 + g, 1.0 / (static_cast<double>(dim) + 1.0));
    double p = 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      p /= g;
      alpha_[j] = p;
    }
  }

  // Next point in [0,1)^dim.
  std::vector<double> next() {
    for (std::size_t j = 0; j < dim_; ++j) {
      state_[j] += alpha_[j];
      state_[j] -= std::floor(state_[j]);
    }
    return state_;
  }

  // Next point mapped into the (probe-clamped) box.
  Vec next_in(const DomainBox& box) {
    auto u = next();
    Vec x(static_cast<Eigen::Index>(dim_));
    for (std::size_t j = 0; j < dim_; ++j) {
      auto [a, b] = box.probe_bounds(j);
      x[static_cast<Eigen::Index>(j)] = a + (b - a) * u[j];
    }
    return x;
  }

 private:
  std::size_t dim_;
  std::vector<double> alpha_;
  std::vector<double> state_;
};

inline std::vector<Vec> probe_points(const DomainBox& box, std::size_t count) {
  LowDiscrepancy seq(box.dim());
  std::vector<Vec> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(seq.next_in(box));
  return pts;
}

}  // namespace jdts
