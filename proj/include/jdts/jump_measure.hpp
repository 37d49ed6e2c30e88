#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/normal.hpp"
#include "jdts/quadrature.hpp"
#include "jdts/rng.hpp"
#include "jdts/summation.hpp"

namespace jdts {

// --- jump-size distribution variants -------------------------------------

struct DiracZero {
  std::size_t dim = 1;
};

struct DiscreteMeasure {
  std::vector<Vec> atoms;
  std::vector<double> weights;  // normalized to sum 1 at construction
};

// Independent exponential coordinates; sign -1 flips a coordinate onto the
// negative half-line.
struct ExponentialProduct {
  Vec rates;
  std::vector<int> signs;
};

// Independent normal coordinates, each optionally truncated to [0, inf).
struct GaussianDiagonal {
  Vec mean;
  Vec stddev;
  std::vector<bool> nonneg;
};

struct EmpiricalMeasure {
  std::vector<Vec> samples;
};

class JumpMeasure {
 public:
  using Variant = std::variant<DiracZero, DiscreteMeasure, ExponentialProduct,
                               GaussianDiagonal, EmpiricalMeasure>;

  static JumpMeasure dirac_zero(std::size_t dim) {
    if (dim == 0) throw InvalidInput("jump measure: dimension must be positive");
    return JumpMeasure(DiracZero{dim}, dim);
  }

  static JumpMeasure discrete(std::vector<Vec> atoms, std::vector<double> weights) {
    if (atoms.empty() || atoms.size() != weights.size())
      throw InvalidInput("discrete jump measure: need matching non-empty atoms/weights");
    const std::size_t d = static_cast<std::size_t>(atoms.front().size());
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (static_cast<std::size_t>(atoms[i].size()) != d)
        throw InvalidInput("discrete jump measure: atom dimension mismatch");
      if (!(weights[i] > 0.0))
        throw InvalidInput("discrete jump measure: weights must be positive");
      total += weights[i];
    }
    for (auto& w : weights) w /= total;
    return JumpMeasure(DiscreteMeasure{std::move(atoms), std::move(weights)}, d);
  }

  static JumpMeasure exponential_product(Vec rates, std::vector<int> signs = {}) {
    const std::size_t d = static_cast<std::size_t>(rates.size());
    if (d == 0) throw InvalidInput("exponential jump measure: empty rates");
    for (Eigen::Index i = 0; i < rates.size(); ++i)
      if (!(rates[i] > 0.0))
        throw InvalidInput("exponential jump measure: rates must be positive");
    if (signs.empty()) signs.assign(d, 1);
    if (signs.size() != d)
      throw InvalidInput("exponential jump measure: signs dimension mismatch");
    for (int s : signs)
      if (s != 1 && s != -1)
        throw InvalidInput("exponential jump measure: signs must be +1 or -1");
    return JumpMeasure(ExponentialProduct{std::move(rates), std::move(signs)}, d);
  }

  static JumpMeasure gaussian_diagonal(Vec mean, Vec stddev,
                                       std::vector<bool> nonneg = {}) {
    const std::size_t d = static_cast<std::size_t>(mean.size());
    if (d == 0 || stddev.size() != mean.size())
      throw InvalidInput("gaussian jump measure: mean/stddev dimension mismatch");
    for (Eigen::Index i = 0; i < stddev.size(); ++i)
      if (!(stddev[i] > 0.0))
        throw InvalidInput("gaussian jump measure: stddev must be positive");
    if (nonneg.empty()) nonneg.assign(d, false);
    if (nonneg.size() != d)
      throw InvalidInput("gaussian jump measure: truncation flags dimension mismatch");
    return JumpMeasure(GaussianDiagonal{std::move(mean), std::move(stddev),
                                        std::move(nonneg)}, d);
  }

  static JumpMeasure empirical(std::vector<Vec> samples) {
    if (samples.empty()) throw InvalidInput("empirical jump measure: no samples");
    const std::size_t d = static_cast<std::size_t>(samples.front().size());
    for (const auto& s : samples)
      if (static_cast<std::size_t>(s.size()) != d)
        throw InvalidInput("empirical jump measure: sample dimension mismatch");
    return JumpMeasure(EmpiricalMeasure{std::move(samples)}, d);
  }

  std::size_t dim() const { return dim_; }
  const Variant& value() const { return v_; }
  bool is_dirac_zero() const { return std::holds_alternative<DiracZero>(v_); }

 private:
  JumpMeasure(Variant v, std::size_t d) : v_(std::move(v)), dim_(d) {}
  Variant v_;
  std::size_t dim_;
};

// --- Laplace transform, closed forms --------------------------------------

// E[exp(-<v, xi>)]. Throws DivergentIntegral outside the finiteness domain.
inline double laplace(const JumpMeasure& Q, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != Q.dim())
    throw InvalidInput("laplace: argument dimension mismatch");
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiracZero>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          std::vector<double> terms(m.atoms.size());
          for (std::size_t i = 0; i < m.atoms.size(); ++i)
            terms[i] = m.weights[i] * std::exp(-v.dot(m.atoms[i]));
          return pairwise_sum(terms);
        } else if constexpr (std::is_same_v<T, ExponentialProduct>) {
          double p = 1.0;
          for (Eigen::Index i = 0; i < m.rates.size(); ++i) {
            const double th = m.rates[i];
            const double vi = m.signs[static_cast<std::size_t>(i)] > 0 ? v[i] : -v[i];
            if (!(vi > -th))
              throw DivergentIntegral(
                  "laplace: exponential coordinate " + std::to_string(i) +
                  " diverges (argument at or beyond -rate)");
            p *= th / (th + vi);
          }
          return p;
        } else if constexpr (std::is_same_v<T, GaussianDiagonal>) {
          double p = 1.0;
          for (Eigen::Index i = 0; i < m.mean.size(); ++i) {
            const double mu = m.mean[i], sd = m.stddev[i], vi = v[i];
            const double base = std::exp(-vi * mu + 0.5 * vi * vi * sd * sd);
            if (m.nonneg[static_cast<std::size_t>(i)]) {
              const double z0 = mu / sd;
              p *= base * norm_cdf(z0 - vi * sd) / norm_cdf(z0);
            } else {
              p *= base;
            }
          }
          return p;
        } else {
          static_assert(std::is_same_v<T, EmpiricalMeasure>);
          std::vector<double> terms(m.samples.size());
          for (std::size_t i = 0; i < m.samples.size(); ++i)
            terms[i] = std::exp(-v.dot(m.samples[i]));
          return pairwise_sum(terms) / static_cast<double>(m.samples.size());
        }
      },
      Q.value());
}

// --- expectation by summation / windowed quadrature ------------------------

namespace detail {

// One weighted coordinate integral over expanding windows. The weight is the
// coordinate's density; windows double in width so convergent contributions
// decay geometrically and divergence shows up as non-decay.
template <class Inner>
double coord_integral_windows(const std::function<double(double)>& density,
                              Inner&& inner, double origin, double scale,
                              bool two_sided, double lower_clip, double tol) {
  // Zero density short-circuits: the tail weight has underflowed, so the
  // contribution is zero regardless of how large the (possibly overflowing)
  // inner value is. Divergence is caught earlier, where the weight is finite.
  auto integrand = [&](double t) {
    const double w = density(t);
    return w == 0.0 ? 0.0 : w * inner(t);
  };
  // A window whose quadrature cannot reach its budget still feeds the decay
  // detector through its best estimate; the unresolved error only matters if
  // the run otherwise converges, and is reported then.
  double unresolved = 0.0;
  auto window_value = [&](double a, double b, double wtol) {
    try {
      return integrate_adaptive(integrand, a, b, wtol).value;
    } catch (const AccuracyError& e) {
      unresolved += e.error_bound;
      return e.best_estimate;
    }
  };
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  double prev_abs = inf;
  double lag[4] = {inf, inf, inf, inf};  // |c_{k-4}| ring buffer
  const int max_windows = 64;
  for (int k = 0; k < max_windows; ++k) {
    const double r0 = (k == 0) ? 0.0 : scale * std::ldexp(1.0, k - 1);
    const double r1 = scale * std::ldexp(1.0, k);
    const double wtol = tol * std::ldexp(1.0, -(k + 3));
    double c = 0.0;
    bool any = false;
    {
      const double a = std::max(origin + r0, lower_clip), b = origin + r1;
      if (a < b) {
        c += window_value(a, b, wtol);
        any = true;
      }
    }
    if (two_sided) {
      const double a = std::max(origin - r1, lower_clip);
      const double b = std::min(origin - r0, origin);
      if (a < b) {
        c += window_value(a, b, wtol);
        any = true;
      }
    }
    total += c;
    if (!std::isfinite(total) || std::abs(total) > 1e290)
      throw DivergentIntegral("expect: windowed integral diverges");
    const double ac = std::abs(c);
    if (!any || (k >= 1 && ac < 0.5 * wtol && ac <= prev_abs)) {
      if (unresolved > tol)
        throw AccuracyError("expect: windowed integral tolerance not reached",
                            total, unresolved);
      return total;
    }
    if (k >= 10 && ac > tol && ac >= lag[k % 4])
      throw DivergentIntegral("expect: window contributions stopped decaying");
    lag[k % 4] = ac;
    prev_abs = ac;
  }
  throw DivergentIntegral("expect: window budget exhausted without decay");
}

}  // namespace detail

// E_Q[f]. Exact summation for atomic variants, windowed adaptive
// Gauss-Legendre against the coordinate densities for parametric variants
// (coordinates nested outermost-first). Expect cost grows multiplicatively
// with parametric dimension; keep parametric use low-dimensional.
template <class F>
double expect(const JumpMeasure& Q, F&& f, double tol) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiracZero>) {
          return f(Vec::Zero(static_cast<Eigen::Index>(m.dim)));
        } else if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          std::vector<double> terms(m.atoms.size());
          for (std::size_t i = 0; i < m.atoms.size(); ++i)
            terms[i] = m.weights[i] * f(m.atoms[i]);
          return pairwise_sum(terms);
        } else if constexpr (std::is_same_v<T, EmpiricalMeasure>) {
          std::vector<double> terms(m.samples.size());
          for (std::size_t i = 0; i < m.samples.size(); ++i)
            terms[i] = f(m.samples[i]);
          return pairwise_sum(terms) / static_cast<double>(m.samples.size());
        } else if constexpr (std::is_same_v<T, ExponentialProduct>) {
          const std::size_t d = static_cast<std::size_t>(m.rates.size());
          Vec xi = Vec::Zero(static_cast<Eigen::Index>(d));
          std::function<double(std::size_t, double)> nest =
              [&](std::size_t i, double level_tol) -> double {
            if (i == d) return f(xi);
            const double th = m.rates[static_cast<Eigen::Index>(i)];
            const double sg = m.signs[i];
            auto density = std::function<double(double)>(
                [th](double t) { return th * std::exp(-th * t); });
            auto inner = [&](double t) {
              xi[static_cast<Eigen::Index>(i)] = sg * t;
              return nest(i + 1, level_tol * 0.2);
            };
            return detail::coord_integral_windows(density, inner, 0.0, 1.0 / th,
                                                  false, 0.0, level_tol);
          };
          return nest(0, tol);
        } else {
          static_assert(std::is_same_v<T, GaussianDiagonal>);
          const std::size_t d = static_cast<std::size_t>(m.mean.size());
          Vec xi = Vec::Zero(static_cast<Eigen::Index>(d));
          std::function<double(std::size_t, double)> nest =
              [&](std::size_t i, double level_tol) -> double {
            if (i == d) return f(xi);
            const double mu = m.mean[static_cast<Eigen::Index>(i)];
            const double sd = m.stddev[static_cast<Eigen::Index>(i)];
            const bool tr = m.nonneg[i];
            const double norm = tr ? 1.0 / norm_cdf(mu / sd) : 1.0;
            auto density = std::function<double(double)>([mu, sd, norm](double t) {
              return norm * norm_pdf((t - mu) / sd) / sd;
            });
            auto inner = [&](double t) {
              xi[static_cast<Eigen::Index>(i)] = t;
              return nest(i + 1, level_tol * 0.2);
            };
            const double clip = tr ? 0.0 : -std::numeric_limits<double>::infinity();
            return detail::coord_integral_windows(density, inner, mu, sd, true,
                                                  clip, level_tol);
          };
          return nest(0, tol);
        }
      },
      Q.value());
}

// Marginal expectation E_Q[g(xi_coord)]; exploits coordinate independence of
// the product variants, exact sums otherwise.
template <class G>
double expect_marginal(const JumpMeasure& Q, std::size_t coord, G&& g, double tol) {
  if (coord >= Q.dim()) throw InvalidInput("expect_marginal: coordinate out of range");
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiracZero>) {
          return g(0.0);
        } else if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          std::vector<double> terms(m.atoms.size());
          for (std::size_t i = 0; i < m.atoms.size(); ++i)
            terms[i] = m.weights[i] * g(m.atoms[i][static_cast<Eigen::Index>(coord)]);
          return pairwise_sum(terms);
        } else if constexpr (std::is_same_v<T, EmpiricalMeasure>) {
          std::vector<double> terms(m.samples.size());
          for (std::size_t i = 0; i < m.samples.size(); ++i)
            terms[i] = g(m.samples[i][static_cast<Eigen::Index>(coord)]);
          return pairwise_sum(terms) / static_cast<double>(m.samples.size());
        } else if constexpr (std::is_same_v<T, ExponentialProduct>) {
          const double th = m.rates[static_cast<Eigen::Index>(coord)];
          const double sg = m.signs[coord];
          auto density = std::function<double(double)>(
              [th](double t) { return th * std::exp(-th * t); });
          return detail::coord_integral_windows(
              density, [&](double t) { return g(sg * t); }, 0.0, 1.0 / th, false,
              0.0, tol);
        } else {
          static_assert(std::is_same_v<T, GaussianDiagonal>);
          const double mu = m.mean[static_cast<Eigen::Index>(coord)];
          const double sd = m.stddev[static_cast<Eigen::Index>(coord)];
          const bool tr = m.nonneg[coord];
          const double norm = tr ? 1.0 / norm_cdf(mu / sd) : 1.0;
          auto density = std::function<double(double)>([mu, sd, norm](double t) {
            return norm * norm_pdf((t - mu) / sd) / sd;
          });
          const double clip = tr ? 0.0 : -std::numeric_limits<double>::infinity();
          return detail::coord_integral_windows(density, [&](double t) { return g(t); },
                                                mu, sd, true, clip, tol);
        }
      },
      Q.value());
}

// --- sampling ---------------------------------------------------------------

// One draw from Q. Deterministic given the rng state; every parametric
// coordinate consumes exactly one uniform, atomic variants consume one total.
inline Vec sample(const JumpMeasure& Q, Rng& rng) {
  return std::visit(
      [&](const auto& m) -> Vec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiracZero>) {
          return Vec::Zero(static_cast<Eigen::Index>(m.dim));
        } else if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          const double u = rng.uniform01();
          double acc = 0.0;
          for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            acc += m.weights[i];
            if (u <= acc || i + 1 == m.atoms.size()) return m.atoms[i];
          }
          return m.atoms.back();
        } else if constexpr (std::is_same_v<T, ExponentialProduct>) {
          Vec xi(m.rates.size());
          for (Eigen::Index i = 0; i < m.rates.size(); ++i)
            xi[i] = m.signs[static_cast<std::size_t>(i)] *
                    rng.exponential(m.rates[i]);
          return xi;
        } else if constexpr (std::is_same_v<T, GaussianDiagonal>) {
          Vec xi(m.mean.size());
          for (Eigen::Index i = 0; i < m.mean.size(); ++i) {
            const double u = rng.uniform01();
            if (m.nonneg[static_cast<std::size_t>(i)]) {
              const double p0 = norm_cdf(-m.mean[i] / m.stddev[i]);
              xi[i] = m.mean[i] +
                      m.stddev[i] * norm_quantile(p0 + u * (1.0 - p0));
            } else {
              xi[i] = m.mean[i] + m.stddev[i] * norm_quantile(u);
            }
          }
          return xi;
        } else {
          static_assert(std::is_same_v<T, EmpiricalMeasure>);
          const double u = rng.uniform01();
          auto idx = static_cast<std::size_t>(u * static_cast<double>(m.samples.size()));
          if (idx >= m.samples.size()) idx = m.samples.size() - 1;
          return m.samples[idx];
        }
      },
      Q.value());
}

// True when the measure puts no mass on { xi_coord < 0 }.
inline bool support_nonnegative(const JumpMeasure& Q, std::size_t coord) {
  if (coord >= Q.dim())
    throw InvalidInput("support_nonnegative: coordinate out of range");
  const auto c = static_cast<Eigen::Index>(coord);
  return std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DiracZero>) {
          return true;
        } else if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          for (const Vec& atom : m.atoms)
            if (atom[c] < 0.0) return false;
          return true;
        } else if constexpr (std::is_same_v<T, ExponentialProduct>) {
          return m.signs[coord] > 0;
        } else if constexpr (std::is_same_v<T, GaussianDiagonal>) {
          return static_cast<bool>(m.nonneg[coord]);
        } else {
          static_assert(std::is_same_v<T, EmpiricalMeasure>);
          for (const Vec& s : m.samples)
            if (s[c] < 0.0) return false;
          return true;
        }
      },
      Q.value());
}

}  // namespace jdts
