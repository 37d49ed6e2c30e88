#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "jdts/curve_family.hpp"
#include "jdts/domain.hpp"
#include "jdts/errors.hpp"
#include "jdts/jump_measure.hpp"
#include "jdts/model.hpp"
#include "jdts/ode.hpp"

namespace jdts {

// --- basis -------------------------------------------------------------------

struct PhiFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

// State basis phi_0..phi_{m-1}: R^n -> R, with gradients and Hessians.
class PhiBasis {
 public:
  PhiBasis(std::vector<PhiFunction> fns, std::size_t state_dim)
      : fns_(std::move(fns)), n_(state_dim) {
    if (fns_.empty()) throw InvalidInput("basis: no functions");
    for (const auto& f : fns_)
      if (!f.value || !f.grad || !f.hess)
        throw InvalidInput("basis: every function needs value/grad/hess");
  }

  // phi_0 = 1, phi_k = x_k: the basis of affine term structures, m = n+1.
  static PhiBasis affine(std::size_t n) {
    std::vector<PhiFunction> fns;
    const auto ni = static_cast<Eigen::Index>(n);
    fns.push_back({[](const Vec&) { return 1.0; },
                   [ni](const Vec&) { return Vec::Zero(ni).eval(); },
                   [ni](const Vec&) { return Mat::Zero(ni, ni).eval(); }});
    for (Eigen::Index k = 0; k < ni; ++k)
      fns.push_back({[k](const Vec& x) { return x[k]; },
                     [k, ni](const Vec&) { return Vec::Unit(ni, k).eval(); },
                     [ni](const Vec&) { return Mat::Zero(ni, ni).eval(); }});
    return PhiBasis(std::move(fns), n);
  }

  std::size_t size() const { return fns_.size(); }
  std::size_t state_dim() const { return n_; }

  double value(std::size_t k, const Vec& x) const { return fns_[k].value(x); }
  Vec grad(std::size_t k, const Vec& x) const { return fns_[k].grad(x); }
  Mat hess(std::size_t k, const Vec& x) const { return fns_[k].hess(x); }

  Vec values(const Vec& x) const {
    Vec v(static_cast<Eigen::Index>(fns_.size()));
    for (std::size_t k = 0; k < fns_.size(); ++k)
      v[static_cast<Eigen::Index>(k)] = fns_[k].value(x);
    return v;
  }

 private:
  std::vector<PhiFunction> fns_;
  std::size_t n_;
};

// --- separable curve family ---------------------------------------------------

// value(tau, x) = sum_k h_k(tau) phi_k(x), with H_k the tau-antiderivative of
// h_k (H(0) = 0). The loading functions h, H come either from closed forms or
// from a solved loading path.
class SeparableFamily final : public CurveFamily {
 public:
  using LoadFn = std::function<Vec(double)>;  // tau -> R^m

  // tau_max bounds where the loadings may be evaluated; finite values make
  // the tau-derivative switch to one-sided stencils at the far end.
  SeparableFamily(PhiBasis phi, LoadFn h, LoadFn H, DomainBox box,
                  double tau_max = std::numeric_limits<double>::infinity())
      : phi_(std::move(phi)), h_(std::move(h)), H_(std::move(H)),
        box_(std::move(box)), tau_max_(tau_max) {
    if (box_.dim() != phi_.state_dim())
      throw InvalidInput("separable family: box/basis dimension mismatch");
    if (!h_ || !H_) throw InvalidInput("separable family: empty loadings");
    if (!(tau_max_ > 0.0)) throw InvalidInput("separable family: tau_max must be positive");
  }

  std::size_t dim() const override { return phi_.state_dim(); }
  const DomainBox& domain() const override { return box_; }
  const PhiBasis& basis() const { return phi_; }

  Vec h(double tau) const { return h_(tau); }
  Vec H(double tau) const { return H_(tau); }

  double value(double tau, const Vec& x) const override {
    return h_(tau).dot(phi_.values(x));
  }

  double dtau(double tau, const Vec& x) const override {
    const double e = 1e-6 * std::max(1.0, std::abs(tau));
    const Vec p = phi_.values(x);
    if (tau + e > tau_max_)
      return (3.0 * h_(tau).dot(p) - 4.0 * h_(tau - e).dot(p) +
              h_(tau - 2.0 * e).dot(p)) /
             (2.0 * e);
    if (tau >= e) return (h_(tau + e).dot(p) - h_(tau - e).dot(p)) / (2.0 * e);
    return (-3.0 * h_(tau).dot(p) + 4.0 * h_(tau + e).dot(p) -
            h_(tau + 2.0 * e).dot(p)) /
           (2.0 * e);
  }

  Vec grad(double tau, const Vec& x) const override {
    const Vec hv = h_(tau);
    Vec g = Vec::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t k = 0; k < phi_.size(); ++k)
      g += hv[static_cast<Eigen::Index>(k)] * phi_.grad(k, x);
    return g;
  }

  Mat hess(double tau, const Vec& x) const override {
    const Vec hv = h_(tau);
    const auto n = static_cast<Eigen::Index>(dim());
    Mat m = Mat::Zero(n, n);
    for (std::size_t k = 0; k < phi_.size(); ++k)
      m += hv[static_cast<Eigen::Index>(k)] * phi_.hess(k, x);
    return m;
  }

  double integral(double tau, const Vec& x) const override {
    return H_(tau).dot(phi_.values(x));
  }

  Vec grad_integral(double tau, const Vec& x) const override {
    const Vec Hv = H_(tau);
    Vec g = Vec::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t k = 0; k < phi_.size(); ++k)
      g += Hv[static_cast<Eigen::Index>(k)] * phi_.grad(k, x);
    return g;
  }

 private:
  PhiBasis phi_;
  LoadFn h_, H_;
  DomainBox box_;
  double tau_max_;
};

// --- pointwise building blocks -------------------------------------------------

// sum_k H_k d(phi_k)/dx_i at x.
inline double gamma_big(const SeparableFamily& family, const Vec& H_vals,
                        const Vec& x, std::size_t i) {
  const auto& phi = family.basis();
  if (static_cast<std::size_t>(H_vals.size()) != phi.size())
    throw InvalidInput("gamma_big: loading vector has wrong size");
  if (i >= phi.state_dim()) throw InvalidInput("gamma_big: index out of range");
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k)
    s += H_vals[static_cast<Eigen::Index>(k)] *
         phi.grad(k, x)[static_cast<Eigen::Index>(i)];
  return s;
}

// sum_k H_k d2(phi_k)/dx_i dx_j at x.
inline double lambda_big(const SeparableFamily& family, const Vec& H_vals,
                         const Vec& x, std::size_t i, std::size_t j) {
  const auto& phi = family.basis();
  if (static_cast<std::size_t>(H_vals.size()) != phi.size())
    throw InvalidInput("lambda_big: loading vector has wrong size");
  if (i >= phi.state_dim() || j >= phi.state_dim())
    throw InvalidInput("lambda_big: index out of range");
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k)
    s += H_vals[static_cast<Eigen::Index>(k)] *
         phi.hess(k, x)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return s;
}

namespace detail {
// int (1 - e^{-<v, phi(x+xi) - phi(x)>}) dQ for an explicit basis.
inline double psi_by_expect(const PhiBasis& phi, const JumpMeasure& Q, const Vec& v,
                            const Vec& x, double tol) {
  const Vec p0 = phi.values(x);
  try {
    return expect(
        Q,
        [&](const Vec& xi) {
          return -std::expm1(-v.dot(phi.values(x + xi) - p0));
        },
        tol);
  } catch (const DivergentIntegral& e) {
    throw RegularityError(std::string("jump functional diverges: ") + e.what());
  }
}
}  // namespace detail

// Jump functional of the separable consistency identity, evaluated by
// quadrature regardless of whether a closed form exists.
inline double psi_separable(const SeparableFamily& family, const JumpMeasure& Q,
                            const Vec& v, const Vec& x, double tol) {
  if (static_cast<std::size_t>(v.size()) != family.basis().size())
    throw InvalidInput("psi_separable: loading vector has wrong size");
  return detail::psi_by_expect(family.basis(), Q, v, x, tol);
}

// LHS - RHS of the integrated (in tau) consistency identity for separable
// curves:
//   sum_k (h_k(tau) - h_k(0)) phi_k(x)
//     - [ sum_i Gamma_i b_i + sum_ij a_ij (Lambda_ij - Gamma_i Gamma_j)
//         + lambda(x) Psi(H(tau), x) ].
// Its tau-derivative is the negative of the pointwise consistency residual.
inline double separable_residual(const JumpDiffusionModel& model,
                                 const SeparableFamily& family, double tau,
                                 const Vec& x, double tol) {
  if (model.dim() != family.dim())
    throw InvalidInput("separable_residual: model/family dimension mismatch");
  const Vec hv = family.h(tau);
  const Vec h0 = family.h(0.0);
  const Vec Hv = family.H(tau);
  const Vec p = family.basis().values(x);
  const double lhs = (hv - h0).dot(p);

  const auto n = static_cast<Eigen::Index>(model.dim());
  const Vec b = model.drift(x);
  const Mat a = model.a(x);
  Vec gam(n);
  for (Eigen::Index i = 0; i < n; ++i)
    gam[i] = gamma_big(family, Hv, x, static_cast<std::size_t>(i));
  double rhs = gam.dot(b);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rhs += a(i, j) * (lambda_big(family, Hv, x, static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j)) -
                        gam[i] * gam[j]);
  const double lam = model.intensity(x);
  if (lam != 0.0 && !model.jumps().is_dirac_zero())
    rhs += lam * psi_separable(family, model.jumps(), Hv, x, tol);
  return lhs - rhs;
}

// --- ODE systems ----------------------------------------------------------------

// Right-hand side R(v) of the loading ODE H' = R(H):
//   R_k(v) = theta_k + <beta_k, v> + v^T quad_k v + sum_l w_{k,l} Psi(v, x^l)
// quad_k is stored signed; Psi is evaluated by quadrature at the anchor x^l.
class GRESystem {
 public:
  GRESystem(Vec theta, Mat linear, std::vector<Mat> quadratic, Mat jump_weights,
            std::vector<Vec> anchors, PhiBasis phi, JumpMeasure jumps)
      : theta_(std::move(theta)),
        lin_(std::move(linear)),
        quad_(std::move(quadratic)),
        jw_(std::move(jump_weights)),
        anchors_(std::move(anchors)),
        phi_(std::make_shared<PhiBasis>(std::move(phi))),
        jumps_(std::move(jumps)) {
    const auto m = theta_.size();
    if (lin_.rows() != m || lin_.cols() != m)
      throw InvalidInput("loading system: linear part must be m-by-m");
    if (static_cast<Eigen::Index>(quad_.size()) != m)
      throw InvalidInput("loading system: one quadratic matrix per component");
    for (auto& q : quad_) {
      if (q.rows() != m || q.cols() != m)
        throw InvalidInput("loading system: quadratic matrices must be m-by-m");
      q = 0.5 * (q + q.transpose()).eval();
    }
    if (jw_.rows() != m ||
        jw_.cols() != static_cast<Eigen::Index>(anchors_.size()))
      throw InvalidInput("loading system: jump weight shape mismatch");
  }

  std::size_t size() const { return static_cast<std::size_t>(theta_.size()); }
  const Vec& theta() const { return theta_; }
  const Mat& linear() const { return lin_; }
  const std::vector<Mat>& quadratic() const { return quad_; }
  const Mat& jump_weights() const { return jw_; }
  const std::vector<Vec>& anchors() const { return anchors_; }
  const PhiBasis& basis() const { return *phi_; }
  const JumpMeasure& jumps() const { return jumps_; }

  double jump_tol() const { return jump_tol_; }
  void set_jump_tol(double tol) {
    if (!(tol > 0.0)) throw InvalidInput("loading system: tolerance must be positive");
    jump_tol_ = tol;
  }

  Vec rhs(const Vec& v) const { return rhs_with(jumps_, v); }

  Vec rhs_with(const JumpMeasure& Q, const Vec& v) const {
    Vec r = theta_ + lin_ * v;
    for (std::size_t k = 0; k < quad_.size(); ++k)
      r[static_cast<Eigen::Index>(k)] += v.dot(quad_[k] * v);
    if (!Q.is_dirac_zero() && jw_.cwiseAbs().maxCoeff() > 0.0) {
      for (std::size_t l = 0; l < anchors_.size(); ++l) {
        const auto lc = static_cast<Eigen::Index>(l);
        if (jw_.col(lc).cwiseAbs().maxCoeff() == 0.0) continue;
        const double psi = detail::psi_by_expect(*phi_, Q, v, anchors_[l], jump_tol_);
        r += jw_.col(lc) * psi;
      }
    }
    return r;
  }

 private:
  Vec theta_;
  Mat lin_;
  std::vector<Mat> quad_;
  Mat jw_;
  std::vector<Vec> anchors_;
  std::shared_ptr<PhiBasis> phi_;
  JumpMeasure jumps_;
  double jump_tol_ = 1e-11;
};

// Picks m anchor points from quasi-random candidates, greedily maximizing the
// smallest singular value of the basis matrix (phi_k(x^l)).
inline std::vector<Vec> select_anchors(const PhiBasis& phi, const DomainBox& box,
                                       std::size_t pool_size = 0) {
  const std::size_t m = phi.size();
  if (pool_size == 0) pool_size = 32 * m + 64;
  const std::vector<Vec> pool = probe_points(box, pool_size);
  std::vector<Vec> picked;
  std::vector<Vec> rows;  // phi values of picked points
  for (std::size_t step = 0; step < m; ++step) {
    double best = -1.0;
    std::size_t best_i = 0;
    Vec best_row;
    for (const Vec& cand : pool) {
      const Vec row = phi.values(cand);
      Mat trial(static_cast<Eigen::Index>(rows.size() + 1),
                static_cast<Eigen::Index>(m));
      for (std::size_t r = 0; r < rows.size(); ++r)
        trial.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
      trial.row(static_cast<Eigen::Index>(rows.size())) = row.transpose();
      Eigen::JacobiSVD<Mat> svd(trial);
      const double smin = svd.singularValues().minCoeff();
      if (smin > best) {
        best = smin;
        best_i = static_cast<std::size_t>(&cand - pool.data());
        best_row = row;
      }
    }
    picked.push_back(pool[best_i]);
    rows.push_back(best_row);
  }
  return picked;
}

namespace detail {
inline Mat pseudo_inverse_checked(const Mat& phi_mat, const char* where) {
  Eigen::JacobiSVD<Mat> svd(phi_mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 0.0) || sv.maxCoeff() / sv.minCoeff() >= 1e10)
    throw InvalidInput(std::string(where) +
                       ": anchor basis matrix is ill-conditioned; choose "
                       "different anchor points");
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}
}  // namespace detail

// Loading ODE for a general separable family: evaluate the identity at m
// anchor points and invert the basis matrix.
inline GRESystem build_ode_system(const SeparableFamily& family,
                                  const JumpDiffusionModel& model,
                                  const std::vector<Vec>& anchors, double tol) {
  const auto& phi = family.basis();
  const auto m = static_cast<Eigen::Index>(phi.size());
  if (static_cast<Eigen::Index>(anchors.size()) != m)
    throw InvalidInput("build_ode_system: need exactly one anchor per basis function");
  if (model.dim() != phi.state_dim())
    throw InvalidInput("build_ode_system: model/basis dimension mismatch");

  Mat phi_mat(m, m);
  for (Eigen::Index l = 0; l < m; ++l)
    phi_mat.row(l) = phi.values(anchors[static_cast<std::size_t>(l)]).transpose();
  const Mat phi_inv = detail::pseudo_inverse_checked(phi_mat, "build_ode_system");

  // drift+diffusion linear term B(l,k) and diffusion quadratic form A_l
  Mat bmat(m, m);
  std::vector<Mat> amats(static_cast<std::size_t>(m));
  Vec lam_at(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const Vec& xl = anchors[static_cast<std::size_t>(l)];
    const Vec b = model.drift(xl);
    const Mat a = model.a(xl);
    lam_at[l] = model.intensity(xl);
    Mat grads(static_cast<Eigen::Index>(phi.state_dim()), m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      grads.col(k) = phi.grad(ks, xl);
      bmat(l, k) =
          b.dot(grads.col(k)) + (a.array() * phi.hess(ks, xl).array()).sum();
    }
    amats[static_cast<std::size_t>(l)] = 2.0 * grads.transpose() * a * grads;
  }

  const Mat lin = phi_inv * bmat;
  std::vector<Mat> quad(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    Mat qk = Mat::Zero(m, m);
    for (Eigen::Index l = 0; l < m; ++l)
      qk -= 0.5 * phi_inv(k, l) * amats[static_cast<std::size_t>(l)];
    quad[static_cast<std::size_t>(k)] = qk;
  }
  Mat jw(m, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < m; ++l) jw(k, l) = phi_inv(k, l) * lam_at[l];

  GRESystem sys(family.h(0.0), lin, std::move(quad), jw, anchors, phi,
                model.jumps());
  sys.set_jump_tol(tol);
  return sys;
}

// Loading ODE for an affine model on the affine basis, read off directly from
// the coefficient tables; m = n+1, component 0 is the constant loading.
inline GRESystem build_gre(const JumpDiffusionModel& model, const JumpMeasure& Q,
                           const Vec& h0) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  const auto m = n + 1;
  if (h0.size() != m)
    throw InvalidInput("build_gre: need n+1 initial loading values");
  if (Q.dim() != model.dim())
    throw InvalidInput("build_gre: jump measure dimension mismatch");

  const auto b_aff = extract_affine(model.drift_fn(), model.domain());
  if (!b_aff) throw InvalidInput("build_gre: drift is not affine in the state");
  const auto lam_aff = extract_affine(model.intensity_fn(), model.domain());
  if (!lam_aff) throw InvalidInput("build_gre: intensity is not affine in the state");

  // a(x) decomposed as a0 + sum_r x_r a_r by probing the model's a()
  auto a_cf = CoefficientFunction::callable(
      [&model, n](const Vec& x) { return flatten(model.a(x)); },
      static_cast<std::size_t>(n * n), model.dim());
  const auto a_aff = extract_affine(a_cf, model.domain());
  if (!a_aff)
    throw InvalidInput("build_gre: diffusion matrix is not affine in the state");
  const Mat a0 = unflatten(a_aff->first, n, n);

  Mat lin = Mat::Zero(m, m);
  std::vector<Mat> quad(static_cast<std::size_t>(m), Mat::Zero(m, m));
  Mat jw = Mat::Zero(m, 1);

  // component 0 (constant basis function)
  lin.row(0).tail(n) = b_aff->first.transpose();
  quad[0].bottomRightCorner(n, n) = -0.5 * (a0 + a0.transpose());
  jw(0, 0) = lam_aff->first[0];

  for (Eigen::Index r = 0; r < n; ++r) {
    lin.row(r + 1).tail(n) = b_aff->second.col(r).transpose();
    const Mat ar = unflatten(a_aff->second.col(r), n, n);
    quad[static_cast<std::size_t>(r + 1)].bottomRightCorner(n, n) =
        -0.5 * (ar + ar.transpose());
    jw(r + 1, 0) = lam_aff->second(0, r);
  }

  std::vector<Vec> anchors{Vec::Zero(n)};
  return GRESystem(h0, lin, std::move(quad), jw, std::move(anchors),
                   PhiBasis::affine(model.dim()), Q);
}

// --- solved loading paths ---------------------------------------------------------

// H(tau) solving H' = R(H), H(0) = 0, together with h = R(H) evaluated through
// the system itself so h(0) = theta holds exactly.
class HPath {
 public:
  HPath(GRESystem system, DenseSolution solution, OdeStats stats)
      : sys_(std::make_shared<GRESystem>(std::move(system))),
        sol_(std::make_shared<DenseSolution>(std::move(solution))),
        stats_(stats) {}

  std::size_t size() const { return sys_->size(); }
  double tau_max() const { return sol_->t_max(); }
  const GRESystem& system() const { return *sys_; }
  const DenseSolution& solution() const { return *sol_; }
  const OdeStats& stats() const { return stats_; }

  Vec H(double tau) const { return sol_->eval(tau); }
  Vec h(double tau) const { return sys_->rhs(sol_->eval(tau)); }

 private:
  std::shared_ptr<const GRESystem> sys_;
  std::shared_ptr<const DenseSolution> sol_;
  OdeStats stats_;
};

// Integrates the loading ODE. The jump functional inside the right-hand side
// is quadrature-evaluated with tolerance abs_tol/10 so the ODE error budget
// stays dominant. Blow-up (|H| > 1e8) raises ExplosionError with tau reached.
inline HPath solve_gre(GRESystem system, const JumpMeasure& Q, double tau_max,
                       double rel_tol = 1e-10, double abs_tol = 1e-12,
                       double max_step = 0.05) {
  system.set_jump_tol(std::max(abs_tol / 10.0, 1e-15));
  OdeOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = abs_tol;
  opt.max_step = max_step;
  OdeStats stats;
  const auto m = static_cast<Eigen::Index>(system.size());
  auto rhs = [&system, &Q](double, const Vec& v) { return system.rhs_with(Q, v); };
  DenseSolution sol = solve_ode(rhs, Vec::Zero(m), tau_max, opt, &stats);
  // rebind the solved measure so h() evaluations keep using it
  GRESystem bound(system.theta(), system.linear(), system.quadratic(),
                  system.jump_weights(), system.anchors(), system.basis(), Q);
  bound.set_jump_tol(system.jump_tol());
  return HPath(std::move(bound), std::move(sol), stats);
}

// P(tau; x) = exp(-sum_k H_k(tau) phi_k(x)).
inline double bond_price(const HPath& path, const Vec& x, double tau) {
  if (tau < 0.0 || tau > path.tau_max() + 1e-12)
    throw InvalidInput("bond_price: maturity outside the solved range");
  if (tau == 0.0) return 1.0;
  return std::exp(-path.H(tau).dot(path.system().basis().values(x)));
}

struct YieldCurve {
  std::vector<double> tau;
  std::vector<double> price;
  std::vector<double> yield;
};

// Continuously-compounded yields y = -ln P / tau; at tau = 0 the limit is the
// short rate sum_k h_k(0) phi_k(x).
inline YieldCurve yield_curve(const HPath& path, const Vec& x,
                              const std::vector<double>& tau_grid) {
  YieldCurve out;
  const Vec p = path.system().basis().values(x);
  for (double tau : tau_grid) {
    const double price = bond_price(path, x, tau);
    out.tau.push_back(tau);
    out.price.push_back(price);
    out.yield.push_back(tau == 0.0 ? path.h(0.0).dot(p) : -std::log(price) / tau);
  }
  return out;
}

// Separable family whose loadings come from a solved path.
inline SeparableFamily family_from_path(const HPath& path, DomainBox box) {
  return SeparableFamily(
      path.system().basis(), [path](double tau) { return path.h(tau); },
      [path](double tau) { return path.H(tau); }, std::move(box),
      path.tau_max());
}

// Consistency identity residual with loadings taken from a solved path;
// near zero exactly when the path solves the loading ODE for this model.
inline double affine_consistency_residual(const JumpDiffusionModel& model,
                                          const HPath& path, const Vec& x,
                                          double tau, double tol = 1e-10) {
  return separable_residual(model, family_from_path(path, model.domain()), tau,
                            x, tol);
}

}  // namespace jdts
