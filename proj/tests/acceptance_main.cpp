// Acceptance gate: one line per criterion, PASS/FAIL plus the measured
// values. Exit status is the number of failed criteria so the suite can run
// under ctest. Stochastic criteria follow a three-seed retry rule: a pass on
// any of three fixed seeds counts, and every attempt is reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jdts/consistency.hpp"
#include "jdts/io.hpp"
#include "jdts/nelson_siegel.hpp"
#include "jdts/presets.hpp"
#include "jdts/separable.hpp"
#include "jdts/simulate.hpp"
#include "oracles.hpp"

using namespace jdts;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::string g_q_table;

void report(int k, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", k,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void guarded(int k, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    auto [pass, detail] = fn();
    report(k, pass, detail);
  } catch (const std::exception& e) {
    report(k, false, std::string("unexpected error: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

HPath solve_preset(const Preset& p, double tau_max) {
  auto sys = build_gre(p.model, p.model.jumps(), [&] {
    Vec h0 = Vec::Zero(static_cast<Eigen::Index>(p.model.dim()) + 1);
    h0[1] = 1.0;
    return h0;
  }());
  return solve_gre(std::move(sys), p.model.jumps(), tau_max);
}

NSState random_ns_state(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> us(0.05, 3.0);
  return {0.05 * u(eng), 0.04 * u(eng), 0.04 * u(eng), us(eng)};
}

Mat random_psd4(std::mt19937_64& eng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec c(4);
  for (Eigen::Index i = 0; i < 4; ++i) c[i] = scale * u(eng);
  return 0.5 * c * c.transpose();
}

// --------------------------------------------------------------------------

std::pair<bool, std::string> criterion_1() {
  const double kappa = 0.5;
  Preset p = load_preset("vasicek");
  const auto t0 = Clock::now();
  HPath path = solve_preset(p, 30.0);
  const double dt_solve = seconds_since(t0);
  double worst = 0.0;
  for (int i = 0; i <= 3000; ++i) {
    const double tau = 0.01 * i;
    worst = std::max(worst,
                     std::abs(path.H(tau)[1] - oracle::ou_B(kappa, tau)));
  }
  const bool pass = worst < 1e-8 && dt_solve < 1.0;
  return {pass, "mean-reversion level loading: max abs err " + fmt(worst) +
                    " (< 1e-8), solve time " + fmt(dt_solve) + " s (< 1 s)"};
}

std::pair<bool, std::string> criterion_2() {
  const double lam0 = 0.5, theta = 40.0;
  Preset p = load_preset("pure-jump");
  HPath path = solve_preset(p, 30.0);
  double worst = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double tau = 0.1 * i;
    worst = std::max(
        worst, std::abs(path.H(tau)[0] - oracle::pure_jump_H0(lam0, theta, tau)));
  }
  // the closed form itself is cross-checked by quadrature of its derivative
  double worst_quad = 0.0;
  for (double tau : {1.0, 7.5, 30.0}) {
    const double by_quad = oracle::romberg(
        [&](double s) { return lam0 * s / (theta + s); }, 0.0, tau, 1e-13);
    worst_quad = std::max(
        worst_quad, std::abs(by_quad - oracle::pure_jump_H0(lam0, theta, tau)));
  }
  const bool pass = worst < 1e-8 && worst_quad < 1e-9;
  return {pass, "pure-jump level loading: max abs err " + fmt(worst) +
                    " (< 1e-8), oracle quadrature gap " + fmt(worst_quad) +
                    " (< 1e-9)"};
}

std::pair<bool, std::string> criterion_3() {
  double worst = 0.0;
  std::string worst_name = "-";
  for (const char* name : {"vasicek", "cir-like", "jump-vasicek"}) {
    Preset p = load_preset(name);
    HPath path = solve_preset(p, 30.0);
    SeparableFamily fam = family_from_path(path, p.model.domain());
    ResidualReport rep = residual_report(p.model, fam);
    if (!rep.failures.empty())
      return {false, std::string("residual evaluation failed for ") + name +
                         ": " + rep.failures.front().what};
    if (rep.max_abs > worst) {
      worst = rep.max_abs;
      worst_name = name;
    }
  }
  return {worst < 1e-6, "solved-family residual: worst max-abs " + fmt(worst) +
                            " (" + worst_name + ", < 1e-6)"};
}

std::pair<bool, std::string> criterion_4() {
  // diffusion-only round trip; an exponential reference measure keeps the
  // jump column alive so lambda = 0 is identified
  Preset v = load_preset("vasicek");
  HPath vp = solve_preset(v, 13.0);
  SeparableFamily vf = family_from_path(vp, v.model.domain());
  std::vector<double> taus;
  for (int i = 1; i <= 12; ++i) taus.push_back(0.9 * i);
  auto rd = recover_coefficients(vf, JumpMeasure::exponential_product([] {
                                   Vec r(1);
                                   r << 40.0;
                                   return r;
                                 }()),
                                 v.x0, taus, 1e-11);
  const double true_b = 0.5 * (0.04 - v.x0[0]);
  const double err_d = std::max({std::abs(rd.b[0] - true_b),
                                 std::abs(rd.a(0, 0) - 0.5 * 0.02 * 0.02),
                                 std::abs(rd.lambda)});

  Preset j = load_preset("jump-vasicek");
  HPath jp = solve_preset(j, 13.0);
  SeparableFamily jf = family_from_path(jp, j.model.domain());
  std::vector<double> taus2;
  for (int i = 1; i <= 14; ++i) taus2.push_back(0.8 * i);
  auto rj = recover_coefficients(jf, j.model.jumps(), j.x0, taus2, 1e-11);
  const double true_bj = 0.5 * (0.06 - j.x0[0]);
  const double err_j = std::max({std::abs(rj.b[0] - true_bj),
                                 std::abs(rj.a(0, 0) - 0.5 * 0.015 * 0.015),
                                 std::abs(rj.lambda - 0.3)});

  std::vector<AffineClosedFormCurve::TauFn> h{[](double) { return 0.0; },
                                              [](double) { return 1.0; }};
  std::vector<AffineClosedFormCurve::TauFn> H{[](double) { return 0.0; },
                                              [](double tau) { return tau; }};
  AffineClosedFormCurve flat(std::move(h), std::move(H), DomainBox::unbounded(1));
  Vec x(1);
  x << 0.05;
  auto rf = recover_coefficients(flat, JumpMeasure::dirac_zero(1), x,
                                 {0.5, 1.0, 1.5, 2.0, 3.0, 4.0});

  const bool pass = err_d < 1e-6 && !rd.rank_deficient && err_j < 1e-4 &&
                    !rj.rank_deficient && rf.rank_deficient;
  return {pass, "recovery: diffusion-only err " + fmt(err_d) +
                    " (< 1e-6), with jumps err " + fmt(err_j) +
                    " (< 1e-4), flat curve rank-deficient " +
                    (rf.rank_deficient ? "yes" : "NO")};
}

std::pair<bool, std::string> criterion_5() {
  std::ostringstream detail;
  detail << "mc vs solved price:";
  bool pass = true;
  for (const char* name : {"vasicek", "jump-vasicek"}) {
    Preset p = load_preset(name);
    HPath path = solve_preset(p, 5.0);
    const double ref = bond_price(path, p.x0, 5.0);
    bool case_ok = false;
    double worst_time = 0.0, last_z = 0.0;
    int attempts = 0;
    for (std::uint64_t seed : {101u, 102u, 103u}) {
      ++attempts;
      const auto t0 = Clock::now();
      MCEstimate est = mc_bond_price(
          p.model, [](const Vec& s) { return s[0]; }, p.x0, 5.0, 1e-3, 100000,
          seed);
      const double dt_run = seconds_since(t0);
      worst_time = std::max(worst_time, dt_run);
      last_z = (est.mean - ref) / est.std_error;
      if (dt_run >= 60.0) break;
      if (std::abs(est.mean - ref) <= 3.0 * est.std_error) {
        case_ok = true;
        break;
      }
    }
    pass = pass && case_ok && worst_time < 60.0;
    detail << " " << name << " z=" << fmt(last_z) << " (|z|<=3) in "
           << fmt(worst_time) << " s (< 60) after " << attempts
           << (attempts == 1 ? " seed;" : " seeds;");
  }
  return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_6() {
  Preset p = load_preset("vasicek");
  HPath path = solve_preset(p, 2.0);
  SeparableFamily fam = family_from_path(path, p.model.domain());

  bool clean_ok = false;
  double clean_z = 0.0;
  int attempts = 0;
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    ++attempts;
    MartingaleReport rep =
        martingale_test(p.model, fam, p.x0, 1.0, 2.0, 1e-3, 100000, seed);
    clean_z = rep.z;
    if (std::abs(rep.z) < 3.0) {
      clean_ok = true;
      break;
    }
  }

  const auto& d = p.model.drift_fn();
  Vec c0 = d.constant_part();
  c0[0] += 0.01;
  auto biased_drift = CoefficientFunction::affine(c0, d.linear_part());
  auto biased = JumpDiffusionModel::with_c(p.model.domain(), biased_drift,
                                           *p.model.c_fn(), p.model.intensity_fn(),
                                           p.model.jumps());
  MartingaleReport bad =
      martingale_test(biased, fam, p.x0, 1.0, 2.0, 1e-3, 100000, 7u);

  const bool pass = clean_ok && std::abs(bad.z) > 5.0;
  std::ostringstream detail;
  detail << "martingale: consistent |z|=" << fmt(std::abs(clean_z)) << " (< 3, "
         << attempts << (attempts == 1 ? " seed)" : " seeds)")
         << ", biased drift |z|=" << fmt(std::abs(bad.z)) << " (> 5)";
  return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_7() {
  std::mt19937_64 eng(20260816);
  std::uniform_real_distribution<double> ut(1e-3, 30.0);
  double worst_fd = 0.0;
  for (int k = 0; k < 100; ++k) {
    const NSState s = random_ns_state(eng);
    const double tau = ut(eng);
    const Vec x = s.vec();
    worst_fd = std::max(
        worst_fd,
        std::abs(oracle::cdiff([&](double t) { return ns_G(s, t); }, tau) -
                 ns_dtau(s, tau)));
    const Vec g = ns_grad(s, tau);
    const Mat h = ns_hess(s, tau);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const auto gi = [&](double xi) {
        Vec y = x;
        y[i] = xi;
        return ns_G(NSState::from_vec(y), tau);
      };
      worst_fd = std::max(worst_fd, std::abs(oracle::cdiff(gi, x[i]) - g[i]));
      for (Eigen::Index jj = 0; jj < 4; ++jj) {
        const auto gj = [&](double xj) {
          Vec y = x;
          y[jj] = xj;
          return ns_grad(NSState::from_vec(y), tau)[i];
        };
        worst_fd =
            std::max(worst_fd, std::abs(oracle::cdiff(gj, x[jj]) - h(i, jj)));
      }
    }
  }

  std::uniform_real_distribution<double> uq(0.1, 20.0);
  double worst_quad = 0.0;
  for (int k = 0; k < 500; ++k) {
    const NSState s = random_ns_state(eng);
    const double tau = uq(eng);
    const double by_quad =
        oracle::romberg([&](double u) { return ns_G(s, u); }, 0.0, tau, 1e-13);
    worst_quad = std::max(worst_quad, std::abs(by_quad - ns_integral(s, tau)));
    const Vec ig = ns_grad_integral(s, tau);
    const Eigen::Index i = static_cast<Eigen::Index>(k % 4);
    const double gq = oracle::romberg(
        [&](double u) { return ns_grad(s, u)[i]; }, 0.0, tau, 1e-13);
    worst_quad = std::max(worst_quad, std::abs(gq - ig[i]));
  }

  const bool pass = worst_fd < 1e-6 && worst_quad < 1e-9;
  return {pass, "curve closed forms: fd gap " + fmt(worst_fd) +
                    " on 100 probes (< 1e-6), quadrature gap " + fmt(worst_quad) +
                    " on 500 probes (< 1e-9)"};
}

std::pair<bool, std::string> criterion_8() {
  std::mt19937_64 eng(88);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool anchors_exact = true;
  for (int k = 0; k < 20; ++k) {
    const NSState s = random_ns_state(eng);
    const Mat a = random_psd4(eng, 0.5);
    Vec b(4);
    for (Eigen::Index i = 0; i < 4; ++i) b[i] = 0.05 * u(eng);
    const NSQCoefficients q = ns_q_verified(s, a, b);
    if (q.q0_1 != 2.0 * a(0, 0)) anchors_exact = false;
    if (q.q2_4 != -2.0 * a(3, 3) * s.x3 * s.x3 / s.x4) anchors_exact = false;
  }

  const NSState s{0.03, -0.01, 0.02, 0.5};
  Mat a(4, 4);
  a << 0.4, 0.1, -0.2, 0.3, 0.1, 0.5, 0.2, -0.1, -0.2, 0.2, 0.6, 0.1, 0.3,
      -0.1, 0.1, 0.7;
  Vec b(4);
  b << 0.02, -0.01, 0.03, 0.015;
  const auto table = ns_q_discrepancies(s, a, b);
  int differing = 0;
  for (const auto& row : table)
    if (row.abs_diff > 1e-12) ++differing;

  const bool pass = anchors_exact && differing == 7;
  std::ostringstream detail;
  detail << "band coefficient anchors exact at 20 random draws: "
         << (anchors_exact ? "yes" : "NO") << "; printed set differs in "
         << differing << " of " << table.size()
         << " entries (documented: 7 expected)";
  std::ostringstream dump;
  dump << "       printed-vs-verified table at a generic probe:\n";
  for (const auto& row : table) {
    char line[160];
    std::snprintf(line, sizeof line,
                  "         %-5s printed % .6e  verified % .6e  |diff| %.3e\n",
                  row.name.c_str(), row.paper, row.verified, row.abs_diff);
    dump << line;
  }
  g_q_table = dump.str();
  return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_9() {
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  Vec lo(4), hi(4);
  lo << -inf, -inf, -inf, 1e-4;
  hi << inf, inf, inf, inf;
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

  double min_of_max = inf;
  int inconsistent = 0;
  for (int k = 0; k < 50; ++k) {
    Mat a = random_psd4(eng, 0.1);
    if (a.norm() < 1e-3) a *= 1e-3 / a.norm();
    Vec b(4);
    for (Eigen::Index i = 0; i < 4; ++i) b[i] = 0.05 * u(eng);
    auto model = JumpDiffusionModel::with_a(
        DomainBox(lo, hi), CoefficientFunction::constant(b, 4),
        CoefficientFunction::constant(flatten(a), 4),
        CoefficientFunction::constant(Vec::Zero(1), 4),
        JumpMeasure::dirac_zero(4));
    std::vector<NSState> states{random_ns_state(eng), random_ns_state(eng)};
    NSScanReport rep = ns_impossibility_scan(model, states, grid, 1e-6);
    if (!rep.consistent) ++inconsistent;
    min_of_max = std::min(min_of_max, rep.max_residual);
  }

  Preset fitted = load_preset("ns-trivial");
  std::vector<NSState> states{{0.03, -0.01, 0.02, 0.5}, {0.05, 0.015, -0.01, 1.2}};
  NSScanReport triv = ns_impossibility_scan(fitted.model, states, grid, 1e-6);

  const bool pass = inconsistent == 50 && min_of_max > 1e-4 &&
                    triv.consistent && triv.trivial_dynamics &&
                    triv.max_residual < 1e-8;
  std::ostringstream detail;
  detail << "diffusive scan: " << inconsistent
         << "/50 inconsistent, smallest max-residual " << fmt(min_of_max)
         << " (> 1e-4); fitted deterministic scan max " << fmt(triv.max_residual)
         << " (< 1e-8, verdict " << triv.verdict() << ")";
  return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_10() {
  HJMInputs a;
  a.sigma = [](double, double) { return 0.2; };
  a.rate = 0.0;
  const double da = hjm_drift(a, 1.0, 4.0);
  const double ea = 0.2 * 0.2 * 3.0;

  HJMInputs b;
  b.sigma = [](double, double) { return 0.0; };
  b.rho = [](double, double, const Vec&) { return 0.3; };
  b.rate = 1.5;
  b.marks = JumpMeasure::dirac_zero(1);
  const double db = hjm_drift(b, 1.0, 4.0);
  const double eb = -1.5 * 0.3 * std::exp(-0.3 * 3.0);

  const double worst = std::max(std::abs(da - ea), std::abs(db - eb));
  return {worst < 1e-10, "forward drift analytic cases: max abs err " +
                             fmt(worst) + " (< 1e-10)"};
}

std::pair<bool, std::string> criterion_11() {
  Preset p = load_preset("jump-vasicek");
  auto render = [&] {
    std::ostringstream path_csv, verdict;
    SimPath path = simulate_state(p.model, p.x0, 2.0, 0.01, 2024);
    write_path_csv(path_csv, path);
    MCEstimate est = mc_bond_price(
        p.model, [](const Vec& s) { return s[0]; }, p.x0, 2.0, 0.01, 500, 2024);
    verdict << mc_estimate_json(est);
    HPath hp = solve_preset(p, 5.0);
    SeparableFamily fam = family_from_path(hp, p.model.domain());
    ResidualReport rep = residual_report(p.model, fam);
    verdict << "\n" << residual_json(rep, 1e-6);
    return path_csv.str() + "\n" + verdict.str();
  };
  const std::string first = render();
  const std::string second = render();
  const bool pass = first == second && !first.empty();
  return {pass, "determinism: two fixed-seed renders compare " +
                    std::string(pass ? "byte-identical" : "DIFFERENT") + " (" +
                    std::to_string(first.size()) + " bytes)"};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(8, criterion_8);
  std::fputs(g_q_table.c_str(), stdout);
  guarded(9, criterion_9);
  guarded(10, criterion_10);
  guarded(11, criterion_11);
  std::printf("%d of 11 criteria failed (total %.1f s)\n", g_failures,
              seconds_since(t0));
  return g_failures;
}
