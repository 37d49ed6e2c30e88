#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "jdts/model.hpp"

using jdts::CoefficientFunction;
using jdts::DomainBox;
using jdts::JumpDiffusionModel;
using jdts::JumpMeasure;
using jdts::Mat;
using jdts::Vec;

TEST_CASE("half c c^T in hand-checked cases", "[model]") {
  CHECK(jdts::make_diffusion_matrix(Mat::Zero(2, 2)).isZero(0.0));
  CHECK(jdts::make_diffusion_matrix(Mat::Identity(2, 2))
            .isApprox(0.5 * Mat::Identity(2, 2), 1e-15));

  Mat c(2, 2);
  c << 2, 0, 1, 1;
  Mat expected(2, 2);
  expected << 2, 1, 1, 1;
  CHECK(jdts::make_diffusion_matrix(c).isApprox(expected, 1e-15));

  Mat bad(2, 2);
  bad << 1, 0, 0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(jdts::make_diffusion_matrix(bad), jdts::InvalidInput);
  CHECK_THROWS_AS(jdts::make_diffusion_matrix(Mat::Zero(2, 3)), jdts::InvalidInput);
}

TEST_CASE("coefficient functions evaluate and validate", "[model]") {
  Vec c0(2);
  c0 << 1.0, -0.5;
  Mat c1(2, 2);
  c1 << 0.0, 2.0, 3.0, 0.0;
  auto aff = CoefficientFunction::affine(c0, c1);
  Vec x(2);
  x << 0.25, -1.0;
  Vec y = aff(x);
  CHECK(y[0] == Catch::Approx(1.0 - 2.0).margin(1e-15));
  CHECK(y[1] == Catch::Approx(-0.5 + 0.75).margin(1e-15));
  CHECK(aff.is_affine());

  auto call = CoefficientFunction::callable(
      [](const Vec& z) { return Vec::Constant(1, z.squaredNorm()); }, 1, 2);
  CHECK(call(x)[0] == Catch::Approx(0.0625 + 1.0).margin(1e-15));
  CHECK_FALSE(call.is_affine());
  CHECK_THROWS_AS(call.constant_part(), jdts::InvalidInput);

  Vec wrong(3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(aff(wrong), jdts::InvalidInput);
}

TEST_CASE("affine structure is recovered from affine callables only", "[model]") {
  DomainBox box((Vec(2) << -1.0, 0.0).finished(), (Vec(2) << 1.0, 2.0).finished());
  auto hidden = CoefficientFunction::callable(
      [](const Vec& z) {
        Vec y(2);
        y << 3.0 + 2.0 * z[0] - z[1], -1.0 + 0.5 * z[1];
        return y;
      },
      2, 2);
  auto got = jdts::extract_affine(hidden, box);
  REQUIRE(got.has_value());
  CHECK(got->first[0] == Catch::Approx(3.0).margin(1e-9));
  CHECK(got->first[1] == Catch::Approx(-1.0).margin(1e-9));
  CHECK(got->second(0, 0) == Catch::Approx(2.0).margin(1e-9));
  CHECK(got->second(0, 1) == Catch::Approx(-1.0).margin(1e-9));
  CHECK(got->second(1, 0) == Catch::Approx(0.0).margin(1e-9));
  CHECK(got->second(1, 1) == Catch::Approx(0.5).margin(1e-9));

  auto quad = CoefficientFunction::callable(
      [](const Vec& z) { return Vec::Constant(1, z[0] * z[0]); }, 1, 2);
  CHECK_FALSE(jdts::extract_affine(quad, box).has_value());
}

namespace {
JumpDiffusionModel ou_model(double kappa, double mu, double sigma) {
  DomainBox box((Vec(1) << -0.5).finished(), (Vec(1) << 1.0).finished());
  auto drift = CoefficientFunction::affine(Vec::Constant(1, kappa * mu),
                                           Mat::Constant(1, 1, -kappa));
  auto diff = CoefficientFunction::constant(Vec::Constant(1, sigma), 1);
  auto lam = CoefficientFunction::constant(Vec::Zero(1), 1);
  return JumpDiffusionModel::with_c(box, drift, diff, lam,
                                    JumpMeasure::dirac_zero(1));
}
}  // namespace

TEST_CASE("model validation accepts mean reversion, rejects bad inputs", "[model]") {
  auto m = ou_model(0.5, 0.04, 0.02);
  Vec x(1);
  x << 0.03;
  CHECK(m.drift(x)[0] == Catch::Approx(0.5 * (0.04 - 0.03)).margin(1e-15));
  CHECK(m.a(x)(0, 0) == Catch::Approx(0.5 * 0.02 * 0.02).margin(1e-18));
  CHECK(m.intensity(x) == 0.0);

  DomainBox box((Vec(1) << -0.5).finished(), (Vec(1) << 1.0).finished());
  auto drift = CoefficientFunction::constant(Vec::Zero(1), 1);
  auto lam_ok = CoefficientFunction::constant(Vec::Constant(1, 0.3), 1);

  // negative definite a
  auto a_bad = CoefficientFunction::constant(Vec::Constant(1, -1.0), 1);
  CHECK_THROWS_AS(JumpDiffusionModel::with_a(box, drift, a_bad, lam_ok,
                                             JumpMeasure::dirac_zero(1)),
                  jdts::DomainViolation);

  // intensity dips below zero inside the box
  auto lam_bad = CoefficientFunction::affine(Vec::Zero(1), Mat::Constant(1, 1, 1.0));
  auto c_ok = CoefficientFunction::constant(Vec::Constant(1, 0.1), 1);
  CHECK_THROWS_AS(JumpDiffusionModel::with_c(box, drift, c_ok, lam_bad,
                                             JumpMeasure::dirac_zero(1)),
                  jdts::DomainViolation);

  // jump dimension mismatch
  CHECK_THROWS_AS(JumpDiffusionModel::with_c(box, drift, c_ok, lam_ok,
                                             JumpMeasure::dirac_zero(2)),
                  jdts::InvalidInput);
}

TEST_CASE("state-dependent volatility round-trips through a and c", "[model]") {
  // a(x) = a0 + x1 * a1, positive on the box
  DomainBox box((Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 1.0).finished());
  Mat a0(2, 2), a1(2, 2);
  a0 << 0.02, 0.005, 0.005, 0.03;
  a1 << 0.01, 0.0, 0.0, 0.0;
  Mat lin(4, 2);
  lin.setZero();
  lin.col(0) = jdts::flatten(a1);
  auto a_fn = CoefficientFunction::affine(jdts::flatten(a0), lin);
  auto drift = CoefficientFunction::constant(Vec::Zero(2), 2);
  auto lam = CoefficientFunction::constant(Vec::Zero(1), 2);
  auto m = JumpDiffusionModel::with_a(box, drift, a_fn, lam,
                                      JumpMeasure::dirac_zero(2));

  jdts::LowDiscrepancy seq(2);
  for (int i = 0; i < 10; ++i) {
    Vec x = seq.next_in(box);
    const Mat a = m.a(x);
    const Mat c = m.c(x);
    CHECK((0.5 * c * c.transpose() - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a - (a0 + x[0] * a1)).cwiseAbs().maxCoeff() < 1e-14);
  }
}
