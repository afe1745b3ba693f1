#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvmix/spin_model.hpp"
#include "oracles.hpp"

using namespace nvmix;

namespace {

NVSpinModel model_at(double b0_tesla) {
  NVSpinModel m;
  m.magnetic_field_B0 = b0_tesla;
  return m;
}

}  // namespace

TEST_CASE("physical constants are consistent") {
  PhysicalConstants c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.h_planck == doctest::Approx(kTwoPi * c.hbar).epsilon(1e-13));
  CHECK(c.h_ev_s() == doctest::Approx(4.135667696923859e-15).epsilon(1e-12));

  PhysicalConstants broken = c;
  broken.hbar *= 1.0 + 1e-9;
  CHECK_THROWS_AS(broken.validate(), PreconditionError);
  broken = c;
  broken.c_light = -1.0;
  CHECK_THROWS_AS(broken.validate(), PreconditionError);
}

TEST_CASE("transition frequencies") {
  SUBCASE("zero field is degenerate at D") {
    const auto f = transition_frequencies(model_at(0.0));
    CHECK(f.f_minus_hz == doctest::Approx(2.87e9).epsilon(1e-15));
    CHECK(f.f_plus_hz == doctest::Approx(2.87e9).epsilon(1e-15));
    CHECK_FALSE(f.off_branch);
  }
  SUBCASE("51 mT operating point") {
    const auto f = transition_frequencies(model_at(0.051));
    CHECK(f.f_minus_hz == doctest::Approx(1.4407274773658e9).epsilon(1e-12));
    CHECK(f.f_plus_hz == doctest::Approx(4.2992725226342e9).epsilon(1e-12));
    CHECK(f.f_minus_hz == doctest::Approx(1.441e9).epsilon(2e-4));
    CHECK(f.f_plus_hz == doctest::Approx(4.299e9).epsilon(2e-4));
    CHECK(f.f_plus_hz >= f.f_minus_hz);
  }
  SUBCASE("level crossing field") {
    const double b_cross = 2.87 / 28.0249514242;  // ~102.4 mT
    CHECK(b_cross == doctest::Approx(0.1024).epsilon(1e-3));
    const auto f = transition_frequencies(model_at(b_cross));
    CHECK(std::abs(f.f_minus_hz) < 1.0);
    const auto beyond = transition_frequencies(model_at(b_cross * 1.01));
    CHECK(beyond.off_branch);
    CHECK(beyond.f_minus_hz < 0.0);
  }
  SUBCASE("invalid models are rejected") {
    NVSpinModel bad;
    bad.zero_field_splitting_D = 0.0;
    CHECK_THROWS_AS(transition_frequencies(bad), PreconditionError);
    bad = model_at(-0.01);
    CHECK_THROWS_AS(transition_frequencies(bad), PreconditionError);
  }
}

TEST_CASE("sensitivity coefficients") {
  SUBCASE("51 mT reproduces the (7, 4) pair") {
    const auto k = sensitivity_coefficients(model_at(0.051));
    CHECK(k.k_alpha == doctest::Approx(6.976149).epsilon(1e-5));
    CHECK(k.k_me == doctest::Approx(3.976149).epsilon(1e-5));
    CHECK(k.k_alpha == doctest::Approx(7.0).epsilon(7.5e-3));
    CHECK(k.k_me == doctest::Approx(4.0).epsilon(7.5e-3));
    CHECK(k.k_alpha / k.k_me == doctest::Approx(1.7545).epsilon(1e-3));
  }
  SUBCASE("matches the finite-difference log-derivative oracle") {
    for (double b0 : {0.0, 0.011, 0.0255, 0.051, 0.08}) {
      const auto m = model_at(b0);
      const auto k = sensitivity_coefficients(m);
      oracles::PowerLawLevel lvl{m.zero_field_splitting_D, m.zeeman_angular(),
                                 -1.0};
      CHECK(k.k_alpha == doctest::Approx(lvl.k_alpha_fd()).epsilon(1e-8));
      CHECK(k.k_me == doctest::Approx(lvl.k_me_fd()).epsilon(1e-8));
    }
  }
  SUBCASE("25.5 mT closed form") {
    const auto k = sensitivity_coefficients(model_at(0.0255));
    CHECK(k.k_alpha == doctest::Approx(4.9947).epsilon(1e-4));
    CHECK(k.k_me == doctest::Approx(1.9947).epsilon(1e-4));
  }
  SUBCASE("zero field reduces to the bare exponents") {
    const auto k = sensitivity_coefficients(model_at(0.0));
    CHECK(k.k_alpha == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(k.k_me == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("k_alpha - k_me = 3 on the minus branch") {
    // (4D - Z) - (D + 2Z) = 3 (D - Z): the difference is field independent.
    for (double b0 : {0.0, 0.02, 0.051, 0.09}) {
      const auto k = sensitivity_coefficients(model_at(b0));
      CHECK(k.k_alpha - k.k_me == doctest::Approx(3.0).epsilon(1e-12));
    }
  }
  SUBCASE("plus branch flips the Zeeman sign") {
    const auto k = sensitivity_coefficients(model_at(0.051), {}, Branch::Plus);
    const double d = kTwoPi * 2.87e9;
    const double z = model_at(0.051).zeeman_angular();
    CHECK(k.k_alpha == doctest::Approx((4 * d + z) / (d + z)).epsilon(1e-12));
    CHECK(k.k_me == doctest::Approx((d - 2 * z) / (d + z)).epsilon(1e-12));
  }
  SUBCASE("degenerate branch throws near the crossing") {
    const double b_cross = 2.87 / 28.0249514242;
    CHECK_THROWS_AS(sensitivity_coefficients(model_at(b_cross * 0.9999)),
                    DegenerateBranch);
    // plus branch stays regular there
    CHECK_NOTHROW(
        sensitivity_coefficients(model_at(b_cross * 0.9999), {}, Branch::Plus));
  }
  SUBCASE("ratio invariant under common rescale of D and B0") {
    NVSpinModel a = model_at(0.051);
    NVSpinModel b = a;
    b.zero_field_splitting_D *= 3.7;
    b.magnetic_field_B0 *= 3.7;
    const auto ka = sensitivity_coefficients(a);
    const auto kb = sensitivity_coefficients(b);
    CHECK(ka.k_alpha / ka.k_me ==
          doctest::Approx(kb.k_alpha / kb.k_me).epsilon(1e-12));
    CHECK(ka.k_alpha == doctest::Approx(kb.k_alpha).epsilon(1e-12));
  }
  SUBCASE("custom exponents pass through") {
    ScalingExponents exps{2.0, 0.5, 0.0, 0.0};
    const auto k = sensitivity_coefficients(model_at(0.0), exps);
    CHECK(k.k_alpha == doctest::Approx(2.0));
    CHECK(k.k_me == doctest::Approx(0.5));
  }
}

TEST_CASE("level shift amplitude") {
  const auto model = model_at(0.051);
  const auto coeffs = sensitivity_coefficients(model);
  const double omega_s = kTwoPi * transition_frequency_hz(model, Branch::Minus);

  SUBCASE("zero variation gives zero shift") {
    CHECK(level_shift_amplitude(model, coeffs, 0.0, 0.0) == 0.0);
  }
  SUBCASE("ppm-level alpha variation") {
    const double ds = level_shift_amplitude(model, coeffs, 1e-6, 0.0);
    CHECK(ds == doctest::Approx(coeffs.k_alpha * 1e-6 * omega_s).epsilon(1e-14));
    CHECK(ds / kTwoPi == doctest::Approx(10.0507e3).epsilon(1e-4));
    CHECK(ds / kTwoPi == doctest::Approx(10.06e3).epsilon(2e-3));
  }
  SUBCASE("paired 5 ppm / 8.7 ppm variations nearly coincide") {
    const double da = level_shift_amplitude(model, coeffs, 5e-6, 0.0);
    const double dm = level_shift_amplitude(model, coeffs, 0.0, 8.7e-6);
    CHECK(da == doctest::Approx(dm).epsilon(1e-2));
  }
  SUBCASE("linear superposition") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-5e-3, 5e-3);
    for (int i = 0; i < 50; ++i) {
      const double fa = u(rng), fm = u(rng);
      const double lhs = level_shift_amplitude(coeffs, fa, fm, omega_s);
      const double rhs = level_shift_amplitude(coeffs, fa, 0.0, omega_s) +
                         level_shift_amplitude(coeffs, 0.0, fm, omega_s);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
  SUBCASE("linearized-regime precondition") {
    CHECK_THROWS_AS(level_shift_amplitude(coeffs, 0.02, 0.0, omega_s),
                    PreconditionError);
  }
}
