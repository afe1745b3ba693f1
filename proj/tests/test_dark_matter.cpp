#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvmix/dark_matter.hpp"

using namespace nvmix;

TEST_CASE("mass-frequency conversion") {
  SUBCASE("band endpoints") {
    CHECK(mass_from_frequency_ev(1e8) ==
          doctest::Approx(0.41357e-6).epsilon(1e-4));
    CHECK(mass_from_frequency_ev(1.2e10) ==
          doctest::Approx(49.628e-6).epsilon(1e-4));
    // quoted rounded window 0.4 .. 50 ueV within 5%
    CHECK(mass_from_frequency_ev(1e8) == doctest::Approx(0.4e-6).epsilon(0.05));
    CHECK(mass_from_frequency_ev(1.2e10) ==
          doctest::Approx(50e-6).epsilon(0.05));
  }
  SUBCASE("ensemble-projection crossover point") {
    CHECK(mass_from_frequency_ev(5.7e10) ==
          doctest::Approx(0.23573e-3).epsilon(1e-4));
    CHECK(mass_from_frequency_ev(5.7e10) ==
          doctest::Approx(0.24e-3).epsilon(0.02));
  }
  SUBCASE("round trip is identity") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(6.0, 12.0);
    for (int i = 0; i < 200; ++i) {
      const double f = std::pow(10.0, u(rng));
      const double m = mass_from_frequency_ev(f);
      CHECK(frequency_from_mass_hz(m) == doctest::Approx(f).epsilon(1e-12));
    }
  }
}

TEST_CASE("field amplitude") {
  DarkMatterModel dm;

  SUBCASE("density conversion to natural units") {
    // oracle: 1 cm^-1 = 1.973269804e-14 GeV, cubed
    const double want = 0.4 * std::pow(1.973269804e-14, 3);
    CHECK(dm.rho_natural_gev4() == doctest::Approx(want).epsilon(1e-12));
    CHECK(dm.rho_natural_gev4() == doctest::Approx(3.0734e-42).epsilon(1e-4));
  }
  SUBCASE("frozen value at 1 GHz") {
    const double m_ev = mass_from_frequency_ev(1e9);
    CHECK(m_ev == doctest::Approx(4.1357e-6).epsilon(1e-4));
    CHECK(field_amplitude_gev(dm, m_ev) ==
          doctest::Approx(5.995e-7).epsilon(1e-3));
  }
  SUBCASE("amplitude scales inversely with mass") {
    const double p1 = field_amplitude_gev(dm, 1e-6);
    const double p2 = field_amplitude_gev(dm, 2e-6);
    CHECK(p1 == doctest::Approx(2.0 * p2).epsilon(1e-12));
  }
}

TEST_CASE("coupling limits") {
  DarkMatterModel dm;

  SUBCASE("zero variation gives zero coupling") {
    const auto lim = coupling_limit(dm, 1e9, 0.0, 0.0);
    CHECK(lim.inv_lambda_gamma_gev == 0.0);
    CHECK(lim.inv_lambda_e_gev == 0.0);
  }
  SUBCASE("frozen chain value") {
    const auto lim = coupling_limit(dm, 1e9, 5e-6, 0.0);
    CHECK(lim.inv_lambda_gamma_gev == doctest::Approx(8.34).epsilon(2e-3));
    CHECK(lim.m_phi_ev ==
          doctest::Approx(mass_from_frequency_ev(1e9)).epsilon(1e-15));
    // mass-frequency consistency within the row
    CHECK(lim.m_phi_ev == doctest::Approx(dm.constants.h_ev_s() * lim.freq_hz)
                              .epsilon(1e-9));
  }
  SUBCASE("limits are linear in the variation and in the mass") {
    const auto l1 = coupling_limit(dm, 1e9, 3e-6, 2e-6);
    const auto l2 = coupling_limit(dm, 1e9, 6e-6, 4e-6);
    CHECK(l2.inv_lambda_gamma_gev ==
          doctest::Approx(2.0 * l1.inv_lambda_gamma_gev).epsilon(1e-12));
    CHECK(l2.inv_lambda_e_gev ==
          doctest::Approx(2.0 * l1.inv_lambda_e_gev).epsilon(1e-12));
    const auto l3 = coupling_limit(dm, 2e9, 3e-6, 2e-6);
    CHECK(l3.inv_lambda_gamma_gev ==
          doctest::Approx(2.0 * l1.inv_lambda_gamma_gev).epsilon(1e-12));
  }
}

TEST_CASE("ensemble projection") {
  DarkMatterModel dm;
  const auto base = coupling_limit(dm, 1e9, 5e-6, 8.77e-6);

  SUBCASE("factor one is the identity") {
    const auto same = ensemble_projection(base, 1.0);
    CHECK(same.inv_lambda_gamma_gev == base.inv_lambda_gamma_gev);
    CHECK(same.inv_lambda_e_gev == base.inv_lambda_e_gev);
    CHECK(same.projected);
  }
  SUBCASE("quoted ensemble factor") {
    const auto proj = ensemble_projection(base);
    CHECK(base.inv_lambda_gamma_gev / proj.inv_lambda_gamma_gev ==
          doctest::Approx(2.8e4).epsilon(1e-12));
    CHECK(proj.inv_lambda_gamma_gev == doctest::Approx(8.34 / 2.8e4).epsilon(2e-3));
  }
  SUBCASE("projection preserves the limit ratio") {
    const auto proj = ensemble_projection(base, 123.0);
    CHECK(proj.inv_lambda_e_gev / proj.inv_lambda_gamma_gev ==
          doctest::Approx(base.inv_lambda_e_gev / base.inv_lambda_gamma_gev)
              .epsilon(1e-14));
  }
  SUBCASE("factor below one is rejected") {
    CHECK_THROWS_AS(ensemble_projection(base, 0.5), PreconditionError);
  }
}
