#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvmix/mixing.hpp"
#include "oracles.hpp"

using namespace nvmix;

TEST_CASE("mixing schedule") {
  const double ghz = kTwoPi * 1e9;

  SUBCASE("difference band, high-frequency signal") {
    const double w1 = mixing_schedule(12.0 * ghz, 1.441 * ghz, Band::Difference);
    CHECK(w1 / ghz == doctest::Approx(10.559).epsilon(1e-12));
    // consistent with the 10.58 GHz sweep endpoint to ~0.2%
    CHECK(w1 / ghz == doctest::Approx(10.58).epsilon(2.5e-3));
  }
  SUBCASE("sum band identity at omega_phi = omega_spin") {
    const double ws = 1.441 * ghz;
    CHECK(mixing_schedule(ws, ws, Band::Sum) == doctest::Approx(2.0 * ws));
  }
  SUBCASE("sum band, low-frequency signal") {
    const double w1 = mixing_schedule(0.1 * ghz, 1.441 * ghz, Band::Sum);
    CHECK(w1 / ghz == doctest::Approx(1.541).epsilon(1e-12));
  }
  SUBCASE("degenerate difference mixing") {
    CHECK_THROWS_AS(
        mixing_schedule(1.441 * ghz, 1.4411 * ghz, Band::Difference),
        DegenerateMixing);
    // sum band never degenerates
    CHECK_NOTHROW(mixing_schedule(1.441 * ghz, 1.4411 * ghz, Band::Sum));
  }
}

TEST_CASE("effective rabi frequency") {
  MixerDrive drive{kTwoPi * 1e7, kTwoPi * 1e7, Band::Difference};

  SUBCASE("no signal, no sideband") {
    CHECK(effective_rabi({kTwoPi * 1e9, 0.0, 0.0}, drive) == 0.0);
  }
  SUBCASE("matches the J1 power series") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(1e-4, 0.9);
    for (int i = 0; i < 200; ++i) {
      const double m = u(rng);
      const double omega_phi = kTwoPi * 1e9;
      const double got =
          effective_rabi({omega_phi, m * omega_phi, 0.0}, drive);
      const double want = drive.rabi_omega1 * oracles::bessel_j1_series(m);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }
  SUBCASE("modulation index 0.1") {
    const double omega_phi = kTwoPi * 1e9;
    const double got = effective_rabi({omega_phi, 0.1 * omega_phi, 0.0}, drive);
    CHECK(got / kTwoPi == doctest::Approx(0.49938e6).epsilon(1e-4));
    CHECK(oracles::bessel_j1_series(0.1) ==
          doctest::Approx(0.0499375).epsilon(1e-5));
  }
  SUBCASE("small-argument form within 1% for m < 0.28") {
    for (double m : {0.01, 0.05, 0.1, 0.2, 0.27}) {
      const double omega_phi = kTwoPi * 1e9;
      const double exact =
          effective_rabi({omega_phi, m * omega_phi, 0.0}, drive);
      const double small = drive.rabi_omega1 * m / 2.0;
      CHECK(exact == doctest::Approx(small).epsilon(1e-2));
    }
  }
  SUBCASE("doubling omega_phi halves the sideband at small modulation") {
    const double ds = kTwoPi * 1e6;
    const double w1 = effective_rabi({kTwoPi * 1e9, ds, 0.0}, drive);
    const double w2 = effective_rabi({kTwoPi * 2e9, ds, 0.0}, drive);
    CHECK(w1 == doctest::Approx(2.0 * w2).epsilon(1e-2));
  }
  SUBCASE("expansion validity") {
    CHECK_THROWS_AS(effective_rabi({1.0, 1.0, 0.0}, drive),
                    SidebandExpansionInvalid);
  }
}

TEST_CASE("induced relaxation rate") {
  NoiseModel noise;
  noise.gamma2 = kTwoPi * 1e6;

  SUBCASE("zero drive, zero rate") {
    CHECK(induced_relaxation_rate(0.0, 0.0, noise).gamma_phi == 0.0);
  }
  SUBCASE("frozen on-resonance value") {
    const double om_eff = kTwoPi * 5e4;
    const auto r = induced_relaxation_rate(om_eff, 0.0, noise);
    const double want = std::sqrt(std::numbers::pi / 2.0) * om_eff * om_eff /
                        (2.0 * noise.gamma2);
    CHECK(r.gamma_phi == doctest::Approx(want).epsilon(1e-15));
    CHECK(r.gamma_phi == doctest::Approx(9843.5).epsilon(1e-3));
    CHECK_FALSE(r.coherent_regime);
  }
  SUBCASE("gaussian penalty at one linewidth") {
    const double om_eff = kTwoPi * 5e4;
    const double on = induced_relaxation_rate(om_eff, 0.0, noise).gamma_phi;
    const double off =
        induced_relaxation_rate(om_eff, noise.gamma2, noise).gamma_phi;
    CHECK(off / on == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
  }
  SUBCASE("detuning symmetry is exact") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    const double om_eff = kTwoPi * 3e4;
    for (int i = 0; i < 100; ++i) {
      const double dw = u(rng) * noise.gamma2;
      const double plus = induced_relaxation_rate(om_eff, dw, noise).gamma_phi;
      const double minus =
          induced_relaxation_rate(om_eff, -dw, noise).gamma_phi;
      CHECK(plus == minus);  // bitwise: the detuning enters squared
    }
  }
  SUBCASE("quadratic drive law on resonance") {
    // slope of log(rate) vs log(omega_eff) across one decade
    const double w0 = kTwoPi * 1e4;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int i = 0; i <= 10; ++i) {
      const double w = w0 * std::pow(10.0, i / 10.0);
      const double r = induced_relaxation_rate(w, 0.0, noise).gamma_phi;
      const double lx = std::log(w), ly = std::log(r);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
  }
  SUBCASE("coherent-regime warning") {
    CHECK(induced_relaxation_rate(noise.gamma2 * 1.5, 0.0, noise)
              .coherent_regime);
    CHECK_FALSE(
        induced_relaxation_rate(noise.gamma2 * 0.2, 0.0, noise).coherent_regime);
  }
}

TEST_CASE("sideband bookkeeping") {
  // canonical scaled configuration: the difference-band schedule puts the
  // n = -1 sideband exactly on resonance
  const double ws = 200.0, wphi = 500.0;
  const double w1 = mixing_schedule(wphi, ws, Band::Difference, 1.0);
  CHECK(w1 == doctest::Approx(300.0));
  CHECK(sideband_detuning(ws, wphi, w1) == doctest::Approx(0.0));
  // shifting the drive shifts the mismatch by the same amount
  CHECK(std::abs(sideband_detuning(ws, wphi, w1 + 0.25)) ==
        doctest::Approx(0.25));
  // rotating frame picks the sign that makes the sideband resonant
  const double wf = rotating_frame_frequency(ws, wphi, w1);
  CHECK(wf == doctest::Approx(-300.0));
  // sum band co-rotates with the positive drive frequency
  const double w1s = mixing_schedule(wphi, ws, Band::Sum);
  CHECK(rotating_frame_frequency(ws, wphi, w1s) == doctest::Approx(w1s));
}

TEST_CASE("noise model invariants") {
  NoiseModel n;
  n.gamma1 = 100.0;
  n.gamma2 = 49.0;
  CHECK_THROWS_AS(n.validate(), PreconditionError);  // gamma2 < gamma1/2
  n.gamma2 = 50.0;
  CHECK_NOTHROW(n.validate());
  n.gamma1 = -1.0;
  CHECK_THROWS_AS(n.validate(), PreconditionError);
}
