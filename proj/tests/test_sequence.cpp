#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fit_models.hpp"
#include "protocols.hpp"
#include "units.hpp"

using namespace purcell;

namespace {

const SpectralLine kLine = SpectralLine::strain_doublet();
const Resonator kResonatorA{7.245e9, 315000.0, 2300.0, 11500.0};      // kappa = 23 kHz
const Resonator kResonatorB2{7.305e9, 89085.0, 8200.0, 41000.0};      // kappa = 82 kHz
constexpr double kGammaNR = 1.0 / 1600.0;

std::vector<double> linspace(double start, double stop, int n) {
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = start + (stop - start) * i / (n - 1);
  return out;
}

double fitted_t1(const Curve& curve) {
  return fit_exponential(curve.x, curve.y).param("T1");
}

}  // namespace

TEST_CASE("pulse_response: unity at zero offset, removable singularity") {
  CHECK(pulse_response(100e-6, 23e3, 0.0) == doctest::Approx(1.0));
  CHECK(pulse_response(100e-6, 23e3, 1e-9) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pulse_response(0.0, 23e3, 0.0), std::invalid_argument);
}

TEST_CASE("pulse_response: 100 us pulse has ~10 kHz half-amplitude bandwidth") {
  // find the half-amplitude point by bisection
  double lo = 0.0, hi = 30e3;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (pulse_response(100e-6, 23e3, mid) > 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double full_width = 2.0 * lo;
  CHECK(full_width > 9.5e3);
  CHECK(full_width < 11.5e3);
}

TEST_CASE("pulse_response: 5 us pulse is cavity-limited within 2% over +-3 kappa") {
  const double kappa = 23e3;
  for (double d = -3.0 * kappa; d <= 3.0 * kappa; d += kappa / 50.0) {
    const double lorentzian = 1.0 / (1.0 + 4.0 * (d / kappa) * (d / kappa));
    CHECK(std::abs(pulse_response(5e-6, kappa, d) - lorentzian) < 0.02);
  }
}

TEST_CASE("flip_probability: calibrated angles at resonance, 2pi null off resonance") {
  CHECK(flip_probability(5e-6, M_PI, 0.0) == doctest::Approx(1.0));
  CHECK(flip_probability(5e-6, M_PI_2, 0.0) == doctest::Approx(0.5));
  // At delta = sqrt(3) Omega a nominal pi pulse performs a full 2pi rotation.
  const double omega = 0.5 / 5e-6;
  CHECK(flip_probability(5e-6, M_PI, std::sqrt(3.0) * omega) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(flip_probability(5e-6, 0.0, 0.0) == 0.0);
}

TEST_CASE("apply_pulse: perfect inversion at resonance, identity at zero amplitude") {
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {4001, 5.0});
  Pulse inversion{5e-6, PulseKind::pi, 0.0, 1.0};
  apply_pulse(state, inversion, 23e3);
  const size_t center = state.size() / 2;  // grid is symmetric, center = zero detuning
  CHECK(state.detuning_Hz[center] == doctest::Approx(0.0));
  CHECK(state.sz[center] == doctest::Approx(-1.0));

  EnsembleState untouched = thermal_ensemble(kLine, 23e3, 100e-6, {4001, 5.0});
  Pulse idle{5e-6, PulseKind::pi, 0.0, 0.0};
  apply_pulse(untouched, idle, 23e3);
  for (double v : untouched.sz) CHECK(v == 1.0);
}

TEST_CASE("apply_pulse: saturation zeroes a rectangular band only") {
  EnsembleState state = thermal_ensemble(kLine, 82e3, 100e-6, {8001, 5.0});
  Pulse saturation{1.0, PulseKind::saturation, 0.0, 1.0};
  apply_pulse(state, saturation, 82e3, 250e3);
  for (size_t i = 0; i < state.size(); ++i) {
    if (std::abs(state.detuning_Hz[i]) <= 125e3) {
      CHECK(state.sz[i] == 0.0);
    } else {
      CHECK(state.sz[i] == 1.0);
    }
  }
}

TEST_CASE("relax: identity at zero duration, half-recovery time, closed form") {
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {4001, 5.0});
  for (double& v : state.sz) v = -1.0;
  const auto uniform_rate = [](double) { return 2.0; };

  EnsembleState copy = state;
  relax(copy, 0.0, uniform_rate);
  CHECK(copy.sz == state.sz);

  // sz(0) = -1 reaches 0 after Gamma^-1 ln 2
  relax(copy, std::log(2.0) / 2.0, uniform_rate);
  for (double v : copy.sz) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));

  // closed form 1 - 2 exp(-Gamma T) for the echo of a uniformly inverted line
  EnsembleState inverted = state;
  relax(inverted, 0.3, uniform_rate);
  const double echo = echo_amplitude(inverted, {50e-6, 100e-6}, 23e3);
  CHECK(echo == doctest::Approx(1.0 - 2.0 * std::exp(-2.0 * 0.3)).epsilon(1e-12));
}

TEST_CASE("relax: semigroup property to 1e-12") {
  const RelaxationModel model{50.0, 23e3, kGammaNR};
  const auto rate = [&model](double d) { return model.rate(d); };
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {4001, 5.0});
  Pulse inversion{5e-6, PulseKind::pi, 0.0, 1.0};
  apply_pulse(state, inversion, 23e3);

  EnsembleState two_step = state;
  relax(two_step, 0.4, rate);
  relax(two_step, 0.35, rate);
  EnsembleState one_step = state;
  relax(one_step, 0.75, rate);
  for (size_t i = 0; i < state.size(); ++i) {
    CHECK(two_step.sz[i] == doctest::Approx(one_step.sz[i]).epsilon(1e-12));
  }
}

TEST_CASE("relax and pulses keep |sz| <= 1") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {2001, 5.0});
  const RelaxationModel model{50.0, 23e3, 0.0};
  for (int step = 0; step < 30; ++step) {
    if (pick(rng) < 0.5) {
      Pulse pulse{pick(rng) * 100e-6 + 1e-6, pick(rng) < 0.5 ? PulseKind::pi : PulseKind::pi_half,
                  (pick(rng) - 0.5) * 1e5, pick(rng) * 1.5};
      apply_pulse(state, pulse, 23e3);
    } else {
      relax(state, pick(rng), [&model](double d) { return model.rate(d); });
    }
    for (double v : state.sz) {
      CHECK(v <= 1.0 + 1e-12);
      CHECK(v >= -1.0 - 1e-12);
    }
  }
}

TEST_CASE("echo_amplitude: normalization, linearity, monotonicity") {
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {4001, 5.0});
  const Detection detect{50e-6, 100e-6};
  CHECK(echo_amplitude(state, detect, 23e3) == doctest::Approx(1.0));
  for (double& v : state.sz) v = -1.0;
  CHECK(echo_amplitude(state, detect, 23e3) == doctest::Approx(-1.0));

  // raising sz pointwise never lowers A_Q
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<size_t> index(0, state.size() - 1);
  double previous = echo_amplitude(state, detect, 23e3);
  for (int i = 0; i < 20; ++i) {
    state.sz[index(rng)] = 1.0;
    const double now = echo_amplitude(state, detect, 23e3);
    CHECK(now >= previous - 1e-12);
    previous = now;
  }
}

TEST_CASE("echo_amplitude: inversion confined to +-kappa/4 reads negative narrowband") {
  EnsembleState state = thermal_ensemble(kLine, 23e3, 100e-6, {400001, 5.0});
  for (size_t i = 0; i < state.size(); ++i) {
    state.sz[i] = std::abs(state.detuning_Hz[i]) <= 23e3 / 4.0 ? -1.0 : 1.0;
  }
  CHECK(echo_amplitude(state, {50e-6, 100e-6}, 23e3) < 0.0);
}

TEST_CASE("inversion recovery: narrowband readout recovers the resonant T1") {
  const auto times = linspace(0.05, 3.0, 60);
  const Curve curve = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                                  {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                                  times);
  const double t1 = fitted_t1(curve);
  CHECK(t1 > 0.315);
  CHECK(t1 < 0.385);
}

TEST_CASE("inversion recovery: broadband readout inflates the apparent T1") {
  const auto times = linspace(0.05, 3.0, 60);
  const Curve broad = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                                  {5e-6, PulseKind::pi, 0.0, 1.0}, {2.5e-6, 5e-6},
                                                  times);
  const double kappa = kResonatorA.kappa();
  const double t1_true = 1.0 / (purcell_rate(51.9, kappa, 0.0) + kGammaNR);
  const double ratio = fitted_t1(broad) / t1_true;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.3);
}

TEST_CASE("inversion recovery: resonator B narrowband closure near 0.80 s") {
  const Resonator resonator_b{7.305e9, 107426.0, 6800.0, 34000.0};  // kappa = 68 kHz
  const auto times = linspace(0.1, 6.0, 50);
  const Curve curve = simulate_inversion_recovery(kLine, resonator_b, 58.0, kGammaNR,
                                                  {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                                  times);
  const double t1_model = 1.0 / (purcell_rate(58.0, resonator_b.kappa(), 0.0) + kGammaNR);
  CHECK(t1_model == doctest::Approx(0.80).epsilon(0.01));
  CHECK(fitted_t1(curve) == doctest::Approx(0.80).epsilon(0.10));
}

TEST_CASE("inversion recovery: instant rethermalization pins the curve at +1") {
  const auto times = linspace(0.01, 1.0, 12);
  const Curve curve = simulate_inversion_recovery(kLine, kResonatorA, 51.9, 1e7,
                                                  {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                                  times);
  for (double v : curve.y) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inversion recovery: narrowband limit converges to the resonant rate") {
  // Detection bandwidth well under kappa/5: the fitted T1 lands within 2%
  // of 1/(Gamma_P(0) + Gamma_NR).
  const auto times = linspace(0.05, 3.0, 60);
  const Curve curve = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                                  {5e-6, PulseKind::pi, 0.0, 1.0}, {300e-6, 600e-6},
                                                  times);
  const double t1_true = 1.0 / (purcell_rate(51.9, kResonatorA.kappa(), 0.0) + kGammaNR);
  CHECK(fitted_t1(curve) == doctest::Approx(t1_true).epsilon(0.02));
}

TEST_CASE("grid refinement: doubling the density moves A_Q by < 0.5%") {
  const auto times = linspace(0.2, 2.0, 4);
  const Curve coarse = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                                   {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                                   times);
  const int auto_points =
      static_cast<int>(thermal_ensemble(kLine, kResonatorA.kappa(), 100e-6).size());
  SimOptions dense;
  dense.grid.points = 2 * auto_points - 1;
  const Curve fine = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                                 {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                                 times, dense);
  for (size_t i = 0; i < coarse.y.size(); ++i) {
    CHECK(std::abs(coarse.y[i] - fine.y[i]) / std::max(std::abs(fine.y[i]), 1e-9) < 5e-3);
  }
}

TEST_CASE("saturation recovery: swept scheme at zero detuning recovers T1(0)") {
  SaturationSpec saturation;
  saturation.sweep_deltas_Hz = linspace(-6e6, 10e6, 17);
  const FieldPulse pulse{0.0, 1.0, 1.0};
  const auto times = linspace(0.05, 8.0, 25);
  const Curve curve = simulate_saturation_recovery(kLine, kResonatorB2, 44.0, kGammaNR, saturation,
                                                   pulse, -25.1e9, {50e-6, 100e-6}, times);
  CHECK(fitted_t1(curve) == doctest::Approx(1.68).epsilon(0.05));
}

TEST_CASE("saturation recovery: detuned hold follows the detuning law") {
  SaturationSpec saturation;
  saturation.sweep_deltas_Hz = linspace(-6e6, 10e6, 17);
  const double dfdb = -25.1e9;
  const double delta = 3.8e6;
  const FieldPulse pulse{delta / dfdb, 1.0, 1.0};
  const auto times = linspace(5.0, 6000.0, 25);
  const Curve curve = simulate_saturation_recovery(kLine, kResonatorB2, 44.0, kGammaNR, saturation,
                                                   pulse, dfdb, {50e-6, 100e-6}, times);
  const double kappa = kResonatorB2.kappa();
  const double t1_resonant = 1.0 / (purcell_rate(44.0, kappa, 0.0) + kGammaNR);
  const double expected = t1_of_delta(t1_resonant, kappa, delta, kGammaNR);
  CHECK(fitted_t1(curve) == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("saturation recovery: rejects schedules outside the line span") {
  SaturationSpec saturation;
  saturation.sweep_deltas_Hz = {0.0, 40e6};  // far beyond 5x FWHM + center
  const FieldPulse pulse{0.0, 1.0, 1.0};
  const auto times = linspace(0.1, 1.0, 5);
  CHECK_THROWS_AS(simulate_saturation_recovery(kLine, kResonatorB2, 44.0, kGammaNR, saturation,
                                               pulse, -25.1e9, {50e-6, 100e-6}, times),
                  std::invalid_argument);
}

TEST_CASE("polarization scan: swept saturation flattens the line at zero") {
  Excitation excitation;
  excitation.kind = Excitation::Kind::saturation;
  excitation.saturation.mode = SaturationMode::swept;
  excitation.saturation.sweep_deltas_Hz = linspace(-6e6, 10e6, 17);
  const FieldPulse instant{0.0, 1.0, 0.0};  // no settle time: ideal probe
  const auto probes = linspace(-5e6, 9e6, 29);
  const Curve scan = polarization_scan(kLine, kResonatorB2, 44.0, kGammaNR, excitation, instant,
                                       {50e-6, 100e-6}, probes);
  for (double v : scan.y) CHECK(std::abs(v) < 1e-3);
}

TEST_CASE("polarization scan: plain saturation leaves the wings polarized") {
  Excitation excitation;
  excitation.kind = Excitation::Kind::saturation;
  excitation.saturation.mode = SaturationMode::plain;
  const FieldPulse instant{0.0, 1.0, 0.0};
  const auto probes = std::vector<double>{-2e6, 0.0, 2e6};
  const Curve scan = polarization_scan(kLine, kResonatorB2, 44.0, kGammaNR, excitation, instant,
                                       {50e-6, 100e-6}, probes);
  CHECK(std::abs(scan.y[1]) < 1e-3);  // saturated at resonance
  CHECK(scan.y[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(scan.y[2] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("rabi: zero power gives no echo, oscillation frequency scales with g") {
  const Resonator resonator{7.305e9, 107426.0, 6800.0, 34000.0};
  const auto powers = linspace(0.0, 4e-11, 81);
  const Curve slow = simulate_rabi(powers, 5e-6, 29.0, resonator);
  const Curve fast = simulate_rabi(powers, 5e-6, 58.0, resonator);
  CHECK(slow.y.front() == doctest::Approx(0.0));
  CHECK(fast.y.front() == doctest::Approx(0.0));
  const double g_slow = fit_rabi(powers, slow.y, resonator, 5e-6).param("g");
  const double g_fast = fit_rabi(powers, fast.y, resonator, 5e-6).param("g");
  CHECK(g_fast / g_slow == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("noise: seeded, deterministic, off by default") {
  const auto times = linspace(0.05, 1.0, 10);
  SimOptions noisy;
  noisy.noise_sigma = 0.05;
  noisy.seed = 42;
  noisy.grid.points = 2001;
  const Curve a = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                              {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                              times, noisy);
  const Curve b = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                              {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                              times, noisy);
  CHECK(a.y == b.y);
  noisy.seed = 43;
  const Curve c = simulate_inversion_recovery(kLine, kResonatorA, 51.9, kGammaNR,
                                              {5e-6, PulseKind::pi, 0.0, 1.0}, {50e-6, 100e-6},
                                              times, noisy);
  CHECK(a.y != c.y);
}

TEST_CASE("field sweep: crossing counts for both resonators") {
  const SpinSystem system = bismuth_donor();
  const SpectralLine doublet = SpectralLine::strain_doublet();
  const Resonator resonator_a{7.245e9, 315000.0, 0.0, 0.0};
  const Resonator resonator_b{7.305e9, 107426.0, 0.0, 0.0};

  const auto clusters = [](const Curve& curve) {
    std::vector<double> peaks;
    for (size_t i = 1; i + 1 < curve.y.size(); ++i) {
      if (curve.y[i] > curve.y[i - 1] && curve.y[i] > curve.y[i + 1] && curve.y[i] > 0.05) {
        peaks.push_back(curve.x[i]);
      }
    }
    int groups = 0;
    double last = -1.0;
    for (double p : peaks) {
      if (last < 0.0 || p - last > 5e-4) ++groups;
      last = p;
    }
    return groups;
  };

  const Curve sweep_a = field_sweep_spectrum(system, resonator_a, doublet, 5e-4, 6e-3, 551, 0.05);
  const Curve sweep_b = field_sweep_spectrum(system, resonator_b, doublet, 5e-4, 6e-3, 551, 0.05);
  CHECK(clusters(sweep_a) == 1);
  CHECK(clusters(sweep_b) == 3);
}

TEST_CASE("field sweep: each crossing is a resolved doublet") {
  const SpinSystem system = bismuth_donor();
  const SpectralLine doublet = SpectralLine::strain_doublet();
  const Resonator resonator_a{7.245e9, 315000.0, 0.0, 0.0};
  // Fine scan around the single crossing of this resonator.
  const Curve sweep = field_sweep_spectrum(system, resonator_a, doublet, 4.6e-3, 5.8e-3, 601, 0.05);
  std::vector<double> peaks;
  for (size_t i = 1; i + 1 < sweep.y.size(); ++i) {
    if (sweep.y[i] > sweep.y[i - 1] && sweep.y[i] > sweep.y[i + 1] && sweep.y[i] > 0.3) {
      peaks.push_back(sweep.x[i]);
    }
  }
  REQUIRE(peaks.size() == 2);
  // Peak separation in field maps back to the 4 MHz strain splitting.
  const double separation_Hz = (peaks[1] - peaks[0]) * 25.1e9;
  CHECK(separation_Hz == doctest::Approx(4e6).epsilon(0.15));
}
