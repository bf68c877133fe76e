#include "protocols.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "transitions.hpp"
#include "units.hpp"

namespace purcell {

namespace {

// Deterministic standard-normal stream (Box-Muller over mt19937_64), so that
// seeded outputs are bit-identical across platforms and runs.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return radius * std::cos(kTwoPi * u2);
  }

 private:
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

void add_noise(Curve& curve, const SimOptions& options) {
  if (options.noise_sigma <= 0.0) return;
  GaussianNoise noise(options.seed);
  for (double& v : curve.y) v += options.noise_sigma * noise();
}

// Relaxation exposure integral(Gamma(delta + shift(t)) dt) accumulated over a
// coil edge, 100-step midpoint quadrature. rising: shift goes 0 -> target;
// otherwise target -> 0.
std::vector<double> edge_exposure(const EnsembleState& state, const RelaxationModel& model,
                                  double target_Hz, const FieldPulse& pulse, bool rising) {
  std::vector<double> exposure(state.size(), 0.0);
  if (pulse.buffer_s <= 0.0) return exposure;
  constexpr int kSteps = 100;
  const double tau = 1.0 / (kTwoPi * pulse.bandwidth_Hz);
  const double dt = pulse.buffer_s / kSteps;
  for (int k = 0; k < kSteps; ++k) {
    const double t = (k + 0.5) * dt;
    const double settle = std::exp(-t / tau);
    const double shift = rising ? target_Hz * (1.0 - settle) : target_Hz * settle;
    for (size_t i = 0; i < state.size(); ++i) {
      exposure[i] += model.rate(state.detuning_Hz[i] + shift) * dt;
    }
  }
  return exposure;
}

void validate_times(std::span<const double> times_s) {
  if (times_s.empty()) throw std::invalid_argument("simulation: empty time list");
  double prev = -1.0;
  for (double t : times_s) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("simulation: times must be non-negative");
    if (t <= prev) throw std::invalid_argument("simulation: times must be strictly increasing");
    prev = t;
  }
}

void apply_saturation(EnsembleState& state, const SaturationSpec& saturation, double half_span_Hz) {
  saturation.validate();
  if (saturation.mode == SaturationMode::plain) {
    const double half_band = 0.5 * saturation.bandwidth_Hz;
    for (size_t i = 0; i < state.size(); ++i) {
      if (std::abs(state.detuning_Hz[i]) <= half_band) state.sz[i] = 0.0;
    }
    return;
  }
  // Swept mode: unit saturation across the swept span, padded by half the
  // instantaneous saturation bandwidth on both ends.
  double lo = saturation.sweep_deltas_Hz.front();
  double hi = lo;
  for (double d : saturation.sweep_deltas_Hz) {
    if (std::abs(d) > half_span_Hz + saturation.bandwidth_Hz) {
      throw std::invalid_argument("saturation sweep: step at " + std::to_string(d) +
                                  " Hz exceeds the line span plus guard band");
    }
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  lo -= 0.5 * saturation.bandwidth_Hz;
  hi += 0.5 * saturation.bandwidth_Hz;
  for (size_t i = 0; i < state.size(); ++i) {
    if (state.detuning_Hz[i] >= lo && state.detuning_Hz[i] <= hi) state.sz[i] = 0.0;
  }
}

}  // namespace

void FieldPulse::validate() const {
  if (!(bandwidth_Hz > 0.0)) throw std::invalid_argument("FieldPulse: coil bandwidth must be positive");
  if (buffer_s < 0.0) throw std::invalid_argument("FieldPulse: buffer time must be non-negative");
  if (!std::isfinite(amplitude_T)) throw std::invalid_argument("FieldPulse: amplitude must be finite");
}

void SaturationSpec::validate() const {
  if (!(bandwidth_Hz > 0.0)) throw std::invalid_argument("SaturationSpec: bandwidth must be positive");
  if (mode == SaturationMode::swept && sweep_deltas_Hz.empty()) {
    throw std::invalid_argument("SaturationSpec: swept mode needs a non-empty schedule");
  }
}

Curve simulate_inversion_recovery(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                                  double gamma_nr_per_s, const Pulse& invert, const Detection& detect,
                                  std::span<const double> times_s, const SimOptions& options) {
  resonator.validate();
  detect.validate();
  validate_times(times_s);
  if (gamma_nr_per_s < 0.0) throw std::invalid_argument("simulate_inversion_recovery: gamma_nr >= 0 required");

  const double kappa = resonator.kappa();
  const RelaxationModel model{g_Hz, kappa, gamma_nr_per_s};
  EnsembleState prepared = thermal_ensemble(line, kappa, detect.t_pi_s, options.grid);
  apply_pulse(prepared, invert, kappa, 250e3, options.b1_spread);

  Curve curve;
  curve.x.assign(times_s.begin(), times_s.end());
  curve.y.reserve(times_s.size());
  EnsembleState state = prepared;
  for (double t : times_s) {
    state.sz = prepared.sz;
    relax(state, t, [&model](double delta) { return model.rate(delta); });
    curve.y.push_back(echo_amplitude(state, detect, kappa));
  }
  add_noise(curve, options);
  return curve;
}

Curve simulate_saturation_recovery(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                                   double gamma_nr_per_s, const SaturationSpec& saturation,
                                   const FieldPulse& field_pulse, double dfdB_Hz_per_T,
                                   const Detection& detect, std::span<const double> times_s,
                                   const SimOptions& options) {
  resonator.validate();
  field_pulse.validate();
  detect.validate();
  validate_times(times_s);
  if (!std::isfinite(dfdB_Hz_per_T)) throw std::invalid_argument("saturation recovery: dfdB must be finite");

  const double kappa = resonator.kappa();
  const RelaxationModel model{g_Hz, kappa, gamma_nr_per_s};
  const double delta_pulse = dfdB_Hz_per_T * field_pulse.amplitude_T;

  EnsembleState state = thermal_ensemble(line, kappa, detect.t_pi_s, options.grid);
  const double half_span = std::abs(state.detuning_Hz.back());
  apply_saturation(state, saturation, half_span);
  const std::vector<double> saturated_sz = state.sz;

  const std::vector<double> up = edge_exposure(state, model, delta_pulse, field_pulse, true);
  const std::vector<double> down = edge_exposure(state, model, delta_pulse, field_pulse, false);

  // Detuned-hold rates; the edge exposures commute with the hold decay.
  std::vector<double> hold_rate(state.size());
  for (size_t i = 0; i < state.size(); ++i) hold_rate[i] = model.rate(state.detuning_Hz[i] + delta_pulse);

  Curve curve;
  curve.x.assign(times_s.begin(), times_s.end());
  curve.y.reserve(times_s.size());
  for (double t : times_s) {
    for (size_t i = 0; i < state.size(); ++i) {
      const double exposure = up[i] + hold_rate[i] * t + down[i];
      state.sz[i] = 1.0 - (1.0 - saturated_sz[i]) * std::exp(-exposure);
    }
    curve.y.push_back(echo_amplitude(state, detect, kappa));
  }
  add_noise(curve, options);
  return curve;
}

Curve polarization_scan(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                        double gamma_nr_per_s, const Excitation& excitation, const FieldPulse& ramp,
                        const Detection& detect, std::span<const double> probe_deltas_Hz,
                        const SimOptions& options) {
  resonator.validate();
  ramp.validate();
  detect.validate();
  if (probe_deltas_Hz.empty()) throw std::invalid_argument("polarization_scan: empty probe list");

  const double kappa = resonator.kappa();
  const RelaxationModel model{g_Hz, kappa, gamma_nr_per_s};
  EnsembleState prepared = thermal_ensemble(line, kappa, detect.t_pi_s, options.grid);
  const double half_span = std::abs(prepared.detuning_Hz.back());
  switch (excitation.kind) {
    case Excitation::Kind::none:
      break;
    case Excitation::Kind::pulse:
      apply_pulse(prepared, excitation.pulse, kappa, 250e3, options.b1_spread);
      break;
    case Excitation::Kind::saturation:
      apply_saturation(prepared, excitation.saturation, half_span);
      break;
  }

  Curve curve;
  curve.x.assign(probe_deltas_Hz.begin(), probe_deltas_Hz.end());
  curve.y.reserve(probe_deltas_Hz.size());
  EnsembleState state = prepared;
  for (double probe : probe_deltas_Hz) {
    // Field shift -probe brings spins at `probe` onto cavity resonance.
    const std::vector<double> exposure = edge_exposure(prepared, model, -probe, ramp, true);
    for (size_t i = 0; i < state.size(); ++i) {
      state.sz[i] = 1.0 - (1.0 - prepared.sz[i]) * std::exp(-exposure[i]);
    }
    curve.y.push_back(echo_amplitude_at(state, detect, kappa, probe));
  }
  add_noise(curve, options);
  return curve;
}

Curve simulate_rabi(std::span<const double> powers_W, double pulse_duration_s, double g_Hz,
                    const Resonator& resonator, const SimOptions& options) {
  resonator.validate();
  if (powers_W.empty()) throw std::invalid_argument("simulate_rabi: empty power list");
  if (!(pulse_duration_s > 0.0) || !(g_Hz > 0.0)) {
    throw std::invalid_argument("simulate_rabi: pulse duration and g must be positive");
  }

  static constexpr double kNodes[5] = {-0.8, -0.4, 0.0, 0.4, 0.8};
  Curve curve;
  curve.x.assign(powers_W.begin(), powers_W.end());
  curve.y.reserve(powers_W.size());
  for (double p : powers_W) {
    if (p < 0.0) throw std::invalid_argument("simulate_rabi: powers must be non-negative");
    const double omega_r = rabi_frequency(g_Hz, mean_photon_number(p, resonator));
    const double theta = kTwoPi * omega_r * pulse_duration_s;
    double value;
    if (options.b1_spread > 0.0) {
      value = 0.0;
      for (double u : kNodes) {
        const double s = std::sin(0.5 * theta * (1.0 + options.b1_spread * u));
        value += s * s;
      }
      value /= 5.0;
    } else {
      const double s = std::sin(0.5 * theta);
      value = s * s;
    }
    curve.y.push_back(value);
  }
  add_noise(curve, options);
  return curve;
}

Curve field_sweep_spectrum(const SpinSystem& system, const Resonator& resonator,
                           const SpectralLine& doublet, double b_start_T, double b_stop_T, int points,
                           double min_matrix_element) {
  resonator.validate();
  doublet.validate();
  if (points < 2) throw std::invalid_argument("field_sweep_spectrum: need at least 2 field points");
  if (!(b_stop_T > b_start_T) || b_start_T < 0.0) {
    throw std::invalid_argument("field_sweep_spectrum: need 0 <= b_start < b_stop");
  }

  const double kappa = resonator.kappa();
  constexpr int kNodes = 64;  // atan-substituted quadrature over the cavity Lorentzian
  const double dphi = M_PI / kNodes;

  double total_weight = 0.0;
  for (const LineComponent& c : doublet.components) total_weight += c.weight;

  Curve curve;
  curve.x.resize(static_cast<size_t>(points));
  curve.y.assign(static_cast<size_t>(points), 0.0);
  const double step = (b_stop_T - b_start_T) / (points - 1);
  for (int ip = 0; ip < points; ++ip) {
    const double b0 = b_start_T + step * ip;
    curve.x[static_cast<size_t>(ip)] = b0;
    double signal = 0.0;
    for (const Transition& t : transition_lines(system, b0, min_matrix_element)) {
      for (const LineComponent& c : doublet.components) {
        const double sigma = c.fwhm_Hz * 0.42466090014400953;
        const double d = resonator.omega0_Hz - (t.frequency_Hz + c.center_Hz);
        double overlap = 0.0;
        for (int k = 0; k < kNodes; ++k) {
          const double phi = -M_PI_2 + (k + 0.5) * dphi;
          const double z = (d - 0.5 * kappa * std::tan(phi)) / sigma;
          overlap += std::exp(-0.5 * z * z);
        }
        overlap *= dphi / (M_PI * sigma * std::sqrt(kTwoPi));
        signal += t.matrix_element * t.matrix_element * (c.weight / total_weight) * overlap;
      }
    }
    curve.y[static_cast<size_t>(ip)] = signal;
  }

  double peak = 0.0;
  for (double v : curve.y) peak = std::max(peak, v);
  if (peak > 0.0) {
    for (double& v : curve.y) v /= peak;
  }
  return curve;
}

}  // namespace purcell
