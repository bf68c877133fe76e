#include "ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "units.hpp"

namespace purcell {

void Pulse::validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("Pulse: duration must be positive");
  if (!std::isfinite(carrier_offset_Hz) || !std::isfinite(amplitude_scale) || amplitude_scale < 0.0) {
    throw std::invalid_argument("Pulse: carrier offset and amplitude scale must be finite, scale >= 0");
  }
}

void Detection::validate() const {
  if (!(t_pi_half_s > 0.0) || !(t_pi_s > 0.0)) {
    throw std::invalid_argument("Detection: pulse durations must be positive");
  }
}

EnsembleState thermal_ensemble(const SpectralLine& line, double kappa_Hz, double t_pi_s,
                               const GridSpec& grid) {
  line.validate();
  if (!(kappa_Hz > 0.0) || !(t_pi_s > 0.0)) {
    throw std::invalid_argument("thermal_ensemble: kappa and detection pulse length must be positive");
  }
  if (!(grid.span_factor > 0.0)) throw std::invalid_argument("thermal_ensemble: span factor must be positive");

  const double half_span = grid.span_factor * line.max_fwhm() + line.max_abs_center();
  int n = grid.points;
  if (n <= 0) {
    // Resolve both the cavity Lorentzian and the detection sinc.
    const double step = std::min(kappa_Hz / 40.0, 1.0 / (8.0 * t_pi_s));
    n = 2 * static_cast<int>(std::ceil(half_span / step)) + 1;
    n = std::clamp(n, 4001, 400001);
  }
  if (n < 3) throw std::invalid_argument("thermal_ensemble: grid needs at least 3 points");
  if (n % 2 == 0) ++n;

  EnsembleState state;
  state.detuning_Hz.resize(static_cast<size_t>(n));
  state.density.resize(static_cast<size_t>(n));
  state.sz.assign(static_cast<size_t>(n), 1.0);
  const double step = 2.0 * half_span / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double delta = -half_span + step * i;
    state.detuning_Hz[static_cast<size_t>(i)] = delta;
    state.density[static_cast<size_t>(i)] = line.density(delta);
  }
  return state;
}

double pulse_response(double t_p_s, double kappa_Hz, double offset_Hz) {
  if (!(t_p_s > 0.0) || !(kappa_Hz > 0.0)) {
    throw std::invalid_argument("pulse_response: pulse length and kappa must be positive");
  }
  const double x = M_PI * t_p_s * offset_Hz;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  const double ratio = offset_Hz / kappa_Hz;
  return sinc / (1.0 + 4.0 * ratio * ratio);
}

double flip_probability(double t_p_s, double nominal_angle_rad, double delta_Hz) {
  if (!(t_p_s > 0.0)) throw std::invalid_argument("flip_probability: pulse length must be positive");
  if (nominal_angle_rad == 0.0) return 0.0;
  const double omega = nominal_angle_rad / (kTwoPi * t_p_s);  // carrier Rabi amplitude, Hz
  const double geff = std::sqrt(omega * omega + delta_Hz * delta_Hz);
  const double sine = std::sin(M_PI * t_p_s * geff);
  return (omega * omega) / (geff * geff) * sine * sine;
}

void apply_pulse(EnsembleState& state, const Pulse& pulse, double kappa_Hz,
                 double saturation_bandwidth_Hz, double b1_spread) {
  pulse.validate();
  if (!(kappa_Hz > 0.0)) throw std::invalid_argument("apply_pulse: kappa must be positive");

  if (pulse.kind == PulseKind::saturation) {
    const double half_band = 0.5 * saturation_bandwidth_Hz;
    for (size_t i = 0; i < state.size(); ++i) {
      if (std::abs(state.detuning_Hz[i] - pulse.carrier_offset_Hz) <= half_band) state.sz[i] = 0.0;
    }
    return;
  }

  const double nominal = (pulse.kind == PulseKind::pi ? M_PI : M_PI_2) * pulse.amplitude_scale;
  if (nominal == 0.0) return;

  // Optional +-b1_spread uniform amplitude distribution (5-node midpoint rule).
  static constexpr double kNodes[5] = {-0.8, -0.4, 0.0, 0.4, 0.8};
  for (size_t i = 0; i < state.size(); ++i) {
    const double delta = state.detuning_Hz[i] - pulse.carrier_offset_Hz;
    double p;
    if (b1_spread > 0.0) {
      p = 0.0;
      for (double u : kNodes) p += flip_probability(pulse.duration_s, nominal * (1.0 + b1_spread * u), delta);
      p /= 5.0;
    } else {
      p = flip_probability(pulse.duration_s, nominal, delta);
    }
    state.sz[i] *= 1.0 - 2.0 * p;
  }
}

void relax(EnsembleState& state, double duration_s, const std::function<double(double)>& rate_per_s) {
  if (duration_s < 0.0) throw std::invalid_argument("relax: duration must be non-negative");
  if (duration_s == 0.0) return;
  for (size_t i = 0; i < state.size(); ++i) {
    const double rate = rate_per_s(state.detuning_Hz[i]);
    state.sz[i] = 1.0 - (1.0 - state.sz[i]) * std::exp(-rate * duration_s);
  }
}

namespace {

double weighted_average(const EnsembleState& state, const Detection& detect, double kappa_Hz,
                        double center_Hz) {
  detect.validate();
  if (state.size() < 3) throw std::invalid_argument("echo_amplitude: ensemble grid too small");
  // Trapezoidal rule on the uniform grid; the step cancels in the ratio.
  double num = 0.0;
  double den = 0.0;
  const size_t n = state.size();
  for (size_t i = 0; i < n; ++i) {
    // Detection weight sinc^2(t_pi delta) * cavity Lorentzian: the
    // refocusing bandwidth acts twice on the coherence while the cavity
    // filters the emitted echo once. Non-negative, so raising sz anywhere
    // never lowers A_Q.
    const double offset = state.detuning_Hz[i] - center_Hz;
    const double x = M_PI * detect.t_pi_s * offset;
    const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    const double ratio = offset / kappa_Hz;
    const double w = sinc * sinc / (1.0 + 4.0 * ratio * ratio);
    const double f = state.density[i] * w * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    num += f * state.sz[i];
    den += f;
  }
  if (den <= 0.0) throw std::runtime_error("echo_amplitude: zero detection weight over the grid");
  return num / den;
}

}  // namespace

double echo_amplitude(const EnsembleState& state, const Detection& detect, double kappa_Hz) {
  return weighted_average(state, detect, kappa_Hz, 0.0);
}

double echo_amplitude_at(const EnsembleState& state, const Detection& detect, double kappa_Hz,
                         double probe_delta_Hz) {
  return weighted_average(state, detect, kappa_Hz, probe_delta_Hz);
}

}  // namespace purcell
