#pragma once

#include <functional>
#include <vector>

#include "spectral_line.hpp"

namespace purcell {

enum class PulseKind { pi, pi_half, saturation };

struct Pulse {
  double duration_s = 100e-6;
  PulseKind kind = PulseKind::pi;
  double carrier_offset_Hz = 0.0;
  double amplitude_scale = 1.0;  // 1.0 = calibrated pi (or pi/2) amplitude

  void validate() const;
};

/// Hahn-echo detection sequence timing (pi/2 - tau - pi).
struct Detection {
  double t_pi_half_s = 50e-6;
  double t_pi_s = 100e-6;

  void validate() const;
};

struct GridSpec {
  int points = 0;            // 0 = auto from kappa and the detection pulse
  double span_factor = 5.0;  // half-span = factor * FWHM_max + |center|_max
};

/// Discretized inhomogeneous ensemble: uniform detuning grid, line density
/// and longitudinal polarization per grid point (+1 = thermal equilibrium).
struct EnsembleState {
  std::vector<double> detuning_Hz;
  std::vector<double> density;
  std::vector<double> sz;

  size_t size() const { return detuning_Hz.size(); }
};

/// Thermal ensemble (sz = +1 everywhere) on a grid fine enough to resolve
/// both the cavity linewidth and the detection-pulse bandwidth.
EnsembleState thermal_ensemble(const SpectralLine& line, double kappa_Hz, double t_pi_s,
                               const GridSpec& grid = {});

/// Spectral response of a pulse of length t_p incident on a cavity of
/// linewidth kappa: sinc envelope times the cavity Lorentzian, 1 at zero
/// offset (the removable singularity is handled analytically).
double pulse_response(double t_p_s, double kappa_Hz, double offset_Hz);

/// Population-flip probability of a calibrated rectangular pulse at detuning
/// delta: strong-drive nutation with carrier Rabi amplitude
/// Omega = angle/(2 pi t_p):  P = Omega^2/(Omega^2+delta^2) *
/// sin^2(pi t_p sqrt(Omega^2+delta^2)).  P(0) = sin^2(angle/2).
double flip_probability(double t_p_s, double nominal_angle_rad, double delta_Hz);

/// Applies a pulse to the ensemble. pi/pi_half kinds rotate via the nutation
/// profile (sz -> sz (1 - 2P)); saturation zeroes sz over a rectangular band
/// of width saturation_bandwidth_Hz around the carrier. A non-zero b1_spread
/// averages the flip over a +-spread uniform amplitude distribution.
void apply_pulse(EnsembleState& state, const Pulse& pulse, double kappa_Hz,
                 double saturation_bandwidth_Hz = 250e3, double b1_spread = 0.0);

/// Exponential recovery toward thermal equilibrium for `duration`:
/// sz(T) = 1 - (1 - sz(0)) exp(-rate(delta) T).
void relax(EnsembleState& state, double duration_s, const std::function<double(double)>& rate_per_s);

/// Echo-amplitude readout A_Q = int sz rho W / int rho W with detection
/// weight W(delta) = sinc^2(t_pi delta) / (1 + 4 (delta/kappa)^2);
/// +1 for a thermal ensemble.
double echo_amplitude(const EnsembleState& state, const Detection& detect, double kappa_Hz);

/// Same readout with the detection window centered at probe_delta_Hz
/// (spins shifted onto cavity resonance by a static field offset).
double echo_amplitude_at(const EnsembleState& state, const Detection& detect, double kappa_Hz,
                         double probe_delta_Hz);

}  // namespace purcell
