#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cavity.hpp"
#include "ensemble.hpp"
#include "spin_system.hpp"

namespace purcell {

/// Generic sampled result; the meaning of x is protocol-specific
/// (time in s, input power in W, field in T, probe detuning in Hz).
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

struct SimOptions {
  GridSpec grid;
  double noise_sigma = 0.0;  // Gaussian amplitude noise on A_Q, 0 = off
  std::uint64_t seed = 0;
  double b1_spread = 0.0;  // fractional B1 inhomogeneity, e.g. 0.02
};

/// Detuning field pulse delivered through coils of limited bandwidth: the
/// edges follow a first-order low-pass, and `buffer_s` of settle time is
/// spent on each edge before/after the hold.
struct FieldPulse {
  double amplitude_T = 0.0;
  double bandwidth_Hz = 1.0;
  double buffer_s = 1.0;

  void validate() const;
};

enum class SaturationMode { plain, swept };

struct SaturationSpec {
  SaturationMode mode = SaturationMode::swept;
  std::vector<double> sweep_deltas_Hz;  // swept mode: detunings visited by the field scan
  double bandwidth_Hz = 250e3;          // plain-mode rectangular saturation bandwidth

  void validate() const;
};

/// Detuning-dependent relaxation rate Gamma(delta) = Gamma_P(delta) + Gamma_NR.
struct RelaxationModel {
  double g_Hz = 50.0;
  double kappa_Hz = 23e3;
  double gamma_nr_per_s = 0.0;

  double rate(double delta_Hz) const { return purcell_rate(g_Hz, kappa_Hz, delta_Hz) + gamma_nr_per_s; }
};

/// Inversion-recovery: invert, relax for T, Hahn-echo readout; one point per
/// entry of times_s. Output y is A_Q, normalized so thermal equilibrium = +1.
Curve simulate_inversion_recovery(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                                  double gamma_nr_per_s, const Pulse& invert, const Detection& detect,
                                  std::span<const double> times_s, const SimOptions& options = {});

/// Saturation-recovery with a detuning field pulse: saturate (plain band or
/// swept span), ramp the detuning to dfdB * amplitude with coil-limited
/// edges (relaxation during the edges is integrated with the time-varying
/// detuning), hold for T, ramp back, read out.
Curve simulate_saturation_recovery(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                                   double gamma_nr_per_s, const SaturationSpec& saturation,
                                   const FieldPulse& field_pulse, double dfdB_Hz_per_T,
                                   const Detection& detect, std::span<const double> times_s,
                                   const SimOptions& options = {});

/// Polarization profile across the line right after an excitation: for each
/// probe detuning the ensemble is shifted onto resonance (through the coil
/// low-pass when buffer_s > 0) and read out. Excitation kinds: none
/// (reference), a pulse, or a saturation scheme.
struct Excitation {
  enum class Kind { none, pulse, saturation } kind = Kind::none;
  Pulse pulse{};
  SaturationSpec saturation{};
};

Curve polarization_scan(const SpectralLine& line, const Resonator& resonator, double g_Hz,
                        double gamma_nr_per_s, const Excitation& excitation, const FieldPulse& ramp,
                        const Detection& detect, std::span<const double> probe_deltas_Hz,
                        const SimOptions& options = {});

/// Rabi oscillations of the refocusing-pulse echo versus cavity input power:
/// y = sin^2(theta/2) with theta = 2 pi * 2 g sqrt(nbar(P)) * t_p.
Curve simulate_rabi(std::span<const double> powers_W, double pulse_duration_s, double g_Hz,
                    const Resonator& resonator, const SimOptions& options = {});

/// Echo-detected field sweep: overlap of the cavity Lorentzian with every
/// allowed transition's strain doublet, weighted by matrix element squared;
/// doublet component centers are offsets from each transition frequency.
/// Output normalized to unit peak.
Curve field_sweep_spectrum(const SpinSystem& system, const Resonator& resonator,
                           const SpectralLine& doublet, double b_start_T, double b_stop_T, int points,
                           double min_matrix_element);

}  // namespace purcell
