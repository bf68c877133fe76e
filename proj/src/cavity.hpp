#pragma once

namespace purcell {

/// Lumped-element microwave resonator. kappa() = omega0/Q is the linewidth
/// (FWHM, ordinary Hz); kappa1/kappa2 are the input/output coupling rates.
struct Resonator {
  double omega0_Hz = 7.305e9;
  double q_factor = 1.1e5;
  double kappa1_Hz = 0.0;
  double kappa2_Hz = 0.0;

  double kappa() const { return omega0_Hz / q_factor; }
  void validate() const;  // throws std::invalid_argument
};

/// Orientation-dependent spin-cavity coupling inputs: vacuum-fluctuation
/// field components (T), static-field angle theta, and the Sx matrix element
/// of the addressed transition.
struct CouplingGeometry {
  double db1y_T = 0.0;
  double db1z_T = 0.0;
  double theta_rad = 0.0;
  double matrix_element = 0.5;

  void validate() const;
};

struct RelaxationChannels {
  double gamma_p_per_s = 0.0;   // cavity-induced (Purcell) rate
  double gamma_nr_per_s = 0.0;  // non-radiative floor

  double total() const { return gamma_p_per_s + gamma_nr_per_s; }
};

/// g = gamma_e * <Sx> * sqrt(dB1y^2 cos^2(theta) + dB1z^2), in Hz.
double coupling_g(const CouplingGeometry& geometry, double gamma_e_Hz_per_T);

/// Cavity-enhanced spontaneous-emission rate, s^-1. All inputs in ordinary
/// Hz; the angular 2*pi bookkeeping lives entirely inside this function:
///   Gamma_P = (2pi kappa) (2pi g)^2 / ((2pi kappa)^2/4 + (2pi delta)^2).
double purcell_rate(double g_Hz, double kappa_Hz, double delta_Hz);

/// T1 at detuning delta, combining the scaled resonant Purcell time with a
/// non-radiative rate: [ (t1_resonant (1 + 4 delta^2/kappa^2))^-1 + gamma_nr ]^-1.
double t1_of_delta(double t1_resonant_s, double kappa_Hz, double delta_Hz, double gamma_nr_per_s);

/// Mean intracavity photon number for input power p_in at cavity resonance
/// (single-port input-output convention, the calibration used throughout):
///   nbar = 4 (2pi kappa1) p_in / ((2pi kappa)^2 hbar (2pi omega0)).
double mean_photon_number(double p_in_W, const Resonator& resonator);

/// Rabi frequency Omega_R = 2 g sqrt(nbar), Hz.
double rabi_frequency(double g_Hz, double n_photons);

/// Cooperativity C = N g^2 / (kappa * line_fwhm), dimensionless.
double cooperativity(double n_spins, double g_Hz, double kappa_Hz, double line_fwhm_Hz);

/// Probability that a spin flip emits a cavity photon: Gamma_P/(Gamma_P+Gamma_NR).
/// Throws when both rates vanish.
double radiative_branching(const RelaxationChannels& channels);

}  // namespace purcell
