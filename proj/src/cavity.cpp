#include "cavity.hpp"

#include <cmath>
#include <stdexcept>

#include "units.hpp"

namespace purcell {

void Resonator::validate() const {
  if (!(omega0_Hz > 0.0) || !std::isfinite(omega0_Hz) || !(q_factor > 0.0) || !std::isfinite(q_factor)) {
    throw std::invalid_argument("Resonator: omega0 and Q must be positive and finite");
  }
  if (kappa1_Hz < 0.0 || kappa2_Hz < 0.0 || !std::isfinite(kappa1_Hz) || !std::isfinite(kappa2_Hz)) {
    throw std::invalid_argument("Resonator: coupling rates must be non-negative and finite");
  }
  // 1% slack for measurement round-off on kappa1 + kappa2 <= kappa.
  if (kappa1_Hz + kappa2_Hz > 1.01 * kappa()) {
    throw std::invalid_argument("Resonator: kappa1 + kappa2 exceeds the total linewidth omega0/Q");
  }
}

void CouplingGeometry::validate() const {
  if (db1y_T < 0.0 || db1z_T < 0.0 || !std::isfinite(db1y_T) || !std::isfinite(db1z_T)) {
    throw std::invalid_argument("CouplingGeometry: field fluctuations must be non-negative and finite");
  }
  if (!std::isfinite(theta_rad)) {
    throw std::invalid_argument("CouplingGeometry: theta must be finite");
  }
  if (!(matrix_element >= 0.0) || matrix_element > 0.5 + 1e-12) {
    throw std::invalid_argument("CouplingGeometry: matrix element must lie in [0, 0.5]");
  }
}

double coupling_g(const CouplingGeometry& geometry, double gamma_e_Hz_per_T) {
  geometry.validate();
  if (!(gamma_e_Hz_per_T > 0.0)) throw std::invalid_argument("coupling_g: gamma_e must be positive");
  const double cy = std::cos(geometry.theta_rad);
  const double transverse =
      std::sqrt(geometry.db1y_T * geometry.db1y_T * cy * cy + geometry.db1z_T * geometry.db1z_T);
  return gamma_e_Hz_per_T * geometry.matrix_element * transverse;
}

double purcell_rate(double g_Hz, double kappa_Hz, double delta_Hz) {
  if (!(kappa_Hz > 0.0)) throw std::invalid_argument("purcell_rate: kappa must be positive");
  if (!std::isfinite(g_Hz) || !std::isfinite(delta_Hz)) {
    throw std::invalid_argument("purcell_rate: non-finite input");
  }
  const double kappa = kTwoPi * kappa_Hz;
  const double g = kTwoPi * g_Hz;
  const double delta = kTwoPi * delta_Hz;
  return kappa * g * g / (kappa * kappa / 4.0 + delta * delta);
}

double t1_of_delta(double t1_resonant_s, double kappa_Hz, double delta_Hz, double gamma_nr_per_s) {
  if (!(t1_resonant_s > 0.0)) throw std::invalid_argument("t1_of_delta: resonant T1 must be positive");
  if (!(kappa_Hz > 0.0)) throw std::invalid_argument("t1_of_delta: kappa must be positive");
  if (gamma_nr_per_s < 0.0) throw std::invalid_argument("t1_of_delta: gamma_nr must be non-negative");
  const double ratio = delta_Hz / kappa_Hz;
  const double purcell = 1.0 / (t1_resonant_s * (1.0 + 4.0 * ratio * ratio));
  return 1.0 / (purcell + gamma_nr_per_s);
}

double mean_photon_number(double p_in_W, const Resonator& resonator) {
  resonator.validate();
  if (p_in_W < 0.0 || !std::isfinite(p_in_W)) {
    throw std::invalid_argument("mean_photon_number: input power must be non-negative");
  }
  const double kappa = kTwoPi * resonator.kappa();
  const double kappa1 = kTwoPi * resonator.kappa1_Hz;
  const double omega0 = kTwoPi * resonator.omega0_Hz;
  return 4.0 * kappa1 * p_in_W / (kappa * kappa * kHBar * omega0);
}

double rabi_frequency(double g_Hz, double n_photons) {
  if (n_photons < 0.0) throw std::invalid_argument("rabi_frequency: photon number must be non-negative");
  return 2.0 * g_Hz * std::sqrt(n_photons);
}

double cooperativity(double n_spins, double g_Hz, double kappa_Hz, double line_fwhm_Hz) {
  if (n_spins < 0.0) throw std::invalid_argument("cooperativity: spin number must be non-negative");
  if (!(g_Hz > 0.0) || !(kappa_Hz > 0.0) || !(line_fwhm_Hz > 0.0)) {
    throw std::invalid_argument("cooperativity: g, kappa and linewidth must be positive");
  }
  return n_spins * g_Hz * g_Hz / (kappa_Hz * line_fwhm_Hz);
}

double radiative_branching(const RelaxationChannels& channels) {
  if (channels.gamma_p_per_s < 0.0 || channels.gamma_nr_per_s < 0.0) {
    throw std::invalid_argument("radiative_branching: rates must be non-negative");
  }
  if (channels.total() <= 0.0) {
    throw std::invalid_argument("radiative_branching: undefined when both rates vanish");
  }
  return channels.gamma_p_per_s / channels.total();
}

}  // namespace purcell
