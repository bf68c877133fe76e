#include "purcellsim.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavity.hpp"
#include "ensemble.hpp"
#include "fit_models.hpp"
#include "labeling.hpp"
#include "protocols.hpp"
#include "spectral_line.hpp"
#include "spin_system.hpp"
#include "transitions.hpp"

namespace {

thread_local std::string g_last_error;

ps_status fail(ps_status code, const char* what) {
  g_last_error = what != nullptr ? what : "unknown error";
  return code;
}

// Maps C++ exceptions onto status codes: invalid_argument -> bad inputs,
// anything else -> numerical failure.
template <typename Fn>
ps_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PS_OK;
  } catch (const std::invalid_argument& e) {
    return fail(PS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PS_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PS_ERR_NUMERICAL, e.what());
  } catch (...) {
    return fail(PS_ERR_NUMERICAL, "unknown failure");
  }
}

purcell::SimOptions to_options(const ps_sim_options* options) {
  purcell::SimOptions out;
  if (options != nullptr) {
    out.grid.points = options->grid_points;
    if (options->grid_span_factor > 0.0) out.grid.span_factor = options->grid_span_factor;
    out.noise_sigma = options->noise_sigma;
    out.seed = options->seed;
    out.b1_spread = options->b1_spread;
  }
  return out;
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

struct ps_spin_system {
  purcell::SpinSystem system;
};
struct ps_resonator {
  purcell::Resonator resonator;
};
struct ps_transition_table {
  std::vector<purcell::Transition> rows;
};
struct ps_spectral_line {
  purcell::SpectralLine line;
};
struct ps_curve {
  purcell::Curve curve;
};
struct ps_fit_result {
  purcell::FitResult fit;
};

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

/* ---- spin model ---- */

ps_status ps_spin_system_create(double spin_s, double spin_i, double a_hz, double gamma_e_hz_per_t,
                                double gamma_n_hz_per_t, ps_spin_system** out) {
  return guarded([&] {
    require(out != nullptr, "ps_spin_system_create: null output");
    purcell::SpinSystem system{spin_s, spin_i, a_hz, gamma_e_hz_per_t, gamma_n_hz_per_t};
    system.validate();
    *out = new ps_spin_system{system};
  });
}

ps_status ps_spin_system_create_bismuth(ps_spin_system** out) {
  return guarded([&] {
    require(out != nullptr, "ps_spin_system_create_bismuth: null output");
    *out = new ps_spin_system{purcell::bismuth_donor()};
  });
}

void ps_spin_system_free(ps_spin_system* system) { delete system; }

int ps_spin_system_dimension(const ps_spin_system* system) {
  return system != nullptr ? system->system.dimension() : 0;
}

ps_status ps_spin_system_energies(const ps_spin_system* system, double bx_t, double by_t, double bz_t,
                                  double* energies_hz, int capacity) {
  return guarded([&] {
    require(system != nullptr && energies_hz != nullptr, "ps_spin_system_energies: null argument");
    require(capacity >= system->system.dimension(), "ps_spin_system_energies: capacity too small");
    const purcell::Matrix h = purcell::build_hamiltonian(system->system, {bx_t, by_t, bz_t});
    const purcell::EigenDecomposition eig = purcell::jacobi_eigensolve(h);
    for (Eigen::Index i = 0; i < eig.energies.size(); ++i) energies_hz[i] = eig.energies(i);
  });
}

ps_status ps_transition_table_compute(const ps_spin_system* system, double b0_t,
                                      double min_matrix_element, ps_transition_table** out) {
  return guarded([&] {
    require(system != nullptr && out != nullptr, "ps_transition_table_compute: null argument");
    auto rows = purcell::transition_table(system->system, b0_t, min_matrix_element);
    *out = new ps_transition_table{std::move(rows)};
  });
}

void ps_transition_table_free(ps_transition_table* table) { delete table; }

int ps_transition_table_size(const ps_transition_table* table) {
  return table != nullptr ? static_cast<int>(table->rows.size()) : 0;
}

ps_status ps_transition_table_get(const ps_transition_table* table, int index, ps_transition* out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "ps_transition_table_get: null argument");
    require(index >= 0 && index < static_cast<int>(table->rows.size()),
            "ps_transition_table_get: index out of range");
    const purcell::Transition& t = table->rows[static_cast<size_t>(index)];
    *out = ps_transition{t.from.F, t.from.mF, t.to.F,          t.to.mF,
                         t.frequency_Hz, t.matrix_element, t.dfdB_Hz_per_T, t.branch};
  });
}

ps_status ps_transition_slope(const ps_spin_system* system, double b0_t, double from_f,
                              double from_mf, double to_f, double to_mf, double* out) {
  return guarded([&] {
    require(system != nullptr && out != nullptr, "ps_transition_slope: null argument");
    *out = purcell::transition_slope(system->system, b0_t, {from_f, from_mf}, {to_f, to_mf});
  });
}

/* ---- cavity ---- */

ps_status ps_resonator_create(double omega0_hz, double q_factor, double kappa1_hz, double kappa2_hz,
                              ps_resonator** out) {
  return guarded([&] {
    require(out != nullptr, "ps_resonator_create: null output");
    purcell::Resonator resonator{omega0_hz, q_factor, kappa1_hz, kappa2_hz};
    resonator.validate();
    *out = new ps_resonator{resonator};
  });
}

void ps_resonator_free(ps_resonator* resonator) { delete resonator; }

double ps_resonator_kappa(const ps_resonator* resonator) {
  return resonator != nullptr ? resonator->resonator.kappa() : 0.0;
}

ps_status ps_coupling_g(double db1y_t, double db1z_t, double theta_rad, double matrix_element,
                        double gamma_e_hz_per_t, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_coupling_g: null output");
    *out = purcell::coupling_g({db1y_t, db1z_t, theta_rad, matrix_element}, gamma_e_hz_per_t);
  });
}

ps_status ps_purcell_rate(double g_hz, double kappa_hz, double delta_hz, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_purcell_rate: null output");
    *out = purcell::purcell_rate(g_hz, kappa_hz, delta_hz);
  });
}

ps_status ps_t1_of_delta(double t1_resonant_s, double kappa_hz, double delta_hz,
                         double gamma_nr_per_s, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_t1_of_delta: null output");
    *out = purcell::t1_of_delta(t1_resonant_s, kappa_hz, delta_hz, gamma_nr_per_s);
  });
}

ps_status ps_mean_photon_number(double p_in_w, const ps_resonator* resonator, double* out) {
  return guarded([&] {
    require(resonator != nullptr && out != nullptr, "ps_mean_photon_number: null argument");
    *out = purcell::mean_photon_number(p_in_w, resonator->resonator);
  });
}

ps_status ps_rabi_frequency(double g_hz, double n_photons, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_rabi_frequency: null output");
    *out = purcell::rabi_frequency(g_hz, n_photons);
  });
}

ps_status ps_cooperativity(double n_spins, double g_hz, double kappa_hz, double line_fwhm_hz,
                           double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_cooperativity: null output");
    *out = purcell::cooperativity(n_spins, g_hz, kappa_hz, line_fwhm_hz);
  });
}

ps_status ps_radiative_branching(double gamma_p_per_s, double gamma_nr_per_s, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_radiative_branching: null output");
    *out = purcell::radiative_branching({gamma_p_per_s, gamma_nr_per_s});
  });
}

ps_status ps_pulse_response(double t_p_s, double kappa_hz, double offset_hz, double* out) {
  return guarded([&] {
    require(out != nullptr, "ps_pulse_response: null output");
    *out = purcell::pulse_response(t_p_s, kappa_hz, offset_hz);
  });
}

/* ---- ensemble simulation ---- */

ps_status ps_spectral_line_create(const double* centers_hz, const double* fwhms_hz,
                                  const double* weights, int n_components, ps_spectral_line** out) {
  return guarded([&] {
    require(centers_hz != nullptr && fwhms_hz != nullptr && weights != nullptr && out != nullptr,
            "ps_spectral_line_create: null argument");
    require(n_components > 0, "ps_spectral_line_create: need at least one component");
    purcell::SpectralLine line;
    for (int i = 0; i < n_components; ++i) {
      line.components.push_back({centers_hz[i], fwhms_hz[i], weights[i]});
    }
    line.validate();
    *out = new ps_spectral_line{std::move(line)};
  });
}

void ps_spectral_line_free(ps_spectral_line* line) { delete line; }

void ps_curve_free(ps_curve* curve) { delete curve; }

int ps_curve_size(const ps_curve* curve) {
  return curve != nullptr ? static_cast<int>(curve->curve.x.size()) : 0;
}

ps_status ps_curve_get(const ps_curve* curve, int index, double* x, double* y) {
  return guarded([&] {
    require(curve != nullptr && x != nullptr && y != nullptr, "ps_curve_get: null argument");
    require(index >= 0 && index < static_cast<int>(curve->curve.x.size()),
            "ps_curve_get: index out of range");
    *x = curve->curve.x[static_cast<size_t>(index)];
    *y = curve->curve.y[static_cast<size_t>(index)];
  });
}

ps_status ps_simulate_inversion_recovery(const ps_spectral_line* line, const ps_resonator* resonator,
                                         double g_hz, double gamma_nr_per_s, double t_invert_s,
                                         double t_detect_pi_half_s, double t_detect_pi_s,
                                         const double* times_s, int n_times,
                                         const ps_sim_options* options, ps_curve** out) {
  return guarded([&] {
    require(line != nullptr && resonator != nullptr && times_s != nullptr && out != nullptr,
            "ps_simulate_inversion_recovery: null argument");
    require(n_times > 0, "ps_simulate_inversion_recovery: empty time list");
    purcell::Pulse invert{t_invert_s, purcell::PulseKind::pi, 0.0, 1.0};
    purcell::Detection detect{t_detect_pi_half_s, t_detect_pi_s};
    auto curve = purcell::simulate_inversion_recovery(
        line->line, resonator->resonator, g_hz, gamma_nr_per_s, invert, detect,
        std::span<const double>(times_s, static_cast<size_t>(n_times)), to_options(options));
    *out = new ps_curve{std::move(curve)};
  });
}

ps_status ps_simulate_saturation_recovery(const ps_spectral_line* line, const ps_resonator* resonator,
                                          double g_hz, double gamma_nr_per_s, int swept,
                                          const double* sweep_deltas_hz, int n_sweep,
                                          double saturation_bandwidth_hz, double field_amplitude_t,
                                          double dfdb_hz_per_t, double coil_bandwidth_hz,
                                          double buffer_s, double t_detect_pi_half_s,
                                          double t_detect_pi_s, const double* times_s, int n_times,
                                          const ps_sim_options* options, ps_curve** out) {
  return guarded([&] {
    require(line != nullptr && resonator != nullptr && times_s != nullptr && out != nullptr,
            "ps_simulate_saturation_recovery: null argument");
    require(n_times > 0, "ps_simulate_saturation_recovery: empty time list");
    purcell::SaturationSpec saturation;
    saturation.mode = swept != 0 ? purcell::SaturationMode::swept : purcell::SaturationMode::plain;
    saturation.bandwidth_Hz = saturation_bandwidth_hz > 0.0 ? saturation_bandwidth_hz : 250e3;
    if (swept != 0) {
      require(sweep_deltas_hz != nullptr && n_sweep > 0,
              "ps_simulate_saturation_recovery: swept mode needs a schedule");
      saturation.sweep_deltas_Hz.assign(sweep_deltas_hz, sweep_deltas_hz + n_sweep);
    }
    purcell::FieldPulse pulse{field_amplitude_t, coil_bandwidth_hz, buffer_s};
    purcell::Detection detect{t_detect_pi_half_s, t_detect_pi_s};
    auto curve = purcell::simulate_saturation_recovery(
        line->line, resonator->resonator, g_hz, gamma_nr_per_s, saturation, pulse, dfdb_hz_per_t,
        detect, std::span<const double>(times_s, static_cast<size_t>(n_times)), to_options(options));
    *out = new ps_curve{std::move(curve)};
  });
}

ps_status ps_polarization_scan(const ps_spectral_line* line, const ps_resonator* resonator,
                               double g_hz, double gamma_nr_per_s, int excitation, double t_pulse_s,
                               const double* sweep_deltas_hz, int n_sweep,
                               double saturation_bandwidth_hz, double coil_bandwidth_hz,
                               double buffer_s, double t_detect_pi_half_s, double t_detect_pi_s,
                               const double* probe_deltas_hz, int n_probes,
                               const ps_sim_options* options, ps_curve** out) {
  return guarded([&] {
    require(line != nullptr && resonator != nullptr && probe_deltas_hz != nullptr && out != nullptr,
            "ps_polarization_scan: null argument");
    require(n_probes > 0, "ps_polarization_scan: empty probe list");
    purcell::Excitation exc;
    switch (excitation) {
      case 0:
        exc.kind = purcell::Excitation::Kind::none;
        break;
      case 1:
        exc.kind = purcell::Excitation::Kind::pulse;
        exc.pulse = purcell::Pulse{t_pulse_s, purcell::PulseKind::pi, 0.0, 1.0};
        break;
      case 2:
      case 3:
        exc.kind = purcell::Excitation::Kind::saturation;
        exc.saturation.mode =
            excitation == 3 ? purcell::SaturationMode::swept : purcell::SaturationMode::plain;
        exc.saturation.bandwidth_Hz = saturation_bandwidth_hz > 0.0 ? saturation_bandwidth_hz : 250e3;
        if (excitation == 3) {
          require(sweep_deltas_hz != nullptr && n_sweep > 0,
                  "ps_polarization_scan: swept saturation needs a schedule");
          exc.saturation.sweep_deltas_Hz.assign(sweep_deltas_hz, sweep_deltas_hz + n_sweep);
        }
        break;
      default:
        throw std::invalid_argument("ps_polarization_scan: excitation must be 0..3");
    }
    purcell::FieldPulse ramp{0.0, coil_bandwidth_hz, buffer_s};
    purcell::Detection detect{t_detect_pi_half_s, t_detect_pi_s};
    auto curve = purcell::polarization_scan(
        line->line, resonator->resonator, g_hz, gamma_nr_per_s, exc, ramp, detect,
        std::span<const double>(probe_deltas_hz, static_cast<size_t>(n_probes)), to_options(options));
    *out = new ps_curve{std::move(curve)};
  });
}

ps_status ps_simulate_rabi(const double* powers_w, int n_powers, double pulse_duration_s, double g_hz,
                           const ps_resonator* resonator, const ps_sim_options* options,
                           ps_curve** out) {
  return guarded([&] {
    require(powers_w != nullptr && resonator != nullptr && out != nullptr,
            "ps_simulate_rabi: null argument");
    require(n_powers > 0, "ps_simulate_rabi: empty power list");
    auto curve = purcell::simulate_rabi(std::span<const double>(powers_w, static_cast<size_t>(n_powers)),
                                        pulse_duration_s, g_hz, resonator->resonator,
                                        to_options(options));
    *out = new ps_curve{std::move(curve)};
  });
}

ps_status ps_field_sweep_spectrum(const ps_spin_system* system, const ps_resonator* resonator,
                                  const ps_spectral_line* doublet, double b_start_t, double b_stop_t,
                                  int n_points, double min_matrix_element, ps_curve** out) {
  return guarded([&] {
    require(system != nullptr && resonator != nullptr && doublet != nullptr && out != nullptr,
            "ps_field_sweep_spectrum: null argument");
    auto curve = purcell::field_sweep_spectrum(system->system, resonator->resonator, doublet->line,
                                               b_start_t, b_stop_t, n_points, min_matrix_element);
    *out = new ps_curve{std::move(curve)};
  });
}

/* ---- fitters ---- */

void ps_fit_result_free(ps_fit_result* fit) { delete fit; }

int ps_fit_result_param_count(const ps_fit_result* fit) {
  return fit != nullptr ? static_cast<int>(fit->fit.param_names.size()) : 0;
}

const char* ps_fit_result_param_name(const ps_fit_result* fit, int index) {
  if (fit == nullptr || index < 0 || index >= static_cast<int>(fit->fit.param_names.size())) return "";
  return fit->fit.param_names[static_cast<size_t>(index)].c_str();
}

double ps_fit_result_param(const ps_fit_result* fit, int index) {
  if (fit == nullptr || index < 0 || index >= fit->fit.params.size()) return 0.0;
  return fit->fit.params(index);
}

double ps_fit_result_stderr(const ps_fit_result* fit, int index) {
  if (fit == nullptr || index < 0 || index >= fit->fit.stderrs.size()) return 0.0;
  return fit->fit.stderrs(index);
}

double ps_fit_result_residual_norm(const ps_fit_result* fit) {
  return fit != nullptr ? fit->fit.residual_norm : 0.0;
}

int ps_fit_result_converged(const ps_fit_result* fit) {
  return fit != nullptr && fit->fit.converged ? 1 : 0;
}

int ps_fit_result_iterations(const ps_fit_result* fit) {
  return fit != nullptr ? fit->fit.iterations : 0;
}

const char* ps_fit_result_note(const ps_fit_result* fit) {
  return fit != nullptr ? fit->fit.note.c_str() : "";
}

ps_status ps_fit_exponential(const double* times_s, const double* amplitudes, int n,
                             ps_fit_result** out) {
  return guarded([&] {
    require(times_s != nullptr && amplitudes != nullptr && out != nullptr,
            "ps_fit_exponential: null argument");
    require(n > 0, "ps_fit_exponential: empty data");
    auto fit = purcell::fit_exponential(std::span<const double>(times_s, static_cast<size_t>(n)),
                                        std::span<const double>(amplitudes, static_cast<size_t>(n)));
    *out = new ps_fit_result{std::move(fit)};
  });
}

ps_status ps_fit_double_exponential(const double* times_s, const double* amplitudes, int n,
                                    ps_fit_result** out) {
  return guarded([&] {
    require(times_s != nullptr && amplitudes != nullptr && out != nullptr,
            "ps_fit_double_exponential: null argument");
    require(n > 0, "ps_fit_double_exponential: empty data");
    auto fit =
        purcell::fit_double_exponential(std::span<const double>(times_s, static_cast<size_t>(n)),
                                        std::span<const double>(amplitudes, static_cast<size_t>(n)));
    *out = new ps_fit_result{std::move(fit)};
  });
}

ps_status ps_fit_purcell_t1(const double* deltas_hz, const double* t1_s, int n, double t1_resonant_s,
                            double kappa_hz, ps_fit_result** out) {
  return guarded([&] {
    require(deltas_hz != nullptr && t1_s != nullptr && out != nullptr,
            "ps_fit_purcell_t1: null argument");
    require(n > 0, "ps_fit_purcell_t1: empty data");
    auto fit = purcell::fit_purcell_t1(std::span<const double>(deltas_hz, static_cast<size_t>(n)),
                                       std::span<const double>(t1_s, static_cast<size_t>(n)),
                                       t1_resonant_s, kappa_hz);
    *out = new ps_fit_result{std::move(fit)};
  });
}

ps_status ps_fit_rabi(const double* powers_w, const double* amplitudes, int n,
                      const ps_resonator* resonator, double pulse_duration_s, ps_fit_result** out) {
  return guarded([&] {
    require(powers_w != nullptr && amplitudes != nullptr && resonator != nullptr && out != nullptr,
            "ps_fit_rabi: null argument");
    require(n > 0, "ps_fit_rabi: empty data");
    auto fit = purcell::fit_rabi(std::span<const double>(powers_w, static_cast<size_t>(n)),
                                 std::span<const double>(amplitudes, static_cast<size_t>(n)),
                                 resonator->resonator, pulse_duration_s);
    *out = new ps_fit_result{std::move(fit)};
  });
}

} /* extern "C" */
