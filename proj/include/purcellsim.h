/* purcellsim: cavity-controlled spin relaxation. Spin spectrum, coupling and
 * relaxation-rate calculations, pulse-protocol simulation over an
 * inhomogeneous spin ensemble, and decay-curve fitting.
 *
 * C binding of the computation core. Every entry point returns a ps_status;
 * results travel through out-parameters and opaque handles that must be
 * released with the matching *_free call. On failure the handle outputs are
 * untouched and ps_last_error() carries a thread-local message.
 *
 * Unit conventions: ordinary frequencies (Hz) everywhere, fields in tesla,
 * times in seconds, rates in 1/s. Angular 2*pi factors are internal.
 */
#ifndef PURCELLSIM_H
#define PURCELLSIM_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1, /* bad inputs, failed validation */
  PS_ERR_NUMERICAL = 2         /* solver/labeling/convergence failure */
} ps_status;

PS_API const char* ps_version(void);
/* Message from the most recent failing call on this thread ("" if none). */
PS_API const char* ps_last_error(void);

/* ------------------------------------------------------------------ */
/* Spin model                                                          */
/* ------------------------------------------------------------------ */

typedef struct ps_spin_system ps_spin_system;

PS_API ps_status ps_spin_system_create(double spin_s, double spin_i, double a_hz,
                                       double gamma_e_hz_per_t, double gamma_n_hz_per_t,
                                       ps_spin_system** out);
/* Si:Bi donor defaults: S=1/2, I=9/2, A=1.4752 GHz, gamma_e=27.997 GHz/T,
 * gamma_n=6.9 MHz/T. */
PS_API ps_status ps_spin_system_create_bismuth(ps_spin_system** out);
PS_API void ps_spin_system_free(ps_spin_system* system);
PS_API int ps_spin_system_dimension(const ps_spin_system* system);

/* Eigenvalues of H(B)/h in Hz, ascending. capacity must be >= dimension. */
PS_API ps_status ps_spin_system_energies(const ps_spin_system* system, double bx_t, double by_t,
                                         double bz_t, double* energies_hz, int capacity);

typedef struct ps_transition {
  double from_f, from_mf; /* lower-energy state */
  double to_f, to_mf;     /* upper state */
  double frequency_hz;
  double matrix_element; /* |<to|Sx|from>| */
  double dfdb_hz_per_t;
  int branch; /* dF * dmF, +1 or -1 */
} ps_transition;

typedef struct ps_transition_table ps_transition_table;

/* All dF*dmF = +-1 transitions at B0 (along z) with matrix element >=
 * min_matrix_element, sorted by frequency, df/dB from a 10 uT central
 * difference. */
PS_API ps_status ps_transition_table_compute(const ps_spin_system* system, double b0_t,
                                             double min_matrix_element, ps_transition_table** out);
PS_API void ps_transition_table_free(ps_transition_table* table);
PS_API int ps_transition_table_size(const ps_transition_table* table);
PS_API ps_status ps_transition_table_get(const ps_transition_table* table, int index,
                                         ps_transition* out);

/* df/dB of one transition picked by its (F, mF) label pair. */
PS_API ps_status ps_transition_slope(const ps_spin_system* system, double b0_t, double from_f,
                                     double from_mf, double to_f, double to_mf, double* out);

/* ------------------------------------------------------------------ */
/* Cavity                                                              */
/* ------------------------------------------------------------------ */

typedef struct ps_resonator ps_resonator;

PS_API ps_status ps_resonator_create(double omega0_hz, double q_factor, double kappa1_hz,
                                     double kappa2_hz, ps_resonator** out);
PS_API void ps_resonator_free(ps_resonator* resonator);
PS_API double ps_resonator_kappa(const ps_resonator* resonator); /* omega0/Q, Hz */

/* g = gamma_e * <Sx> * sqrt(db1y^2 cos^2(theta) + db1z^2), Hz. */
PS_API ps_status ps_coupling_g(double db1y_t, double db1z_t, double theta_rad,
                               double matrix_element, double gamma_e_hz_per_t, double* out);
/* Gamma_P = (2pi kappa)(2pi g)^2 / ((2pi kappa)^2/4 + (2pi delta)^2), 1/s. */
PS_API ps_status ps_purcell_rate(double g_hz, double kappa_hz, double delta_hz, double* out);
/* [ (t1_resonant (1+4 delta^2/kappa^2))^-1 + gamma_nr ]^-1, s. */
PS_API ps_status ps_t1_of_delta(double t1_resonant_s, double kappa_hz, double delta_hz,
                                double gamma_nr_per_s, double* out);
PS_API ps_status ps_mean_photon_number(double p_in_w, const ps_resonator* resonator, double* out);
PS_API ps_status ps_rabi_frequency(double g_hz, double n_photons, double* out);
PS_API ps_status ps_cooperativity(double n_spins, double g_hz, double kappa_hz,
                                  double line_fwhm_hz, double* out);
PS_API ps_status ps_radiative_branching(double gamma_p_per_s, double gamma_nr_per_s, double* out);
/* Pulse spectral response: sinc(t_p offset) / (1 + 4 (offset/kappa)^2). */
PS_API ps_status ps_pulse_response(double t_p_s, double kappa_hz, double offset_hz, double* out);

/* ------------------------------------------------------------------ */
/* Ensemble simulation                                                 */
/* ------------------------------------------------------------------ */

typedef struct ps_spectral_line ps_spectral_line;

/* Weighted-Gaussian spectral density; one (center, fwhm, weight) triple per
 * component. */
PS_API ps_status ps_spectral_line_create(const double* centers_hz, const double* fwhms_hz,
                                         const double* weights, int n_components,
                                         ps_spectral_line** out);
PS_API void ps_spectral_line_free(ps_spectral_line* line);

typedef struct ps_sim_options {
  int grid_points;         /* 0 = auto-sized grid */
  double grid_span_factor; /* 0 = default 5.0 */
  double noise_sigma;      /* Gaussian noise on A_Q, 0 = off */
  unsigned long long seed;
  double b1_spread; /* fractional B1 inhomogeneity, 0 = off */
} ps_sim_options;

typedef struct ps_curve ps_curve; /* sampled (x, y) series */

PS_API void ps_curve_free(ps_curve* curve);
PS_API int ps_curve_size(const ps_curve* curve);
PS_API ps_status ps_curve_get(const ps_curve* curve, int index, double* x, double* y);

/* Inversion recovery: t_invert pi pulse, relax, Hahn-echo readout with the
 * (t_detect_pi_half, t_detect_pi) pair. Output x = time (s), y = A_Q. */
PS_API ps_status ps_simulate_inversion_recovery(const ps_spectral_line* line,
                                                const ps_resonator* resonator, double g_hz,
                                                double gamma_nr_per_s, double t_invert_s,
                                                double t_detect_pi_half_s, double t_detect_pi_s,
                                                const double* times_s, int n_times,
                                                const ps_sim_options* options, ps_curve** out);

/* Saturation recovery with a detuning field pulse. swept != 0 saturates the
 * span covered by sweep_deltas (ideal unit saturation); swept == 0 saturates
 * a saturation_bandwidth-wide band at resonance. The field pulse detunes the
 * ensemble by dfdb * field_amplitude through coil edges of the given
 * bandwidth, with buffer_s settle time per edge. */
PS_API ps_status ps_simulate_saturation_recovery(
    const ps_spectral_line* line, const ps_resonator* resonator, double g_hz, double gamma_nr_per_s,
    int swept, const double* sweep_deltas_hz, int n_sweep, double saturation_bandwidth_hz,
    double field_amplitude_t, double dfdb_hz_per_t, double coil_bandwidth_hz, double buffer_s,
    double t_detect_pi_half_s, double t_detect_pi_s, const double* times_s, int n_times,
    const ps_sim_options* options, ps_curve** out);

/* Polarization profile across the line right after an excitation.
 * excitation: 0 = none (reference), 1 = pi pulse of length t_pulse_s,
 * 2 = plain saturation, 3 = swept saturation. buffer_s > 0 routes each probe
 * shift through the coil low-pass (the transient-relaxation artifact);
 * buffer_s = 0 probes instantaneously. x = probe detuning, y = <Sz>. */
PS_API ps_status ps_polarization_scan(const ps_spectral_line* line, const ps_resonator* resonator,
                                      double g_hz, double gamma_nr_per_s, int excitation,
                                      double t_pulse_s, const double* sweep_deltas_hz, int n_sweep,
                                      double saturation_bandwidth_hz, double coil_bandwidth_hz,
                                      double buffer_s, double t_detect_pi_half_s,
                                      double t_detect_pi_s, const double* probe_deltas_hz,
                                      int n_probes, const ps_sim_options* options, ps_curve** out);

/* Rabi oscillations versus refocusing-pulse input power:
 * y = sin^2(2 pi g sqrt(nbar(P)) t_p). */
PS_API ps_status ps_simulate_rabi(const double* powers_w, int n_powers, double pulse_duration_s,
                                  double g_hz, const ps_resonator* resonator,
                                  const ps_sim_options* options, ps_curve** out);

/* Echo-detected field sweep; doublet components are offsets from each
 * transition frequency. y normalized to unit peak. */
PS_API ps_status ps_field_sweep_spectrum(const ps_spin_system* system,
                                         const ps_resonator* resonator,
                                         const ps_spectral_line* doublet, double b_start_t,
                                         double b_stop_t, int n_points, double min_matrix_element,
                                         ps_curve** out);

/* ------------------------------------------------------------------ */
/* Fitters                                                             */
/* ------------------------------------------------------------------ */

typedef struct ps_fit_result ps_fit_result;

PS_API void ps_fit_result_free(ps_fit_result* fit);
PS_API int ps_fit_result_param_count(const ps_fit_result* fit);
PS_API const char* ps_fit_result_param_name(const ps_fit_result* fit, int index);
PS_API double ps_fit_result_param(const ps_fit_result* fit, int index);
PS_API double ps_fit_result_stderr(const ps_fit_result* fit, int index);
PS_API double ps_fit_result_residual_norm(const ps_fit_result* fit);
PS_API int ps_fit_result_converged(const ps_fit_result* fit);
PS_API int ps_fit_result_iterations(const ps_fit_result* fit);
PS_API const char* ps_fit_result_note(const ps_fit_result* fit);

/* offset - A exp(-t/T1); params A, T1, offset. */
PS_API ps_status ps_fit_exponential(const double* times_s, const double* amplitudes, int n,
                                    ps_fit_result** out);
/* offset - A1 exp(-t/T1a) - A2 exp(-t/T1b), T1a <= T1b. */
PS_API ps_status ps_fit_double_exponential(const double* times_s, const double* amplitudes, int n,
                                           ps_fit_result** out);
/* T1(delta) with fixed t1_resonant and kappa; single parameter gamma_nr. */
PS_API ps_status ps_fit_purcell_t1(const double* deltas_hz, const double* t1_s, int n,
                                   double t1_resonant_s, double kappa_hz, ps_fit_result** out);
/* A sin^2(2 pi g sqrt(nbar(P)) t_p); params amplitude, g. */
PS_API ps_status ps_fit_rabi(const double* powers_w, const double* amplitudes, int n,
                             const ps_resonator* resonator, double pulse_duration_s,
                             ps_fit_result** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PURCELLSIM_H */
