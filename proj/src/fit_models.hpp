#pragma once

#include <span>

#include "cavity.hpp"
#include "levenberg_marquardt.hpp"

namespace purcell {

/// offset - A exp(-t/T1); params {A, T1, offset}. Initial guess from the
/// log-linearized tail. Needs >= 4 points with strictly increasing times.
FitResult fit_exponential(std::span<const double> times_s, std::span<const double> amplitudes);

/// offset - A1 exp(-t/T1a) - A2 exp(-t/T1b) with T1a <= T1b enforced after
/// convergence; three deterministic starts guard against local minima.
/// Sets a note when the two time constants are statistically
/// indistinguishable (log-ratio CI includes zero). Needs >= 7 points.
FitResult fit_double_exponential(std::span<const double> times_s, std::span<const double> amplitudes);

/// One-parameter fit of T1(delta) = [ (t1_resonant (1+4 delta^2/kappa^2))^-1
/// + gamma_nr ]^-1 with log residuals (the data spans decades); t1_resonant
/// and kappa are fixed externally-known inputs. Params {gamma_nr}.
FitResult fit_purcell_t1(std::span<const double> deltas_Hz, std::span<const double> t1_s,
                         double t1_resonant_s, double kappa_Hz);

/// Oscillatory Rabi fit A sin^2(2 pi g sqrt(nbar(P)) t_p) in sqrt(P); the
/// photon calibration comes from the resonator. Params {amplitude, g}.
/// Zero-signal input is rejected; an oscillation shorter than one full
/// period at the fitted g is reported as non-converged.
FitResult fit_rabi(std::span<const double> powers_W, std::span<const double> amplitudes,
                   const Resonator& resonator, double pulse_duration_s);

}  // namespace purcell
