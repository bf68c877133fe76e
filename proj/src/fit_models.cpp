#include "fit_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "units.hpp"

namespace purcell {

namespace {

void validate_curve(std::span<const double> t, std::span<const double> y, size_t min_points,
                    const char* who) {
  if (t.size() != y.size()) throw std::invalid_argument(std::string(who) + ": size mismatch");
  if (t.size() < min_points) {
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_points) +
                                " points");
  }
  for (size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) {
      throw std::invalid_argument(std::string(who) + ": non-finite data");
    }
    if (i > 0 && t[i] <= t[i - 1]) {
      throw std::invalid_argument(std::string(who) + ": times must be strictly increasing");
    }
  }
}

double safe_exp(double x) { return std::exp(std::min(x, 700.0)); }

// Log-linear tail estimate of the decay constant; falls back to span/3.
double initial_t1(std::span<const double> t, std::span<const double> y, double offset, double amp) {
  const double floor = std::max(1e-3 * std::abs(amp), 1e-300);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double d = offset - y[i];
    if (d > floor) {
      const double ly = std::log(d);
      sx += t[i];
      sy += ly;
      sxx += t[i] * t[i];
      sxy += t[i] * ly;
      ++n;
    }
  }
  const double span = t.back() - t.front();
  if (n >= 2) {
    const double denom = n * sxx - sx * sx;
    if (denom > 0) {
      const double slope = (n * sxy - sx * sy) / denom;
      if (slope < -1.0 / (1e6 * std::max(span, 1e-300))) return -1.0 / slope;
    }
  }
  return std::max(span / 3.0, 1e-12);
}

}  // namespace

FitResult fit_exponential(std::span<const double> times_s, std::span<const double> amplitudes) {
  validate_curve(times_s, amplitudes, 4, "fit_exponential");

  const auto model = [times_s, amplitudes](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(times_s.size()));
    for (size_t i = 0; i < times_s.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = p(2) - p(0) * safe_exp(-times_s[i] / p(1)) - amplitudes[i];
    }
    return r;
  };

  const double offset0 = amplitudes.back();
  const double amp0 = offset0 - amplitudes.front();
  Eigen::VectorXd p0(3);
  p0 << amp0, initial_t1(times_s, amplitudes, offset0, amp0), offset0;

  FitResult result = levenberg_marquardt(model, p0);
  result.param_names = {"A", "T1", "offset"};
  return result;
}

FitResult fit_double_exponential(std::span<const double> times_s, std::span<const double> amplitudes) {
  validate_curve(times_s, amplitudes, 7, "fit_double_exponential");

  const auto model = [times_s, amplitudes](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(times_s.size()));
    for (size_t i = 0; i < times_s.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = p(4) - p(0) * safe_exp(-times_s[i] / p(1)) -
                                        p(2) * safe_exp(-times_s[i] / p(3)) - amplitudes[i];
    }
    return r;
  };

  const FitResult single = fit_exponential(times_s, amplitudes);
  const double amp = single.params(0);
  const double t1 = std::abs(single.params(1));
  const double offset = single.params(2);

  // Three deterministic starts bracketing the single-exponential time scale.
  const double starts[3][2] = {{t1 / 3.0, 3.0 * t1}, {t1 / 10.0, t1}, {t1, 10.0 * t1}};
  FitResult best;
  best.residual_norm = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    Eigen::VectorXd p0(5);
    p0 << 0.5 * amp, s[0], 0.5 * amp, s[1], offset;
    FitResult trial = levenberg_marquardt(model, p0);
    if (trial.residual_norm < best.residual_norm) best = trial;
  }

  if (best.params(1) > best.params(3)) {
    std::swap(best.params(0), best.params(2));
    std::swap(best.params(1), best.params(3));
    std::swap(best.stderrs(0), best.stderrs(2));
    std::swap(best.stderrs(1), best.stderrs(3));
  }
  best.param_names = {"A1", "T1a", "A2", "T1b", "offset"};

  const double t1a = best.params(1);
  const double t1b = best.params(3);
  if (t1a > 0.0 && t1b > 0.0) {
    const double log_ratio = std::log(t1b / t1a);
    const double se_ratio = std::hypot(best.stderrs(1) / t1a, best.stderrs(3) / t1b);
    // Near-equal constants collapse the linearized CI (the two components
    // become collinear), so treat a < 5% split as degenerate outright.
    if (!std::isfinite(se_ratio) || log_ratio <= std::max(2.0 * se_ratio, 0.05)) {
      best.note = "time constants statistically indistinguishable; a single exponential suffices";
    }
  } else {
    best.note = "non-physical time constant; a single exponential suffices";
  }
  return best;
}

FitResult fit_purcell_t1(std::span<const double> deltas_Hz, std::span<const double> t1_s,
                         double t1_resonant_s, double kappa_Hz) {
  if (deltas_Hz.size() != t1_s.size()) throw std::invalid_argument("fit_purcell_t1: size mismatch");
  if (deltas_Hz.size() < 2) throw std::invalid_argument("fit_purcell_t1: needs at least 2 points");
  if (!(t1_resonant_s > 0.0) || !(kappa_Hz > 0.0)) {
    throw std::invalid_argument("fit_purcell_t1: t1_resonant and kappa must be positive");
  }
  double t1_max = 0.0;
  for (size_t i = 0; i < t1_s.size(); ++i) {
    if (!(t1_s[i] > 0.0) || !std::isfinite(t1_s[i]) || !std::isfinite(deltas_Hz[i])) {
      throw std::invalid_argument("fit_purcell_t1: T1 samples must be positive and finite");
    }
    t1_max = std::max(t1_max, t1_s[i]);
  }

  // Log residuals: the data spans three decades, linear residuals would let
  // the largest T1 dominate.
  const auto model = [deltas_Hz, t1_s, t1_resonant_s, kappa_Hz](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(deltas_Hz.size()));
    for (size_t i = 0; i < deltas_Hz.size(); ++i) {
      const double t1 = t1_of_delta(t1_resonant_s, kappa_Hz, deltas_Hz[i], std::max(p(0), 0.0));
      r(static_cast<Eigen::Index>(i)) =
          t1 > 0.0 ? std::log(t1) - std::log(t1_s[i]) : std::numeric_limits<double>::quiet_NaN();
    }
    return r;
  };

  Eigen::VectorXd p0(1);
  p0 << 1.0 / t1_max;
  FitResult result = levenberg_marquardt(model, p0);
  result.param_names = {"gamma_nr"};
  if (result.params(0) < 0.0) result.params(0) = 0.0;
  // CI including zero means the inverse lifetime is unbounded above.
  if (!std::isfinite(result.stderrs(0)) || result.stderrs(0) >= result.params(0)) {
    result.note = "gamma_nr consistent with zero at one sigma; poorly constrained by the sampled detunings";
  }
  return result;
}

FitResult fit_rabi(std::span<const double> powers_W, std::span<const double> amplitudes,
                   const Resonator& resonator, double pulse_duration_s) {
  if (powers_W.size() != amplitudes.size()) throw std::invalid_argument("fit_rabi: size mismatch");
  if (powers_W.size() < 5) throw std::invalid_argument("fit_rabi: needs at least 5 points");
  if (!(pulse_duration_s > 0.0)) throw std::invalid_argument("fit_rabi: pulse duration must be positive");
  resonator.validate();

  std::vector<double> sqrt_nbar(powers_W.size());
  double peak_y = 0.0;
  double peak_s = 0.0;
  double s_max = 0.0;
  for (size_t i = 0; i < powers_W.size(); ++i) {
    sqrt_nbar[i] = std::sqrt(mean_photon_number(powers_W[i], resonator));
    s_max = std::max(s_max, sqrt_nbar[i]);
    if (amplitudes[i] > peak_y) {
      peak_y = amplitudes[i];
      peak_s = sqrt_nbar[i];
    }
  }
  if (!(peak_y > 0.0)) throw std::invalid_argument("fit_rabi: no oscillation signal in the data");

  const auto model = [&sqrt_nbar, amplitudes, pulse_duration_s](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(sqrt_nbar.size()));
    for (size_t i = 0; i < sqrt_nbar.size(); ++i) {
      const double s = std::sin(kTwoPi * p(1) * sqrt_nbar[i] * pulse_duration_s);
      r(static_cast<Eigen::Index>(i)) = p(0) * s * s - amplitudes[i];
    }
    return r;
  };

  // First maximum of sin^2 sits at theta = pi/2; refine by a coarse scan to
  // dodge harmonics before polishing with the local solver.
  const double g_guess = peak_s > 0.0 ? 1.0 / (4.0 * peak_s * pulse_duration_s) : 1.0;
  double best_g = g_guess;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    const double g_try = g_guess * std::pow(10.0, -0.7 + 1.4 * k / 59.0);  // 0.2x .. 5x
    Eigen::VectorXd p(2);
    p << peak_y, g_try;
    const double ssr = model(p).squaredNorm();
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_g = g_try;
    }
  }

  Eigen::VectorXd p0(2);
  p0 << peak_y, best_g;
  FitResult result = levenberg_marquardt(model, p0);
  result.param_names = {"amplitude", "g"};
  result.params(1) = std::abs(result.params(1));

  const double max_phase = kTwoPi * result.params(1) * s_max * pulse_duration_s;
  if (max_phase < M_PI) {
    result.converged = false;
    result.note = "data spans less than one full oscillation in sqrt(P); g unreliable";
  }
  return result;
}

}  // namespace purcell
