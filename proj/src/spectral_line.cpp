#include "spectral_line.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "units.hpp"

namespace purcell {

namespace {
// FWHM -> Gaussian sigma
constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))
}  // namespace

void SpectralLine::validate() const {
  if (components.empty()) throw std::invalid_argument("SpectralLine: needs at least one component");
  for (const LineComponent& c : components) {
    if (!(c.fwhm_Hz > 0.0) || !(c.weight > 0.0) || !std::isfinite(c.center_Hz)) {
      throw std::invalid_argument("SpectralLine: weights and widths must be positive, centers finite");
    }
  }
}

double SpectralLine::density(double delta_Hz) const {
  double total_weight = 0.0;
  double value = 0.0;
  for (const LineComponent& c : components) {
    const double sigma = c.fwhm_Hz * kFwhmToSigma;
    const double z = (delta_Hz - c.center_Hz) / sigma;
    value += c.weight * std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
    total_weight += c.weight;
  }
  return value / total_weight;
}

double SpectralLine::max_fwhm() const {
  double m = 0.0;
  for (const LineComponent& c : components) m = std::max(m, c.fwhm_Hz);
  return m;
}

double SpectralLine::max_abs_center() const {
  double m = 0.0;
  for (const LineComponent& c : components) m = std::max(m, std::abs(c.center_Hz));
  return m;
}

SpectralLine SpectralLine::strain_doublet(double splitting_Hz, double fwhm_Hz) {
  SpectralLine line;
  line.components = {{0.0, fwhm_Hz, 1.0}, {splitting_Hz, fwhm_Hz, 1.0}};
  return line;
}

}  // namespace purcell
