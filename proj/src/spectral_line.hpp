#pragma once

#include <vector>

namespace purcell {

struct LineComponent {
  double center_Hz = 0.0;
  double fwhm_Hz = 2e6;
  double weight = 1.0;
};

/// Inhomogeneous spectral density of spin detunings: a weighted sum of
/// Gaussians, normalized to unit integral.
struct SpectralLine {
  std::vector<LineComponent> components;

  void validate() const;
  double density(double delta_Hz) const;
  double max_fwhm() const;
  double max_abs_center() const;

  /// Strain-split doublet: the addressed peak sits at zero detuning and its
  /// partner `splitting_Hz` above, equal weights.
  static SpectralLine strain_doublet(double splitting_Hz = 4e6, double fwhm_Hz = 2e6);
};

}  // namespace purcell
