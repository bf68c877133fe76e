#pragma once

#include <vector>

#include "labeling.hpp"

namespace purcell {

/// One allowed ESR transition between labeled eigenstates: lower state
/// `from`, upper state `to`, branch = dF * dmF (+1 or -1).
struct Transition {
  StateLabel from;
  StateLabel to;
  double frequency_Hz = 0.0;
  double matrix_element = 0.0;  // |<to| Sx x 1 |from>|
  double dfdB_Hz_per_T = 0.0;
  int branch = 0;
};

/// All dF*dmF = +-1 transitions at B0 (field along z) with matrix element
/// >= min_matrix_element, sorted by frequency. Slopes come from a central
/// finite difference with labels tracked across the two field points.
std::vector<Transition> transition_table(const SpinSystem& system, double b0_T,
                                         double min_matrix_element, double slope_step_T = 1e-5,
                                         const LabelingOptions& options = {});

/// Same table without df/dB (one diagonalization; used by field sweeps).
std::vector<Transition> transition_lines(const SpinSystem& system, double b0_T,
                                         double min_matrix_element,
                                         const LabelingOptions& options = {});

/// df/dB of a single transition identified by its label pair. Throws when the
/// pair does not exist at B0.
double transition_slope(const SpinSystem& system, double b0_T, const StateLabel& from,
                        const StateLabel& to, double step_T = 1e-5,
                        const LabelingOptions& options = {});

}  // namespace purcell
