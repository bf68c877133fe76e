#pragma once

#include <vector>

#include "jacobi.hpp"
#include "spin_system.hpp"

namespace purcell {

/// Spectral decomposition of the spin Hamiltonian with every eigenstate
/// tagged by the (F, mF) of the zero-field coupled state it overlaps most.
struct EigenSolution {
  Vector energies_Hz;               // ascending
  Matrix states;                    // columns, product basis
  std::vector<StateLabel> labels;   // bijective onto the coupled basis
};

struct LabelingOptions {
  double field_bound_T = 0.05;  // low-field validity of the (F, mF) scheme
  double min_overlap = 0.5;     // squared-overlap floor before "ambiguous"
};

/// Diagonalizes H(B) and labels states by maximum squared overlap with the
/// zero-field coupled basis. Degenerate clusters are handled by projecting
/// the coupled states onto the cluster eigenspace and re-orthonormalizing.
/// Throws std::invalid_argument above the field bound and std::runtime_error
/// when the best overlap falls below min_overlap.
EigenSolution eigensolve_labeled(const SpinSystem& system, const FieldVector& field_T,
                                 const LabelingOptions& options = {});

}  // namespace purcell
