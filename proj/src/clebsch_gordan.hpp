#pragma once

#include <vector>

#include "spin_system.hpp"

namespace purcell {

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
/// convention (Racah's closed form). Returns 0 for selection-rule violations;
/// throws for arguments that are not valid half-integer angular momenta.
double clebsch_gordan(double j1, double j2, double m1, double m2, double bigj, double bigm);

/// Zero-field eigenbasis of A S.I: coupled states |F, mF> expressed in the
/// product basis used by build_hamiltonian. Columns are ordered F ascending,
/// mF ascending within each multiplet.
struct CoupledBasis {
  std::vector<StateLabel> labels;
  Matrix states;
};

CoupledBasis coupled_basis(double spin_s, double spin_i);

}  // namespace purcell
