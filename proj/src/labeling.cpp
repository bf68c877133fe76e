#include "labeling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "clebsch_gordan.hpp"

namespace purcell {

namespace {

std::string label_text(const StateLabel& l) {
  return "|F=" + std::to_string(l.F) + ", mF=" + std::to_string(l.mF) + ">";
}

}  // namespace

EigenSolution eigensolve_labeled(const SpinSystem& system, const FieldVector& field_T,
                                 const LabelingOptions& options) {
  const double field_norm =
      std::sqrt(field_T[0] * field_T[0] + field_T[1] * field_T[1] + field_T[2] * field_T[2]);
  if (field_norm > options.field_bound_T) {
    throw std::invalid_argument("eigensolve_labeled: |B| = " + std::to_string(field_norm) +
                                " T exceeds the low-field labeling bound of " +
                                std::to_string(options.field_bound_T) + " T");
  }

  const Matrix h = build_hamiltonian(system, field_T);
  EigenDecomposition eig = jacobi_eigensolve(h);
  const CoupledBasis basis = coupled_basis(system.S, system.I);
  const Eigen::Index n = eig.energies.size();

  EigenSolution out;
  out.energies_Hz = eig.energies;
  out.states = eig.states;
  out.labels.assign(static_cast<size_t>(n), StateLabel{});

  const double scale = std::max(out.energies_Hz.cwiseAbs().maxCoeff(), 1.0);
  const double degeneracy_tol = std::max(1.0, 1e-9 * scale);

  std::vector<bool> used(static_cast<size_t>(n), false);

  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && out.energies_Hz(stop) - out.energies_Hz(stop - 1) <= degeneracy_tol) ++stop;
    const Eigen::Index group = stop - start;

    if (group == 1) {
      const auto& v = out.states.col(start);
      Eigen::Index best = -1;
      double best_overlap = -1.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (used[static_cast<size_t>(k)]) continue;
        const double overlap = std::norm(basis.states.col(k).dot(v));
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = k;
        }
      }
      if (best < 0 || best_overlap < options.min_overlap) {
        throw std::runtime_error("eigensolve_labeled: ambiguous state labeling (best overlap " +
                                 std::to_string(best_overlap) + " < " + std::to_string(options.min_overlap) +
                                 "); field too high for the low-field scheme");
      }
      used[static_cast<size_t>(best)] = true;
      out.labels[static_cast<size_t>(start)] = basis.labels[static_cast<size_t>(best)];
    } else {
      // Degenerate cluster: project the coupled states onto the eigenspace
      // span and re-orthonormalize, replacing the arbitrary solver vectors.
      const Matrix span = out.states.middleCols(start, group);
      std::vector<Eigen::Index> members;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (used[static_cast<size_t>(k)]) continue;
        const Eigen::VectorXcd coeffs = span.adjoint() * basis.states.col(k);
        if (coeffs.squaredNorm() > options.min_overlap) members.push_back(k);
      }
      if (static_cast<Eigen::Index>(members.size()) != group) {
        throw std::runtime_error("eigensolve_labeled: degenerate cluster of size " + std::to_string(group) +
                                 " matches " + std::to_string(members.size()) +
                                 " coupled states; labeling is ambiguous");
      }
      Matrix replacement(n, group);
      for (Eigen::Index c = 0; c < group; ++c) {
        const Eigen::Index k = members[static_cast<size_t>(c)];
        Eigen::VectorXcd w = span * (span.adjoint() * basis.states.col(k));
        for (Eigen::Index prev = 0; prev < c; ++prev) {
          w -= replacement.col(prev) * replacement.col(prev).dot(w);
        }
        const double norm = w.norm();
        if (norm < 1e-8) {
          throw std::runtime_error("eigensolve_labeled: rank-deficient projection inside degenerate cluster");
        }
        replacement.col(c) = w / norm;
        used[static_cast<size_t>(k)] = true;
        out.labels[static_cast<size_t>(start + c)] = basis.labels[static_cast<size_t>(k)];
      }
      out.states.middleCols(start, group) = replacement;
    }
    start = stop;
  }

  for (size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) {
      throw std::runtime_error("eigensolve_labeled: coupled state " + label_text(basis.labels[k]) +
                               " left unassigned");
    }
  }
  return out;
}

}  // namespace purcell
