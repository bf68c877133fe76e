#include "transitions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace purcell {

namespace {

using LabelPair = std::pair<std::pair<double, double>, std::pair<double, double>>;

LabelPair key_of(const StateLabel& from, const StateLabel& to) {
  return {{from.F, from.mF}, {to.F, to.mF}};
}

// Frequencies of every dF*dmF = +-1 pair, keyed by (from, to) labels.
std::map<LabelPair, double> frequency_map(const SpinSystem& system, double b0_T,
                                          const LabelingOptions& options) {
  const EigenSolution sol = eigensolve_labeled(system, {0.0, 0.0, b0_T}, options);
  std::map<LabelPair, double> out;
  const Eigen::Index n = sol.energies_Hz.size();
  for (Eigen::Index lo = 0; lo < n; ++lo) {
    for (Eigen::Index hi = 0; hi < n; ++hi) {
      if (sol.energies_Hz(hi) <= sol.energies_Hz(lo)) continue;
      const StateLabel& a = sol.labels[static_cast<size_t>(lo)];
      const StateLabel& b = sol.labels[static_cast<size_t>(hi)];
      const double branch = (b.F - a.F) * (b.mF - a.mF);
      if (std::abs(std::abs(branch) - 1.0) > 1e-9) continue;
      out[key_of(a, b)] = sol.energies_Hz(hi) - sol.energies_Hz(lo);
    }
  }
  return out;
}

std::vector<Transition> build_lines(const SpinSystem& system, double b0_T, double min_matrix_element,
                                    const LabelingOptions& options) {
  const EigenSolution sol = eigensolve_labeled(system, {0.0, 0.0, b0_T}, options);
  const SpinOperatorSet s = angular_momentum_operators(system.S);
  const int dim_i = static_cast<int>(std::lround(2.0 * system.I)) + 1;
  const Matrix sx_full = kron(s.jx, Matrix::Identity(dim_i, dim_i));

  std::vector<Transition> table;
  const Eigen::Index n = sol.energies_Hz.size();
  for (Eigen::Index lo = 0; lo < n; ++lo) {
    for (Eigen::Index hi = 0; hi < n; ++hi) {
      if (sol.energies_Hz(hi) <= sol.energies_Hz(lo)) continue;
      const StateLabel& a = sol.labels[static_cast<size_t>(lo)];
      const StateLabel& b = sol.labels[static_cast<size_t>(hi)];
      const double branch = (b.F - a.F) * (b.mF - a.mF);
      if (std::abs(std::abs(branch) - 1.0) > 1e-9) continue;

      Transition t;
      t.from = a;
      t.to = b;
      t.frequency_Hz = sol.energies_Hz(hi) - sol.energies_Hz(lo);
      t.matrix_element = std::abs(sol.states.col(hi).dot(sx_full * sol.states.col(lo)));
      t.branch = branch > 0.0 ? 1 : -1;
      if (t.matrix_element + 1e-12 < min_matrix_element) continue;
      table.push_back(t);
    }
  }
  std::sort(table.begin(), table.end(), [](const Transition& x, const Transition& y) {
    if (x.frequency_Hz != y.frequency_Hz) return x.frequency_Hz < y.frequency_Hz;
    if (x.branch != y.branch) return x.branch < y.branch;
    return x.from.mF < y.from.mF;
  });
  return table;
}

}  // namespace

std::vector<Transition> transition_lines(const SpinSystem& system, double b0_T,
                                         double min_matrix_element, const LabelingOptions& options) {
  return build_lines(system, b0_T, min_matrix_element, options);
}

std::vector<Transition> transition_table(const SpinSystem& system, double b0_T,
                                         double min_matrix_element, double slope_step_T,
                                         const LabelingOptions& options) {
  if (!(slope_step_T > 0.0)) throw std::invalid_argument("transition_table: slope step must be positive");
  std::vector<Transition> table = build_lines(system, b0_T, min_matrix_element, options);

  // Central difference in |B| when possible, forward difference at B0 < h.
  const bool central = b0_T >= slope_step_T;
  const double b_minus = central ? b0_T - slope_step_T : b0_T;
  const double b_plus = b0_T + slope_step_T;
  const auto f_plus = frequency_map(system, b_plus, options);
  const auto f_minus = central ? frequency_map(system, b_minus, options)
                               : [&] {
                                   std::map<LabelPair, double> m;
                                   for (const Transition& t : table) m[key_of(t.from, t.to)] = t.frequency_Hz;
                                   return m;
                                 }();
  const double span = b_plus - b_minus;

  for (Transition& t : table) {
    const auto key = key_of(t.from, t.to);
    const auto hi = f_plus.find(key);
    const auto lo = f_minus.find(key);
    if (hi == f_plus.end() || lo == f_minus.end()) {
      throw std::runtime_error("transition_table: labels could not be tracked across the slope step");
    }
    t.dfdB_Hz_per_T = (hi->second - lo->second) / span;
  }
  return table;
}

double transition_slope(const SpinSystem& system, double b0_T, const StateLabel& from,
                        const StateLabel& to, double step_T, const LabelingOptions& options) {
  const std::vector<Transition> table = transition_table(system, b0_T, 0.0, step_T, options);
  for (const Transition& t : table) {
    if (t.from == from && t.to == to) return t.dfdB_Hz_per_T;
    if (t.from == to && t.to == from) return t.dfdB_Hz_per_T;
  }
  throw std::invalid_argument("transition_slope: no such transition at the requested field");
}

}  // namespace purcell
