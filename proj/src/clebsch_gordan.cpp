#include "clebsch_gordan.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace purcell {

namespace {

constexpr int kMaxFact = 64;

const std::array<double, kMaxFact>& factorials() {
  static const std::array<double, kMaxFact> table = [] {
    std::array<double, kMaxFact> f{};
    f[0] = 1.0;
    for (int i = 1; i < kMaxFact; ++i) f[static_cast<size_t>(i)] = f[static_cast<size_t>(i - 1)] * i;
    return f;
  }();
  return table;
}

// Factorial of a value that must be a (near-)integer >= 0.
double fact(double x) {
  const int n = static_cast<int>(std::lround(x));
  if (n < 0 || std::abs(x - n) > 1e-6 || n >= kMaxFact) {
    throw std::invalid_argument("clebsch_gordan: invalid factorial argument");
  }
  return factorials()[static_cast<size_t>(n)];
}

bool is_projection_of(double m, double j) {
  return std::abs(m) <= j + 1e-9 && std::abs((j - m) - std::round(j - m)) < 1e-9;
}

}  // namespace

double clebsch_gordan(double j1, double j2, double m1, double m2, double bigj, double bigm) {
  if (!is_half_integer(j1) || !is_half_integer(j2) || !is_half_integer(bigj)) {
    throw std::invalid_argument("clebsch_gordan: j1, j2, J must be non-negative half-integers");
  }
  if (!is_projection_of(m1, j1) || !is_projection_of(m2, j2) || !is_projection_of(bigm, bigj)) {
    throw std::invalid_argument("clebsch_gordan: projections must satisfy |m| <= j with integer j-m");
  }
  if (std::abs(m1 + m2 - bigm) > 1e-9) return 0.0;
  if (bigj < std::abs(j1 - j2) - 1e-9 || bigj > j1 + j2 + 1e-9) return 0.0;

  const double prefactor =
      (2.0 * bigj + 1.0) * fact(j1 + j2 - bigj) * fact(j1 - j2 + bigj) * fact(-j1 + j2 + bigj) /
      fact(j1 + j2 + bigj + 1.0);
  const double norm = fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) *
                      fact(bigj + bigm) * fact(bigj - bigm);

  const int kmin = static_cast<int>(std::lround(std::max({0.0, j2 - bigj - m1, j1 + m2 - bigj})));
  const int kmax = static_cast<int>(std::lround(std::min({j1 + j2 - bigj, j1 - m1, j2 + m2})));
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double denom = fact(k) * fact(j1 + j2 - bigj - k) * fact(j1 - m1 - k) * fact(j2 + m2 - k) *
                         fact(bigj - j2 + m1 + k) * fact(bigj - j1 - m2 + k);
    sum += ((k % 2 == 0) ? 1.0 : -1.0) / denom;
  }
  return std::sqrt(prefactor * norm) * sum;
}

CoupledBasis coupled_basis(double spin_s, double spin_i) {
  if (!is_half_integer(spin_s) || !is_half_integer(spin_i)) {
    throw std::invalid_argument("coupled_basis: spins must be non-negative half-integers");
  }
  const int dim_s = static_cast<int>(std::lround(2.0 * spin_s)) + 1;
  const int dim_i = static_cast<int>(std::lround(2.0 * spin_i)) + 1;
  const int dim = dim_s * dim_i;

  CoupledBasis basis;
  basis.states = Matrix::Zero(dim, dim);
  basis.labels.reserve(static_cast<size_t>(dim));

  int col = 0;
  for (double f = std::abs(spin_i - spin_s); f <= spin_i + spin_s + 1e-9; f += 1.0) {
    for (double mf = -f; mf <= f + 1e-9; mf += 1.0) {
      for (int ks = 0; ks < dim_s; ++ks) {
        const double ms = spin_s - ks;
        const double mi = mf - ms;
        if (std::abs(mi) > spin_i + 1e-9) continue;
        const int ki = static_cast<int>(std::lround(spin_i - mi));
        basis.states(ks * dim_i + ki, col) = clebsch_gordan(spin_s, spin_i, ms, mi, f, mf);
      }
      basis.labels.push_back(StateLabel{f, mf});
      ++col;
    }
  }
  return basis;
}

}  // namespace purcell
