#include "levenberg_marquardt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace purcell {

namespace {
constexpr double kJacobianStep = 1.4901161193847656e-08;  // sqrt(machine epsilon)
constexpr double kLambdaFloor = 1e-4;
constexpr double kLambdaCeiling = 1e40;
}  // namespace

double FitResult::param(const std::string& name) const {
  for (size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return params(static_cast<Eigen::Index>(i));
  }
  throw std::invalid_argument("FitResult: unknown parameter " + name);
}

double FitResult::stderr_of(const std::string& name) const {
  for (size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return stderrs(static_cast<Eigen::Index>(i));
  }
  throw std::invalid_argument("FitResult: unknown parameter " + name);
}

Eigen::MatrixXd forward_difference_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p) {
  const Eigen::VectorXd r0 = residuals(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  Eigen::VectorXd probe = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = kJacobianStep * std::max(std::abs(p(j)), 1.0);
    probe(j) = p(j) + h;
    jac.col(j) = (residuals(probe) - r0) / h;
    probe(j) = p(j);
  }
  return jac;
}

Eigen::MatrixXd central_difference_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p) {
  Eigen::VectorXd probe = p;
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = 6e-6 * std::max(std::abs(p(j)), 1.0);
    probe(j) = p(j) + h;
    const Eigen::VectorXd plus = residuals(probe);
    probe(j) = p(j) - h;
    const Eigen::VectorXd minus = residuals(probe);
    probe(j) = p(j);
    if (jac.size() == 0) jac.resize(plus.size(), p.size());
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

FitResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                              const LmOptions& options) {
  FitResult result;
  result.params = p0;

  Eigen::VectorXd p = p0;
  Eigen::VectorXd r = residuals(p);
  if (!r.allFinite()) {
    throw std::invalid_argument("levenberg_marquardt: model is not finite at the initial guess");
  }
  double ssr = r.squaredNorm();
  double lambda = 0.0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd jac = forward_difference_jacobian(residuals, p);
    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.cwiseAbs().maxCoeff() < options.gradient_tol) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::VectorXd scaling = normal.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    while (lambda <= kLambdaCeiling) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += lambda * scaling;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      if (step.allFinite()) {
        if (step.norm() <= options.step_tol * (p.norm() + options.step_tol)) {
          // The proposal cannot move the parameters at the working
          // precision: numerical optimum.
          result.converged = true;
          result.iterations = iter + 1;
          break;
        }
        const Eigen::VectorXd p_try = p + step;
        const Eigen::VectorXd r_try = residuals(p_try);
        if (r_try.allFinite() && r_try.squaredNorm() < ssr) {
          p = p_try;
          r = r_try;
          ssr = r.squaredNorm();
          accepted = true;
          const double step_size = step.norm();
          lambda = lambda <= kLambdaFloor ? 0.0 : lambda / options.damping_factor;
          result.iterations = iter + 1;
          if (step_size <= options.step_tol * (p.norm() + options.step_tol)) {
            result.converged = true;
          }
          break;
        }
      }
      lambda = lambda == 0.0 ? kLambdaFloor : lambda * options.damping_factor;
    }
    if (!accepted || result.converged) break;
  }

  result.params = p;
  result.residual_norm = ssr;

  // Linearized covariance at the optimum; unidentifiable directions (zero
  // Jacobian columns, singular normal equations) show up as infinite
  // standard errors rather than being masked.
  const Eigen::MatrixXd jac = forward_difference_jacobian(residuals, p);
  const Eigen::Index m = r.size();
  const Eigen::Index k = p.size();
  result.stderrs = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  const double dof = static_cast<double>(m - k);
  if (dof > 0.0) {
    const double variance = ssr / dof;
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const double max_diag = normal.diagonal().maxCoeff();
    std::vector<Eigen::Index> identifiable;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (normal(j, j) > 1e-14 * std::max(max_diag, 1e-300)) identifiable.push_back(j);
    }
    const Eigen::Index ki = static_cast<Eigen::Index>(identifiable.size());
    if (ki > 0) {
      Eigen::MatrixXd sub(ki, ki);
      for (Eigen::Index a = 0; a < ki; ++a)
        for (Eigen::Index b = 0; b < ki; ++b) sub(a, b) = normal(identifiable[static_cast<size_t>(a)],
                                                                 identifiable[static_cast<size_t>(b)]);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
      if (ldlt.info() == Eigen::Success) {
        const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(ki, ki)) * variance;
        for (Eigen::Index a = 0; a < ki; ++a) {
          const double var_a = cov(a, a);
          if (var_a >= 0.0 && std::isfinite(var_a)) {
            result.stderrs(identifiable[static_cast<size_t>(a)]) = std::sqrt(var_a);
          }
        }
      }
    }
  }
  return result;
}

}  // namespace purcell
