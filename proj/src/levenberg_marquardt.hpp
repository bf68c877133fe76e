#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace purcell {

/// Result of a least-squares fit. residual_norm is the sum of squared
/// residuals at the returned parameters; stderrs come from the linearized
/// covariance (J^T J)^-1 sigma^2 at the optimum (inf when unidentifiable).
struct FitResult {
  std::vector<std::string> param_names;
  Eigen::VectorXd params;
  Eigen::VectorXd stderrs;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string note;

  double param(const std::string& name) const;
  double stderr_of(const std::string& name) const;
};

struct LmOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-10;  // infinity norm of J^T r
  double step_tol = 1e-12;      // relative step size
  double damping_factor = 10.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Damped Gauss-Newton (Levenberg-Marquardt) with a forward-difference
/// Jacobian. Damping starts at zero so linear problems converge in one
/// Newton step; singular normal equations and non-finite trial residuals
/// raise the damping. Only strictly improving steps are accepted, so the
/// returned residual never exceeds the initial one. Throws
/// std::invalid_argument when the model is not finite at p0.
FitResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                              const LmOptions& options = {});

Eigen::MatrixXd forward_difference_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p);
Eigen::MatrixXd central_difference_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& p);

}  // namespace purcell
