#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

// Deterministic damped least-squares (Levenberg-Marquardt) with bounds via an
// internal logistic/exponential parameter transform, finite-difference
// Jacobians, and covariance estimation with rank reporting.
namespace spectro {

// Forward model y = f(params; x), where x is a row of n_x predictor values.
struct FitModel {
  std::string name;
  int n_x = 1;
  std::vector<std::string> param_names;
  std::function<double(const std::vector<double>& params, const double* x)> eval;
  // optional: writes d f / d params into grad[0..k); leave empty if absent
  std::function<void(const std::vector<double>& params, const double* x,
                     double* grad)> analytic_grad;

  int n_params() const { return static_cast<int>(param_names.size()); }
};

struct FitProblem {
  FitModel model;
  std::vector<double> x;     // row-major, stride model.n_x
  std::vector<double> y;
  std::vector<double> yerr;  // optional; 1/err^2 weights when present
  std::vector<double> init;
  std::vector<double> lo, hi;  // per-parameter bounds; +-inf for none
  std::string data_digest;     // content hash of the data source, if any

  int n_points() const { return static_cast<int>(y.size()); }
  void validate() const;
};

struct FitOptions {
  double step_tol = 1e-10;      // relative step size
  double residual_tol = 1e-12;  // relative residual-norm change
  int max_iter = 200;
  double lambda0_scale = 1e-3;  // initial damping = scale * max diag(J^T W J)
  double lambda_up = 3.0;       // reject multiplier
  double lambda_down = 3.0;     // accept divisor
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> sigmas;
  Eigen::MatrixXd covariance;   // sigma^2 (J^T W J)^+, physical parameters
  Eigen::MatrixXd correlation;
  std::vector<double> residuals;  // y - f, per point
  double residual_norm = 0;       // sqrt(weighted SSR)
  int n_iter = 0;                 // accepted iterations
  bool converged = false;
  std::string convergence_reason;
  int jacobian_rank = 0;
  std::vector<std::pair<int, int>> high_correlations;  // |rho| > 0.99
  std::vector<double> residual_trace;  // residual norm after each accepted step
  std::string data_digest;
};

FitResult fit(const FitProblem& problem, const FitOptions& options = {});

// Central-difference Jacobian d f_i / d p_j at `params` over the rows of X;
// per-parameter step max(1e-6 |p|, 1e-9). Throws FitError on non-finite output.
Eigen::MatrixXd numeric_jacobian(const FitModel& model,
                                 const std::vector<double>& params,
                                 const std::vector<double>& x_rows);

struct CovarianceResult {
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd correlation;
  int rank = 0;
  std::vector<std::pair<int, int>> high_correlations;
};

// sigma^2 (J^T W J)^+ with sigma^2 = SSR_w/(N-k); pseudo-inverse with rank
// report (degenerate directions are not inverted blindly). weights may be
// empty (unweighted). Throws when N <= k.
CovarianceResult covariance(const Eigen::MatrixXd& jacobian,
                            const std::vector<double>& residuals,
                            const std::vector<double>& weights = {});

// FNV-1a 64-bit content digest, hex string; used as the fit-report input digest.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string digest_hex(const std::string& bytes);

}  // namespace spectro
