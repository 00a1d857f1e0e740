#include "spectro/fit.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spectro/errors.hpp"

namespace spectro {

namespace {

// Bounds are enforced by fitting in an unconstrained internal coordinate q:
//   both bounds:  p = lo + (hi-lo) logistic(q)
//   lower only:   p = lo + s e^q
//   upper only:   p = hi - s e^q
//   unbounded:    p = s q, s = max(|p0|, 1)
struct Transform {
  enum Kind { Both, Lower, Upper, Free } kind;
  double lo, hi, scale;

  double to_p(double q) const {
    switch (kind) {
      case Both: {
        const double s = 1.0 / (1.0 + std::exp(-q));
        return lo + (hi - lo) * s;
      }
      case Lower: return lo + scale * std::exp(q);
      case Upper: return hi - scale * std::exp(q);
      default: return scale * q;
    }
  }
  double dp_dq(double q) const {
    switch (kind) {
      case Both: {
        const double s = 1.0 / (1.0 + std::exp(-q));
        return (hi - lo) * s * (1.0 - s);
      }
      case Lower: return scale * std::exp(q);
      case Upper: return -scale * std::exp(q);
      default: return scale;
    }
  }
  double from_p(double p) const {
    switch (kind) {
      case Both: return std::log((p - lo) / (hi - p));
      case Lower: return std::log((p - lo) / scale);
      case Upper: return std::log((hi - p) / scale);
      default: return p / scale;
    }
  }
};

Transform make_transform(double lo, double hi, double p0) {
  const bool has_lo = std::isfinite(lo);
  const bool has_hi = std::isfinite(hi);
  Transform t{};
  t.lo = lo;
  t.hi = hi;
  if (has_lo && has_hi) {
    if (!(lo < p0 && p0 < hi))
      throw ValidationError("fit: initial value " + std::to_string(p0) +
                            " must lie strictly inside bounds [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    t.kind = Transform::Both;
    t.scale = 1.0;
  } else if (has_lo) {
    if (!(p0 > lo))
      throw ValidationError("fit: initial value must lie strictly above lower bound");
    t.kind = Transform::Lower;
    t.scale = p0 - lo;
  } else if (has_hi) {
    if (!(p0 < hi))
      throw ValidationError("fit: initial value must lie strictly below upper bound");
    t.kind = Transform::Upper;
    t.scale = hi - p0;
  } else {
    t.kind = Transform::Free;
    t.scale = std::max(std::abs(p0), 1.0);
  }
  return t;
}

std::string describe_params(const FitModel& model, const std::vector<double>& p) {
  std::ostringstream os;
  for (int j = 0; j < model.n_params(); ++j)
    os << (j ? ", " : "") << model.param_names[j] << "=" << p[j];
  return os.str();
}

}  // namespace

void FitProblem::validate() const {
  const int k = model.n_params();
  const int n = n_points();
  if (!model.eval) throw ValidationError("fit: model has no eval function");
  if (model.n_x < 1) throw ValidationError("fit: model.n_x must be >= 1");
  if (n == 0) throw ValidationError("fit: data must be non-empty");
  if (static_cast<int>(x.size()) != n * model.n_x)
    throw ValidationError("fit: x size does not match n_points * n_x");
  if (static_cast<int>(init.size()) != k)
    throw ValidationError("fit: init size does not match parameter count");
  if (!lo.empty() && static_cast<int>(lo.size()) != k)
    throw ValidationError("fit: lo size does not match parameter count");
  if (!hi.empty() && static_cast<int>(hi.size()) != k)
    throw ValidationError("fit: hi size does not match parameter count");
  if (!yerr.empty() && yerr.size() != y.size())
    throw ValidationError("fit: yerr size does not match y");
  for (double v : x)
    if (!std::isfinite(v)) throw ValidationError("fit: non-finite value in x");
  for (double v : y)
    if (!std::isfinite(v)) throw ValidationError("fit: non-finite value in y");
  for (double v : yerr)
    if (!std::isfinite(v) || v <= 0)
      throw ValidationError("fit: yerr values must be finite and > 0");
  for (double v : init)
    if (!std::isfinite(v)) throw ValidationError("fit: non-finite initial value");
  for (int j = 0; j < k; ++j) {
    const double l = lo.empty() ? -std::numeric_limits<double>::infinity() : lo[j];
    const double h = hi.empty() ? std::numeric_limits<double>::infinity() : hi[j];
    if (!(l < h))
      throw ValidationError("fit: lower bound must be below upper bound for parameter " +
                            model.param_names[j]);
    if (init[j] <= l || init[j] >= h)
      throw ValidationError("fit: initial value " + std::to_string(init[j]) +
                            " must lie strictly inside bounds for parameter " +
                            model.param_names[j]);
  }
  if (n <= k)
    throw ValidationError("fit: need more points than parameters (" +
                          std::to_string(n) + " <= " + std::to_string(k) + ")");
}

Eigen::MatrixXd numeric_jacobian(const FitModel& model,
                                 const std::vector<double>& params,
                                 const std::vector<double>& x_rows) {
  const int k = model.n_params();
  const int n = static_cast<int>(x_rows.size()) / model.n_x;
  for (double v : params)
    if (!std::isfinite(v)) throw FitError("numeric_jacobian: non-finite parameter");
  Eigen::MatrixXd J(n, k);
  std::vector<double> p = params;
  for (int j = 0; j < k; ++j) {
    const double h = std::max(1e-6 * std::abs(params[j]), 1e-9);
    p[j] = params[j] + h;
    for (int i = 0; i < n; ++i) J(i, j) = model.eval(p, &x_rows[i * model.n_x]);
    p[j] = params[j] - h;
    for (int i = 0; i < n; ++i) {
      const double f = model.eval(p, &x_rows[i * model.n_x]);
      J(i, j) = (J(i, j) - f) / (2.0 * h);
      if (!std::isfinite(J(i, j)))
        throw FitError("numeric_jacobian: non-finite model output near " +
                       describe_params(model, params));
    }
    p[j] = params[j];
  }
  return J;
}

CovarianceResult covariance(const Eigen::MatrixXd& J,
                            const std::vector<double>& residuals,
                            const std::vector<double>& weights) {
  const int n = static_cast<int>(J.rows());
  const int k = static_cast<int>(J.cols());
  if (static_cast<int>(residuals.size()) != n)
    throw ValidationError("covariance: residual count does not match Jacobian rows");
  if (n <= k)
    throw ValidationError("covariance: need more points than parameters");
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != n)
      throw ValidationError("covariance: weight count does not match Jacobian rows");
    for (int i = 0; i < n; ++i) w(i) = weights[i];
  }
  double ssr = 0;
  for (int i = 0; i < n; ++i) ssr += w(i) * residuals[i] * residuals[i];
  const double sigma2 = ssr / (n - k);

  const Eigen::MatrixXd A = J.transpose() * w.asDiagonal() * J;
  // Parameters can differ by many orders of magnitude, which makes A badly
  // scaled without being degenerate.  Rescale to unit diagonal before the
  // eigendecomposition so the rank cutoff only fires on true degeneracy.
  Eigen::VectorXd d(k);
  for (int j = 0; j < k; ++j)
    d(j) = (std::isfinite(A(j, j)) && A(j, j) > 0) ? 1.0 / std::sqrt(A(j, j)) : 1.0;
  const Eigen::MatrixXd An = d.asDiagonal() * A * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(An);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double emax = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  CovarianceResult out;
  out.rank = 0;
  Eigen::MatrixXd pinv_n = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    if (ev(j) > 1e-12 * emax) {
      pinv_n += es.eigenvectors().col(j) * es.eigenvectors().col(j).transpose() / ev(j);
      ++out.rank;
    }
  }
  out.covariance = sigma2 * (d.asDiagonal() * pinv_n * d.asDiagonal());
  out.correlation = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const double d = std::sqrt(out.covariance(a, a) * out.covariance(b, b));
      out.correlation(a, b) = (d > 0) ? out.covariance(a, b) / d : (a == b);
    }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (std::abs(out.correlation(a, b)) > 0.99) out.high_correlations.push_back({a, b});
  return out;
}

FitResult fit(const FitProblem& problem, const FitOptions& opt) {
  problem.validate();
  const FitModel& model = problem.model;
  const int k = model.n_params();
  const int n = problem.n_points();
  const int nx = model.n_x;

  std::vector<double> weights;
  if (!problem.yerr.empty()) {
    weights.resize(n);
    for (int i = 0; i < n; ++i) weights[i] = 1.0 / (problem.yerr[i] * problem.yerr[i]);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n && !weights.empty(); ++i) w(i) = weights[i];

  std::vector<Transform> tf(k);
  const double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j)
    tf[j] = make_transform(problem.lo.empty() ? -inf : problem.lo[j],
                           problem.hi.empty() ? inf : problem.hi[j], problem.init[j]);

  Eigen::VectorXd q(k);
  for (int j = 0; j < k; ++j) q(j) = tf[j].from_p(problem.init[j]);

  std::vector<double> p(k);
  const auto to_params = [&](const Eigen::VectorXd& qv) {
    std::vector<double> pv(k);
    for (int j = 0; j < k; ++j) pv[j] = tf[j].to_p(qv(j));
    return pv;
  };

  const auto eval_residuals = [&](const std::vector<double>& pv, Eigen::VectorXd& r) {
    for (int i = 0; i < n; ++i) {
      const double f = model.eval(pv, &problem.x[i * nx]);
      if (!std::isfinite(f))
        throw FitError("fit: model '" + model.name +
                       "' returned non-finite output at " + describe_params(model, pv));
      r(i) = problem.y[i] - f;
    }
  };
  const auto weighted_ssr = [&](const Eigen::VectorXd& r) {
    return r.cwiseProduct(w.cwiseSqrt()).squaredNorm();
  };

  // Jacobian wrt internal coordinates: central differences in q, so every
  // evaluated parameter vector respects the bounds.
  const auto jacobian_q = [&](const Eigen::VectorXd& qv) {
    Eigen::MatrixXd J(n, k);
    Eigen::VectorXd qt = qv;
    for (int j = 0; j < k; ++j) {
      const double h = std::max(1e-6 * std::abs(qv(j)), 1e-9);
      qt(j) = qv(j) + h;
      const std::vector<double> pp = to_params(qt);
      qt(j) = qv(j) - h;
      const std::vector<double> pm = to_params(qt);
      qt(j) = qv(j);
      for (int i = 0; i < n; ++i) {
        const double fp = model.eval(pp, &problem.x[i * nx]);
        const double fm = model.eval(pm, &problem.x[i * nx]);
        J(i, j) = (fp - fm) / (2.0 * h);
        if (!std::isfinite(J(i, j)))
          throw FitError("fit: model '" + model.name +
                         "' returned non-finite output while differencing near " +
                         describe_params(model, to_params(qv)));
      }
    }
    return J;
  };

  Eigen::VectorXd r(n);
  p = to_params(q);
  eval_residuals(p, r);
  double ssr = weighted_ssr(r);

  FitResult res;
  res.data_digest = problem.data_digest;
  res.residual_trace.push_back(std::sqrt(ssr));

  double lambda = -1.0;  // set from the first Jacobian
  bool converged = false;
  std::string reason = "max_iterations";
  int iter = 0;

  while (iter < opt.max_iter) {
    const Eigen::MatrixXd J = jacobian_q(q);
    const Eigen::MatrixXd A = J.transpose() * w.asDiagonal() * J;
    const Eigen::VectorXd g = J.transpose() * (w.asDiagonal() * r);
    if (lambda < 0) lambda = opt.lambda0_scale * std::max(A.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    int solve_retries = 0;
    while (!accepted) {
      Eigen::MatrixXd Ad = A;
      Ad.diagonal().array() += lambda;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(Ad);
      Eigen::VectorXd dq = ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !dq.allFinite()) {
        if (++solve_retries > 12)
          throw FitError("fit: singular normal equations for model '" + model.name + "'");
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd q_new = q + dq;
      const std::vector<double> p_new = to_params(q_new);
      Eigen::VectorXd r_new(n);
      eval_residuals(p_new, r_new);
      const double ssr_new = weighted_ssr(r_new);

      if (ssr_new <= ssr * (1.0 + 1e-14)) {
        accepted = true;
        ++iter;
        const double rel_step = dq.norm() / (q.norm() + 1e-12);
        const double rn_old = std::sqrt(ssr), rn_new = std::sqrt(ssr_new);
        q = q_new;
        p = p_new;
        r = r_new;
        ssr = ssr_new;
        lambda = std::max(lambda / opt.lambda_down, 1e-300);
        res.residual_trace.push_back(rn_new);
        if (rn_new == 0.0) {
          converged = true;
          reason = "residual_zero";
        } else if (rel_step < opt.step_tol) {
          converged = true;
          reason = "step_tolerance";
        } else if (std::abs(rn_old - rn_new) < opt.residual_tol * std::max(rn_old, 1e-300)) {
          converged = true;
          reason = "residual_tolerance";
        }
      } else {
        lambda *= opt.lambda_up;
        if (lambda > 1e290) {  // no acceptable step at any damping: stationary
          converged = true;
          reason = "no_improvement";
          accepted = true;  // leave the loop with current state
        }
      }
    }
    if (converged) break;
  }

  res.params = p;
  res.n_iter = iter;
  res.converged = converged;
  res.convergence_reason = converged ? reason : "max_iterations";
  res.residuals.assign(r.data(), r.data() + n);
  res.residual_norm = std::sqrt(ssr);

  // Covariance in physical parameters via chain rule from the q-space
  // Jacobian (bounds-safe): J_p = J_q diag(1/(dp/dq)).
  Eigen::MatrixXd Jq = jacobian_q(q);
  Eigen::MatrixXd Jp = Jq;
  bool chain_ok = true;
  for (int j = 0; j < k; ++j) {
    const double d = tf[j].dp_dq(q(j));
    if (std::abs(d) < 1e-300) {
      chain_ok = false;
      break;
    }
    Jp.col(j) /= d;
  }
  if (!chain_ok) Jp = numeric_jacobian(model, p, problem.x);
  const CovarianceResult cv = covariance(Jp, res.residuals, weights);
  res.covariance = cv.covariance;
  res.correlation = cv.correlation;
  res.jacobian_rank = cv.rank;
  res.high_correlations = cv.high_correlations;
  res.sigmas.resize(k);
  for (int j = 0; j < k; ++j) res.sigmas[j] = std::sqrt(std::max(cv.covariance(j, j), 0.0));
  return res;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return std::string(buf);
}

}  // namespace spectro
