#ifndef HAMEXP_MODEL_HPP
#define HAMEXP_MODEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hamexp/integrate.hpp"

namespace hamexp {

class InvalidCorrelation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;
using JacobianField = std::function<Mat(const Vec&)>;
using ColumnJacobianField = std::function<Mat(const Vec&, int)>;
/// Second x-derivative of a scalar pairing: (x, p) |-> D_x^2 <p, f(x)>.
using HessianForm = std::function<Mat(const Vec&, const Vec&)>;
using ColumnHessianForm = std::function<Mat(const Vec&, const Vec&, int)>;

/// Cotangent point evolving under the Hamiltonian flow.
struct HamiltonianState {
  Vec x;
  Vec p;
  double t = 0.0;
};

/// Diffusion model specification. Immutable after construction via
/// make_model(); all operations on it are pure.
///
/// drift is the small-noise drift limit b(0,.), drift_eps its epsilon
/// derivative at 0. diffusion(x) is d x m with columns sigma_1..sigma_m.
/// The Jacobian callbacks are optional; central finite differences are
/// used when they are absent.
struct ModelSpec {
  int dim_state = 0;  // d
  int dim_noise = 0;  // m
  int dim_proj = 0;   // l

  VectorField drift;
  VectorField drift_eps;
  MatrixField diffusion;
  Mat correlation;  // m x m, symmetric, unit diagonal, PSD
  Vec x0;
  Vec x0_hat;

  JacobianField drift_jac;
  JacobianField drift_eps_jac;
  ColumnJacobianField diffusion_col_jac;

  /// Optional second derivatives D_x^2 <p, drift(x)> and
  /// D_x^2 <p, sigma_j(x)>. When both are present the variational flow
  /// assembles H_xx analytically instead of finite-differencing the
  /// x-gradient, which removes the dominant cost of Newton Jacobians.
  HessianForm drift_hess_form;
  ColumnHessianForm diffusion_col_hess_form;

  /// Factor L with L L^T = correlation, computed at construction.
  Mat decorrelation;
};

inline double fd_step(const Vec& x, double scale = 1e-6) {
  return scale * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

inline Mat fd_jacobian(const VectorField& f, const Vec& x, double scale = 1e-6) {
  const double h = fd_step(x, scale);
  const int d = static_cast<int>(x.size());
  Vec xp = x, xm = x;
  Mat jac(f(x).size(), d);
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

/// Lower-triangular factor of a PSD matrix; singular pivots produce zero
/// columns. Eigenvalues below -1e-12 are rejected.
inline Mat correlation_factor(const Mat& omega) {
  const int m = static_cast<int>(omega.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(omega);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw InvalidCorrelation("correlation matrix has eigenvalue below -1e-12");
  Mat l = Mat::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    double diag = omega(j, j);
    for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag <= 1e-12) continue;  // zero column
    l(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < m; ++i) {
      double s = omega(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

namespace detail {

inline void check_dims(const ModelSpec& model, const Vec& x, const Vec& p,
                       const char* where) {
  if (x.size() != model.dim_state || p.size() != model.dim_state)
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

inline void validate_jacobian(const std::string& name, const Mat& analytic,
                              const Mat& fd) {
  const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
  if ((analytic - fd).cwiseAbs().maxCoeff() > 1e-5 * scale)
    throw std::invalid_argument("analytic Jacobian of " + name +
                                " disagrees with finite differences");
}

}  // namespace detail

inline Mat drift_jacobian(const ModelSpec& model, const Vec& x) {
  return model.drift_jac ? model.drift_jac(x) : fd_jacobian(model.drift, x);
}

inline Mat drift_eps_jacobian(const ModelSpec& model, const Vec& x) {
  return model.drift_eps_jac ? model.drift_eps_jac(x) : fd_jacobian(model.drift_eps, x);
}

inline Mat diffusion_column_jacobian(const ModelSpec& model, const Vec& x, int i) {
  if (model.diffusion_col_jac) return model.diffusion_col_jac(x, i);
  return fd_jacobian([&](const Vec& z) -> Vec { return model.diffusion(z).col(i); }, x);
}

/// sigma~ = sigma L; realizes the correlated model on independent noise.
inline Mat decorrelated_diffusion(const ModelSpec& model, const Vec& x) {
  return model.diffusion(x) * model.decorrelation;
}

inline Mat decorrelated_column_jacobian(const ModelSpec& model, const Vec& x, int i) {
  Mat jac = Mat::Zero(model.dim_state, model.dim_state);
  for (int j = 0; j < model.dim_noise; ++j) {
    const double w = model.decorrelation(j, i);
    if (w != 0.0) jac += w * diffusion_column_jacobian(model, x, j);
  }
  return jac;
}

/// Validates invariants and fills in the decorrelation factor.
inline ModelSpec make_model(ModelSpec model) {
  const int d = model.dim_state, m = model.dim_noise, l = model.dim_proj;
  if (d < 1 || m < 1 || l < 1 || l > d)
    throw std::invalid_argument("make_model: need d >= 1, m >= 1, 1 <= l <= d");
  if (model.correlation.rows() != m || model.correlation.cols() != m)
    throw std::invalid_argument("make_model: correlation must be m x m");
  if ((model.correlation - model.correlation.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidCorrelation("correlation matrix not symmetric");
  for (int i = 0; i < m; ++i)
    if (std::abs(model.correlation(i, i) - 1.0) > 1e-12)
      throw InvalidCorrelation("correlation matrix must have unit diagonal");
  if (model.x0.size() != d) throw std::invalid_argument("make_model: x0 has wrong size");
  if (model.x0_hat.size() == 0) model.x0_hat = Vec::Zero(d);
  if (model.x0_hat.size() != d) throw std::invalid_argument("make_model: x0_hat has wrong size");
  if (!model.drift || !model.diffusion)
    throw std::invalid_argument("make_model: drift and diffusion fields are required");
  if (!model.drift_eps) model.drift_eps = [d](const Vec&) { return Vec::Zero(d); };

  model.decorrelation = correlation_factor(model.correlation);

  // Validate supplied analytic Jacobians against finite differences on
  // deterministic probe points.
  std::vector<Vec> probes{model.x0, model.x0 + 0.37 * Vec::Ones(d)};
  Vec alt(d);
  for (int i = 0; i < d; ++i) alt[i] = (i % 2 == 0) ? 0.21 : -0.13;
  probes.push_back(model.x0 - alt);
  for (const Vec& x : probes) {
    if (model.drift_jac)
      detail::validate_jacobian("drift", model.drift_jac(x), fd_jacobian(model.drift, x));
    if (model.drift_eps_jac)
      detail::validate_jacobian("drift_eps", model.drift_eps_jac(x),
                                fd_jacobian(model.drift_eps, x));
    if (model.diffusion_col_jac)
      for (int i = 0; i < m; ++i)
        detail::validate_jacobian(
            "diffusion column " + std::to_string(i), model.diffusion_col_jac(x, i),
            fd_jacobian([&](const Vec& z) -> Vec { return model.diffusion(z).col(i); }, x));

    // Hessian forms are checked against finite differences of the
    // (validated) Jacobian pairings.
    Vec pr(d);
    for (int i = 0; i < d; ++i) pr[i] = 1.0 + 0.5 * i;
    if (model.drift_hess_form)
      detail::validate_jacobian(
          "drift Hessian form", model.drift_hess_form(x, pr),
          fd_jacobian([&](const Vec& z) -> Vec { return Vec(drift_jacobian(model, z).transpose() * pr); },
                      x, 1e-5));
    if (model.diffusion_col_hess_form)
      for (int i = 0; i < m; ++i)
        detail::validate_jacobian(
            "diffusion column Hessian form " + std::to_string(i),
            model.diffusion_col_hess_form(x, pr, i),
            fd_jacobian(
                [&](const Vec& z) -> Vec {
                  return Vec(diffusion_column_jacobian(model, z, i).transpose() * pr);
                },
                x, 1e-5));
  }
  return model;
}

/// H(x,p) = <p, sigma_0(x)> + 1/2 <p, (sigma Omega sigma^T)(x) p>.
inline double hamiltonian(const ModelSpec& model, const Vec& x, const Vec& p) {
  detail::check_dims(model, x, p, "hamiltonian");
  const Mat sig = decorrelated_diffusion(model, x);
  const Vec u = sig.transpose() * p;
  return p.dot(model.drift(x)) + 0.5 * u.squaredNorm();
}

/// (dx, dp) = (dH/dp, -dH/dx).
inline void hamiltonian_rhs(const ModelSpec& model, const Vec& x, const Vec& p,
                            Vec& dx, Vec& dp) {
  const Mat sig = decorrelated_diffusion(model, x);
  const Vec u = sig.transpose() * p;  // <sigma~_i, p>
  dx = model.drift(x) + sig * u;
  dp = -(drift_jacobian(model, x).transpose() * p);
  for (int i = 0; i < model.dim_noise; ++i)
    if (u[i] != 0.0) dp -= u[i] * (decorrelated_column_jacobian(model, x, i).transpose() * p);
}

inline std::pair<Vec, Vec> hamiltonian_vector_field(const ModelSpec& model,
                                                    const HamiltonianState& state) {
  detail::check_dims(model, state.x, state.p, "hamiltonian_vector_field");
  Vec dx, dp;
  hamiltonian_rhs(model, state.x, state.p, dx, dp);
  return {dx, dp};
}

/// dH/dx at fixed p (used to finite-difference the second x-derivatives
/// when propagating variational equations).
inline Vec hamiltonian_x_gradient(const ModelSpec& model, const Vec& x, const Vec& p) {
  const Mat sig = decorrelated_diffusion(model, x);
  const Vec u = sig.transpose() * p;
  Vec g = drift_jacobian(model, x).transpose() * p;
  for (int i = 0; i < model.dim_noise; ++i)
    if (u[i] != 0.0) g += u[i] * (decorrelated_column_jacobian(model, x, i).transpose() * p);
  return g;
}

}  // namespace hamexp

#endif  // HAMEXP_MODEL_HPP
