#ifndef HAMEXP_EXPANSION_HPP
#define HAMEXP_EXPANSION_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hamexp/minimizer.hpp"
#include "hamexp/nonfocal.hpp"
#include "hamexp/shooting.hpp"

namespace hamexp {

struct ExpansionDiagnostics {
  int minimizer_count = 0;
  std::vector<bool> locally_elliptic;
  std::vector<bool> nonfocal;
  std::vector<double> focality_determinants;
  bool hypotheses_unverified = false;
  bool c2_tie = false;
};

struct ExpansionResult {
  double c1 = 0.0;
  double c2 = 0.0;
  Vec lambda_prime;           // gradient of the energy at the target, R^l
  std::vector<Vec> y_hats;    // first-variation projections, one per minimizer
  std::optional<int> theta;   // scaling exponent, 1 or 2, when declared
  double algebraic_exponent = 0.0;
  ExpansionDiagnostics diagnostics;
};

/// Integrates the first-variation ODE
///   dXhat = (d_x b(0,phi) + sum_i d_x sigma~_i(phi) hdot_0^i) Xhat dt
///           + d_eps b(0,phi) dt,  Xhat_0 = x0_hat,
/// jointly with the Hamiltonian system so the coefficient path needs no
/// interpolation; returns Pi_l Xhat_T.
inline Vec first_variation(const ModelSpec& model, const BvpSolution& solution, double T,
                           const IntegratorOptions& opts = {}) {
  const int d = model.dim_state;
  auto rhs = [&](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(d);
    const Vec p = y.segment(d, d);
    dy.resize(3 * d);
    Vec dx, dp;
    hamiltonian_rhs(model, x, p, dx, dp);
    dy.head(d) = dx;
    dy.segment(d, d) = dp;
    const Mat sig = decorrelated_diffusion(model, x);
    const Vec u = sig.transpose() * p;  // hdot_0(t)
    Mat coeff = drift_jacobian(model, x);
    for (int i = 0; i < model.dim_noise; ++i)
      if (u[i] != 0.0) coeff += u[i] * decorrelated_column_jacobian(model, x, i);
    dy.tail(d) = coeff * y.tail(d) + model.drift_eps(x);
  };
  Vec y0(3 * d);
  y0.head(d) = solution.flow.x_at(0);
  y0.segment(d, d) = solution.p0;
  y0.tail(d) = model.x0_hat;
  IntegratorOptions io = opts;
  io.grid_intervals = 1;
  const std::vector<Vec> res = integrate_on_grid(rhs, y0, uniform_grid(0.0, T, 1), io);
  return res.back().tail(d).head(model.dim_proj);
}

enum class GradientMethod { momentum, finite_difference, cross_checked };

/// Gradient of the energy Lambda at the target. Momentum method: the
/// first l coordinates of p_T at the minimizer. Finite differences:
/// re-solved BVPs at target +/- delta, warm-started from the minimizer to
/// stay on its branch. cross_checked runs both and errors on relative
/// disagreement beyond 1e-3 (a symptom of branch jumping).
inline Vec lambda_gradient(const BvpProblem& prob, const BvpSolution& minimizer,
                           GradientMethod method = GradientMethod::cross_checked,
                           const ShootOptions& shoot_opts = {}) {
  const int l = prob.model.dim_proj;
  Vec momentum = minimizer.flow.p_final().head(l);
  if (method == GradientMethod::momentum) return momentum;

  const double delta = 1e-3 * (1.0 + prob.target.lpNorm<Eigen::Infinity>());
  Vec fd(l);
  for (int i = 0; i < l; ++i) {
    double lam[2];
    for (int s = 0; s < 2; ++s) {
      BvpProblem shifted = prob;
      shifted.target[i] += (s == 0 ? delta : -delta);
      ShootOutcome out = shoot(shifted, minimizer.p0, shoot_opts);
      if (out.status != ShootStatus::converged)
        throw std::runtime_error("lambda_gradient: shifted BVP did not converge");
      lam[s] = out.solution->energy;
    }
    fd[i] = (lam[0] - lam[1]) / (2.0 * delta);
  }
  if (method == GradientMethod::finite_difference) return fd;

  const double scale = std::max(1.0, momentum.norm());
  if ((momentum - fd).norm() > 1e-3 * scale)
    throw std::runtime_error(
        "lambda_gradient: momentum and finite-difference gradients disagree "
        "beyond 1e-3 relative (possible branch jump)");
  return momentum;
}

/// beta1 = sqrt(2)(sqrt(B1-1) - sqrt(B1-2));
/// beta2 = (B2/sqrt(2))(1/sqrt(B1-2) - 1/sqrt(B1-1)).
inline std::pair<double, double> implied_vol_wing(double b1, double b2) {
  if (!(b1 > 2.0))
    throw std::domain_error(
        "implied_vol_wing: B1 <= 2 is the moment-explosion regime; the wing "
        "formula is invalid");
  const double s1 = std::sqrt(b1 - 1.0), s2 = std::sqrt(b1 - 2.0);
  const double beta1 = std::sqrt(2.0) * (s1 - s2);
  const double beta2 = (b2 / std::sqrt(2.0)) * (1.0 / s2 - 1.0 / s1);
  return {beta1, beta2};
}

/// c1 = Lambda(target), c2 = max over minimizers of Lambda' . Yhat_T.
/// Focality/ellipticity verdicts only annotate the result; the constants
/// are computed regardless, with hypotheses_unverified set when any
/// check fails.
inline ExpansionResult assemble_small_noise(
    const BvpProblem& prob, const std::vector<const BvpSolution*>& minimizers,
    const std::vector<FocalityReport>& focality,
    const std::vector<EllipticityReport>& ellipticity,
    GradientMethod method = GradientMethod::cross_checked,
    const ShootOptions& shoot_opts = {}) {
  if (minimizers.empty())
    throw std::domain_error("assemble_small_noise: empty minimizer set");
  ExpansionResult res;
  res.diagnostics.minimizer_count = static_cast<int>(minimizers.size());
  res.c1 = minimizers.front()->energy;
  for (const BvpSolution* sol : minimizers) res.c1 = std::min(res.c1, sol->energy);

  res.lambda_prime = lambda_gradient(prob, *minimizers.front(), method, shoot_opts);
  std::vector<double> vals;
  for (const BvpSolution* sol : minimizers) {
    Vec y_hat = first_variation(prob.model, *sol, prob.T, shoot_opts.integrator);
    vals.push_back(res.lambda_prime.dot(y_hat));
    res.y_hats.push_back(std::move(y_hat));
  }
  res.c2 = *std::max_element(vals.begin(), vals.end());
  int at_max = 0;
  for (double v : vals)
    if (std::abs(v - res.c2) <= 1e-10 * (1.0 + std::abs(res.c2))) ++at_max;
  res.diagnostics.c2_tie = at_max > 1;

  for (const EllipticityReport& e : ellipticity)
    res.diagnostics.locally_elliptic.push_back(e.locally_elliptic);
  for (const FocalityReport& f : focality) {
    res.diagnostics.nonfocal.push_back(f.is_nonfocal);
    res.diagnostics.focality_determinants.push_back(f.normalized_det);
  }
  for (bool ok : res.diagnostics.locally_elliptic)
    if (!ok) res.diagnostics.hypotheses_unverified = true;
  for (bool ok : res.diagnostics.nonfocal)
    if (!ok) res.diagnostics.hypotheses_unverified = true;
  return res;
}

}  // namespace hamexp

#endif  // HAMEXP_EXPANSION_HPP
