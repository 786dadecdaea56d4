#ifndef HAMEXP_PIPELINE_HPP
#define HAMEXP_PIPELINE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hamexp/expansion.hpp"
#include "hamexp/minimizer.hpp"
#include "hamexp/nonfocal.hpp"
#include "hamexp/shooting.hpp"

namespace hamexp {

struct PipelineOptions {
  EnumerationOptions enumeration{};
  FocalityOptions focality{};
  GradientMethod gradient = GradientMethod::cross_checked;
  double minimal_rel_tol = 1e-6;
};

struct PipelineResult {
  std::vector<BvpSolution> solutions;          // all enumerated, sorted by energy
  std::vector<MinimizerCandidate> candidates;  // one per solution
  MinimizerSelection selection;
  std::vector<FocalityReport> focality;        // per minimal candidate
  std::vector<EllipticityReport> ellipticity;  // per minimal candidate
  ExpansionResult expansion;
  EnumerationDiagnostics enumeration;
};

/// Full generic pipeline: enumerate BVP solutions, reconstruct controls,
/// select the minimizing set, run the hypothesis checks, and assemble the
/// expansion constants.
inline PipelineResult run_small_noise(const BvpProblem& prob,
                                      const PipelineOptions& opts = {}) {
  PipelineResult res;
  res.solutions = enumerate_solutions(prob, opts.enumeration, &res.enumeration);
  if (res.solutions.empty())
    throw std::runtime_error("run_small_noise: no BVP solutions found in the search box");

  for (const BvpSolution& sol : res.solutions) {
    MinimizerCandidate cand;
    cand.control = reconstruct_control(prob.model, sol.flow);
    cand.energy = sol.energy;
    cand.flow = sol.flow;
    cand.p0 = sol.p0;
    res.candidates.push_back(std::move(cand));
  }
  res.selection = select_minimizers(res.candidates, opts.minimal_rel_tol);

  std::vector<const BvpSolution*> minimal;
  for (int idx : res.selection.minimal_indices) {
    const BvpSolution& sol = res.solutions[static_cast<std::size_t>(idx)];
    minimal.push_back(&sol);
    res.focality.push_back(focality_jacobian(prob.model, sol, prob.T, opts.focality));
    res.ellipticity.push_back(check_local_ellipticity(prob.model, sol.flow));
  }
  res.expansion = assemble_small_noise(prob, minimal, res.focality, res.ellipticity,
                                       opts.gradient, opts.enumeration.shoot);
  return res;
}

/// Tail expansion for a theta-scaling model with scalar projection:
/// c1 = Lambda(1), c2 from the small-noise assembly at target 1,
/// algebraic exponent 1/theta - 1. Verifies Lambda(a) a^{-2/theta}
/// constancy over a in {0.25, 1, 4} to 1e-4 before returning.
inline PipelineResult run_tail(const ModelSpec& model, double T, int theta,
                               const PipelineOptions& opts = {}) {
  if (theta != 1 && theta != 2)
    throw std::invalid_argument("run_tail: theta must be 1 or 2");
  if (model.dim_proj != 1)
    throw std::invalid_argument("run_tail: tail normalization needs a scalar projection");

  BvpProblem prob{model, Vec::Ones(1), T, model.x0};
  PipelineResult res = run_small_noise(prob, opts);
  res.expansion.theta = theta;
  res.expansion.algebraic_exponent = 1.0 / theta - 1.0;

  // theta-consistency: Lambda(a) a^{-2/theta} must be constant.
  const Vec p0_min =
      res.solutions[static_cast<std::size_t>(res.selection.minimal_indices.front())].p0;
  const double ref = res.expansion.c1;
  for (double a : {0.25, 4.0}) {
    BvpProblem scaled = prob;
    scaled.target[0] = a;
    ShootOutcome out = shoot(scaled, p0_min, opts.enumeration.shoot);
    if (out.status != ShootStatus::converged) {
      // warm start may sit on the wrong branch for distant targets;
      // fall back to a fresh enumeration
      PipelineOptions po = opts;
      PipelineResult scaled_res = run_small_noise(scaled, po);
      out.solution = scaled_res.solutions[static_cast<std::size_t>(
          scaled_res.selection.minimal_indices.front())];
      out.status = ShootStatus::converged;
    }
    const double val = out.solution->energy * std::pow(a, -2.0 / theta);
    if (std::abs(val - ref) > 1e-4 * std::max(1.0, std::abs(ref)))
      throw std::runtime_error(
          "run_tail: Lambda(a) a^{-2/theta} is not constant to 1e-4; the "
          "declared theta-scaling does not hold");
  }
  return res;
}

struct ShortTimeResult {
  double distance_sq = 0.0;       // d^2(x0, target) = 2 Lambda_0(target)
  double algebraic_exponent = 0;  // -l/2
  PipelineResult pipeline;
};

/// Short-time expansion via the eps = sqrt(t) reduction: the driftless
/// limit problem on [0,1] with the model's drift and start perturbation
/// removed. d^2(x0, y) is twice the resulting energy.
inline ShortTimeResult short_time_expansion(const ModelSpec& model, const Vec& target,
                                            const PipelineOptions& opts = {}) {
  ModelSpec driftless = model;
  const int d = model.dim_state;
  driftless.drift = [d](const Vec&) { return Vec::Zero(d); };
  driftless.drift_eps = [d](const Vec&) { return Vec::Zero(d); };
  driftless.drift_jac = [d](const Vec&) { return Mat::Zero(d, d); };
  driftless.drift_eps_jac = [d](const Vec&) { return Mat::Zero(d, d); };
  if (driftless.drift_hess_form)
    driftless.drift_hess_form = [d](const Vec&, const Vec&) { return Mat::Zero(d, d); };
  driftless.x0_hat = Vec::Zero(d);

  BvpProblem prob{driftless, target, 1.0, driftless.x0};
  ShortTimeResult res;
  res.pipeline = run_small_noise(prob, opts);
  res.distance_sq = 2.0 * res.pipeline.expansion.c1;
  res.algebraic_exponent = -0.5 * model.dim_proj;
  return res;
}

}  // namespace hamexp

#endif  // HAMEXP_PIPELINE_HPP
