#ifndef HAMEXP_SHOOTING_HPP
#define HAMEXP_SHOOTING_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hamexp/flow.hpp"
#include "hamexp/minimizer.hpp"
#include "hamexp/model.hpp"

namespace hamexp {

/// Two-point boundary value problem: x(0) = x0, Pi_l x(T) = target, and
/// the last d-l coordinates of p(T) vanish (transversality).
struct BvpProblem {
  ModelSpec model;
  Vec target;  // a in R^l
  double T = 0.0;
  Vec x0;
};

struct BvpSolution {
  Vec p0;
  double residual_norm = 0.0;
  FlowResult flow;
  int newton_iterations = 0;
  double energy = 0.0;
};

enum class ShootStatus {
  converged,
  max_iterations,
  singular_jacobian,
  line_search_failed,
  integration_failed,
  diverged,
  merged,  // iterate entered the basin of an already-known solution
};

struct ShootOutcome {
  ShootStatus status = ShootStatus::max_iterations;
  std::optional<BvpSolution> solution;
  double last_residual = 0.0;
};

struct ShootOptions {
  double tol = 1e-9;
  int max_iterations = 50;
  int max_halvings = 20;
  double diverge_norm = 1e8;
  /// Tight tolerance for residual evaluation and the final reported flow.
  IntegratorOptions integrator{};
  /// Looser tolerance for the Newton Jacobian (variational flow); a coarse
  /// reporting grid suffices since only the endpoint is used.
  IntegratorOptions jacobian_integrator{1e-7, 1e-9, 1, 4000000, 0.0};
  /// When false, the converged solution carries only an endpoint flow;
  /// callers that need the trajectory re-flow on the full grid themselves
  /// (enumerate_solutions does this after deduplication).
  bool full_final_flow = true;
  /// Trust-region cap on the Newton step: |step| <= step_cap * (1 + |p0|).
  /// Near-singular Jacobians otherwise propose momenta whose flows
  /// oscillate at frequencies the integrator cannot afford.
  double step_cap = 10.0;
  /// Multi-start dedup hook: abort with ShootStatus::merged once the
  /// iterate comes within merge_radius * (1 + |p0|) of any known point.
  const std::vector<Vec>* known_points = nullptr;
  double merge_radius = 1e-3;
};

namespace detail {

inline Vec bvp_residual(const BvpProblem& prob, const FlowResult& flow) {
  const int d = prob.model.dim_state, l = prob.model.dim_proj;
  Vec r(d);
  r.head(l) = flow.x_final().head(l) - prob.target;
  r.tail(d - l) = flow.p_final().tail(d - l);
  return r;
}

/// Rows of the variational matrix that differentiate the residual with
/// respect to p0: d(Pi_l x_T)/dp0 stacked over d(tail p_T)/dp0.
inline Mat bvp_jacobian(const BvpProblem& prob, const Mat& variational) {
  const int d = prob.model.dim_state, l = prob.model.dim_proj;
  Mat j(d, d);
  j.topRows(l) = variational.block(0, d, l, d);
  j.bottomRows(d - l) = variational.block(d + l, d, d - l, d);
  return j;
}

}  // namespace detail

/// Damped Newton iteration on p0 |-> residual(p0).
inline ShootOutcome shoot(const BvpProblem& prob, const Vec& p0_guess,
                          const ShootOptions& opts = {}) {
  const int d = prob.model.dim_state;
  if (static_cast<int>(prob.target.size()) != prob.model.dim_proj || prob.T <= 0)
    throw std::invalid_argument("shoot: target size must equal dim_proj and T > 0");
  if (!p0_guess.allFinite())
    throw std::invalid_argument("shoot: non-finite initial guess");

  ShootOutcome out;
  // Residuals on a minimal grid during iteration; the endpoint is all Newton needs.
  IntegratorOptions resid_opts = opts.integrator;
  resid_opts.grid_intervals = 1;

  Vec p0 = p0_guess;
  Vec residual;
  double rnorm;
  try {
    FlowResult flow = flow_forward(prob.model, prob.x0, p0, prob.T, resid_opts);
    residual = detail::bvp_residual(prob, flow);
    rnorm = residual.norm();
  } catch (const IntegrationFailure&) {
    out.status = ShootStatus::integration_failed;
    return out;
  }

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    out.last_residual = rnorm;
    if (opts.known_points && rnorm > opts.tol) {
      for (const Vec& q : *opts.known_points) {
        if ((p0 - q).norm() <= opts.merge_radius * (1.0 + p0.norm())) {
          out.status = ShootStatus::merged;
          return out;
        }
      }
    }
    if (rnorm <= opts.tol) {
      // Converged: produce the full-grid flow at tight tolerance.
      BvpSolution sol;
      sol.p0 = p0;
      sol.newton_iterations = iter - 1;
      sol.flow = opts.full_final_flow
                     ? flow_forward(prob.model, prob.x0, p0, prob.T, opts.integrator)
                     : flow_forward(prob.model, prob.x0, p0, prob.T, resid_opts);
      sol.residual_norm = detail::bvp_residual(prob, sol.flow).norm();
      sol.energy = opts.full_final_flow
                       ? control_energy(reconstruct_control(prob.model, sol.flow))
                       : 0.0;
      out.solution = std::move(sol);
      out.status = ShootStatus::converged;
      return out;
    }
    if (!p0.allFinite() || p0.norm() > opts.diverge_norm) {
      out.status = ShootStatus::diverged;
      return out;
    }

    Mat jac;
    try {
      FlowResult vflow =
          flow_with_variation(prob.model, prob.x0, p0, prob.T, opts.jacobian_integrator);
      jac = detail::bvp_jacobian(prob, *vflow.variational);
    } catch (const IntegrationFailure&) {
      out.status = ShootStatus::integration_failed;
      return out;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
      out.status = ShootStatus::singular_jacobian;
      return out;
    }
    Vec step = lu.solve(-residual);
    const double cap = opts.step_cap * (1.0 + p0.norm());
    if (step.norm() > cap) step *= cap / step.norm();

    // Backtracking line search on the residual norm.
    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      const Vec p_try = p0 + alpha * step;
      try {
        FlowResult flow = flow_forward(prob.model, prob.x0, p_try, prob.T, resid_opts);
        const Vec r_try = detail::bvp_residual(prob, flow);
        const double n_try = r_try.norm();
        if (n_try < rnorm || n_try <= opts.tol) {
          p0 = p_try;
          residual = r_try;
          rnorm = n_try;
          accepted = true;
          break;
        }
      } catch (const IntegrationFailure&) {
        // flow blew up at this step length; halve and retry
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.status = ShootStatus::line_search_failed;
      out.last_residual = rnorm;
      return out;
    }
  }
  out.status = ShootStatus::max_iterations;
  out.last_residual = rnorm;
  return out;
}

struct EnumerationOptions {
  ShootOptions shoot{};
  /// Half-width of the per-coordinate search box for p0; 0 = automatic
  /// (20 * max(1, 1/T), nondimensionalizing momenta by maturity).
  double box_half_width = 0.0;
  /// Approximate total number of lattice starts: 2^d * points_per_orthant.
  int points_per_orthant = 32;
  std::vector<Vec> extra_seeds;
  double dedup_tol = 1e-6;
};

struct EnumerationDiagnostics {
  int starts = 0;
  int converged = 0;
  int failed = 0;
  double box_half_width = 0.0;
};

/// Multi-start shooting over nested lattices of initial momenta; returns
/// deduplicated solutions sorted by (energy, lexicographic p0). With the
/// automatic box, the search is repeated on a doubled box whenever
/// nothing is found or the lowest-energy solution lands in the outer half
/// of the box: minimizing momenta can sit far beyond any fixed
/// nondimensional default (e.g. they blow up as the correlation matrix
/// approaches singularity), and a minimum on the rim is evidence that the
/// true one may still be outside.
inline std::vector<BvpSolution> enumerate_solutions(const BvpProblem& prob,
                                                    const EnumerationOptions& opts = {},
                                                    EnumerationDiagnostics* diag = nullptr) {
  const int d = prob.model.dim_state;
  double half_width =
      opts.box_half_width > 0 ? opts.box_half_width : 20.0 * std::max(1.0, 1.0 / prob.T);
  // An explicit box is honored as given.
  const int max_expansions = opts.box_half_width > 0 ? 0 : 3;

  // Search phase options: loose tolerances, endpoint flows only.
  // The step budget is tight on purpose: a start whose flow needs more
  // than ~1e5 adaptive steps oscillates too fast to be a useful seed.
  ShootOptions cheap = opts.shoot;
  cheap.full_final_flow = false;
  cheap.tol = std::max(opts.shoot.tol, 1e-5);
  cheap.max_iterations = std::min(opts.shoot.max_iterations, 30);
  cheap.max_halvings = std::min(opts.shoot.max_halvings, 8);
  cheap.integrator = opts.shoot.jacobian_integrator;
  cheap.integrator.rel_tol = std::max(cheap.integrator.rel_tol, 1e-6);
  cheap.integrator.abs_tol = std::max(cheap.integrator.abs_tol, 1e-8);
  cheap.integrator.max_steps = std::min(cheap.integrator.max_steps, 100000L);
  cheap.jacobian_integrator.max_steps =
      std::min(cheap.jacobian_integrator.max_steps, 100000L);
  // A crude Jacobian is enough to steer the search Newton; the line
  // search on the (accurately integrated) residual keeps it honest.
  cheap.jacobian_integrator.rel_tol = std::max(cheap.jacobian_integrator.rel_tol, 1e-4);
  cheap.jacobian_integrator.abs_tol = std::max(cheap.jacobian_integrator.abs_tol, 1e-6);
  auto is_duplicate = [&](const std::vector<BvpSolution>& known, const Vec& p0) {
    for (const BvpSolution& sol : known)
      if ((sol.p0 - p0).norm() <= opts.dedup_tol * (1.0 + p0.norm())) return true;
    return false;
  };

  EnumerationDiagnostics local_diag;
  std::vector<BvpSolution> solutions;

  ShootOptions tight = opts.shoot;
  tight.full_final_flow = false;

  // Appends a cell-centered lattice of n^d nodes around `center`.
  const double total = std::pow(2.0, d) * opts.points_per_orthant;
  const int n_per_dim =
      std::max(2, static_cast<int>(std::ceil(std::pow(total / 3.0, 1.0 / d))));
  auto append_lattice = [&](std::vector<Vec>& starts, const Vec& center, double width) {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Vec p0(d);
      for (int j = 0; j < d; ++j)
        p0[j] = center[j] +
                width * (2.0 * (idx[static_cast<std::size_t>(j)] + 0.5) / n_per_dim - 1.0);
      starts.push_back(p0);
      int j = 0;
      for (; j < d; ++j) {
        if (++idx[static_cast<std::size_t>(j)] < n_per_dim) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
      if (j == d) break;
    }
  };

  // Search phase over the given starts (loose tolerances, endpoint flows
  // only), then tight polish of every new coarse solution; unique results
  // accumulate into `solutions` with full-grid trajectories and energies.
  auto process_starts = [&](const std::vector<Vec>& starts) {
    local_diag.starts += static_cast<int>(starts.size());
    std::vector<BvpSolution> coarse;
    std::vector<Vec> found;  // lets shoot() abort starts drifting into a known basin
    for (const BvpSolution& sol : solutions) found.push_back(sol.p0);
    cheap.known_points = &found;
    for (const Vec& p0 : starts) {
      ShootOutcome outcome = shoot(prob, p0, cheap);
      if (outcome.status == ShootStatus::merged) {
        ++local_diag.converged;
        continue;
      }
      if (outcome.status != ShootStatus::converged) {
        ++local_diag.failed;
        continue;
      }
      ++local_diag.converged;
      if (!is_duplicate(coarse, outcome.solution->p0) &&
          !is_duplicate(solutions, outcome.solution->p0)) {
        found.push_back(outcome.solution->p0);
        coarse.push_back(std::move(*outcome.solution));
      }
    }
    cheap.known_points = nullptr;
    for (const BvpSolution& rough : coarse) {
      ShootOutcome outcome = shoot(prob, rough.p0, tight);
      if (outcome.status != ShootStatus::converged) continue;
      if (is_duplicate(solutions, outcome.solution->p0)) continue;
      BvpSolution sol = std::move(*outcome.solution);
      sol.flow = flow_forward(prob.model, prob.x0, sol.p0, prob.T, opts.shoot.integrator);
      sol.residual_norm = detail::bvp_residual(prob, sol.flow).norm();
      sol.energy = control_energy(reconstruct_control(prob.model, sol.flow));
      solutions.push_back(std::move(sol));
    }
    std::sort(solutions.begin(), solutions.end(),
              [](const BvpSolution& a, const BvpSolution& b) {
                if (a.energy != b.energy) return a.energy < b.energy;
                return std::lexicographical_compare(a.p0.data(), a.p0.data() + a.p0.size(),
                                                    b.p0.data(), b.p0.data() + b.p0.size());
              });
  };

  // Global sweep: nested lattices at three scales, roughly
  // 2^d * points_per_orthant nodes in total. Minimizing momenta are often
  // orders of magnitude smaller than the box that must contain the higher
  // branches, so a single-scale lattice either misses the small basins or
  // wastes its budget there; smallest scale first, so the merge-abort in
  // shoot() can prune far starts once the cheap basins are on record.
  for (int attempt = 0;; ++attempt) {
    std::vector<Vec> starts;
    if (attempt == 0) starts = opts.extra_seeds;
    for (double scale : {1.0 / 16.0, 1.0 / 4.0, 1.0})
      append_lattice(starts, Vec::Zero(d), scale * half_width);
    local_diag.box_half_width = half_width;
    process_starts(starts);
    const bool minimum_interior =
        !solutions.empty() &&
        solutions.front().p0.lpNorm<Eigen::Infinity>() <= 0.5 * half_width;
    if (minimum_interior || attempt == max_expansions) break;
    half_width *= 2.0;
  }

  // Local refinement: minima can hide in narrow, anisotropic basins the
  // global lattice steps over (e.g. large p, small q near a singular
  // correlation), but they cluster near other solutions. Re-lattice
  // around the lowest-energy solutions until the minimum stops improving.
  for (int round = 0; round < 4 && !solutions.empty(); ++round) {
    const double best = solutions.front().energy;
    std::vector<Vec> starts;
    const std::size_t n_ref = std::min<std::size_t>(4, solutions.size());
    for (std::size_t i = 0; i < n_ref; ++i) {
      const Vec& center = solutions[i].p0;
      append_lattice(starts, center, std::max(1.0, 0.25 * center.lpNorm<Eigen::Infinity>()));
    }
    process_starts(starts);
    if (solutions.front().energy >= best - 1e-9 * (1.0 + std::abs(best))) break;
  }

  if (diag) *diag = local_diag;
  return solutions;
}

}  // namespace hamexp

#endif  // HAMEXP_SHOOTING_HPP
