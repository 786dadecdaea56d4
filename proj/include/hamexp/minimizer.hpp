#ifndef HAMEXP_MINIMIZER_HPP
#define HAMEXP_MINIMIZER_HPP

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hamexp/flow.hpp"
#include "hamexp/model.hpp"

namespace hamexp {

/// Discretized control hdot_0 : [0,T] -> R^m on the reporting grid.
struct ControlPath {
  std::vector<double> times;
  Mat values;  // m x (N+1), column per grid node
};

/// hdot_0^i(t) = <sigma~_i(x_t), p_t> along a Hamiltonian trajectory.
inline ControlPath reconstruct_control(const ModelSpec& model, const FlowResult& flow) {
  ControlPath ctrl;
  ctrl.times = flow.times;
  const int n = static_cast<int>(flow.times.size());
  ctrl.values.resize(model.dim_noise, n);
  for (int k = 0; k < n; ++k) {
    const Vec x = flow.x_at(static_cast<std::size_t>(k));
    const Vec p = flow.p_at(static_cast<std::size_t>(k));
    ctrl.values.col(k) = decorrelated_diffusion(model, x).transpose() * p;
  }
  return ctrl;
}

/// 1/2 * integral |hdot_0|^2 dt by composite Simpson quadrature (the
/// reporting grid has an even number of intervals).
inline double control_energy(const ControlPath& ctrl) {
  const int n = static_cast<int>(ctrl.times.size()) - 1;  // intervals
  if (n < 1) throw std::invalid_argument("control_energy: need at least one interval");
  std::vector<double> sq(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) sq[static_cast<std::size_t>(k)] = ctrl.values.col(k).squaredNorm();
  const double h = (ctrl.times.back() - ctrl.times.front()) / n;
  double integral = 0.0;
  if (n % 2 == 0) {
    double s = sq[0] + sq[static_cast<std::size_t>(n)];
    for (int k = 1; k < n; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * sq[static_cast<std::size_t>(k)];
    integral = s * h / 3.0;
  } else {
    // trapezoid fallback for odd interval counts
    integral = 0.5 * (sq[0] + sq[static_cast<std::size_t>(n)]);
    for (int k = 1; k < n; ++k) integral += sq[static_cast<std::size_t>(k)];
    integral *= h;
  }
  return 0.5 * integral;
}

struct MinimizerCandidate {
  ControlPath control;
  double energy = 0.0;
  FlowResult flow;
  Vec p0;
  bool is_minimal = false;
};

struct MinimizerSelection {
  double lambda = 0.0;           // min energy
  std::vector<int> minimal_indices;
};

/// Marks candidates with energy <= (1+rel_tol) * min energy as minimal.
inline MinimizerSelection select_minimizers(std::vector<MinimizerCandidate>& candidates,
                                            double rel_tol = 1e-6) {
  if (candidates.empty())
    throw std::domain_error("select_minimizers: empty candidate list");
  double emin = candidates.front().energy;
  for (const auto& c : candidates) emin = std::min(emin, c.energy);
  MinimizerSelection sel;
  sel.lambda = emin;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].is_minimal = candidates[i].energy <= (1.0 + rel_tol) * emin;
    if (candidates[i].is_minimal) sel.minimal_indices.push_back(static_cast<int>(i));
  }
  return sel;
}

struct EllipticityReport {
  bool locally_elliptic = false;
  double witness_time = 0.0;
};

/// True iff sigma(x_t) reaches numerical rank d at some grid time
/// (smallest singular value > 1e-8 * largest); first such t is the witness.
inline EllipticityReport check_local_ellipticity(const ModelSpec& model,
                                                 const FlowResult& flow) {
  EllipticityReport rep;
  for (std::size_t k = 0; k < flow.times.size(); ++k) {
    const Mat sig = model.diffusion(flow.x_at(k));
    Eigen::JacobiSVD<Mat> svd(sig);
    const auto& sv = svd.singularValues();
    if (sv.size() < model.dim_state) return rep;  // m < d: never full rank
    if (sv[model.dim_state - 1] > 1e-8 * sv[0]) {
      rep.locally_elliptic = true;
      rep.witness_time = flow.times[k];
      return rep;
    }
  }
  return rep;
}

}  // namespace hamexp

#endif  // HAMEXP_MINIMIZER_HPP
