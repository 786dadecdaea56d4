#ifndef HAMEXP_NONFOCAL_HPP
#define HAMEXP_NONFOCAL_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hamexp/flow.hpp"
#include "hamexp/shooting.hpp"

namespace hamexp {

/// Jacobian of (z,q) |-> pi H_{0<-T}(x_T + (0,z), p_T + (q,0)) at the
/// origin: terminal position perturbed in the d-l free coordinates,
/// terminal momentum in the l projected coordinates, mapped back through
/// the backward Hamiltonian flow and projected to position. Columns are
/// ordered z-directions first, then q-directions.
struct FocalityReport {
  Mat jacobian;
  double determinant = 0.0;
  double normalized_det = 0.0;  // |det| / product of row norms
  bool is_nonfocal = false;
  std::string method;  // "variational" or "finite-difference"
};

struct FocalityOptions {
  double tol_focal = 1e-8;
  bool finite_difference = false;
  double fd_step_scale = 1e-5;
  IntegratorOptions integrator{};
};

namespace detail {

inline FocalityReport finish_focality(Mat jac, double tol, std::string method) {
  FocalityReport rep;
  rep.determinant = jac.determinant();
  double scale = 1.0;
  for (int i = 0; i < jac.rows(); ++i) scale *= jac.row(i).norm();
  rep.normalized_det = scale > 0 ? std::abs(rep.determinant) / scale : 0.0;
  rep.is_nonfocal = rep.normalized_det > tol;
  rep.jacobian = std::move(jac);
  rep.method = std::move(method);
  return rep;
}

}  // namespace detail

inline FocalityReport focality_jacobian(const ModelSpec& model, const BvpSolution& solution,
                                        double T, const FocalityOptions& opts = {}) {
  if (!(T > 0)) throw std::domain_error("focality_jacobian: need T > 0");
  const int d = model.dim_state, l = model.dim_proj;
  const Vec xT = solution.flow.x_final();
  const Vec pT = solution.flow.p_final();

  if (opts.finite_difference) {
    IntegratorOptions io = opts.integrator;
    io.grid_intervals = 1;
    const double h = opts.fd_step_scale * (1.0 + std::max(xT.norm(), pT.norm()));
    Mat jac(d, d);
    int col = 0;
    auto backward_x0 = [&](const Vec& x, const Vec& p) {
      return flow_backward(model, x, p, T, io).x_final();
    };
    for (int j = l; j < d; ++j, ++col) {  // z-directions
      Vec xp = xT, xm = xT;
      xp[j] += h;
      xm[j] -= h;
      jac.col(col) = (backward_x0(xp, pT) - backward_x0(xm, pT)) / (2.0 * h);
    }
    for (int i = 0; i < l; ++i, ++col) {  // q-directions
      Vec pp = pT, pm = pT;
      pp[i] += h;
      pm[i] -= h;
      jac.col(col) = (backward_x0(xT, pp) - backward_x0(xT, pm)) / (2.0 * h);
    }
    return detail::finish_focality(std::move(jac), opts.tol_focal, "finite-difference");
  }

  IntegratorOptions io = opts.integrator;
  io.grid_intervals = 1;
  FlowResult back = flow_backward_with_variation(model, xT, pT, T, io);
  const Mat& m = *back.variational;  // d(x0,p0)/d(xT,pT)
  Mat jac(d, d);
  int col = 0;
  for (int j = l; j < d; ++j, ++col) jac.col(col) = m.col(j).head(d);
  for (int i = 0; i < l; ++i, ++col) jac.col(col) = m.col(d + i).head(d);
  return detail::finish_focality(std::move(jac), opts.tol_focal, "variational");
}

/// One row of a non-focality sweep table.
struct SweepCell {
  std::vector<std::pair<std::string, double>> parameters;
  std::optional<FocalityReport> report;
  std::string error;
};

inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::string out;
  if (cells.empty()) return out;
  for (const auto& kv : cells.front().parameters) out += kv.first + ",";
  out += "determinant,normalized_det,verdict\n";
  char buf[64];
  for (const SweepCell& cell : cells) {
    for (const auto& kv : cell.parameters) {
      std::snprintf(buf, sizeof buf, "%.17g,", kv.second);
      out += buf;
    }
    if (cell.report) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,", cell.report->determinant,
                    cell.report->normalized_det);
      out += buf;
      out += cell.report->is_nonfocal ? "nonfocal" : "focal-or-near-focal";
    } else {
      out += ",,error:" + cell.error;
    }
    out += "\n";
  }
  return out;
}

}  // namespace hamexp

#endif  // HAMEXP_NONFOCAL_HPP
