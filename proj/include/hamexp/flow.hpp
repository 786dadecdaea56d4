#ifndef HAMEXP_FLOW_HPP
#define HAMEXP_FLOW_HPP

#include <optional>
#include <utility>
#include <vector>

#include "hamexp/integrate.hpp"
#include "hamexp/model.hpp"

namespace hamexp {

/// Trajectory of the Hamiltonian flow on the reporting grid. Each state is
/// the stacked vector (x, p) in R^{2d}. When requested, `variational`
/// holds J(T) = d(x_T,p_T)/d(x_0,p_0).
struct FlowResult {
  std::vector<double> times;
  std::vector<Vec> states;  // (x, p) stacked, 2d each
  std::optional<Mat> variational;
  double hamiltonian_drift = 0.0;
  int dim = 0;

  Vec x_at(std::size_t i) const { return states[i].head(dim); }
  Vec p_at(std::size_t i) const { return states[i].tail(dim); }
  Vec x_final() const { return states.back().head(dim); }
  Vec p_final() const { return states.back().tail(dim); }
};

namespace detail {

/// RHS of the Hamiltonian system, optionally augmented with the
/// variational matrix dJ = K J, K the linearized Hamiltonian field.
/// Every model field is evaluated once per quadrature point into member
/// buffers; the integrator calls this millions of times per solve, so
/// redundant std::function calls and Eigen temporaries dominate the
/// runtime otherwise.
class HamiltonianRhs {
 public:
  HamiltonianRhs(const ModelSpec& model, bool with_variation)
      : model_(model),
        with_variation_(with_variation),
        d_(model.dim_state),
        m_(model.dim_noise),
        x_(d_),
        p_(d_),
        u_(m_),
        v_(d_),
        work_(d_),
        gp_(d_),
        gm_(d_),
        sig_(d_, m_),
        jd_(d_, d_),
        jcols_(static_cast<std::size_t>(m_), Mat(d_, d_)),
        b_(d_, d_),
        a_(d_, d_),
        hxx_(d_, d_),
        k_(2 * d_, 2 * d_) {}

  void operator()(double, const Vec& y, Vec& dy) {
    const int d = d_, m = m_;
    x_ = y.head(d);
    p_ = y.segment(d, d);
    dy.resize(y.size());

    eval_fields(x_);
    u_.noalias() = sig_.transpose() * p_;
    dy.head(d) = model_.drift(x_);
    dy.head(d).noalias() += sig_ * u_;
    work_.noalias() = jd_.transpose() * p_;
    for (int i = 0; i < m; ++i)
      if (u_[i] != 0.0) work_.noalias() += u_[i] * (jcols_[static_cast<std::size_t>(i)].transpose() * p_);
    dy.segment(d, d) = -work_;
    if (!with_variation_) return;

    // B = d(xdot)/dx, A = d(xdot)/dp = sigma~ sigma~^T,
    // d(pdot)/dx = -H_xx (central differences of the analytic
    // x-gradient), d(pdot)/dp = -B^T.
    const bool analytic_hess =
        static_cast<bool>(model_.drift_hess_form) && static_cast<bool>(model_.diffusion_col_hess_form);
    b_ = jd_;
    if (analytic_hess)
      hxx_ = model_.drift_hess_form(x_, p_);
    for (int i = 0; i < m; ++i) {
      const Mat& ji = jcols_[static_cast<std::size_t>(i)];
      v_.noalias() = ji.transpose() * p_;
      b_.noalias() += sig_.col(i) * v_.transpose();
      b_.noalias() += u_[i] * ji;
      if (analytic_hess) {
        // H_xx = D^2<p,drift> + sum_i [v_i v_i^T + u_i D^2<p,sigma~_i>]
        hxx_.noalias() += v_ * v_.transpose();
        if (u_[i] != 0.0)
          for (int j = 0; j < m; ++j) {
            const double w = model_.decorrelation(j, i);
            if (w != 0.0) hxx_.noalias() += (u_[i] * w) * model_.diffusion_col_hess_form(x_, p_, j);
          }
      }
    }
    a_.noalias() = sig_ * sig_.transpose();

    if (!analytic_hess) {
      const double h = fd_step(x_, 1e-5);
      for (int j = 0; j < d; ++j) {
        const double xj = x_[j];
        x_[j] = xj + h;
        x_gradient(gp_);
        x_[j] = xj - h;
        x_gradient(gm_);
        x_[j] = xj;
        hxx_.col(j) = (gp_ - gm_) / (2.0 * h);
      }
    }

    k_.topLeftCorner(d, d) = b_;
    k_.topRightCorner(d, d) = a_;
    k_.bottomLeftCorner(d, d) = -hxx_;
    k_.bottomRightCorner(d, d) = -b_.transpose();
    const auto jmat = Eigen::Map<const Mat>(y.data() + 2 * d, 2 * d, 2 * d);
    Eigen::Map<Mat>(dy.data() + 2 * d, 2 * d, 2 * d).noalias() = k_ * jmat;
  }

 private:
  void eval_fields(const Vec& x) {
    sig_.noalias() = model_.diffusion(x) * model_.decorrelation;
    jd_ = model_.drift_jac ? model_.drift_jac(x) : fd_jacobian(model_.drift, x);
    for (int i = 0; i < m_; ++i) {
      Mat& ji = jcols_[static_cast<std::size_t>(i)];
      ji.setZero();
      for (int j = 0; j < m_; ++j) {
        const double w = model_.decorrelation(j, i);
        if (w != 0.0) ji.noalias() += w * column_jacobian(x, j);
      }
    }
  }

  Mat column_jacobian(const Vec& x, int j) {
    if (model_.diffusion_col_jac) return model_.diffusion_col_jac(x, j);
    return fd_jacobian([&](const Vec& z) -> Vec { return model_.diffusion(z).col(j); }, x);
  }

  /// dH/dx at (x_, p_) into g, refreshing the field buffers at x_.
  void x_gradient(Vec& g) {
    eval_fields(x_);
    u_.noalias() = sig_.transpose() * p_;
    g.noalias() = jd_.transpose() * p_;
    for (int i = 0; i < m_; ++i)
      if (u_[i] != 0.0) g.noalias() += u_[i] * (jcols_[static_cast<std::size_t>(i)].transpose() * p_);
  }

  const ModelSpec& model_;
  bool with_variation_;
  int d_, m_;
  Vec x_, p_, u_, v_, work_, gp_, gm_;
  Mat sig_, jd_;
  std::vector<Mat> jcols_;
  Mat b_, a_, hxx_, k_;
};

inline FlowResult run_flow(const ModelSpec& model, const Vec& x_start, const Vec& p_start,
                           double t0, double t1, bool with_variation,
                           const IntegratorOptions& opts) {
  const int d = model.dim_state;
  check_dims(model, x_start, p_start, "flow");
  Vec y0(with_variation ? 2 * d + 4 * d * d : 2 * d);
  y0.head(d) = x_start;
  y0.segment(d, d) = p_start;
  if (with_variation)
    Eigen::Map<Mat>(y0.data() + 2 * d, 2 * d, 2 * d) = Mat::Identity(2 * d, 2 * d);

  FlowResult out;
  out.dim = d;
  out.times = uniform_grid(t0, t1, opts.grid_intervals);
  HamiltonianRhs rhs(model, with_variation);
  const std::vector<Vec> raw = integrate_on_grid(rhs, y0, out.times, opts);

  const double h0 = hamiltonian(model, x_start, p_start);
  out.states.reserve(raw.size());
  for (const Vec& y : raw) {
    out.states.push_back(y.head(2 * d));
    const double h = hamiltonian(model, y.head(d), y.segment(d, d));
    out.hamiltonian_drift = std::max(out.hamiltonian_drift, std::abs(h - h0));
  }
  if (with_variation)
    out.variational = Mat(Eigen::Map<const Mat>(raw.back().data() + 2 * d, 2 * d, 2 * d));
  return out;
}

}  // namespace detail

inline FlowResult flow_forward(const ModelSpec& model, const Vec& x0, const Vec& p0,
                               double T, const IntegratorOptions& opts = {}) {
  if (!(T > 0)) throw std::invalid_argument("flow_forward: need T > 0");
  return detail::run_flow(model, x0, p0, 0.0, T, false, opts);
}

inline FlowResult flow_backward(const ModelSpec& model, const Vec& xT, const Vec& pT,
                                double T, const IntegratorOptions& opts = {}) {
  if (!(T > 0)) throw std::invalid_argument("flow_backward: need T > 0");
  return detail::run_flow(model, xT, pT, T, 0.0, false, opts);
}

inline FlowResult flow_with_variation(const ModelSpec& model, const Vec& x0, const Vec& p0,
                                      double T, const IntegratorOptions& opts = {}) {
  if (!(T > 0)) throw std::invalid_argument("flow_with_variation: need T > 0");
  return detail::run_flow(model, x0, p0, 0.0, T, true, opts);
}

inline FlowResult flow_backward_with_variation(const ModelSpec& model, const Vec& xT,
                                               const Vec& pT, double T,
                                               const IntegratorOptions& opts = {}) {
  if (!(T > 0)) throw std::invalid_argument("flow_backward_with_variation: need T > 0");
  return detail::run_flow(model, xT, pT, T, 0.0, true, opts);
}

}  // namespace hamexp

#endif  // HAMEXP_FLOW_HPP
