#ifndef HAMEXP_INTEGRATE_HPP
#define HAMEXP_INTEGRATE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamexp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Number of intervals of the uniform reporting grid (t_0..t_N).
  int grid_intervals = 512;
  long max_steps = 4000000;
  double initial_step = 0.0;  // 0 = choose automatically
};

/// Thrown when the step size underflows (stiffness / finite-time blow-up).
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double t_last)
      : std::runtime_error(what + " (last valid time t=" + std::to_string(t_last) + ")"),
        t_last_(t_last) {}
  double last_valid_time() const { return t_last_; }

 private:
  double t_last_;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration landing exactly on the given
/// (monotone) grid of output times. Returns the state at each grid node.
/// Rhs signature: void(double t, const Vec& y, Vec& dy).
template <class Rhs>
std::vector<Vec> integrate_on_grid(Rhs&& rhs, const Vec& y0,
                                   const std::vector<double>& grid,
                                   const IntegratorOptions& opts = {}) {
  using D5 = detail::Dopri5;
  if (grid.size() < 2) throw std::invalid_argument("integrate_on_grid: need at least two grid times");
  const double span = grid.back() - grid.front();
  if (span == 0.0) throw std::invalid_argument("integrate_on_grid: empty time span");
  const double dir = span > 0 ? 1.0 : -1.0;

  const int n = static_cast<int>(y0.size());
  std::vector<Vec> out;
  out.reserve(grid.size());
  out.push_back(y0);

  Vec y = y0, ynew(n), yerr(n), ytmp(n);
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  double t = grid.front();
  double h = opts.initial_step != 0.0 ? opts.initial_step : dir * std::abs(span) * 1e-3;
  if (h * dir <= 0) h = -h;
  rhs(t, y, k1);
  long steps = 0;
  bool k1_fresh = true;

  for (std::size_t node = 1; node < grid.size(); ++node) {
    const double t_target = grid[node];
    while (dir * (t_target - t) > 1e-14 * std::max(1.0, std::abs(t))) {
      double hs = h;
      if (dir * (t + hs - t_target) > 0) hs = t_target - t;
      if (!k1_fresh) {
        rhs(t, y, k1);
        k1_fresh = true;
      }

      ytmp = y + hs * (D5::a21 * k1);
      rhs(t + D5::c2 * hs, ytmp, k2);
      ytmp = y + hs * (D5::a31 * k1 + D5::a32 * k2);
      rhs(t + D5::c3 * hs, ytmp, k3);
      ytmp = y + hs * (D5::a41 * k1 + D5::a42 * k2 + D5::a43 * k3);
      rhs(t + D5::c4 * hs, ytmp, k4);
      ytmp = y + hs * (D5::a51 * k1 + D5::a52 * k2 + D5::a53 * k3 + D5::a54 * k4);
      rhs(t + D5::c5 * hs, ytmp, k5);
      ytmp = y + hs * (D5::a61 * k1 + D5::a62 * k2 + D5::a63 * k3 + D5::a64 * k4 + D5::a65 * k5);
      rhs(t + hs, ytmp, k6);
      ynew = y + hs * (D5::b1 * k1 + D5::b3 * k3 + D5::b4 * k4 + D5::b5 * k5 + D5::b6 * k6);
      rhs(t + hs, ynew, k7);
      yerr = hs * (D5::e1 * k1 + D5::e3 * k3 + D5::e4 * k4 + D5::e5 * k5 + D5::e6 * k6 + D5::e7 * k7);

      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double e = yerr[i] / sc;
        err += e * e;
      }
      err = std::sqrt(err / n);

      if (err <= 1.0) {
        t += hs;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        k1_fresh = true;
      } else {
        k1_fresh = true;  // k1 still valid at unchanged t
      }
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
      h = hs * fac;
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
        throw IntegrationFailure("integrate_on_grid: step size underflow", t);
      if (++steps > opts.max_steps)
        throw IntegrationFailure("integrate_on_grid: max step count exceeded", t);
    }
    out.push_back(y);
  }
  return out;
}

/// Uniform grid with n intervals from t0 to t1 (t1 < t0 allowed).
inline std::vector<double> uniform_grid(double t0, double t1, int intervals) {
  intervals = std::max(intervals, 1);
  std::vector<double> g(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i)
    g[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * (static_cast<double>(i) / intervals);
  g.back() = t1;
  return g;
}

}  // namespace hamexp

#endif  // HAMEXP_INTEGRATE_HPP
