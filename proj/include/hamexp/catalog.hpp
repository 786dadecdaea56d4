#ifndef HAMEXP_CATALOG_HPP
#define HAMEXP_CATALOG_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hamexp/model.hpp"

namespace hamexp {

class UnsupportedParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stein-Stein stochastic volatility: dY = -Z^2/2 dt + Z dW1,
/// dZ = (a + bZ) dt + c dW2, corr(W1,W2) = rho, Z_0 = sigma0.
struct SteinSteinParams {
  double a = 0.0;       // drift level, >= 0
  double b = 0.0;       // mean reversion, <= 0
  double c = 1.0;       // vol of vol, > 0
  double sigma0 = 0.0;  // spot volatility, >= 0
  double rho = 0.0;     // correlation, in (-1, 0]
  double T = 1.0;       // maturity, > 0
};

inline void validate(const SteinSteinParams& p) {
  if (!(p.a >= 0)) throw std::invalid_argument("stein-stein: need a >= 0");
  if (!(p.b <= 0)) throw std::invalid_argument("stein-stein: need b <= 0");
  if (!(p.c > 0)) throw std::invalid_argument("stein-stein: need c > 0");
  if (!(p.sigma0 >= 0)) throw std::invalid_argument("stein-stein: need sigma0 >= 0");
  if (!(p.T > 0)) throw std::invalid_argument("stein-stein: need T > 0");
  if (p.rho > 0)
    throw UnsupportedParameter("stein-stein: positive correlation not supported");
  if (!(p.rho > -1))
    throw std::invalid_argument("stein-stein: need rho in (-1, 0]");
}

/// (a,b,c,sigma0) -> (a T^{3/2}, bT, cT, sigma0 sqrt(T)), T -> 1; the law
/// of Y_T is preserved.
inline SteinSteinParams rescale_to_unit_maturity(SteinSteinParams p) {
  validate(p);
  const double t = p.T;
  p.a *= t * std::sqrt(t);
  p.b *= t;
  p.c *= t;
  p.sigma0 *= std::sqrt(t);
  p.T = 1.0;
  return p;
}

namespace detail {

/// sin(chi t)/chi, continued through chi^2 <= 0.
inline double sinc_chi(double chi2, double t) {
  if (chi2 > 1e-12) {
    const double chi = std::sqrt(chi2);
    return std::sin(chi * t) / chi;
  }
  if (chi2 < -1e-12) {
    const double eta = std::sqrt(-chi2);
    return std::sinh(eta * t) / eta;
  }
  // series: t - chi^2 t^3/6 + chi^4 t^5/120
  const double t2 = t * t;
  return t * (1.0 - chi2 * t2 / 6.0 + chi2 * chi2 * t2 * t2 / 120.0);
}

/// cos(chi t), continued.
inline double cos_chi(double chi2, double t) {
  if (chi2 > 1e-12) return std::cos(std::sqrt(chi2) * t);
  if (chi2 < -1e-12) return std::cosh(std::sqrt(-chi2) * t);
  const double t2 = t * t;
  return 1.0 - chi2 * t2 / 2.0 + chi2 * chi2 * t2 * t2 / 24.0;
}

/// (2 chi t - sin 2 chi t) / (8 chi^3), continued; limit t^3/6.
inline double wave_integral(double chi2, double t) {
  const double u2 = chi2 * t * t;
  if (std::abs(u2) > 1e-4) {
    if (chi2 > 0) {
      const double chi = std::sqrt(chi2);
      return (2.0 * chi * t - std::sin(2.0 * chi * t)) / (8.0 * chi2 * chi);
    }
    const double eta = std::sqrt(-chi2);
    return (std::sinh(2.0 * eta * t) - 2.0 * eta * t) / (8.0 * eta * eta * eta);
  }
  // (2u - sin 2u)/(8u^3) * t^3 with u = chi t: t^3 (1/6 - u^2/30 + u^4/420)
  return t * t * t * (1.0 / 6.0 - u2 / 30.0 + u2 * u2 / 420.0);
}

/// (1 - cos 2 chi t) / (4 chi^2), continued; limit t^2/2.
inline double cos_integral(double chi2, double t) {
  const double u2 = chi2 * t * t;
  if (std::abs(u2) > 1e-4) {
    if (chi2 > 0) return (1.0 - std::cos(2.0 * std::sqrt(chi2) * t)) / (4.0 * chi2);
    return (std::cosh(2.0 * std::sqrt(-chi2) * t) - 1.0) / (-4.0 * chi2);
  }
  // (1 - cos 2u)/(4u^2) * t^2 = t^2 (1/2 - u^2/6 + u^4/45)
  return t * t * (0.5 - u2 / 6.0 + u2 * u2 / 45.0);
}

/// tan(chi t / 2) / chi, continued; limit t/2.
inline double tan_half_over_chi(double chi2, double t) {
  if (chi2 > 1e-12) {
    const double chi = std::sqrt(chi2);
    return std::tan(chi * t / 2.0) / chi;
  }
  if (chi2 < -1e-12) {
    const double eta = std::sqrt(-chi2);
    return std::tanh(eta * t / 2.0) / eta;
  }
  const double u2 = chi2 * t * t / 4.0;
  return (t / 2.0) * (1.0 + u2 / 3.0 + 2.0 * u2 * u2 / 15.0);
}

}  // namespace detail

/// Closed-form Hamiltonian flow of the Stein-Stein model started at
/// (y,z) = (0,0) with momentum (p, q0); p_t is constant equal to p.
struct SteinSteinFlowPoint {
  double y = 0.0;
  double z = 0.0;
  double q = 0.0;
};

inline SteinSteinFlowPoint flow_closed_form(const SteinSteinParams& params, double p,
                                            double q0, double t) {
  const double c = params.c, rho = params.rho;
  const double b_tilde = params.b + rho * c * p;
  const double chi2 = c * c * p * (p - 1.0) - b_tilde * b_tilde;
  SteinSteinFlowPoint pt;
  const double s = detail::sinc_chi(chi2, t);
  const double co = detail::cos_chi(chi2, t);
  pt.z = q0 * c * c * s;
  pt.q = q0 * (co - b_tilde * s);
  const double d1 = c * c * (2.0 * p - 1.0) - 2.0 * rho * c * b_tilde;
  pt.y = q0 * q0 * c * c *
         (d1 * detail::wave_integral(chi2, t) + rho * c * detail::cos_integral(chi2, t));
  return pt;
}

/// p+(r): minimal-branch momentum as a function of the frequency variable
/// r = chi T, from the quadratic the transversality condition induces.
inline double stein_stein_p_plus(double b, double c, double rho, double T, double r) {
  const double one_m_r2 = 1.0 - rho * rho;
  const double u = 1.0 + 2.0 * rho * b / c;
  const double disc = u * u + 4.0 * one_m_r2 * (b * b / (c * c) + r * r / (c * c * T * T));
  return (u + std::sqrt(disc)) / (2.0 * one_m_r2);
}

/// k-th strictly positive root of r cos r - (b + rho c p+(r)) T sin r = 0,
/// bracketed in ((k-1/2) pi, k pi); bisection then Newton polish.
inline double stein_stein_root(double b, double c, double rho, double T, int k = 1) {
  if (k < 1) throw std::invalid_argument("stein_stein_root: need k >= 1");
  const double pi = std::numbers::pi;
  auto f = [&](double r) {
    return r * std::cos(r) - (b + rho * c * stein_stein_p_plus(b, c, rho, T, r)) * T * std::sin(r);
  };
  double lo = (k - 0.5) * pi, hi = k * pi;
  double flo = f(lo);
  if (flo == 0.0) return lo;  // b = 0, rho = 0: root exactly at (k-1/2) pi
  // f alternates sign between the bracket endpoints; shrink the right
  // endpoint slightly to avoid the sin r = 0 degeneracy.
  double fhi = f(hi);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  double r = 0.5 * (lo + hi);
  // one central-difference Newton polish
  const double h = 1e-7;
  const double deriv = (f(r + h) - f(r - h)) / (2.0 * h);
  if (deriv != 0.0) {
    const double r_new = r - f(r) / deriv;
    if (r_new > (k - 0.5) * pi && r_new < k * pi) r = r_new;
  }
  (void)fhi;
  return r;
}

inline double solve_root_uncorrelated(double b, double T, int k = 1) {
  return stein_stein_root(b, 1.0, 0.0, T, k);
}

struct BranchRoot {
  double r = 0.0;
  double p_plus = 0.0;
};

struct SteinSteinSolution {
  double r1 = 0.0;       // first admissible root, chi T in [pi/2, pi)
  double p_plus = 0.0;   // minimal momentum p1+
  double chi = 0.0;      // r1 / T
  double q0_plus = 0.0;  // positive branch q0
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<BranchRoot> branch_roots;  // diagnostic higher branches
};

/// Closed-form expansion constants; target is the arrival level of Y_T
/// (1 for the tail normalization). Valid for rho in (-1, 0], b <= 0.
inline SteinSteinSolution solve_correlated(const SteinSteinParams& params,
                                           double target = 1.0, int n_branches = 3) {
  validate(params);
  if (!(target > 0)) throw std::invalid_argument("solve_correlated: need target > 0");
  const double b = params.b, c = params.c, rho = params.rho, T = params.T;
  SteinSteinSolution sol;
  sol.r1 = stein_stein_root(b, c, rho, T, 1);
  sol.p_plus = stein_stein_p_plus(b, c, rho, T, sol.r1);
  sol.chi = sol.r1 / T;
  const double p = sol.p_plus;
  const double b_tilde = b + rho * c * p;
  const double chi2 = sol.chi * sol.chi;
  const double r = sol.r1;
  const double d1 = c * c * (2.0 * p - 1.0) - 2.0 * rho * c * b_tilde;
  const double denom = d1 * (2.0 * r - std::sin(2.0 * r)) +
                       2.0 * rho * c * (r / T) * (1.0 - std::cos(2.0 * r));
  if (!(denom > 0))
    throw std::runtime_error("solve_correlated: nonpositive y_T coefficient");
  sol.q0_plus = (2.0 / c) * std::sqrt(2.0 * r * r * r * target / (T * T * T * denom));
  sol.c1 = p * target;
  sol.c2 = sol.q0_plus *
           (params.sigma0 + params.a * detail::tan_half_over_chi(chi2, T));
  for (int k = 1; k <= n_branches; ++k) {
    const double rk = stein_stein_root(b, c, rho, T, k);
    sol.branch_roots.push_back({rk, stein_stein_p_plus(b, c, rho, T, rk)});
  }
  return sol;
}

struct BlackScholesConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  int theta = 1;
};

/// c1 = 1/(2 sigma^2 T); c2 = (y0 - sigma^2 T/2)/(sigma^2 T), the value
/// the exact Gaussian density expansion gives.
inline BlackScholesConstants black_scholes_constants(double sigma, double T, double y0) {
  if (!(sigma > 0) || !(T > 0))
    throw std::invalid_argument("black_scholes_constants: need sigma > 0, T > 0");
  BlackScholesConstants k;
  k.c1 = 1.0 / (2.0 * sigma * sigma * T);
  k.c2 = (y0 - sigma * sigma * T / 2.0) / (sigma * sigma * T);
  return k;
}

/// ModelSpec of the Stein-Stein small-noise family: state (y,z), the
/// epsilon-scaled start is (0, eps*sigma0), drift-epsilon derivative
/// (0, a).
inline ModelSpec stein_stein_model(const SteinSteinParams& params) {
  validate(params);
  const double b = params.b, c = params.c, rho = params.rho;
  ModelSpec m;
  m.dim_state = 2;
  m.dim_noise = 2;
  m.dim_proj = 1;
  m.drift = [b](const Vec& x) {
    Vec v(2);
    v << -0.5 * x[1] * x[1], b * x[1];
    return v;
  };
  m.drift_eps = [a = params.a](const Vec&) {
    Vec v(2);
    v << 0.0, a;
    return v;
  };
  m.diffusion = [c](const Vec& x) {
    Mat s(2, 2);
    s << x[1], 0.0, 0.0, c;
    return s;
  };
  m.correlation = Mat(2, 2);
  m.correlation << 1.0, rho, rho, 1.0;
  m.x0 = Vec::Zero(2);
  m.x0_hat = Vec(2);
  m.x0_hat << 0.0, params.sigma0;
  m.drift_jac = [b](const Vec& x) {
    Mat j(2, 2);
    j << 0.0, -x[1], 0.0, b;
    return j;
  };
  m.drift_eps_jac = [](const Vec&) { return Mat::Zero(2, 2); };
  m.diffusion_col_jac = [](const Vec&, int i) {
    Mat j = Mat::Zero(2, 2);
    if (i == 0) j(0, 1) = 1.0;
    return j;
  };
  // <p, drift> = -p0 z^2/2 + b p1 z is quadratic in z and the diffusion
  // columns are affine, so the Hessian forms are exact constants.
  m.drift_hess_form = [](const Vec&, const Vec& p) {
    Mat h = Mat::Zero(2, 2);
    h(1, 1) = -p[0];
    return h;
  };
  m.diffusion_col_hess_form = [](const Vec&, const Vec&, int) { return Mat::Zero(2, 2); };
  return make_model(std::move(m));
}

/// Black-Scholes small-noise model: dY^eps = -eps sigma^2/2 dt + eps
/// sigma dW; the tail normalization puts x0 = 0 and x0_hat = y0.
inline ModelSpec black_scholes_model(double sigma, double y0) {
  if (!(sigma > 0)) throw std::invalid_argument("black_scholes_model: need sigma > 0");
  ModelSpec m;
  m.dim_state = 1;
  m.dim_noise = 1;
  m.dim_proj = 1;
  m.drift = [](const Vec&) { return Vec::Zero(1); };
  m.drift_eps = [sigma](const Vec&) {
    Vec v(1);
    v << -0.5 * sigma * sigma;
    return v;
  };
  m.diffusion = [sigma](const Vec&) {
    Mat s(1, 1);
    s << sigma;
    return s;
  };
  m.correlation = Mat::Identity(1, 1);
  m.x0 = Vec::Zero(1);
  m.x0_hat = Vec(1);
  m.x0_hat << y0;
  m.drift_jac = [](const Vec&) { return Mat::Zero(1, 1); };
  m.drift_eps_jac = [](const Vec&) { return Mat::Zero(1, 1); };
  m.diffusion_col_jac = [](const Vec&, int) { return Mat::Zero(1, 1); };
  m.drift_hess_form = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
  m.diffusion_col_hess_form = [](const Vec&, const Vec&, int) { return Mat::Zero(1, 1); };
  return make_model(std::move(m));
}

}  // namespace hamexp

#endif  // HAMEXP_CATALOG_HPP
