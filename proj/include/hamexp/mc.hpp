#ifndef HAMEXP_MC_HPP
#define HAMEXP_MC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hamexp/catalog.hpp"
#include "hamexp/minimizer.hpp"
#include "hamexp/model.hpp"

namespace hamexp {

struct McConfig {
  long n_paths = 100000;
  int n_steps = 100;
  std::uint64_t seed = 1;
  bool antithetic = false;
  int n_threads = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based per-path substream: the state is a hash of (seed, path),
/// so path i's increments are independent of execution order.
struct PathRng {
  std::uint64_t state;

  PathRng(std::uint64_t seed, std::uint64_t path) {
    std::uint64_t s = seed ^ (path * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    state = splitmix64(s);
    state = splitmix64(state);
  }

  double uniform() {  // in (0, 1]
    return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Box-Muller pair of standard normals.
  void normal_pair(double& z0, double& z1) {
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
  }
};

/// Runs body(path) for every path index, split across n_threads. Results
/// are byte-identical for any thread count because each path draws from
/// its own counter-based substream.
template <class Body>
void for_each_path(long n_paths, int n_threads, Body&& body) {
  n_threads = std::max(1, n_threads);
  if (n_threads == 1) {
    for (long path = 0; path < n_paths; ++path) body(path);
    return;
  }
  std::vector<std::thread> workers;
  const long chunk = (n_paths + n_threads - 1) / n_threads;
  for (int w = 0; w < n_threads; ++w) {
    const long lo = w * chunk, hi = std::min(n_paths, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &body] {
      for (long path = lo; path < hi; ++path) body(path);
    });
  }
  for (std::thread& t : workers) t.join();
}

}  // namespace detail

/// Euler-Maruyama terminal samples of the projected coordinate(s) for a
/// generic model at noise level eps = 1 (drift sigma_0 + d_eps b).
/// Returns the first projected coordinate of X_T per path.
inline std::vector<double> simulate_terminal(const ModelSpec& model, double T,
                                             const McConfig& cfg) {
  if (cfg.n_paths < 1 || cfg.n_steps < 1)
    throw std::invalid_argument("simulate_terminal: need n_paths >= 1, n_steps >= 1");
  const int d = model.dim_state, m = model.dim_noise;
  const double dt = T / cfg.n_steps;
  const double sq = std::sqrt(dt);
  std::vector<double> out(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, cfg.n_threads, [&](long path) {
    detail::PathRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    Vec x = model.x0 + model.x0_hat;  // start at eps = 1
    Vec dw(m);
    const double sign = (cfg.antithetic && path % 2 == 1) ? -1.0 : 1.0;
    for (int step = 0; step < cfg.n_steps; ++step) {
      for (int j = 0; j < m; j += 2) {
        double z0, z1;
        rng.normal_pair(z0, z1);
        dw[j] = sign * z0;
        if (j + 1 < m) dw[j + 1] = sign * z1;
      }
      x += (model.drift(x) + model.drift_eps(x)) * dt +
           decorrelated_diffusion(model, x) * (sq * dw);
    }
    out[static_cast<std::size_t>(path)] = x[0];
  });
  (void)d;
  return out;
}

/// Specialized Stein-Stein path loop (the generic field-callback version
/// is an order of magnitude slower at desk-scale path counts).
inline std::vector<double> simulate_stein_stein(const SteinSteinParams& params,
                                                const McConfig& cfg) {
  validate(params);
  if (cfg.n_paths < 1 || cfg.n_steps < 1)
    throw std::invalid_argument("simulate_stein_stein: need n_paths >= 1, n_steps >= 1");
  const double dt = params.T / cfg.n_steps;
  const double sq = std::sqrt(dt);
  const double rho = params.rho, rho_c = std::sqrt(1.0 - rho * rho);
  const double a = params.a, b = params.b, c = params.c;
  std::vector<double> out(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, cfg.n_threads, [&](long path) {
    detail::PathRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    double y = 0.0, z = params.sigma0;
    const double sign = (cfg.antithetic && path % 2 == 1) ? -1.0 : 1.0;
    for (int step = 0; step < cfg.n_steps; ++step) {
      double g1, g2;
      rng.normal_pair(g1, g2);
      g1 *= sign;
      g2 *= sign;
      // dW1 = g1, dW2 = rho g1 + sqrt(1-rho^2) g2
      y += -0.5 * z * z * dt + z * sq * g1;
      z += (a + b * z) * dt + c * sq * (rho * g1 + rho_c * g2);
    }
    out[static_cast<std::size_t>(path)] = y;
  });
  return out;
}

inline std::vector<double> simulate_black_scholes(double sigma, double y0, double T,
                                                  const McConfig& cfg) {
  if (!(sigma > 0) || !(T > 0))
    throw std::invalid_argument("simulate_black_scholes: need sigma > 0, T > 0");
  const double dt = T / cfg.n_steps;
  const double sq = std::sqrt(dt);
  std::vector<double> out(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, cfg.n_threads, [&](long path) {
    detail::PathRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    double y = y0;
    const double sign = (cfg.antithetic && path % 2 == 1) ? -1.0 : 1.0;
    for (int step = 0; step < cfg.n_steps; ++step) {
      double g1, g2;
      rng.normal_pair(g1, g2);
      (void)g2;
      y += -0.5 * sigma * sigma * dt + sigma * sq * sign * g1;
    }
    out[static_cast<std::size_t>(path)] = y;
  });
  return out;
}

struct TailSlope {
  double slope = 0.0;
  double std_error = 0.0;
  int n_tail_points = 0;
  double threshold = 0.0;
};

namespace detail {

/// Least-squares slope of log-survival on the regressor t(y).
inline double survival_slope(const std::vector<double>& sorted_desc, std::size_t n_total,
                             std::size_t first, std::size_t last, int theta) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double npts = static_cast<double>(last - first);
  for (std::size_t i = first; i < last; ++i) {
    const double y = sorted_desc[i];
    const double x = theta == 1 ? y * y : y;
    const double ls = std::log((static_cast<double>(i) + 1.0) / static_cast<double>(n_total));
    sx += x;
    sy += ls;
    sxx += x * x;
    sxy += x * ls;
  }
  const double denom = npts * sxx - sx * sx;
  if (denom == 0.0) throw std::runtime_error("tail_slope: degenerate regressor");
  return (npts * sxy - sx * sy) / denom;
}

}  // namespace detail

/// Regression estimate of the leading tail rate: for theta = 2, the slope
/// of log empirical survival on y over the given quantile range estimates
/// -c1; for theta = 1 the regressor is y^2. Standard error by bootstrap
/// of the conditional tail (binomial tail-count draw plus resampling the
/// stored tail values), 200 resamples.
inline TailSlope tail_slope(const std::vector<double>& samples, int theta = 2,
                            double q_lo = 0.995, double q_hi = 0.99995,
                            int n_bootstrap = 200, std::uint64_t bootstrap_seed = 7777) {
  if (samples.size() < 100000)
    throw std::invalid_argument("tail_slope: need at least 1e5 samples");
  if (!(q_lo < q_hi) || !(q_lo > 0) || !(q_hi < 1))
    throw std::invalid_argument("tail_slope: invalid quantile range");
  const std::size_t n = samples.size();
  // Keep everything above the q_lo quantile, sorted descending.
  const std::size_t k_lo = static_cast<std::size_t>(std::ceil((1.0 - q_lo) * n));
  std::vector<double> tail = samples;
  std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(k_lo),
                   tail.end(), std::greater<double>());
  tail.resize(k_lo);
  std::sort(tail.begin(), tail.end(), std::greater<double>());

  const std::size_t first = static_cast<std::size_t>(std::floor((1.0 - q_hi) * n));
  if (k_lo <= first || k_lo - first < 100)
    throw std::runtime_error("tail_slope: fewer than 100 tail points in the quantile range");

  TailSlope result;
  result.n_tail_points = static_cast<int>(k_lo - first);
  result.threshold = tail.back();
  result.slope = detail::survival_slope(tail, n, first, k_lo, theta);

  // Conditional-tail bootstrap: redraw the tail count from its binomial
  // law, then the tail values with replacement.
  std::mt19937_64 gen(bootstrap_seed);
  std::binomial_distribution<long> count_dist(static_cast<long>(n),
                                              static_cast<double>(k_lo) / static_cast<double>(n));
  std::uniform_int_distribution<std::size_t> pick(0, k_lo - 1);
  std::vector<double> resample;
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(n_bootstrap));
  for (int rep = 0; rep < n_bootstrap; ++rep) {
    const std::size_t k_star = static_cast<std::size_t>(std::max(200L, count_dist(gen)));
    resample.resize(k_star);
    for (std::size_t i = 0; i < k_star; ++i) resample[i] = tail[pick(gen)];
    std::sort(resample.begin(), resample.end(), std::greater<double>());
    const std::size_t f = std::min(first, k_star > 100 ? k_star - 100 : 0);
    slopes.push_back(detail::survival_slope(resample, n, f, k_star, theta));
  }
  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= static_cast<double>(slopes.size());
  double var = 0.0;
  for (double s : slopes) var += (s - mean) * (s - mean);
  result.std_error = std::sqrt(var / (static_cast<double>(slopes.size()) - 1.0));
  return result;
}

/// Re-integrates the controlled ODE dphi = sigma_0(phi) dt +
/// sum_i sigma~_i(phi) hdot_0^i dt with the control interpolated by a
/// Catmull-Rom cubic between grid nodes (linear interpolation leaves an
/// O(h^2) representation error above the 1e-6 hit tolerances this oracle
/// is asked for); returns |Pi_l phi_T - target|. This is the
/// admissibility oracle for minimizer candidates.
inline double verify_control(const ModelSpec& model, const ControlPath& control,
                             const Vec& target, const IntegratorOptions& opts = {}) {
  const double t0 = control.times.front(), t1 = control.times.back();
  const int n_nodes = static_cast<int>(control.times.size());
  const double dt = (t1 - t0) / (static_cast<double>(n_nodes) - 1.0);
  auto rhs = [&](double t, const Vec& x, Vec& dx) {
    const double s = (t - t0) / dt;
    const int k = std::clamp(static_cast<int>(std::floor(s)), 0, n_nodes - 2);
    const double w = s - k;
    const Vec& v0 = control.values.col(std::max(k - 1, 0));
    const Vec& v1 = control.values.col(k);
    const Vec& v2 = control.values.col(k + 1);
    const Vec& v3 = control.values.col(std::min(k + 2, n_nodes - 1));
    const Vec h = 0.5 * (2.0 * v1 + w * ((v2 - v0) +
                                         w * ((2.0 * v0 - 5.0 * v1 + 4.0 * v2 - v3) +
                                              w * (3.0 * (v1 - v2) + v3 - v0))));
    dx = model.drift(x) + decorrelated_diffusion(model, x) * h;
  };
  IntegratorOptions io = opts;
  io.grid_intervals = 1;
  const std::vector<Vec> res = integrate_on_grid(rhs, model.x0, uniform_grid(t0, t1, 1), io);
  return (res.back().head(model.dim_proj) - target).norm();
}

/// Binary sample file: 8-byte magic "HXSAMP01", u64 little-endian count,
/// then count f64 little-endian samples.
inline void write_samples_binary(const std::string& path, const std::vector<double>& samples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_samples_binary: cannot open " + path);
  f.write("HXSAMP01", 8);
  const std::uint64_t n = samples.size();
  f.write(reinterpret_cast<const char*>(&n), 8);
  f.write(reinterpret_cast<const char*>(samples.data()),
          static_cast<std::streamsize>(samples.size() * sizeof(double)));
  if (!f) throw std::runtime_error("write_samples_binary: write failed for " + path);
}

inline std::vector<double> read_samples_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_samples_binary: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "HXSAMP01")
    throw std::runtime_error("read_samples_binary: bad magic in " + path);
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), 8);
  std::vector<double> samples(n);
  f.read(reinterpret_cast<char*>(samples.data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) throw std::runtime_error("read_samples_binary: truncated file " + path);
  return samples;
}

inline void write_samples_csv(const std::string& path, const std::vector<double>& samples) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_samples_csv: cannot open " + path);
  f << "y\n";
  char buf[32];
  for (double s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g\n", s);
    f << buf;
  }
}

}  // namespace hamexp

#endif  // HAMEXP_MC_HPP
