#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hamexp/catalog.hpp"
#include "hamexp/pipeline.hpp"

using namespace hamexp;

namespace {

constexpr double kP1Plus = 2.14845415473780757938;
constexpr double kC2Sigma02 = 0.34604010394301191718;

BvpProblem ss_problem(double b, double c, double rho, double sigma0, double a, double T) {
  SteinSteinParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  p.rho = rho;
  p.sigma0 = sigma0;
  p.T = T;
  BvpProblem prob;
  prob.model = stein_stein_model(p);
  prob.target = Vec::Ones(1);
  prob.T = T;
  prob.x0 = Vec::Zero(2);
  return prob;
}

BvpSolution solve_branch(const BvpProblem& prob, double p_guess, double q_guess) {
  Vec guess(prob.model.dim_state);
  if (guess.size() == 1)
    guess << p_guess;
  else
    guess << p_guess, q_guess;
  ShootOutcome out = shoot(prob, guess);
  REQUIRE(out.status == ShootStatus::converged);
  return *out.solution;
}

}  // namespace

TEST_CASE("first variation closed forms", "[expansion]") {
  SECTION("Black-Scholes Yhat_T = y0 - sigma^2 T / 2") {
    BvpProblem prob;
    prob.model = black_scholes_model(1.0, 0.0);
    prob.target = Vec::Ones(1);
    prob.T = 1.0;
    prob.x0 = Vec::Zero(1);
    const BvpSolution sol = solve_branch(prob, 0.5, 0.0);
    const Vec y_hat = first_variation(prob.model, sol, prob.T);
    CHECK(y_hat[0] == Catch::Approx(-0.5).margin(1e-9));
  }
  SECTION("opposite minimizers give opposite first variations") {
    const BvpProblem prob = ss_problem(-0.5, 1.0, -0.3, 0.3, 0.2, 1.0);
    const BvpSolution plus = solve_branch(prob, 4.0, 0.8);
    const BvpSolution minus = solve_branch(prob, 4.0, -0.8);
    const Vec yp = first_variation(prob.model, plus, prob.T);
    const Vec ym = first_variation(prob.model, minus, prob.T);
    CHECK(ym[0] == Catch::Approx(-yp[0]).epsilon(1e-7));
  }
  SECTION("linearity in (x0_hat, d_eps b)") {
    const BvpProblem prob = ss_problem(-0.5, 1.0, 0.0, 0.3, 0.2, 1.0);
    const BvpSolution sol = solve_branch(prob, 4.0, 0.8);
    const Vec y1 = first_variation(prob.model, sol, prob.T);
    BvpProblem doubled = prob;
    SteinSteinParams p2;
    p2.a = 0.4;
    p2.b = -0.5;
    p2.c = 1.0;
    p2.rho = 0.0;
    p2.sigma0 = 0.6;
    doubled.model = stein_stein_model(p2);
    const Vec y2 = first_variation(doubled.model, sol, prob.T);
    CHECK(y2[0] == Catch::Approx(2.0 * y1[0]).epsilon(1e-8));
  }
}

TEST_CASE("lambda gradient", "[expansion]") {
  SECTION("Black-Scholes momentum and finite differences agree") {
    BvpProblem prob;
    prob.model = black_scholes_model(1.0, 0.0);
    prob.target = Vec::Ones(1);
    prob.T = 1.0;
    prob.x0 = Vec::Zero(1);
    const BvpSolution sol = solve_branch(prob, 0.5, 0.0);
    const Vec grad_m = lambda_gradient(prob, sol, GradientMethod::momentum);
    const Vec grad_fd = lambda_gradient(prob, sol, GradientMethod::finite_difference);
    CHECK(grad_m[0] == Catch::Approx(1.0).margin(1e-9));  // Lambda'(1) = 1/(sigma^2 T)
    CHECK(grad_fd[0] == Catch::Approx(1.0).margin(1e-5));
    CHECK_NOTHROW(lambda_gradient(prob, sol, GradientMethod::cross_checked));
  }
  SECTION("Stein-Stein theta=2: Lambda'(1) = Lambda(1)") {
    const BvpProblem prob = ss_problem(0.0, 1.0, 0.0, 0.2, 0.0, 1.0);
    const BvpSolution sol = solve_branch(prob, 2.0, 1.5);
    const Vec grad = lambda_gradient(prob, sol, GradientMethod::cross_checked);
    CHECK(grad[0] == Catch::Approx(kP1Plus).epsilon(1e-7));
  }
}

TEST_CASE("implied volatility wing map", "[expansion]") {
  SECTION("B1 = 3, B2 = 0") {
    const auto [b1v, b2v] = implied_vol_wing(3.0, 0.0);
    CHECK(b1v == Catch::Approx(std::sqrt(2.0) * (std::sqrt(2.0) - 1.0)).margin(1e-12));
    CHECK(b2v == 0.0);
  }
  SECTION("beta2 linear in B2") {
    const auto [b1a, b2a] = implied_vol_wing(3.5, 1.0);
    const auto [b1b, b2b] = implied_vol_wing(3.5, 2.5);
    CHECK(b2b == Catch::Approx(2.5 * b2a).margin(1e-12));
    CHECK(b1a == b1b);
  }
  SECTION("moment-explosion regime rejected") {
    CHECK_THROWS_AS(implied_vol_wing(2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(implied_vol_wing(1.5, 0.0), std::domain_error);
  }
  SECTION("beta1 strictly decreasing in B1") {
    double last = 10.0;
    for (double b1 = 2.1; b1 < 8.0; b1 += 0.3) {
      const double v = implied_vol_wing(b1, 0.0).first;
      CHECK(v < last);
      last = v;
    }
  }
}

TEST_CASE("pipeline on the baseline Stein-Stein cell", "[expansion][pipeline]") {
  const BvpProblem prob = ss_problem(0.0, 1.0, 0.0, 0.2, 0.0, 1.0);
  const PipelineResult res = run_small_noise(prob);
  CHECK(res.expansion.c1 == Catch::Approx(kP1Plus).epsilon(1e-7));
  CHECK(res.expansion.c2 == Catch::Approx(kC2Sigma02).epsilon(1e-6));
  CHECK(res.selection.minimal_indices.size() == 2);
  CHECK(res.expansion.diagnostics.minimizer_count == 2);
  CHECK_FALSE(res.expansion.diagnostics.hypotheses_unverified);
  // the + branch wins the c2 maximization, no tie
  CHECK_FALSE(res.expansion.diagnostics.c2_tie);
  REQUIRE(res.expansion.y_hats.size() == 2);
}

TEST_CASE("tail expansion scaling checks", "[expansion][pipeline]") {
  SECTION("theta = 2 Stein-Stein") {
    SteinSteinParams p;
    p.sigma0 = 0.2;
    const ModelSpec m = stein_stein_model(p);
    const PipelineResult res = run_tail(m, 1.0, 2);
    REQUIRE(res.expansion.theta.has_value());
    CHECK(*res.expansion.theta == 2);
    CHECK(res.expansion.algebraic_exponent == Catch::Approx(-0.5));
    CHECK(res.expansion.c1 == Catch::Approx(kP1Plus).epsilon(1e-7));
  }
  SECTION("theta = 1 Black-Scholes") {
    const ModelSpec m = black_scholes_model(1.0, 0.0);
    const PipelineResult res = run_tail(m, 1.0, 1);
    CHECK(res.expansion.algebraic_exponent == Catch::Approx(0.0));
    CHECK(res.expansion.c1 == Catch::Approx(0.5).epsilon(1e-8));
  }
  SECTION("invalid theta rejected") {
    const ModelSpec m = black_scholes_model(1.0, 0.0);
    CHECK_THROWS_AS(run_tail(m, 1.0, 3), std::invalid_argument);
  }
}

TEST_CASE("short-time expansion", "[expansion][pipeline]") {
  SECTION("Black-Scholes distance |y - y0| / sigma") {
    const ModelSpec m = black_scholes_model(2.0, 0.0);
    const ShortTimeResult res = short_time_expansion(m, Vec::Ones(1));
    CHECK(res.distance_sq == Catch::Approx(0.25).epsilon(1e-8));  // (1/2)^2
    CHECK(res.algebraic_exponent == Catch::Approx(-0.5));
  }
  SECTION("flat elliptic 2d model: Euclidean point-to-line distance") {
    ModelSpec m;
    m.dim_state = 2;
    m.dim_noise = 2;
    m.dim_proj = 1;
    m.drift = [](const Vec&) { return Vec::Zero(2); };
    m.diffusion = [](const Vec&) { return Mat::Identity(2, 2); };
    m.correlation = Mat::Identity(2, 2);
    m.x0 = Vec::Zero(2);
    const ModelSpec built = make_model(std::move(m));
    const ShortTimeResult res = short_time_expansion(built, Vec::Constant(1, 1.5));
    CHECK(res.distance_sq == Catch::Approx(1.5 * 1.5).epsilon(1e-7));
    CHECK(res.algebraic_exponent == Catch::Approx(-0.5));
  }
}

TEST_CASE("assemble rejects an empty minimizer set", "[expansion]") {
  const BvpProblem prob = ss_problem(0.0, 1.0, 0.0, 0.2, 0.0, 1.0);
  CHECK_THROWS_AS(assemble_small_noise(prob, {}, {}, {}), std::domain_error);
}
