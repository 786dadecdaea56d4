#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hamexp/catalog.hpp"
#include "hamexp/nonfocal.hpp"

using namespace hamexp;

namespace {

BvpProblem ss_problem(double b, double c, double rho, double T) {
  SteinSteinParams p;
  p.b = b;
  p.c = c;
  p.rho = rho;
  p.sigma0 = 0.2;
  p.T = T;
  BvpProblem prob;
  prob.model = stein_stein_model(p);
  prob.target = Vec::Ones(1);
  prob.T = T;
  prob.x0 = Vec::Zero(2);
  return prob;
}

BvpSolution solve_branch(const BvpProblem& prob, double p_guess, double q_guess) {
  Vec guess(2);
  guess << p_guess, q_guess;
  ShootOutcome out = shoot(prob, guess);
  REQUIRE(out.status == ShootStatus::converged);
  return *out.solution;
}

}  // namespace

TEST_CASE("Black-Scholes focality scalar is sigma^2 T", "[nonfocal]") {
  BvpProblem prob;
  prob.model = black_scholes_model(1.0, 0.0);
  prob.target = Vec::Ones(1);
  prob.T = 1.0;
  prob.x0 = Vec::Zero(1);
  ShootOutcome out = shoot(prob, Vec::Constant(1, 0.5));
  REQUIRE(out.status == ShootStatus::converged);
  const FocalityReport rep = focality_jacobian(prob.model, *out.solution, prob.T);
  CHECK(std::abs(rep.determinant) == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(rep.is_nonfocal);
  CHECK(rep.method == "variational");
}

TEST_CASE("degenerate horizon rejected", "[nonfocal]") {
  BvpProblem prob;
  prob.model = black_scholes_model(1.0, 0.0);
  prob.target = Vec::Ones(1);
  prob.T = 1.0;
  prob.x0 = Vec::Zero(1);
  ShootOutcome out = shoot(prob, Vec::Constant(1, 0.5));
  REQUIRE(out.status == ShootStatus::converged);
  CHECK_THROWS_AS(focality_jacobian(prob.model, *out.solution, 0.0), std::domain_error);
}

TEST_CASE("Stein-Stein focality structure at the minimizer", "[nonfocal]") {
  const BvpProblem prob = ss_problem(0.0, 1.0, 0.0, 1.0);
  const BvpSolution sol = solve_branch(prob, 2.0, 1.5);
  const FocalityReport rep = focality_jacobian(prob.model, sol, prob.T);
  CHECK(rep.is_nonfocal);
  CHECK(rep.normalized_det > 1e-8);
  // dz0/dz (row: z-coordinate of the back-mapped position; col: z-dir)
  // vanishes by transversality
  const double scale = rep.jacobian.cwiseAbs().maxCoeff();
  CHECK(std::abs(rep.jacobian(1, 0)) < 1e-6 * (1.0 + scale));
}

TEST_CASE("analytic and finite-difference focality Jacobians agree", "[nonfocal]") {
  for (double rho : {0.0, -0.7}) {
    const BvpProblem prob = ss_problem(-0.5, 1.0, rho, 1.0);
    const BvpSolution sol = solve_branch(prob, 5.0, 0.5);
    const FocalityReport var = focality_jacobian(prob.model, sol, prob.T);
    FocalityOptions fd_opts;
    fd_opts.finite_difference = true;
    const FocalityReport fd = focality_jacobian(prob.model, sol, prob.T, fd_opts);
    CHECK(fd.method == "finite-difference");
    const double scale = var.jacobian.cwiseAbs().maxCoeff();
    CHECK((var.jacobian - fd.jacobian).cwiseAbs().maxCoeff() < 1e-4 * (1.0 + scale));
  }
}

TEST_CASE("verdict matches for both symmetric minimizers", "[nonfocal]") {
  const BvpProblem prob = ss_problem(-0.5, 1.0, -0.3, 1.0);
  const BvpSolution plus = solve_branch(prob, 4.0, 0.8);
  const BvpSolution minus = solve_branch(prob, 4.0, -0.8);
  const FocalityReport a = focality_jacobian(prob.model, plus, prob.T);
  const FocalityReport b = focality_jacobian(prob.model, minus, prob.T);
  CHECK(a.is_nonfocal);
  CHECK(b.is_nonfocal);
  CHECK(std::abs(std::abs(a.determinant) - std::abs(b.determinant)) <
        1e-8 * (1.0 + std::abs(a.determinant)));
}

TEST_CASE("sweep table serialization", "[nonfocal]") {
  SECTION("empty grid produces an empty table") {
    CHECK(sweep_to_csv({}).empty());
  }
  SECTION("cells with reports and errors") {
    SweepCell ok;
    ok.parameters = {{"b", -1.0}, {"c", 0.5}};
    FocalityReport rep;
    rep.determinant = -0.25;
    rep.normalized_det = 0.5;
    rep.is_nonfocal = true;
    ok.report = rep;
    SweepCell bad;
    bad.parameters = {{"b", -1.0}, {"c", 2.0}};
    bad.error = "integration failure";
    const std::string csv = sweep_to_csv({ok, bad});
    CHECK(csv.find("b,c,determinant,normalized_det,verdict") != std::string::npos);
    CHECK(csv.find("nonfocal") != std::string::npos);
    CHECK(csv.find("error:integration failure") != std::string::npos);
  }
}
