#include <catch_amalgamated.hpp>

#include <random>

#include "test_support.hpp"

using namespace stressfreq;
using Catch::Approx;

namespace {

BudgetInputs inputs(std::optional<double> rho, std::optional<double> eta, std::optional<double> omega,
                    std::optional<double> k, std::optional<double> alpha) {
  return BudgetInputs{rho, eta, omega, k, alpha};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("k equal to the candidate count needs rho = 1") {
  auto b = solve(inputs(std::nullopt, 2.5, 12, 30, 1.0));
  CHECK(b.rho == 1.0);
  CHECK(validate(b).ok());
}

TEST_CASE("k = 7.78 at 2.5 events/hour over 12 hours") {
  auto b = solve(inputs(std::nullopt, 2.5, 12, 7.78, 1.0));
  CHECK(b.rho == Approx(0.2593333333333333).epsilon(1e-12));
}

TEST_CASE("response rate raises the prompt count") {
  auto b = solve(inputs(std::nullopt, 2.5, 12, 6, 0.5));
  CHECK(b.rho == Approx(0.4).epsilon(1e-12));
  CHECK(b.daily_prompts() == Approx(12.0));
}

TEST_CASE("more prompts than candidate events is infeasible") {
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 2.5, 12, 31, 1.0)), InfeasibleBudget);
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 2.5, 12, 20, 0.5)), InfeasibleBudget);
  CHECK_THROWS_AS(solve(inputs(0.5, 2.5, 12, 20, std::nullopt)), InfeasibleBudget);
}

TEST_CASE("solving for each field") {
  CHECK(solve(inputs(0.5, 2.5, 12, std::nullopt, 0.8)).k == Approx(12.0));
  CHECK(solve(inputs(0.5, std::nullopt, 12, 12, 0.8)).eta == Approx(2.5));
  CHECK(solve(inputs(0.5, 2.5, std::nullopt, 12, 0.8)).omega == Approx(12.0));
  CHECK(solve(inputs(0.5, 2.5, 12, 12, std::nullopt)).alpha == Approx(0.8));
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 0.0, 12, 5, 1)), DegenerateInput);
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 2.5, -1, 5, 1)), DegenerateInput);
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 2.5, 12, 5, 1.5)), DegenerateInput);
  CHECK_THROWS_AS(solve(inputs(std::nullopt, std::nullopt, 12, 5, 1)), DegenerateInput);
  CHECK_THROWS_AS(solve(inputs(1, 2.5, 12, 30, 1)), DegenerateInput);
  CHECK_THROWS_AS(solve(inputs(std::nullopt, 2.5, 12, std::nan(""), 1)), DegenerateInput);
}

TEST_CASE("validate flags bad tuples") {
  CHECK(validate(PromptBudget{}).ok());
  CHECK(validate(PromptBudget{0.5, 2.5, 12, 15, 1}).ok());
  CHECK(!validate(PromptBudget{0.5, 2.5, 12, 16, 1}).ok());  // identity broken
  CHECK(!validate(PromptBudget{1.2, 2.5, 12, 36, 1}).ok());
  CHECK(!validate(PromptBudget{1, 2.5, 12, 30, 0}).ok());
  CHECK(!validate(PromptBudget{1, 2.5, 12, std::numeric_limits<double>::infinity(), 1}).ok());
}

TEST_CASE("property: hiding any field and re-solving reproduces it") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.01, 1.0), eta(0.1, 10.0), omega(1.0, 24.0);
  for (int i = 0; i < 2000; ++i) {
    PromptBudget b;
    b.rho = unit(rng);
    b.alpha = unit(rng);
    b.eta = eta(rng);
    b.omega = omega(rng);
    b.k = b.rho * b.alpha * b.eta * b.omega;
    if (i % 50 == 0) {
      b.rho = 1.0;
      b.k = b.alpha * b.eta * b.omega;
    }
    REQUIRE(validate(b).ok());
    for (auto f : kBudgetFields) {
      auto back = solve(BudgetInputs::hiding(b, f), f);
      CHECK(rel(back.get(f), b.get(f)) <= 1e-12);
    }
  }
}

TEST_CASE("property: rho grows with k and falls with eta and omega") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double eta = 1 + 4 * u(rng), omega = 6 + 10 * u(rng), alpha = u(rng);
    const double k = 0.5 * alpha * eta * omega * u(rng);
    const double base = solve(inputs(std::nullopt, eta, omega, k, alpha)).rho;
    CHECK(solve(inputs(std::nullopt, eta, omega, k * 1.1, alpha)).rho > base);
    CHECK(solve(inputs(std::nullopt, eta * 1.1, omega, k, alpha)).rho < base);
    CHECK(solve(inputs(std::nullopt, eta, omega * 1.1, k, alpha)).rho < base);
    CHECK(solve(inputs(std::nullopt, eta, omega, k, alpha * 0.9)).rho > base);
  }
}
