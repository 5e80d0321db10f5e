#pragma once

// Prompt budget: percentile threshold rho, candidate events per hour eta,
// wear hours per day omega, responses per day k and response rate alpha are
// bound by  rho * (eta * omega) = k / alpha,  0 < k / alpha <= eta * omega.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stressfreq/csv.hpp"
#include "stressfreq/errors.hpp"

namespace stressfreq {

enum class BudgetField { rho, eta, omega, k, alpha };

inline constexpr std::array<BudgetField, 5> kBudgetFields = {
    BudgetField::rho, BudgetField::eta, BudgetField::omega, BudgetField::k, BudgetField::alpha};

constexpr std::string_view field_name(BudgetField f) {
  switch (f) {
    case BudgetField::rho: return "rho";
    case BudgetField::eta: return "eta";
    case BudgetField::omega: return "omega";
    case BudgetField::k: return "k";
    case BudgetField::alpha: return "alpha";
  }
  return "?";
}

// Relative tolerance for the budget identity; absorbs decimal round-tripping.
inline constexpr double kBudgetIdentityTolerance = 1e-9;

struct PromptBudget {
  double rho = 1.0;
  double eta = 2.5;
  double omega = 12.0;
  double k = 30.0;
  double alpha = 1.0;

  double candidate_events() const { return eta * omega; }
  double daily_prompts() const { return k / alpha; }

  double get(BudgetField f) const {
    switch (f) {
      case BudgetField::rho: return rho;
      case BudgetField::eta: return eta;
      case BudgetField::omega: return omega;
      case BudgetField::k: return k;
      case BudgetField::alpha: return alpha;
    }
    return 0.0;
  }

  void set(BudgetField f, double v) {
    switch (f) {
      case BudgetField::rho: rho = v; break;
      case BudgetField::eta: eta = v; break;
      case BudgetField::omega: omega = v; break;
      case BudgetField::k: k = v; break;
      case BudgetField::alpha: alpha = v; break;
    }
  }
};

// Any subset of the five fields; solve() needs exactly four.
struct BudgetInputs {
  std::optional<double> rho, eta, omega, k, alpha;

  std::optional<double>& slot(BudgetField f) {
    switch (f) {
      case BudgetField::rho: return rho;
      case BudgetField::eta: return eta;
      case BudgetField::omega: return omega;
      case BudgetField::k: return k;
      case BudgetField::alpha: return alpha;
    }
    return rho;
  }
  const std::optional<double>& slot(BudgetField f) const {
    return const_cast<BudgetInputs*>(this)->slot(f);
  }

  static BudgetInputs hiding(const PromptBudget& b, BudgetField hidden) {
    BudgetInputs in;
    for (auto f : kBudgetFields)
      if (f != hidden) in.slot(f) = b.get(f);
    return in;
  }
};

struct BudgetReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline BudgetReport validate(const PromptBudget& b) {
  BudgetReport r;
  auto fmt = [](double v) { return csv::format_double(v); };
  for (auto f : kBudgetFields) {
    double v = b.get(f);
    if (!std::isfinite(v)) r.violations.push_back(std::string(field_name(f)) + " is not finite");
  }
  if (!r.ok()) return r;

  if (!(b.rho > 0.0 && b.rho <= 1.0)) r.violations.push_back("rho=" + fmt(b.rho) + " outside (0, 1]");
  if (!(b.alpha > 0.0 && b.alpha <= 1.0))
    r.violations.push_back("alpha=" + fmt(b.alpha) + " outside (0, 1]");
  if (!(b.eta > 0.0)) r.violations.push_back("eta=" + fmt(b.eta) + " must be > 0");
  if (!(b.omega > 0.0)) r.violations.push_back("omega=" + fmt(b.omega) + " must be > 0");
  if (!(b.k > 0.0)) r.violations.push_back("k=" + fmt(b.k) + " must be > 0");
  if (!r.ok()) return r;

  const double prompts = b.daily_prompts();
  const double candidates = b.candidate_events();
  if (prompts > candidates * (1.0 + kBudgetIdentityTolerance))
    r.violations.push_back("k/alpha=" + fmt(prompts) + " exceeds eta*omega=" + fmt(candidates));
  const double lhs = b.rho * candidates;
  if (std::abs(lhs - prompts) > kBudgetIdentityTolerance * std::max(std::abs(lhs), std::abs(prompts)))
    r.violations.push_back("identity mismatch: rho*eta*omega=" + fmt(lhs) + " but k/alpha=" + fmt(prompts));
  return r;
}

inline PromptBudget solve(const BudgetInputs& known, BudgetField unknown) {
  PromptBudget b;
  for (auto f : kBudgetFields) {
    if (f == unknown) continue;
    const auto& v = known.slot(f);
    if (!v) throw DegenerateInput("missing value for " + std::string(field_name(f)));
    if (!std::isfinite(*v) || *v <= 0.0)
      throw DegenerateInput(std::string(field_name(f)) + "=" + csv::format_double(*v) +
                            " must be positive and finite");
    b.set(f, *v);
  }
  if (unknown != BudgetField::rho && b.rho > 1.0)
    throw DegenerateInput("rho=" + csv::format_double(b.rho) + " exceeds 1");
  if (unknown != BudgetField::alpha && b.alpha > 1.0)
    throw DegenerateInput("alpha=" + csv::format_double(b.alpha) + " exceeds 1");

  switch (unknown) {
    case BudgetField::rho: b.rho = (b.k / b.alpha) / (b.eta * b.omega); break;
    case BudgetField::k: b.k = b.rho * b.alpha * b.eta * b.omega; break;
    case BudgetField::alpha: b.alpha = b.k / (b.rho * b.eta * b.omega); break;
    case BudgetField::eta: b.eta = (b.k / b.alpha) / (b.rho * b.omega); break;
    case BudgetField::omega: b.omega = (b.k / b.alpha) / (b.rho * b.eta); break;
  }

  // Rounding can push an exactly-saturated rho or alpha a few ulps above 1.
  if ((unknown == BudgetField::rho || unknown == BudgetField::alpha) && b.get(unknown) > 1.0 &&
      b.get(unknown) <= 1.0 + kBudgetIdentityTolerance)
    b.set(unknown, 1.0);
  const double solved = b.get(unknown);
  if (!std::isfinite(solved) || solved <= 0.0)
    throw InfeasibleBudget("solved " + std::string(field_name(unknown)) + " is not positive");
  if ((unknown == BudgetField::rho || unknown == BudgetField::alpha) && solved > 1.0) {
    if (unknown == BudgetField::rho)
      throw InfeasibleBudget("k/alpha=" + csv::format_double(b.daily_prompts()) +
                             " exceeds eta*omega=" + csv::format_double(b.candidate_events()) +
                             " (rho would be " + csv::format_double(solved) + ")");
    throw InfeasibleBudget("alpha would be " + csv::format_double(solved) + " > 1");
  }
  return b;
}

// Solves for whichever single field is missing.
inline PromptBudget solve(const BudgetInputs& known) {
  std::optional<BudgetField> missing;
  for (auto f : kBudgetFields) {
    if (known.slot(f)) continue;
    if (missing) throw DegenerateInput("exactly one of rho, eta, omega, k, alpha must be omitted");
    missing = f;
  }
  if (!missing) throw DegenerateInput("exactly one of rho, eta, omega, k, alpha must be omitted");
  return solve(known, *missing);
}

}  // namespace stressfreq
