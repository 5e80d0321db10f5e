#pragma once

// Asymptotic exponential model  y(k) = S (1 - exp(-a k)).  S is the saturation
// level (stressors per day as responses grow without bound) and a the rate at
// which reporting saturates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stressfreq/categories.hpp"
#include "stressfreq/errors.hpp"

namespace stressfreq {

struct CurvePoint {
  double k = 0.0;
  double y = 0.0;
};

enum class FitStatus { converged, iteration_cap, rate_at_boundary, all_zero };

inline std::string_view status_name(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::iteration_cap: return "iteration_cap";
    case FitStatus::rate_at_boundary: return "rate_at_boundary";
    case FitStatus::all_zero: return "all_zero";
  }
  return "?";
}

struct SaturationFit {
  CategoryKey category;
  double S = 0.0;
  double a = 0.0;
  double rmse = 0.0;
  std::size_t n_points = 0;
  bool converged = false;
  FitStatus status = FitStatus::iteration_cap;
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // on the log-parameter step, i.e. relative change
  // Fits with a below this (the curve is effectively a straight line) are
  // reported as unidentified rather than converged.
  double min_rate = 1e-6;
};

inline double model_value(double S, double a, double k) { return -S * std::expm1(-a * k); }

inline double evaluate(const SaturationFit& fit, double k) { return model_value(fit.S, fit.a, k); }

inline double squared_loss(std::span<const CurvePoint> pts, double S, double a) {
  double loss = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - model_value(S, a, p.k);
    loss += r * r;
  }
  return loss;
}

namespace detail {

inline void check_points(std::span<const CurvePoint> pts) {
  for (const auto& p : pts) {
    if (!std::isfinite(p.k) || !std::isfinite(p.y)) throw NonFiniteInput("curve point is not finite");
    if (p.k <= 0.0) throw DegenerateInput("curve point has k <= 0");
    if (p.y < 0.0) throw DegenerateInput("curve point has y < 0");
  }
  if (pts.size() < 3) throw InsufficientPoints("need at least 3 points, got " + std::to_string(pts.size()));
  const double k0 = pts.front().k;
  if (std::all_of(pts.begin(), pts.end(), [&](const CurvePoint& p) { return p.k == k0; }))
    throw InsufficientPoints("need at least 2 distinct k values");
}

// a0 from the secant slope over the two smallest distinct k: near the origin
// the curve rises with slope S a.
inline double initial_rate(std::span<const CurvePoint> pts, double S0) {
  std::map<double, std::pair<double, int>> by_k;
  for (const auto& p : pts) {
    auto& [sum, n] = by_k[p.k];
    sum += p.y;
    ++n;
  }
  auto it = by_k.begin();
  const double k1 = it->first, y1 = it->second.first / it->second.second;
  ++it;
  const double k2 = it->first, y2 = it->second.first / it->second.second;
  double a0 = (y2 - y1) / (k2 - k1) / S0;
  if (!(a0 > 0.0)) a0 = -std::log1p(-std::min(y1 / S0, 0.99)) / k1;
  if (!(a0 > 0.0)) a0 = 1.0 / k2;
  return std::clamp(a0, 1e-3, 10.0);
}

}  // namespace detail

// Least squares fit by damped Gauss-Newton on (log S, log a). The damping
// follows Levenberg-Marquardt: a step is accepted only if it lowers the loss.
inline SaturationFit fit_exponential(std::span<const CurvePoint> pts, const FitOptions& opt = {}) {
  detail::check_points(pts);

  SaturationFit fit;
  fit.n_points = pts.size();
  double y_max = 0.0;
  for (const auto& p : pts) y_max = std::max(y_max, p.y);
  if (y_max == 0.0) {
    fit.status = FitStatus::all_zero;
    return fit;
  }

  const double S0 = 1.05 * y_max;
  double ls = std::log(S0);
  double la = std::log(detail::initial_rate(pts, S0));
  double loss = squared_loss(pts, S0, std::exp(la));
  double lambda = 1e-3;
  bool done = false;
  int it = 0;

  for (; it < opt.max_iterations && !done; ++it) {
    const double S = std::exp(ls), a = std::exp(la);
    // J holds derivatives of the model (not the residual) in log space.
    double h11 = 0, h12 = 0, h22 = 0, g1 = 0, g2 = 0;
    for (const auto& p : pts) {
      const double decay = std::exp(-a * p.k);
      const double f = -std::expm1(-a * p.k);
      const double r = p.y - S * f;
      const double j1 = S * f;
      const double j2 = S * a * p.k * decay;
      h11 += j1 * j1;
      h12 += j1 * j2;
      h22 += j2 * j2;
      g1 += j1 * r;
      g2 += j2 * r;
    }

    bool accepted = false;
    while (!accepted) {
      const double a11 = h11 * (1.0 + lambda), a22 = h22 * (1.0 + lambda);
      const double det = a11 * a22 - h12 * h12;
      if (!(det > 0.0) || !std::isfinite(det)) {
        lambda *= 10.0;
        if (lambda > 1e16) break;
        continue;
      }
      const double d1 = (a22 * g1 - h12 * g2) / det;
      const double d2 = (a11 * g2 - h12 * g1) / det;
      const double next = squared_loss(pts, std::exp(ls + d1), std::exp(la + d2));
      if (std::isfinite(next) && next <= loss) {
        ls += d1;
        la += d2;
        const bool tiny = std::max(std::abs(d1), std::abs(d2)) < opt.step_tolerance;
        loss = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (tiny) done = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) break;
      }
    }
    // No loss-reducing step exists at any damping: a numerical minimum.
    if (!accepted) done = true;
  }

  fit.S = std::exp(ls);
  fit.a = std::exp(la);
  fit.iterations = it;
  fit.rmse = std::sqrt(loss / static_cast<double>(pts.size()));
  if (!done) fit.status = FitStatus::iteration_cap;
  else if (fit.a < opt.min_rate) fit.status = FitStatus::rate_at_boundary;
  else fit.status = FitStatus::converged;
  fit.converged = fit.status == FitStatus::converged;
  return fit;
}

inline SaturationFit fit_exponential(std::span<const CurvePoint> pts, CategoryKey category,
                                     const FitOptions& opt = {}) {
  auto fit = fit_exponential(pts, opt);
  fit.category = category;
  return fit;
}

struct WeeklyProjection {
  CategoryKey category;
  double weekly_model = 0.0;
  std::optional<double> weekly_observed;
};

inline constexpr double kDaysPerWeek = 7.0;

// The all-zero fit projects to zero; other unconverged fits are rejected.
inline WeeklyProjection weekly(const SaturationFit& fit) {
  if (!fit.converged && fit.status != FitStatus::all_zero)
    throw UnconvergedFit("fit for " + key_label(fit.category) + " did not converge (" +
                         std::string(status_name(fit.status)) + ")");
  return {fit.category, kDaysPerWeek * fit.S, std::nullopt};
}

inline constexpr double kDefaultWearHours = 7.2;
inline constexpr double kModelDayHours = 12.0;

// Scales an observed daily rate from `wear_hours` of coverage to a full
// modelled day, then to a week.
inline double extrapolate_observed(double per_day_observed, double wear_hours = kDefaultWearHours,
                                   double day_hours = kModelDayHours) {
  if (!(wear_hours > 0.0)) throw DegenerateInput("wear_hours must be positive");
  if (!(per_day_observed >= 0.0)) throw DegenerateInput("observed rate must be nonnegative");
  return per_day_observed * (day_hours / wear_hours) * kDaysPerWeek;
}

struct ReportRow {
  CategoryKey category;
  std::optional<SaturationFit> fit;
  std::optional<double> weekly_model;
  std::optional<double> weekly_observed;
  std::string note;  // error or status annotation; empty when the fit is clean
};

struct SaturationReport {
  std::vector<ReportRow> rows;

  const ReportRow* find(const CategoryKey& key) const {
    for (const auto& r : rows)
      if (r.category == key) return &r;
    return nullptr;
  }
};

namespace detail {

inline int pin_rank(const CategoryKey& key) {
  if (!key) return 2;
  if (*key == StressorCategory::other) return 1;
  return 0;
}

inline void sort_report(std::vector<ReportRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& x, const ReportRow& y) {
    const int px = pin_rank(x.category), py = pin_rank(y.category);
    if (px != py) return px < py;
    const bool fx = x.fit.has_value(), fy = y.fit.has_value();
    if (fx != fy) return fx;
    if (fx && x.fit->S != y.fit->S) return x.fit->S > y.fit->S;
    return x.category < y.category;
  });
}

}  // namespace detail

// Fits every category independently. Failures become row notes; they never
// abort the other rows. Rows are ordered by S descending with Other and the
// all-stressors row last.
inline SaturationReport fit_all_categories(const std::map<CategoryKey, std::vector<CurvePoint>>& by_category,
                                           const FitOptions& opt = {}) {
  SaturationReport report;
  for (const auto& [key, pts] : by_category) {
    ReportRow row{key, std::nullopt, std::nullopt, std::nullopt, {}};
    try {
      auto fit = fit_exponential(pts, key, opt);
      row.fit = fit;
      if (fit.status != FitStatus::converged) row.note = std::string(status_name(fit.status));
      try {
        row.weekly_model = weekly(fit).weekly_model;
      } catch (const UnconvergedFit&) {
      }
    } catch (const Error& e) {
      row.note = e.code() + ": " + e.what();
    }
    report.rows.push_back(std::move(row));
  }
  detail::sort_report(report.rows);
  return report;
}

// Fills weekly_observed from observed daily rates keyed by category.
inline void attach_observed(SaturationReport& report, const std::map<CategoryKey, double>& per_day,
                            double wear_hours = kDefaultWearHours) {
  for (auto& row : report.rows) {
    auto it = per_day.find(row.category);
    if (it != per_day.end()) row.weekly_observed = extrapolate_observed(it->second, wear_hours);
  }
}

}  // namespace stressfreq
