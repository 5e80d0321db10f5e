#pragma once

// Synthetic cohorts with known ground truth, and the closed-form expectations
// the simulation pipeline is validated against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stressfreq/budget.hpp"
#include "stressfreq/categories.hpp"
#include "stressfreq/errors.hpp"
#include "stressfreq/estimator.hpp"
#include "stressfreq/events.hpp"
#include "stressfreq/simulator.hpp"

namespace stressfreq {

using CategoryMixture = std::array<double, kCategoryCount>;

struct SynthSpec {
  int n_participants = 68;
  int events_per_participant = 1000;
  std::array<double, kBucketCount> bucket_stressor_probs{};
  // One row shared by all buckets, or one row per bucket.
  std::vector<CategoryMixture> category_mixture;
  std::uint64_t seed = 0;
  double window_start = kDefaultWindowStart;
  double window_end = kDefaultWindowEnd;

  const CategoryMixture& mixture_for(int bucket) const {
    return category_mixture.size() == 1 ? category_mixture.front() : category_mixture[bucket];
  }
};

// Saturation levels per category used as the default category shares.
inline constexpr CategoryMixture kReferenceCategoryWeights = {
    1.76, 0.59, 0.55, 0.42, 0.40, 0.39, 0.22, 0.20, 0.12, 0.07, 0.03, 0.79};

inline std::array<double, kBucketCount> linear_bucket_probs(double lo = 0.05, double hi = 0.95) {
  std::array<double, kBucketCount> p{};
  for (int j = 0; j < kBucketCount; ++j) p[j] = lo + (hi - lo) * j / (kBucketCount - 1.0);
  return p;
}

inline CategoryMixture normalized(CategoryMixture w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

inline CategoryMixture single_category(StressorCategory c) {
  CategoryMixture m{};
  m[index_of(c)] = 1.0;
  return m;
}

inline SynthSpec default_synth_spec(std::uint64_t seed = 0) {
  SynthSpec s;
  s.bucket_stressor_probs = linear_bucket_probs();
  s.category_mixture = {normalized(kReferenceCategoryWeights)};
  s.seed = seed;
  return s;
}

inline void validate(const SynthSpec& s) {
  if (s.n_participants < 1) throw InvalidSpec("n_participants must be >= 1");
  if (s.events_per_participant < kBucketCount)
    throw InvalidSpec("events_per_participant must be >= 20 so every bucket is populated");
  for (int j = 0; j < kBucketCount; ++j) {
    const double p = s.bucket_stressor_probs[j];
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidSpec("bucket_stressor_probs[" + std::to_string(j) + "] outside [0, 1]");
  }
  if (s.category_mixture.size() != 1 && s.category_mixture.size() != kBucketCount)
    throw InvalidSpec("category_mixture needs 1 or 20 rows");
  for (std::size_t r = 0; r < s.category_mixture.size(); ++r) {
    double total = 0.0;
    for (double w : s.category_mixture[r]) {
      if (!(w >= 0.0 && w <= 1.0)) throw InvalidSpec("category_mixture weights must lie in [0, 1]");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InvalidSpec("category_mixture row " + std::to_string(r) + " sums to " +
                        csv::format_double(total) + ", not 1");
  }
  if (!(s.window_start >= 0.0 && s.window_start < s.window_end && s.window_end <= kMinutesPerDay))
    throw InvalidSpec("window must satisfy 0 <= start < end <= 1440");
}

inline std::string participant_label(int index, int count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
  std::string digits = std::to_string(index + 1);
  return "P" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

// Every participant gets events_per_participant distinct-likelihood events;
// the event of rank r lands in bucket ceil(20 r / n) - 1 under bucketize.
// Output is sorted by participant, then time of day.
inline std::vector<RatedEvent> generate(const SynthSpec& spec) {
  validate(spec);
  constexpr std::uint64_t kSynthTag = 0x53594E5448ull;
  const auto n = static_cast<std::size_t>(spec.events_per_participant);

  std::vector<std::discrete_distribution<int>> pick_category;
  for (const auto& row : spec.category_mixture) pick_category.emplace_back(row.begin(), row.end());

  std::vector<RatedEvent> out;
  out.reserve(n * static_cast<std::size_t>(spec.n_participants));
  for (int i = 0; i < spec.n_participants; ++i) {
    const auto pid = participant_label(i, spec.n_participants);
    CellRng rng(cell_seed(spec.seed, participant_hash(pid), 0, kSynthTag));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(0.1, 0.9);
    // Person-specific likelihood scale, so raw scores differ across people.
    const double offset = unit(rng);
    const double scale = 0.5 + 1.5 * unit(rng);

    std::vector<std::size_t> slots(n);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);

    std::vector<RatedEvent> mine;
    mine.reserve(n);
    for (std::size_t r = 1; r <= n; ++r) {
      const int bucket = bucket_for_rank(2 * r, n);
      RatedEvent e;
      e.participant_id = pid;
      e.likelihood = offset + scale * (static_cast<double>(r - 1) + jitter(rng)) / static_cast<double>(n);
      e.time_of_day = spec.window_start + (spec.window_end - spec.window_start) *
                                              (static_cast<double>(slots[r - 1]) + jitter(rng)) /
                                              static_cast<double>(n);
      e.responded = true;
      std::bernoulli_distribution stressor(spec.bucket_stressor_probs[bucket]);
      if (stressor(rng)) {
        auto& dist = pick_category[spec.category_mixture.size() == 1 ? 0 : bucket];
        e.category = static_cast<StressorCategory>(dist(rng));
      }
      mine.push_back(std::move(e));
    }
    std::sort(mine.begin(), mine.end(),
              [](const RatedEvent& a, const RatedEvent& b) { return a.time_of_day < b.time_of_day; });
    for (auto& e : mine) out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spec files

inline nlohmann::json to_json(const SynthSpec& s) {
  auto mixture = nlohmann::json::array();
  for (const auto& row : s.category_mixture) {
    nlohmann::json obj = nlohmann::json::object();
    for (auto c : all_categories()) obj[std::string(label(c))] = row[index_of(c)];
    mixture.push_back(obj);
  }
  return {{"n_participants", s.n_participants},
          {"events_per_participant", s.events_per_participant},
          {"bucket_stressor_probs", s.bucket_stressor_probs},
          {"category_mixture", mixture},
          {"seed", s.seed},
          {"window_start_min", s.window_start},
          {"window_end_min", s.window_end}};
}

// Missing fields keep their defaults. category_mixture may be a single object
// (shared by all buckets) or an array of 1 or 20 objects keyed by label.
inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s = default_synth_spec();
  try {
    if (j.contains("n_participants")) s.n_participants = j.at("n_participants").get<int>();
    if (j.contains("events_per_participant"))
      s.events_per_participant = j.at("events_per_participant").get<int>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("window_start_min")) s.window_start = j.at("window_start_min").get<double>();
    if (j.contains("window_end_min")) s.window_end = j.at("window_end_min").get<double>();
    if (j.contains("bucket_stressor_probs")) {
      auto probs = j.at("bucket_stressor_probs").get<std::vector<double>>();
      if (probs.size() != kBucketCount) throw InvalidSpec("bucket_stressor_probs needs 20 entries");
      std::copy(probs.begin(), probs.end(), s.bucket_stressor_probs.begin());
    }
    if (j.contains("category_mixture")) {
      auto rows = j.at("category_mixture");
      if (rows.is_object()) rows = nlohmann::json::array({rows});
      s.category_mixture.clear();
      for (const auto& obj : rows) {
        CategoryMixture m{};
        for (const auto& [name, weight] : obj.items()) {
          auto c = parse_category(name);
          if (!c) throw InvalidSpec("unknown category '" + name + "' in category_mixture");
          m[index_of(*c)] = weight.get<double>();
        }
        s.category_mixture.push_back(m);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("malformed synth spec: ") + e.what());
  }
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Grid oracle for the exponential model, independent of the Gauss-Newton path.

struct GridOptions {
  double a_lo = 1e-4;
  double a_hi = 20.0;
  std::size_t steps = 4000;
  bool log_spacing = true;
  double S_lo = 0.0;
  double S_hi = std::numeric_limits<double>::infinity();
  int refine_iterations = 200;
};

struct GridFit {
  double S = 0.0;
  double a = 0.0;
  double loss = 0.0;
  bool at_boundary = false;
};

namespace detail {

// Best S for fixed a (the loss is quadratic in S), clamped to the box.
inline double profile_S(std::span<const CurvePoint> pts, double a, double lo, double hi) {
  double num = 0.0, den = 0.0;
  for (const auto& p : pts) {
    const double f = -std::expm1(-a * p.k);
    num += p.y * f;
    den += f * f;
  }
  return std::clamp(den > 0.0 ? num / den : 0.0, lo, hi);
}

}  // namespace detail

// Exhaustive scan over a, with S profiled exactly at each node, then
// golden-section refinement between the neighbours of the best node.
inline GridFit grid_fit(std::span<const CurvePoint> pts, const GridOptions& opt = {}) {
  auto node = [&](std::size_t i) {
    const double t = static_cast<double>(i) / static_cast<double>(opt.steps);
    return opt.log_spacing ? opt.a_lo * std::pow(opt.a_hi / opt.a_lo, t)
                           : opt.a_lo + (opt.a_hi - opt.a_lo) * t;
  };
  auto loss_at = [&](double a) {
    return squared_loss(pts, detail::profile_S(pts, a, opt.S_lo, opt.S_hi), a);
  };

  std::size_t best = 0;
  double best_loss = loss_at(node(0));
  for (std::size_t i = 1; i <= opt.steps; ++i) {
    const double l = loss_at(node(i));
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }

  double lo = node(best == 0 ? 0 : best - 1);
  double hi = node(std::min(best + 1, opt.steps));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = loss_at(x1), f2 = loss_at(x2);
  for (int it = 0; it < opt.refine_iterations && hi - lo > 1e-15 * hi; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = loss_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = loss_at(x2);
    }
  }
  GridFit out;
  out.a = 0.5 * (lo + hi);
  out.S = detail::profile_S(pts, out.a, opt.S_lo, opt.S_hi);
  out.loss = squared_loss(pts, out.S, out.a);
  if (best_loss < out.loss) {
    out.a = node(best);
    out.S = detail::profile_S(pts, out.a, opt.S_lo, opt.S_hi);
    out.loss = best_loss;
  }
  out.at_boundary = best == 0 || best == opt.steps;
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form expectations

// Share of bucket j's percentile range (5j, 5j + 5] lying above the cutoff.
inline double admitted_fraction(int bucket, double cutoff) {
  const double lo = 5.0 * bucket, hi = lo + 5.0;
  return std::clamp((hi - std::max(cutoff, lo)) / 5.0, 0.0, 1.0);
}

struct OracleCurve {
  std::vector<double> ks;
  std::vector<double> efficiency;  // expected base efficiency per k
  std::vector<CurvePoint> overall;
  std::array<std::vector<CurvePoint>, kCategoryCount> by_category;
  GridFit overall_fit;
  std::array<GridFit, kCategoryCount> category_fits;
};

inline std::vector<double> oracle_rhos(const SimulationConfig& config, std::span<const double> ks) {
  std::vector<double> rhos;
  for (double k : ks) {
    try {
      rhos.push_back(
          solve(BudgetInputs{std::nullopt, config.eta, config.omega, k, config.alpha}, BudgetField::rho).rho);
    } catch (const InfeasibleBudget& e) {
      throw InfeasibleK("k=" + csv::format_double(k) + ": " + e.what());
    }
  }
  return rhos;
}

// Expected stressors/day at each k for a cohort generated from `spec`, with
// the boundary bucket admitted in proportion to its percentile mass above the
// cutoff; (S_true, a_true) come from grid_fit over those points.
inline OracleCurve oracle_curve(const SynthSpec& spec, const SimulationConfig& config,
                                const std::optional<FatigueModel>& fatigue) {
  validate(spec);
  OracleCurve out;
  out.ks = config.resolved_k_values();
  const auto rhos = oracle_rhos(config, out.ks);
  for (std::size_t i = 0; i < out.ks.size(); ++i) {
    const double k = out.ks[i];
    const double cutoff = percentile_cutoff(rhos[i]);
    double weight = 0.0, eff = 0.0;
    CategoryMixture cat{};
    for (int j = 0; j < kBucketCount; ++j) {
      const double w = admitted_fraction(j, cutoff);
      const double p = spec.bucket_stressor_probs[j];
      weight += w;
      eff += w * p;
      const auto& mix = spec.mixture_for(j);
      for (std::size_t c = 0; c < kCategoryCount; ++c) cat[c] += w * p * mix[c];
    }
    eff /= weight;
    const double scale = fatigue ? fatigue_scale(k, *fatigue) : 1.0;
    out.efficiency.push_back(eff);
    out.overall.push_back({k, k * eff * scale});
    for (std::size_t c = 0; c < kCategoryCount; ++c)
      out.by_category[c].push_back({k, k * (cat[c] / weight) * scale});
  }
  out.overall_fit = grid_fit(out.overall);
  for (std::size_t c = 0; c < kCategoryCount; ++c) out.category_fits[c] = grid_fit(out.by_category[c]);
  return out;
}

struct ExpectedCurve {
  std::vector<double> ks;
  std::vector<CurvePoint> overall;
  std::array<std::vector<CurvePoint>, kCategoryCount> by_category;
};

// Exact expectation of the debiased simulation over a concrete cohort: each
// event is drawn with probability 1/(20 * |bucket|); efficiencies are
// expectations over prompted draws, averaged across participants.
inline ExpectedCurve expected_curve(std::span<const ParticipantBuckets> cohort, const SimulationConfig& config) {
  if (cohort.empty()) throw EmptyCohort();
  ExpectedCurve out;
  out.ks = config.resolved_k_values();
  const auto rhos = oracle_rhos(config, out.ks);
  for (std::size_t i = 0; i < out.ks.size(); ++i) {
    const double k = out.ks[i];
    const double cutoff = percentile_cutoff(rhos[i]) + config.threshold_epsilon;
    double eff_sum = 0.0;
    CategoryMixture cat_sum{};
    std::size_t contributing = 0;
    for (const auto& p : cohort) {
      double mass = 0.0, hit = 0.0;
      CategoryMixture cat{};
      for (const auto& bucket : p.buckets) {
        const double w = 1.0 / static_cast<double>(bucket.size());
        for (const auto& e : bucket) {
          if (!(e.percentile > cutoff)) continue;
          mass += w;
          if (e.event.category) {
            hit += w;
            cat[index_of(*e.event.category)] += w;
          }
        }
      }
      if (mass == 0.0) continue;
      ++contributing;
      eff_sum += hit / mass;
      for (std::size_t c = 0; c < kCategoryCount; ++c) cat_sum[c] += cat[c] / mass;
    }
    const double scale = config.fatigue ? fatigue_scale(k, *config.fatigue) : 1.0;
    const double n = static_cast<double>(std::max<std::size_t>(contributing, 1));
    out.overall.push_back({k, k * (eff_sum / n) * scale});
    for (std::size_t c = 0; c < kCategoryCount; ++c)
      out.by_category[c].push_back({k, k * (cat_sum[c] / n) * scale});
  }
  return out;
}

}  // namespace stressfreq
