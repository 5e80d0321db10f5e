#pragma once

// Monte Carlo simulation of typical days. Each simulated candidate event is
// drawn by picking one of the 20 likelihood buckets uniformly and then an
// event uniformly within it (with replacement). Under the debiased policy an
// event is prompted when its person-specific percentile lies above
// 100 * (1 - rho), rho being the threshold implied by the prompt budget for
// the requested k. Every (participant, day, k) cell owns an independent RNG
// stream, so results do not depend on thread count or scheduling.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "stressfreq/budget.hpp"
#include "stressfreq/categories.hpp"
#include "stressfreq/csv.hpp"
#include "stressfreq/errors.hpp"
#include "stressfreq/events.hpp"

namespace stressfreq {

// Population fixed effects of the response-efficiency mixed model.
struct FatigueModel {
  double b = 0.353;
  double m = -0.007;
  double k_ref = 3.89;
};

// (b + m k) / (b + m k_ref); exactly 1 at k_ref.
inline double fatigue_scale(double k, const FatigueModel& model = {}) {
  const double at_k = model.b + model.m * k;
  const double at_ref = model.b + model.m * model.k_ref;
  if (!(at_ref > 0.0))
    throw FatigueOutOfDomain("fatigue predictor is nonpositive at k_ref=" + csv::format_double(model.k_ref));
  if (!(at_k > 0.0))
    throw FatigueOutOfDomain("fatigue predictor b + m*k = " + csv::format_double(at_k) +
                             " is nonpositive at k=" + csv::format_double(k));
  if (k == model.k_ref) return 1.0;
  return at_k / at_ref;
}

enum class Policy { debiased, moods_baseline };

inline std::string_view policy_name(Policy p) {
  return p == Policy::debiased ? "debiased" : "moods-baseline";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "debiased") return Policy::debiased;
  if (s == "moods-baseline") return Policy::moods_baseline;
  return std::nullopt;
}

struct SimulationConfig {
  int days_per_participant = 1000;
  int events_per_day = 0;          // 0 derives round(eta * omega)
  std::vector<double> k_values;    // empty derives 1..min(36, floor(alpha * eta * omega))
  double omega = 12.0;
  double eta = 2.5;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  Policy policy = Policy::debiased;
  std::optional<FatigueModel> fatigue = FatigueModel{};  // nullopt disables scaling
  // Percentiles within this distance of the cutoff count as ties and are not prompted.
  double threshold_epsilon = 1e-9;
  unsigned threads = 1;

  int resolved_events_per_day() const {
    return events_per_day > 0 ? events_per_day : static_cast<int>(std::lround(eta * omega));
  }

  std::vector<double> resolved_k_values() const {
    if (!k_values.empty()) return k_values;
    const int top = std::min(36, static_cast<int>(std::floor(alpha * eta * omega + 1e-9)));
    std::vector<double> ks;
    for (int k = 1; k <= top; ++k) ks.push_back(k);
    return ks;
  }
};

inline void validate_config(const SimulationConfig& c) {
  if (c.days_per_participant <= 0) throw InvalidConfig("days_per_participant must be positive");
  if (!(c.eta > 0.0) || !(c.omega > 0.0)) throw InvalidConfig("eta and omega must be positive");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw InvalidConfig("alpha must lie in (0, 1]");
  const long expected = std::lround(c.eta * c.omega);
  if (expected <= 0) throw InvalidConfig("eta * omega rounds to zero events per day");
  if (c.events_per_day != 0 && c.events_per_day != expected)
    throw InvalidConfig("events_per_day=" + std::to_string(c.events_per_day) +
                        " must equal round(eta * omega)=" + std::to_string(expected));
  if (!(c.threshold_epsilon >= 0.0)) throw InvalidConfig("threshold_epsilon must be >= 0");
}

// Percentile cutoff for prompting; events strictly above it are delivered.
inline double percentile_cutoff(double rho) { return 100.0 * (1.0 - rho); }

struct Tally {
  std::uint64_t delivered = 0;
  std::uint64_t answered = 0;
  std::array<std::uint64_t, kCategoryCount> stressors{};

  std::uint64_t stressor_total() const {
    std::uint64_t s = 0;
    for (auto v : stressors) s += v;
    return s;
  }
};

struct ParticipantPoint {
  std::string participant_id;
  double k = 0.0;
  Tally tally;
  double base_efficiency = 0.0;
  std::array<double, kCategoryCount> category_efficiency{};
};

struct EfficiencyPoint {
  double k = 0.0;
  double rho = 0.0;  // 0 for the baseline policy, which has no threshold
  double prompts_delivered_per_day = 0.0;
  double responses_per_day = 0.0;
  double base_efficiency = 0.0;
  std::array<double, kCategoryCount> category_efficiency{};
  double fatigue_scale = 1.0;
  double stressors_per_day = 0.0;
  std::array<double, kCategoryCount> category_stressors_per_day{};
  std::size_t contributing_participants = 0;  // participants with at least one response

  friend bool operator==(const EfficiencyPoint&, const EfficiencyPoint&) = default;
};

struct SimulationResult {
  std::vector<EfficiencyPoint> points;
  std::vector<ParticipantPoint> per_participant;  // grouped by point, then cohort order
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

struct CompactEvent {
  double percentile;
  int category;  // -1 when no stressor was reported
};

struct CompactParticipant {
  std::string id;
  std::uint64_t id_hash;
  std::array<std::vector<CompactEvent>, kBucketCount> buckets;
};

inline std::vector<CompactParticipant> compact(std::span<const ParticipantBuckets> cohort) {
  std::vector<CompactParticipant> out;
  out.reserve(cohort.size());
  for (const auto& p : cohort) {
    if (auto empty = p.empty_buckets(); !empty.empty()) throw EmptyBucket(p.participant_id, empty);
    CompactParticipant c{p.participant_id, fnv1a(p.participant_id), {}};
    for (int j = 0; j < kBucketCount; ++j)
      for (const auto& e : p.buckets[j])
        c.buckets[j].push_back(
            {e.percentile, e.event.category ? static_cast<int>(index_of(*e.event.category)) : -1});
    out.push_back(std::move(c));
  }
  return out;
}

// Runs fn(participant_index) for every participant over `threads` workers.
template <class Fn>
void for_each_participant(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([=, &fn] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline void credit(Tally& t, const CompactEvent& e) {
  ++t.answered;
  if (e.category >= 0) ++t.stressors[static_cast<std::size_t>(e.category)];
}

}  // namespace detail

// Seed for one simulation cell; stable across platforms and schedules.
inline std::uint64_t cell_seed(std::uint64_t master, std::uint64_t participant_hash,
                               std::uint64_t day, std::uint64_t tag) {
  std::uint64_t h = detail::splitmix64(master);
  h = detail::splitmix64(h ^ participant_hash);
  h = detail::splitmix64(h ^ day);
  return detail::splitmix64(h ^ tag);
}

inline std::uint64_t participant_hash(std::string_view id) { return detail::fnv1a(id); }

// SplitMix64 as a UniformRandomBitGenerator. Seeding is free, which matters
// with one stream per (participant, day, k) cell.
class CellRng {
 public:
  using result_type = std::uint64_t;

  explicit CellRng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Uniform bucket, then uniform event within it. Returns {bucket, index}.
template <class Rng>
std::pair<int, std::size_t> draw_debiased(const std::array<std::size_t, kBucketCount>& sizes, Rng& rng) {
  std::uniform_int_distribution<int> pick_bucket(0, kBucketCount - 1);
  const int b = pick_bucket(rng);
  std::uniform_int_distribution<std::size_t> pick_event(0, sizes[b] - 1);
  return {b, pick_event(rng)};
}

// Daily selection of the original study: one event at or below the 25th
// percentile, two in (25, 75], three in (75, 95] and every event above the
// 95th. Strata holding fewer events than their quota contribute all of them.
// Returns indices into `percentiles`.
template <class Rng>
std::vector<std::size_t> select_moods_quota(std::span<const double> percentiles, Rng& rng) {
  std::array<std::vector<std::size_t>, 4> strata;
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    const double p = percentiles[i];
    const int s = p <= 25.0 ? 0 : p <= 75.0 ? 1 : p <= 95.0 ? 2 : 3;
    strata[s].push_back(i);
  }
  constexpr std::array<std::size_t, 3> quota = {1, 2, 3};
  std::vector<std::size_t> out;
  for (int s = 0; s < 3; ++s) {
    auto& pool = strata[s];
    const std::size_t take = std::min(quota[s], pool.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(pool[i]);
    }
  }
  out.insert(out.end(), strata[3].begin(), strata[3].end());
  return out;
}

namespace detail {

inline ParticipantPoint participant_point(const CompactParticipant& p, double k, const Tally& t) {
  ParticipantPoint pp{p.id, k, t, 0.0, {}};
  if (t.answered > 0) {
    const double n = static_cast<double>(t.answered);
    for (std::size_t c = 0; c < kCategoryCount; ++c) pp.category_efficiency[c] = t.stressors[c] / n;
    pp.base_efficiency = static_cast<double>(t.stressor_total()) / n;
  }
  return pp;
}

// Cohort mean over participants; efficiencies average only over participants
// that answered at least one prompt.
inline EfficiencyPoint aggregate(std::span<const ParticipantPoint> parts, double k, double rho,
                                 int days, double scale) {
  EfficiencyPoint pt;
  pt.k = k;
  pt.rho = rho;
  pt.fatigue_scale = scale;
  double delivered = 0.0, answered = 0.0, eff = 0.0;
  std::array<double, kCategoryCount> cat{};
  for (const auto& pp : parts) {
    delivered += static_cast<double>(pp.tally.delivered);
    answered += static_cast<double>(pp.tally.answered);
    if (pp.tally.answered == 0) continue;
    ++pt.contributing_participants;
    eff += pp.base_efficiency;
    for (std::size_t c = 0; c < kCategoryCount; ++c) cat[c] += pp.category_efficiency[c];
  }
  const double cells = static_cast<double>(parts.size()) * days;
  pt.prompts_delivered_per_day = delivered / cells;
  pt.responses_per_day = answered / cells;
  if (pt.contributing_participants > 0) {
    const double n = static_cast<double>(pt.contributing_participants);
    pt.base_efficiency = eff / n;
    for (std::size_t c = 0; c < kCategoryCount; ++c) pt.category_efficiency[c] = cat[c] / n;
  }
  return pt;
}

inline void apply_scale(EfficiencyPoint& pt, double k) {
  pt.stressors_per_day = k * pt.base_efficiency * pt.fatigue_scale;
  for (std::size_t c = 0; c < kCategoryCount; ++c)
    pt.category_stressors_per_day[c] = k * pt.category_efficiency[c] * pt.fatigue_scale;
}

}  // namespace detail

inline SimulationResult simulate_moods_baseline(std::span<const ParticipantBuckets> cohort,
                                                const SimulationConfig& config) {
  validate_config(config);
  if (cohort.empty()) throw EmptyCohort();
  const auto parts = detail::compact(cohort);
  const int per_day = config.resolved_events_per_day();
  const int days = config.days_per_participant;
  constexpr std::uint64_t kBaselineTag = 0x4D4F4F4453ull;

  std::vector<Tally> tallies(parts.size());
  detail::for_each_participant(parts.size(), config.threads, [&](std::size_t i) {
    const auto& p = parts[i];
    std::array<std::size_t, kBucketCount> sizes{};
    for (int j = 0; j < kBucketCount; ++j) sizes[j] = p.buckets[j].size();
    Tally t;
    std::vector<const detail::CompactEvent*> day_events(per_day);
    std::vector<double> pct(per_day);
    std::bernoulli_distribution answers(config.alpha);
    for (int d = 0; d < days; ++d) {
      CellRng rng(cell_seed(config.seed, p.id_hash, static_cast<std::uint64_t>(d), kBaselineTag));
      for (int e = 0; e < per_day; ++e) {
        auto [b, idx] = draw_debiased(sizes, rng);
        day_events[e] = &p.buckets[b][idx];
        pct[e] = day_events[e]->percentile;
      }
      for (std::size_t sel : select_moods_quota(std::span<const double>(pct), rng)) {
        ++t.delivered;
        if (config.alpha < 1.0 && !answers(rng)) continue;
        detail::credit(t, *day_events[sel]);
      }
    }
    tallies[i] = t;
  });

  SimulationResult out;
  double answered = 0.0;
  for (const auto& t : tallies) answered += static_cast<double>(t.answered);
  const double k = answered / (static_cast<double>(parts.size()) * days);
  for (std::size_t i = 0; i < parts.size(); ++i)
    out.per_participant.push_back(detail::participant_point(parts[i], k, tallies[i]));
  const double scale = config.fatigue ? fatigue_scale(k, *config.fatigue) : 1.0;
  auto pt = detail::aggregate(out.per_participant, k, 0.0, days, scale);
  detail::apply_scale(pt, k);
  out.points.push_back(pt);
  return out;
}

inline SimulationResult simulate(std::span<const ParticipantBuckets> cohort, const SimulationConfig& config) {
  if (config.policy == Policy::moods_baseline) return simulate_moods_baseline(cohort, config);
  validate_config(config);
  if (cohort.empty()) throw EmptyCohort();

  const auto ks = config.resolved_k_values();
  if (ks.empty()) throw InvalidConfig("no response frequencies to evaluate");
  std::vector<double> rhos, scales;
  for (double k : ks) {
    if (!std::isfinite(k) || k <= 0.0) throw InfeasibleK("k=" + csv::format_double(k) + " must be positive");
    PromptBudget b;
    try {
      b = solve(BudgetInputs{std::nullopt, config.eta, config.omega, k, config.alpha}, BudgetField::rho);
    } catch (const InfeasibleBudget& e) {
      throw InfeasibleK("k=" + csv::format_double(k) + ": " + e.what());
    }
    rhos.push_back(b.rho);
    scales.push_back(config.fatigue ? fatigue_scale(k, *config.fatigue) : 1.0);
  }

  const auto parts = detail::compact(cohort);
  const int per_day = config.resolved_events_per_day();
  const int days = config.days_per_participant;
  const std::size_t nk = ks.size();

  std::vector<Tally> tallies(nk * parts.size());
  detail::for_each_participant(parts.size(), config.threads, [&](std::size_t i) {
    const auto& p = parts[i];
    std::array<std::size_t, kBucketCount> sizes{};
    for (int j = 0; j < kBucketCount; ++j) sizes[j] = p.buckets[j].size();
    std::bernoulli_distribution answers(config.alpha);
    for (std::size_t ki = 0; ki < nk; ++ki) {
      const double cutoff = percentile_cutoff(rhos[ki]) + config.threshold_epsilon;
      const std::uint64_t tag = std::bit_cast<std::uint64_t>(ks[ki]);
      Tally t;
      for (int d = 0; d < days; ++d) {
        CellRng rng(cell_seed(config.seed, p.id_hash, static_cast<std::uint64_t>(d), tag));
        for (int e = 0; e < per_day; ++e) {
          auto [b, idx] = draw_debiased(sizes, rng);
          const auto& ev = p.buckets[b][idx];
          if (!(ev.percentile > cutoff)) continue;
          ++t.delivered;
          if (config.alpha < 1.0 && !answers(rng)) continue;
          detail::credit(t, ev);
        }
      }
      tallies[ki * parts.size() + i] = t;
    }
  });

  SimulationResult out;
  out.per_participant.reserve(tallies.size());
  for (std::size_t ki = 0; ki < nk; ++ki) {
    const auto first = out.per_participant.size();
    for (std::size_t i = 0; i < parts.size(); ++i)
      out.per_participant.push_back(
          detail::participant_point(parts[i], ks[ki], tallies[ki * parts.size() + i]));
    auto pt = detail::aggregate(std::span(out.per_participant).subspan(first, parts.size()), ks[ki],
                                rhos[ki], days, scales[ki]);
    detail::apply_scale(pt, ks[ki]);
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace stressfreq
