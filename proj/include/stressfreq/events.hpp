#pragma once

// Rated-event ingestion, day-window filtering and person-specific likelihood
// stratification into twenty 5-percentile buckets.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stressfreq/categories.hpp"
#include "stressfreq/csv.hpp"
#include "stressfreq/errors.hpp"

namespace stressfreq {

inline constexpr int kBucketCount = 20;
inline constexpr double kMinutesPerDay = 1440.0;
inline constexpr double kDefaultWindowStart = 480.0;  // 08:00
inline constexpr double kDefaultWindowEnd = 1200.0;   // 20:00

struct RatedEvent {
  std::string participant_id;
  double time_of_day = 0.0;  // minutes since midnight, [0, 1440)
  double likelihood = 0.0;
  bool responded = false;
  std::optional<StressorCategory> category;  // present iff a stressor was reported

  bool has_stressor() const { return category.has_value(); }
  friend bool operator==(const RatedEvent&, const RatedEvent&) = default;
};

struct RowDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<RatedEvent> events;
  std::vector<RowDiagnostic> rejected;

  bool clean() const { return rejected.empty(); }

  // Throws the first diagnostic as a SchemaError when any row was rejected.
  const IngestResult& require_clean() const {
    if (!rejected.empty()) throw SchemaError(rejected.front().line, rejected.front().message);
    return *this;
  }
};

inline const std::array<std::string, 5> kEventColumns = {
    "participant_id", "time_of_day_min", "likelihood", "responded", "category"};

namespace detail {

// Validates one decoded row and appends it, or records a diagnostic.
class EventAccumulator {
 public:
  void add(std::size_t line, std::string pid, double time, double likelihood, bool responded,
           const std::string& category_text) {
    if (pid.empty()) return reject(line, "empty participant_id");
    if (!std::isfinite(time) || time < 0.0 || time >= kMinutesPerDay)
      return reject(line, "time_of_day_min outside [0, 1440)");
    if (!std::isfinite(likelihood)) return reject(line, "likelihood is not finite");
    std::optional<StressorCategory> category;
    if (!category_text.empty()) {
      category = parse_category(category_text);
      if (!category) return reject(line, "unknown category '" + category_text + "'");
      if (!responded) return reject(line, "category present but responded=false");
    }
    if (!seen_.insert({pid, time}).second)
      return reject(line, "duplicate (participant_id, time_of_day_min) row for '" + pid + "'");
    result_.events.push_back({std::move(pid), time, likelihood, responded, category});
  }

  void reject(std::size_t line, std::string message) {
    result_.rejected.push_back({line, std::move(message)});
  }

  IngestResult finish() {
    std::sort(result_.rejected.begin(), result_.rejected.end(),
              [](const RowDiagnostic& a, const RowDiagnostic& b) { return a.line < b.line; });
    return std::move(result_);
  }

 private:
  IngestResult result_;
  std::set<std::pair<std::string, double>> seen_;
};

inline std::optional<bool> parse_bool(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  return std::nullopt;
}

}  // namespace detail

// Reads the comma-delimited event table. Missing columns or header problems
// throw SchemaError; individual bad rows are reported in `rejected`.
inline IngestResult ingest_csv(std::istream& in) {
  auto table = csv::Table::read(in, /*lenient=*/true);
  std::array<std::size_t, 5> col{};
  for (std::size_t i = 0; i < kEventColumns.size(); ++i) col[i] = table.column(kEventColumns[i]);

  detail::EventAccumulator acc;
  for (const auto& m : table.malformed()) acc.reject(m.line, m.message);
  for (const auto& row : table.rows()) {
    const auto& f = row.fields;
    auto time = csv::parse_double(f[col[1]]);
    if (!time) {
      acc.reject(row.line, "time_of_day_min is not a number: '" + f[col[1]] + "'");
      continue;
    }
    auto likelihood = csv::parse_double(f[col[2]]);
    if (!likelihood) {
      acc.reject(row.line, "likelihood is not a number: '" + f[col[2]] + "'");
      continue;
    }
    auto responded = detail::parse_bool(csv::trim(f[col[3]]));
    if (!responded) {
      acc.reject(row.line, "responded must be 'true' or 'false', got '" + f[col[3]] + "'");
      continue;
    }
    acc.add(row.line, csv::trim(f[col[0]]), *time, *likelihood, *responded, csv::trim(f[col[4]]));
  }
  return acc.finish();
}

// Structured variant: either an array of row objects or {"events": [...]}.
// The row position (1-based) stands in for the line number.
inline IngestResult ingest_json(const nlohmann::json& doc) {
  const nlohmann::json* rows = &doc;
  if (doc.is_object() && doc.contains("events")) rows = &doc.at("events");
  if (!rows->is_array()) throw SchemaError(0, "expected an array of event objects");

  detail::EventAccumulator acc;
  std::size_t n = 0;
  for (const auto& obj : *rows) {
    ++n;
    if (!obj.is_object()) {
      acc.reject(n, "row is not an object");
      continue;
    }
    bool complete = true;
    for (std::size_t i = 0; i < 4; ++i)
      if (!obj.contains(kEventColumns[i])) {
        acc.reject(n, "missing field '" + kEventColumns[i] + "'");
        complete = false;
        break;
      }
    if (!complete) continue;

    const auto& pid = obj.at("participant_id");
    const auto& time = obj.at("time_of_day_min");
    const auto& lik = obj.at("likelihood");
    const auto& resp = obj.at("responded");
    if (!pid.is_string()) {
      acc.reject(n, "participant_id must be a string");
      continue;
    }
    if (!time.is_number() || !lik.is_number()) {
      acc.reject(n, "time_of_day_min and likelihood must be numbers");
      continue;
    }
    std::optional<bool> responded;
    if (resp.is_boolean()) responded = resp.get<bool>();
    else if (resp.is_string()) responded = detail::parse_bool(resp.get<std::string>());
    if (!responded) {
      acc.reject(n, "responded must be true or false");
      continue;
    }
    std::string category;
    if (obj.contains("category") && !obj.at("category").is_null()) {
      if (!obj.at("category").is_string()) {
        acc.reject(n, "category must be a string or null");
        continue;
      }
      category = obj.at("category").get<std::string>();
    }
    acc.add(n, pid.get<std::string>(), time.get<double>(), lik.get<double>(), *responded, category);
  }
  return acc.finish();
}

// Dispatches on extension: `.json` is the structured variant, anything else is CSV.
inline IngestResult ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event table '" + path + "'");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(0, std::string("invalid JSON: ") + e.what());
    }
    return ingest_json(doc);
  }
  return ingest_csv(in);
}

inline void write_events_csv(std::ostream& out, std::span<const RatedEvent> events) {
  csv::write_row(out, kEventColumns);
  for (const auto& e : events) {
    std::array<std::string, 5> f = {e.participant_id, csv::format_double(e.time_of_day),
                                    csv::format_double(e.likelihood),
                                    e.responded ? "true" : "false",
                                    e.category ? std::string(label(*e.category)) : std::string()};
    csv::write_row(out, f);
  }
}

inline nlohmann::json events_to_json(std::span<const RatedEvent> events) {
  auto rows = nlohmann::json::array();
  for (const auto& e : events) {
    rows.push_back({{"participant_id", e.participant_id},
                    {"time_of_day_min", e.time_of_day},
                    {"likelihood", e.likelihood},
                    {"responded", e.responded},
                    {"category", e.category ? nlohmann::json(std::string(label(*e.category)))
                                            : nlohmann::json(nullptr)}});
  }
  return rows;
}

// Keeps events with start <= time_of_day < end.
inline std::vector<RatedEvent> filter_window(std::span<const RatedEvent> events,
                                             double start = kDefaultWindowStart,
                                             double end = kDefaultWindowEnd) {
  if (!(start >= 0.0 && start < end && end <= kMinutesPerDay))
    throw InvalidWindow("window [" + csv::format_double(start) + ", " + csv::format_double(end) +
                        ") must satisfy 0 <= start < end <= 1440");
  std::vector<RatedEvent> out;
  for (const auto& e : events)
    if (e.time_of_day >= start && e.time_of_day < end) out.push_back(e);
  return out;
}

struct BucketedEvent {
  RatedEvent event;
  double percentile = 0.0;  // average-rank percentile in (0, 100]
};

struct ParticipantBuckets {
  std::string participant_id;
  std::array<std::vector<BucketedEvent>, kBucketCount> buckets;

  std::size_t event_count() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.size();
    return n;
  }

  std::vector<int> empty_buckets() const {
    std::vector<int> out;
    for (int j = 0; j < kBucketCount; ++j)
      if (buckets[j].empty()) out.push_back(j);
    return out;
  }

  bool complete() const { return empty_buckets().empty(); }
};

// Bucket for an average rank given as twice its value (so ties stay integral).
// percentile = 50 * twice_rank / n; bucket = ceil(percentile / 5) - 1, so a
// percentile on a multiple of 5 falls in the lower bucket.
constexpr int bucket_for_rank(std::size_t twice_rank, std::size_t n) {
  const std::size_t upper = (10 * twice_rank + n - 1) / n;
  const int b = static_cast<int>(upper) - 1;
  return std::clamp(b, 0, kBucketCount - 1);
}

// Stratifies one participant's events without enforcing coverage. Events of
// other participants in `events` are ignored.
inline ParticipantBuckets stratify(std::span<const RatedEvent> events,
                                   const std::string& participant_id) {
  std::vector<const RatedEvent*> mine;
  for (const auto& e : events)
    if (e.participant_id == participant_id) mine.push_back(&e);
  std::sort(mine.begin(), mine.end(), [](const RatedEvent* a, const RatedEvent* b) {
    if (a->likelihood != b->likelihood) return a->likelihood < b->likelihood;
    return a->time_of_day < b->time_of_day;
  });

  ParticipantBuckets out;
  out.participant_id = participant_id;
  const std::size_t n = mine.size();
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first;
    while (last + 1 < n && mine[last + 1]->likelihood == mine[first]->likelihood) ++last;
    const std::size_t twice_rank = (first + 1) + (last + 1);
    const double percentile = 50.0 * static_cast<double>(twice_rank) / static_cast<double>(n);
    const int bucket = bucket_for_rank(twice_rank, n);
    for (std::size_t i = first; i <= last; ++i)
      out.buckets[bucket].push_back({*mine[i], percentile});
    first = last + 1;
  }
  return out;
}

// Stratifies and requires all 20 buckets to be populated.
inline ParticipantBuckets bucketize(std::span<const RatedEvent> events,
                                    const std::string& participant_id) {
  auto out = stratify(events, participant_id);
  if (auto empty = out.empty_buckets(); !empty.empty())
    throw EmptyBucket(participant_id, std::move(empty));
  return out;
}

// One entry per distinct participant, ordered by participant id.
inline std::vector<ParticipantBuckets> stratify_all(std::span<const RatedEvent> events) {
  std::map<std::string, std::vector<RatedEvent>> by_participant;
  for (const auto& e : events) by_participant[e.participant_id].push_back(e);
  std::vector<ParticipantBuckets> out;
  out.reserve(by_participant.size());
  for (const auto& [pid, list] : by_participant) out.push_back(stratify(list, pid));
  return out;
}

struct Exclusion {
  std::string participant_id;
  std::vector<int> empty_buckets;
};

struct CohortSelection {
  std::vector<ParticipantBuckets> retained;
  std::vector<Exclusion> excluded;

  std::size_t considered() const { return retained.size() + excluded.size(); }
};

inline CohortSelection eligible_cohort(std::vector<ParticipantBuckets> all) {
  CohortSelection sel;
  for (auto& p : all) {
    auto empty = p.empty_buckets();
    if (empty.empty()) sel.retained.push_back(std::move(p));
    else sel.excluded.push_back({p.participant_id, std::move(empty)});
  }
  return sel;
}

}  // namespace stressfreq
