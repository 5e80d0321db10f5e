#pragma once

// Points files (simulator output), saturation reports and plot series, in
// delimited text or JSON.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stressfreq/categories.hpp"
#include "stressfreq/csv.hpp"
#include "stressfreq/errors.hpp"
#include "stressfreq/estimator.hpp"
#include "stressfreq/simulator.hpp"

namespace stressfreq {

enum class Format { csv, json };

inline bool has_json_extension(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

inline nlohmann::json read_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(0, "invalid JSON in '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Points

struct PointRecord {
  double k = 0.0;
  CategoryKey category;
  double base_efficiency = 0.0;
  double fatigue_scale = 1.0;
  double stressors_per_day = 0.0;
  double n_prompts = 0.0;
  double n_responses = 0.0;
};

inline const std::array<std::string, 7> kPointColumns = {
    "k", "category", "base_efficiency", "fatigue_scale", "stressors_per_day", "n_prompts", "n_responses"};

// One ALL record per point plus one per category that reports any stressor
// anywhere in the sweep.
inline std::vector<PointRecord> point_records(std::span<const EfficiencyPoint> points) {
  std::array<bool, kCategoryCount> seen{};
  for (const auto& p : points)
    for (std::size_t c = 0; c < kCategoryCount; ++c)
      if (p.category_efficiency[c] > 0.0) seen[c] = true;

  std::vector<PointRecord> out;
  for (const auto& p : points) {
    out.push_back({p.k, std::nullopt, p.base_efficiency, p.fatigue_scale, p.stressors_per_day,
                   p.prompts_delivered_per_day, p.responses_per_day});
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      if (!seen[c]) continue;
      out.push_back({p.k, static_cast<StressorCategory>(c), p.category_efficiency[c], p.fatigue_scale,
                     p.category_stressors_per_day[c], p.prompts_delivered_per_day, p.responses_per_day});
    }
  }
  return out;
}

inline void write_points_csv(std::ostream& out, std::span<const PointRecord> rows) {
  csv::write_row(out, kPointColumns);
  for (const auto& r : rows) {
    std::array<std::string, 7> f = {csv::format_double(r.k),          key_token(r.category),
                                    csv::format_double(r.base_efficiency), csv::format_double(r.fatigue_scale),
                                    csv::format_double(r.stressors_per_day), csv::format_double(r.n_prompts),
                                    csv::format_double(r.n_responses)};
    csv::write_row(out, f);
  }
}

inline nlohmann::json points_to_json(std::span<const PointRecord> rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"k", r.k},
                   {"category", key_token(r.category)},
                   {"base_efficiency", r.base_efficiency},
                   {"fatigue_scale", r.fatigue_scale},
                   {"stressors_per_day", r.stressors_per_day},
                   {"n_prompts", r.n_prompts},
                   {"n_responses", r.n_responses}});
  return {{"points", arr}};
}

// Only k, category and stressors_per_day are required; the rest default.
inline std::vector<PointRecord> read_points(const std::string& path) {
  std::vector<PointRecord> out;
  if (has_json_extension(path)) {
    auto doc = read_json(path);
    const auto& rows = doc.is_object() && doc.contains("points") ? doc.at("points") : doc;
    if (!rows.is_array()) throw SchemaError(0, "points document must be an array");
    std::size_t n = 0;
    for (const auto& r : rows) {
      ++n;
      try {
        PointRecord p;
        p.k = r.at("k").get<double>();
        auto key = parse_key(r.at("category").get<std::string>());
        if (!key) throw SchemaError(n, "unknown category '" + r.at("category").get<std::string>() + "'");
        p.category = *key;
        p.stressors_per_day = r.at("stressors_per_day").get<double>();
        p.base_efficiency = r.value("base_efficiency", 0.0);
        p.fatigue_scale = r.value("fatigue_scale", 1.0);
        p.n_prompts = r.value("n_prompts", 0.0);
        p.n_responses = r.value("n_responses", 0.0);
        out.push_back(p);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(n, std::string("malformed point: ") + e.what());
      }
    }
    return out;
  }
  auto in = open_input(path);
  auto table = csv::Table::read(in);
  const auto ck = table.column("k"), cc = table.column("category"), cy = table.column("stressors_per_day");
  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    if (table.has(name)) return table.column(name);
    return std::nullopt;
  };
  const auto ce = optional_col("base_efficiency"), cf = optional_col("fatigue_scale"),
             cp = optional_col("n_prompts"), cr = optional_col("n_responses");
  for (const auto& row : table.rows()) {
    PointRecord p;
    p.k = csv::require_double(row, ck, "k");
    const auto cat = csv::trim(row.fields[cc]);
    auto key = parse_key(cat);
    if (!key) throw SchemaError(row.line, "unknown category '" + cat + "'");
    p.category = *key;
    p.stressors_per_day = csv::require_double(row, cy, "stressors_per_day");
    if (ce) p.base_efficiency = csv::require_double(row, *ce, "base_efficiency");
    if (cf) p.fatigue_scale = csv::require_double(row, *cf, "fatigue_scale");
    if (cp) p.n_prompts = csv::require_double(row, *cp, "n_prompts");
    if (cr) p.n_responses = csv::require_double(row, *cr, "n_responses");
    out.push_back(p);
  }
  return out;
}

inline std::map<CategoryKey, std::vector<CurvePoint>> curves_by_category(std::span<const PointRecord> rows) {
  std::map<CategoryKey, std::vector<CurvePoint>> out;
  for (const auto& r : rows) out[r.category].push_back({r.k, r.stressors_per_day});
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline const std::array<std::string, 10> kReportColumns = {
    "category", "S", "a", "weekly_model", "weekly_observed", "rmse", "n_points", "converged", "status", "note"};

inline std::string opt_number(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

inline void write_report_csv(std::ostream& out, const SaturationReport& report) {
  csv::write_row(out, kReportColumns);
  for (const auto& r : report.rows) {
    const auto& f = r.fit;
    std::array<std::string, 10> cells = {
        key_label(r.category),
        f ? csv::format_double(f->S) : "",
        f ? csv::format_double(f->a) : "",
        opt_number(r.weekly_model),
        opt_number(r.weekly_observed),
        f ? csv::format_double(f->rmse) : "",
        f ? std::to_string(f->n_points) : "",
        f ? (f->converged ? "true" : "false") : "false",
        f ? std::string(status_name(f->status)) : "error",
        r.note};
    csv::write_row(out, cells);
  }
}

inline nlohmann::json report_to_json(const SaturationReport& report) {
  auto rows = nlohmann::json::array();
  auto num = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"category", key_label(r.category)},
                          {"weekly_model", num(r.weekly_model)},
                          {"weekly_observed", num(r.weekly_observed)},
                          {"note", r.note}};
    if (r.fit) {
      row["S"] = r.fit->S;
      row["a"] = r.fit->a;
      row["rmse"] = r.fit->rmse;
      row["n_points"] = r.fit->n_points;
      row["converged"] = r.fit->converged;
      row["status"] = status_name(r.fit->status);
      row["iterations"] = r.fit->iterations;
    } else {
      row["S"] = row["a"] = row["rmse"] = nullptr;
      row["n_points"] = 0;
      row["converged"] = false;
      row["status"] = "error";
    }
    rows.push_back(row);
  }
  return {{"rows", rows}};
}

namespace detail {

inline std::optional<FitStatus> parse_status(const std::string& s) {
  for (auto st : {FitStatus::converged, FitStatus::iteration_cap, FitStatus::rate_at_boundary, FitStatus::all_zero})
    if (status_name(st) == s) return st;
  return std::nullopt;
}

}  // namespace detail

inline SaturationReport read_report(const std::string& path) {
  SaturationReport report;
  auto make_row = [](std::size_t line, const std::string& cat, std::optional<double> S, std::optional<double> a,
                     std::optional<double> weekly_model, std::optional<double> weekly_observed,
                     std::optional<double> rmse, std::size_t n_points, bool converged,
                     const std::string& status, std::string note) {
    auto key = parse_key(cat);
    if (!key) throw SchemaError(line, "unknown category '" + cat + "'");
    ReportRow row{*key, std::nullopt, weekly_model, weekly_observed, std::move(note)};
    if (S && a) {
      SaturationFit f;
      f.category = *key;
      f.S = *S;
      f.a = *a;
      f.rmse = rmse.value_or(0.0);
      f.n_points = n_points;
      f.converged = converged;
      f.status = detail::parse_status(status).value_or(converged ? FitStatus::converged : FitStatus::iteration_cap);
      row.fit = f;
    }
    return row;
  };

  if (has_json_extension(path)) {
    auto doc = read_json(path);
    const auto& rows = doc.is_object() && doc.contains("rows") ? doc.at("rows") : doc;
    if (!rows.is_array()) throw SchemaError(0, "report document must be an array of rows");
    std::size_t n = 0;
    for (const auto& r : rows) {
      ++n;
      auto num = [&](const char* k) -> std::optional<double> {
        if (!r.contains(k) || r.at(k).is_null()) return std::nullopt;
        return r.at(k).get<double>();
      };
      try {
        report.rows.push_back(make_row(n, r.at("category").get<std::string>(), num("S"), num("a"),
                                       num("weekly_model"), num("weekly_observed"), num("rmse"),
                                       r.value("n_points", std::size_t{0}), r.value("converged", false),
                                       r.value("status", std::string()), r.value("note", std::string())));
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(n, std::string("malformed report row: ") + e.what());
      }
    }
    return report;
  }

  auto in = open_input(path);
  auto table = csv::Table::read(in);
  std::array<std::size_t, 10> col{};
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) col[i] = table.column(kReportColumns[i]);
  for (const auto& row : table.rows()) {
    auto num = [&](std::size_t i) -> std::optional<double> {
      const auto& text = row.fields[col[i]];
      if (csv::trim(text).empty()) return std::nullopt;
      return csv::require_double(row, col[i], kReportColumns[i].c_str());
    };
    const auto n_points = num(6);
    report.rows.push_back(make_row(row.line, csv::trim(row.fields[col[0]]), num(1), num(2), num(3), num(4),
                                   num(5), n_points ? static_cast<std::size_t>(*n_points) : 0,
                                   csv::trim(row.fields[col[7]]) == "true", csv::trim(row.fields[col[8]]),
                                   row.fields[col[9]]));
  }
  return report;
}

// Observed daily rates: columns `category, stressors_per_day`.
inline std::map<CategoryKey, double> read_observed(const std::string& path) {
  auto in = open_input(path);
  auto table = csv::Table::read(in);
  const auto cc = table.column("category"), cy = table.column("stressors_per_day");
  std::map<CategoryKey, double> out;
  for (const auto& row : table.rows()) {
    const auto cat = csv::trim(row.fields[cc]);
    auto key = parse_key(cat);
    if (!key) throw SchemaError(row.line, "unknown category '" + cat + "'");
    out[*key] = csv::require_double(row, cy, "stressors_per_day");
  }
  return out;
}

// Observed stressors per participant-day from an event table.
inline std::map<CategoryKey, double> observed_rates(std::span<const RatedEvent> events, double days_per_participant) {
  if (!(days_per_participant > 0.0)) throw DegenerateInput("days per participant must be positive");
  std::map<std::string, int> participants;
  std::map<CategoryKey, double> counts;
  counts[std::nullopt] = 0.0;
  for (const auto& e : events) {
    participants[e.participant_id] = 1;
    if (!e.category) continue;
    counts[std::nullopt] += 1.0;
    counts[*e.category] += 1.0;
  }
  if (participants.empty()) throw EmptyCohort();
  const double denom = static_cast<double>(participants.size()) * days_per_participant;
  for (auto& [key, v] : counts) v /= denom;
  return counts;
}

// ---------------------------------------------------------------------------
// Plot series: model curve next to the simulated points, per category.

inline void write_plot_csv(std::ostream& out, const SaturationReport& report,
                           const std::map<CategoryKey, std::vector<CurvePoint>>& simulated) {
  csv::write_row(out, std::array<std::string, 4>{"category", "k", "y_model", "y_simulated"});
  for (const auto& row : report.rows) {
    if (!row.fit) continue;
    auto it = simulated.find(row.category);
    if (it == simulated.end()) continue;
    for (const auto& p : it->second) {
      std::array<std::string, 4> f = {key_label(row.category), csv::format_double(p.k),
                                      csv::format_double(evaluate(*row.fit, p.k)), csv::format_double(p.y)};
      csv::write_row(out, f);
    }
  }
}

inline nlohmann::json plot_to_json(const SaturationReport& report,
                                   const std::map<CategoryKey, std::vector<CurvePoint>>& simulated) {
  auto series = nlohmann::json::array();
  for (const auto& row : report.rows) {
    if (!row.fit) continue;
    auto it = simulated.find(row.category);
    if (it == simulated.end()) continue;
    auto pts = nlohmann::json::array();
    for (const auto& p : it->second)
      pts.push_back({{"k", p.k}, {"y_model", evaluate(*row.fit, p.k)}, {"y_simulated", p.y}});
    series.push_back({{"category", key_label(row.category)}, {"points", pts}});
  }
  return {{"series", series}};
}

}  // namespace stressfreq
