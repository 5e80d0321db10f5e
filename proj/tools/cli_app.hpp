#pragma once

// Command-line front end: budget, synth, simulate, fit, report, pipeline.
// Every run writes one manifest next to its outputs. Failures print a single
// JSON line on stderr and return a class-specific exit code.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stressfreq/stressfreq.hpp"

namespace stressfreq::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kSchema = 4,
  kDomain = 5,
};

inline constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 internal error, 2 usage error (unknown flag, bad value),\n"
    "            3 missing or unwritable file, 4 schema violation in an input file,\n"
    "            5 domain error (infeasible budget, fatigue out of domain, empty cohort, ...).\n"
    "Errors are reported as one JSON line on stderr: {\"error\":..., \"exit\":..., \"message\":...}";

inline int exit_code_for(ErrorClass c) {
  switch (c) {
    case ErrorClass::usage: return kUsage;
    case ErrorClass::io: return kIo;
    case ErrorClass::schema: return kSchema;
    case ErrorClass::domain: return kDomain;
  }
  return kInternal;
}

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorClass::usage, "usage", what) {}
};

inline std::optional<Format> parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  return std::nullopt;
}

inline const char* extension(Format f) { return f == Format::json ? ".json" : ".csv"; }

// "1..30", "1,2,3.5" or a mix such as "1..12,18,24".
inline std::vector<double> parse_k_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = csv::trim(item);
    if (item.empty()) continue;
    if (auto dots = item.find(".."); dots != std::string::npos) {
      auto lo = csv::parse_double(item.substr(0, dots));
      auto hi = csv::parse_double(item.substr(dots + 2));
      if (!lo || !hi || *lo > *hi) throw UsageError("bad k range '" + item + "'");
      for (double k = *lo; k <= *hi + 1e-9; k += 1.0) out.push_back(k);
    } else {
      auto v = csv::parse_double(item);
      if (!v) throw UsageError("bad k value '" + item + "'");
      out.push_back(*v);
    }
  }
  if (out.empty()) throw UsageError("empty --k-values");
  return out;
}

inline void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  body(out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::json& doc) {
  write_file(path, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

inline std::string replace_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> command)
      : subcommand_(std::move(subcommand)),
        command_(std::move(command)),
        start_(std::chrono::steady_clock::now()),
        started_at_(std::chrono::system_clock::now()) {}

  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;

  nlohmann::json finish() const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::time_t t = std::chrono::system_clock::to_time_t(started_at_);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    return {{"tool", "stressfreq"},
            {"version", kVersion},
            {"subcommand", subcommand_},
            {"command", command_},
            {"config", config},
            {"inputs", inputs},
            {"outputs", outputs},
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
            {"started_at_utc", ts.str()},
            {"duration_seconds", seconds}};
  }

 private:
  std::string subcommand_;
  std::vector<std::string> command_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point started_at_;
};

// Flags shared by simulate and pipeline.
struct SimFlags {
  int days = 1000;
  int events_per_day = 0;
  std::string k_values;
  double omega = 12.0;
  double eta = 2.5;
  double alpha = 1.0;
  std::string policy = "debiased";
  double window_start = kDefaultWindowStart;
  double window_end = kDefaultWindowEnd;
  double fatigue_b = FatigueModel{}.b;
  double fatigue_m = FatigueModel{}.m;
  double fatigue_kref = FatigueModel{}.k_ref;
  bool no_fatigue = false;

  void attach(CLI::App* app) {
    app->add_option("--days", days, "Simulated days per participant")->capture_default_str();
    app->add_option("--events-per-day", events_per_day, "Candidate events per day (must equal round(eta*omega))");
    app->add_option("--k-values", k_values, "Response frequencies, e.g. 1..30 or 1,2,6 (default 1..min(36, alpha*eta*omega))");
    app->add_option("--omega", omega, "Wear hours per day")->capture_default_str();
    app->add_option("--eta", eta, "Candidate events per hour")->capture_default_str();
    app->add_option("--alpha", alpha, "Response rate in (0, 1]")->capture_default_str();
    app->add_option("--policy", policy, "debiased | moods-baseline")->capture_default_str();
    app->add_option("--window-start", window_start, "Day window start, minutes since midnight")->capture_default_str();
    app->add_option("--window-end", window_end, "Day window end (exclusive), minutes")->capture_default_str();
    app->add_option("--fatigue-b", fatigue_b, "Fatigue model intercept")->capture_default_str();
    app->add_option("--fatigue-m", fatigue_m, "Fatigue model slope per unit k")->capture_default_str();
    app->add_option("--fatigue-kref", fatigue_kref, "Fatigue reference k")->capture_default_str();
    app->add_flag("--no-fatigue", no_fatigue, "Disable fatigue scaling");
  }

  SimulationConfig config(std::uint64_t seed, unsigned threads) const {
    SimulationConfig c;
    c.days_per_participant = days;
    c.events_per_day = events_per_day;
    if (!k_values.empty()) c.k_values = parse_k_values(k_values);
    c.omega = omega;
    c.eta = eta;
    c.alpha = alpha;
    c.seed = seed;
    auto p = parse_policy(policy);
    if (!p) throw UsageError("unknown policy '" + policy + "'");
    c.policy = *p;
    if (no_fatigue) c.fatigue.reset();
    else c.fatigue = FatigueModel{fatigue_b, fatigue_m, fatigue_kref};
    c.threads = threads;
    return c;
  }

  nlohmann::json describe(const SimulationConfig& c) const {
    nlohmann::json j = {{"days_per_participant", c.days_per_participant},
                        {"events_per_day", c.resolved_events_per_day()},
                        {"omega", c.omega},
                        {"eta", c.eta},
                        {"alpha", c.alpha},
                        {"policy", policy_name(c.policy)},
                        {"window_start_min", window_start},
                        {"window_end_min", window_end},
                        {"threshold_epsilon", c.threshold_epsilon}};
    if (c.policy == Policy::debiased) j["k_values"] = c.resolved_k_values();
    if (c.fatigue) j["fatigue"] = {{"b", c.fatigue->b}, {"m", c.fatigue->m}, {"k_ref", c.fatigue->k_ref}};
    else j["fatigue"] = nullptr;
    return j;
  }
};

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    args_ = args;
    CLI::App app{"Latent stressor frequency estimation toolkit", "stressfreq"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto* budget = app.add_subcommand("budget", "Solve the prompt budget for the one omitted field");
    std::optional<double> rho, eta, omega, alpha, k;
    budget->add_option("--rho", rho, "Percentile threshold in (0, 1]");
    budget->add_option("--eta", eta, "Candidate events per hour");
    budget->add_option("--omega", omega, "Wear hours per day");
    budget->add_option("--alpha", alpha, "Response rate in (0, 1]");
    budget->add_option("--k", k, "Responses per day");
    add_common(budget, /*seeded=*/false);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic event table");
    synth->add_option("--spec", synth_spec_, "Synth spec JSON (defaults used when omitted)")->check(CLI::ExistingFile);
    synth->add_option("--out", out_path_, "Event table to write (.json for the structured variant)")->required();
    synth->add_option("--write-spec", write_spec_, "Also write the resolved spec JSON here");
    add_common(synth, /*seeded=*/true);

    auto* simulate = app.add_subcommand("simulate", "Simulate typical days and write efficiency points");
    simulate->add_option("--input", input_, "Event table (CSV, or .json)")->required();
    simulate->add_option("--out", out_path_, "Points file to write")->required();
    simulate->add_option("--participants-out", participants_out_, "Per-participant breakdown file");
    sim_.attach(simulate);
    add_common(simulate, /*seeded=*/true);

    auto* fit = app.add_subcommand("fit", "Fit the saturation model per category");
    fit->add_option("--input", input_, "Points file from simulate")->required();
    fit->add_option("--out", out_path_, "Report to write (delimited text or JSON per --format)")->required();
    fit->add_option("--json", json_out_, "Structured report path (default: --out with .json)");
    fit->add_option("--plot-data", plot_out_, "Write model vs simulated series here");
    add_common(fit, /*seeded=*/false);

    auto* report = app.add_subcommand("report", "Merge a fit report with observed-data extrapolation");
    report->add_option("--fit", fit_in_, "Fit report (CSV or .json)")->required();
    report->add_option("--observed", observed_, "Observed daily rates: category,stressors_per_day");
    report->add_option("--events", events_in_, "Event table to derive observed daily rates from");
    report->add_option("--days", observed_days_, "Days per participant covered by --events");
    report->add_option("--wear-hours", wear_hours_, "Average wear hours per day in the observed data")->capture_default_str();
    report->add_option("--out", out_path_, "Merged report to write")->required();
    add_common(report, /*seeded=*/false);

    auto* pipeline = app.add_subcommand("pipeline", "synth/ingest -> simulate -> fit -> report");
    auto* src = pipeline->add_option_group("source");
    src->add_flag("--synth-default", synth_default_, "Use the default synthetic cohort");
    src->add_option("--synth-spec", synth_spec_, "Synthesize from this spec")->check(CLI::ExistingFile);
    src->add_option("--input", input_, "Use this event table");
    src->require_option(1);
    pipeline->add_option("--out-dir", out_dir_, "Directory for all outputs")->capture_default_str();
    pipeline->add_option("--observed", observed_, "Observed daily rates for weekly_observed");
    pipeline->add_option("--observed-days", observed_days_, "Derive observed rates from the event table over this many days per participant");
    pipeline->add_option("--wear-hours", wear_hours_, "Average wear hours per day in the observed data")->capture_default_str();
    pipeline->add_flag("--plot-data", plot_flag_, "Also write plot.csv");
    sim_.attach(pipeline);
    add_common(pipeline, /*seeded=*/true);

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      return fail("usage", kUsage, e.what());
    }

    try {
      if (!parse_format(format_)) throw UsageError("unknown --format '" + format_ + "'");
      if (*budget) return run_budget(BudgetInputs{rho, eta, omega, k, alpha});
      if (*synth) return run_synth();
      if (*simulate) return run_simulate();
      if (*fit) return run_fit();
      if (*report) return run_report();
      if (*pipeline) return run_pipeline();
      return fail("usage", kUsage, "no subcommand");
    } catch (const Error& e) {
      return fail(e.code(), exit_code_for(e.error_class()), e.what());
    } catch (const std::exception& e) {
      return fail("internal", kInternal, e.what());
    }
  }

 private:
  void add_common(CLI::App* sub, bool seeded) {
    sub->add_option("--format", format_, "csv | json for tabular outputs")->capture_default_str();
    sub->add_option("--manifest", manifest_path_, "Manifest path (default: next to the primary output)");
    if (seeded) {
      sub->add_option("--seed", seed_, "Master RNG seed")->capture_default_str();
      sub->add_option("--threads", threads_, "Worker thread cap")->capture_default_str();
    }
  }

  Format format() const { return *parse_format(format_); }

  int fail(const std::string& code, int exit_code, const std::string& message) {
    nlohmann::json line = {{"error", code}, {"exit", exit_code}, {"message", message}};
    err_ << line.dump() << '\n';
    return exit_code;
  }

  Manifest manifest(const std::string& sub) const { return Manifest(sub, args_); }

  void emit_manifest(Manifest& m, const std::string& default_path) {
    const std::string path = manifest_path_.empty() ? default_path : manifest_path_;
    write_json_file(path, m.finish());
  }

  void write_points(const std::string& path, std::span<const PointRecord> rows) {
    if (format() == Format::json) write_json_file(path, points_to_json(rows));
    else write_file(path, [&](std::ostream& o) { write_points_csv(o, rows); });
  }

  void write_report(const std::string& path, const SaturationReport& r) {
    if (format() == Format::json) write_json_file(path, report_to_json(r));
    else write_file(path, [&](std::ostream& o) { write_report_csv(o, r); });
  }

  void print_report(const SaturationReport& r) {
    out_ << std::left << std::setw(26) << "Stressor" << std::right << std::setw(9) << "S" << std::setw(8) << "a"
         << std::setw(10) << "Weekly" << std::setw(10) << "Data*" << "  note\n";
    out_ << std::fixed;
    for (const auto& row : r.rows) {
      out_ << std::left << std::setw(26) << key_label(row.category) << std::right;
      if (row.fit) out_ << std::setw(9) << std::setprecision(3) << row.fit->S << std::setw(8) << row.fit->a;
      else out_ << std::setw(9) << "-" << std::setw(8) << "-";
      if (row.weekly_model) out_ << std::setw(10) << std::setprecision(2) << *row.weekly_model;
      else out_ << std::setw(10) << "-";
      if (row.weekly_observed) out_ << std::setw(10) << std::setprecision(2) << *row.weekly_observed;
      else out_ << std::setw(10) << "-";
      out_ << "  " << row.note << '\n';
    }
    out_ << std::defaultfloat;
  }

  int run_budget(const BudgetInputs& in) {
    auto m = manifest("budget");
    std::optional<BudgetField> missing;
    for (auto f : kBudgetFields)
      if (!in.slot(f)) {
        if (missing) throw UsageError("give exactly four of --rho --eta --omega --alpha --k");
        missing = f;
      }
    if (!missing) throw UsageError("give exactly four of --rho --eta --omega --alpha --k");
    const auto b = solve(in, *missing);
    const auto report = validate(b);

    out_ << field_name(*missing) << " = " << csv::format_double(b.get(*missing)) << '\n';
    out_ << "rho=" << csv::format_double(b.rho) << " eta=" << csv::format_double(b.eta)
         << " omega=" << csv::format_double(b.omega) << " k=" << csv::format_double(b.k)
         << " alpha=" << csv::format_double(b.alpha) << " daily_prompts=" << csv::format_double(b.daily_prompts())
         << " candidates=" << csv::format_double(b.candidate_events())
         << (report.ok() ? " valid" : " INVALID") << '\n';
    for (const auto& v : report.violations) out_ << "  violation: " << v << '\n';

    nlohmann::json doc = {{"solved", field_name(*missing)},
                          {"rho", b.rho},
                          {"eta", b.eta},
                          {"omega", b.omega},
                          {"k", b.k},
                          {"alpha", b.alpha},
                          {"valid", report.ok()},
                          {"violations", report.violations}};
    if (format() == Format::json) {
      out_ << doc.dump() << '\n';
    } else {
      out_ << "solved,rho,eta,omega,k,alpha,valid\n"
           << field_name(*missing) << ',' << csv::format_double(b.rho) << ',' << csv::format_double(b.eta) << ','
           << csv::format_double(b.omega) << ',' << csv::format_double(b.k) << ',' << csv::format_double(b.alpha)
           << ',' << (report.ok() ? "true" : "false") << '\n';
    }
    m.config = doc;
    if (manifest_path_.empty()) {
      out_ << "manifest " << m.finish().dump() << '\n';
    } else {
      m.outputs.push_back(manifest_path_);
      emit_manifest(m, manifest_path_);
    }
    return report.ok() ? kOk : kDomain;
  }

  SynthSpec load_synth_spec() {
    SynthSpec spec = synth_spec_.empty() ? default_synth_spec() : synth_spec_from_json(read_json(synth_spec_));
    if (seed_given()) spec.seed = seed_;
    return spec;
  }

  bool seed_given() const {
    return std::find(args_.begin(), args_.end(), "--seed") != args_.end() ||
           std::any_of(args_.begin(), args_.end(), [](const std::string& a) { return a.rfind("--seed=", 0) == 0; });
  }

  void write_events(const std::string& path, std::span<const RatedEvent> events) {
    if (has_json_extension(path)) write_json_file(path, {{"events", events_to_json(events)}});
    else write_file(path, [&](std::ostream& o) { write_events_csv(o, events); });
  }

  int run_synth() {
    auto m = manifest("synth");
    const auto spec = load_synth_spec();
    const auto events = generate(spec);
    write_events(out_path_, events);
    m.config = to_json(spec);
    m.seed = spec.seed;
    if (!synth_spec_.empty()) m.inputs.push_back(synth_spec_);
    m.outputs.push_back(out_path_);
    if (!write_spec_.empty()) {
      write_json_file(write_spec_, to_json(spec));
      m.outputs.push_back(write_spec_);
    }
    out_ << "wrote " << events.size() << " events for " << spec.n_participants << " participants to " << out_path_
         << '\n';
    emit_manifest(m, out_path_ + ".manifest.json");
    return kOk;
  }

  struct CohortLoad {
    std::vector<RatedEvent> events;
    CohortSelection selection;
    std::size_t dropped_unresponded = 0;
    std::size_t outside_window = 0;
  };

  // Strict ingest, window filter, keep rated (responded) events, stratify.
  CohortLoad load_cohort(const std::string& path) {
    CohortLoad load;
    auto ingested = ingest_file(path);
    ingested.require_clean();
    load.events = std::move(ingested.events);
    auto windowed = filter_window(load.events, sim_.window_start, sim_.window_end);
    load.outside_window = load.events.size() - windowed.size();
    std::vector<RatedEvent> rated;
    for (auto& e : windowed)
      if (e.responded) rated.push_back(std::move(e));
    load.dropped_unresponded = windowed.size() - rated.size();
    load.selection = eligible_cohort(stratify_all(rated));
    return load;
  }

  nlohmann::json cohort_summary(const CohortLoad& load) {
    auto excluded = nlohmann::json::array();
    for (const auto& x : load.selection.excluded)
      excluded.push_back({{"participant_id", x.participant_id}, {"empty_buckets", x.empty_buckets}});
    out_ << "cohort: " << load.selection.retained.size() << " of " << load.selection.considered()
         << " participants eligible (" << load.selection.excluded.size() << " excluded), " << load.outside_window
         << " events outside window, " << load.dropped_unresponded << " unanswered events ignored\n";
    return {{"events_read", load.events.size()},
            {"outside_window", load.outside_window},
            {"unresponded_ignored", load.dropped_unresponded},
            {"participants_considered", load.selection.considered()},
            {"participants_retained", load.selection.retained.size()},
            {"excluded", excluded}};
  }

  SimulationResult simulate_cohort(const CohortLoad& load, const SimulationConfig& cfg) {
    if (load.selection.retained.empty()) throw EmptyCohort();
    return simulate(load.selection.retained, cfg);
  }

  void write_participants(const std::string& path, const SimulationResult& res) {
    write_file(path, [&](std::ostream& o) {
      csv::write_row(o, std::array<std::string, 6>{"participant_id", "k", "delivered", "answered", "stressors",
                                                    "base_efficiency"});
      for (const auto& p : res.per_participant)
        csv::write_row(o, std::array<std::string, 6>{p.participant_id, csv::format_double(p.k),
                                                      std::to_string(p.tally.delivered),
                                                      std::to_string(p.tally.answered),
                                                      std::to_string(p.tally.stressor_total()),
                                                      csv::format_double(p.base_efficiency)});
    });
  }

  int run_simulate() {
    auto m = manifest("simulate");
    const auto cfg = sim_.config(seed_, threads_);
    auto load = load_cohort(input_);
    m.config = sim_.describe(cfg);
    m.config["cohort"] = cohort_summary(load);
    m.seed = seed_;
    m.inputs.push_back(input_);
    const auto res = simulate_cohort(load, cfg);
    const auto rows = point_records(res.points);
    write_points(out_path_, rows);
    m.outputs.push_back(out_path_);
    if (!participants_out_.empty()) {
      write_participants(participants_out_, res);
      m.outputs.push_back(participants_out_);
    }
    out_ << "wrote " << res.points.size() << " points (" << rows.size() << " rows) to " << out_path_ << '\n';
    emit_manifest(m, out_path_ + ".manifest.json");
    return kOk;
  }

  // Writes the report in --format to `path` and the structured twin to `json_path`.
  std::vector<std::string> write_fit_outputs(const SaturationReport& rep, const std::string& path,
                                             const std::string& json_path) {
    std::vector<std::string> written{path};
    write_report(path, rep);
    if (json_path != path) {
      write_json_file(json_path, report_to_json(rep));
      written.push_back(json_path);
    }
    return written;
  }

  int run_fit() {
    auto m = manifest("fit");
    const auto rows = read_points(input_);
    const auto curves = curves_by_category(rows);
    const auto rep = fit_all_categories(curves);
    m.inputs.push_back(input_);
    const std::string json_path = json_out_.empty() ? replace_extension(out_path_, ".json") : json_out_;
    m.outputs = write_fit_outputs(rep, out_path_, json_path);
    if (!plot_out_.empty()) {
      if (has_json_extension(plot_out_)) write_json_file(plot_out_, plot_to_json(rep, curves));
      else write_file(plot_out_, [&](std::ostream& o) { write_plot_csv(o, rep, curves); });
      m.outputs.push_back(plot_out_);
    }
    m.config = {{"format", format_}};
    print_report(rep);
    emit_manifest(m, out_path_ + ".manifest.json");
    return kOk;
  }

  std::optional<std::map<CategoryKey, double>> observed_from_flags(std::span<const RatedEvent> events) {
    if (!observed_.empty()) return read_observed(observed_);
    if (observed_days_ > 0.0) return observed_rates(events, observed_days_);
    return std::nullopt;
  }

  int run_report() {
    auto m = manifest("report");
    auto rep = read_report(fit_in_);
    m.inputs.push_back(fit_in_);
    std::vector<RatedEvent> events;
    if (!events_in_.empty()) {
      if (!(observed_days_ > 0.0)) throw UsageError("--events requires --days");
      auto ingested = ingest_file(events_in_);
      ingested.require_clean();
      events = std::move(ingested.events);
      m.inputs.push_back(events_in_);
    }
    if (!observed_.empty()) m.inputs.push_back(observed_);
    auto observed = observed_from_flags(events);
    if (observed) attach_observed(rep, *observed, wear_hours_);
    write_report(out_path_, rep);
    m.outputs.push_back(out_path_);
    m.config = {{"wear_hours", wear_hours_}, {"format", format_}};
    print_report(rep);
    emit_manifest(m, out_path_ + ".manifest.json");
    return kOk;
  }

  int run_pipeline() {
    auto m = manifest("pipeline");
    const auto cfg = sim_.config(seed_, threads_);
    const std::string dir = out_dir_;
    auto at = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };
    m.seed = seed_;

    std::string events_path = input_;
    if (input_.empty()) {
      const auto spec = load_synth_spec();
      events_path = at("events.csv");
      write_events(events_path, generate(spec));
      m.config["synth"] = to_json(spec);
      if (!synth_spec_.empty()) m.inputs.push_back(synth_spec_);
      m.outputs.push_back(events_path);
    } else {
      m.inputs.push_back(input_);
    }

    auto load = load_cohort(events_path);
    m.config["simulation"] = sim_.describe(cfg);
    m.config["cohort"] = cohort_summary(load);
    const auto res = simulate_cohort(load, cfg);
    const auto rows = point_records(res.points);
    const auto points_path = at(std::string("points") + extension(format()));
    write_points(points_path, rows);
    m.outputs.push_back(points_path);

    const auto curves = curves_by_category(rows);
    auto rep = fit_all_categories(curves);
    for (auto& p : write_fit_outputs(rep, at(std::string("fit") + extension(format())), at("fit.json")))
      m.outputs.push_back(p);
    if (plot_flag_) {
      write_file(at("plot.csv"), [&](std::ostream& o) { write_plot_csv(o, rep, curves); });
      m.outputs.push_back(at("plot.csv"));
    }

    if (!observed_.empty()) m.inputs.push_back(observed_);
    if (auto observed = observed_from_flags(load.events)) attach_observed(rep, *observed, wear_hours_);
    const auto report_path = at(std::string("report") + extension(format()));
    write_report(report_path, rep);
    m.outputs.push_back(report_path);
    m.config["wear_hours"] = wear_hours_;

    print_report(rep);
    const auto manifest_path = manifest_path_.empty() ? at("manifest.json") : manifest_path_;
    m.outputs.push_back(manifest_path);
    write_json_file(manifest_path, m.finish());
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> args_;

  std::string format_ = "csv";
  std::string manifest_path_;
  std::uint64_t seed_ = 0;
  unsigned threads_ = std::max(1u, std::thread::hardware_concurrency());

  std::string input_, out_path_, json_out_, plot_out_, participants_out_;
  std::string synth_spec_, write_spec_;
  std::string fit_in_, observed_, events_in_;
  double observed_days_ = 0.0;
  double wear_hours_ = kDefaultWearHours;
  bool synth_default_ = false;
  bool plot_flag_ = false;
  std::string out_dir_ = "stressfreq-out";
  SimFlags sim_;
};

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  App app(out, err);
  return app.run(args);
}

}  // namespace stressfreq::cli
