#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stressfreq {

// Broad classes of failure. The CLI maps each class to its own exit code.
enum class ErrorClass { usage, io, schema, domain };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& what)
      : std::runtime_error(what), class_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorClass class_;
  std::string code_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorClass::io, "io", what) {}
};

// A malformed input row or document. `line` is 1-based; 0 when not applicable.
struct SchemaError : Error {
  SchemaError(std::size_t line, const std::string& what)
      : Error(ErrorClass::schema, "schema",
              line ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  std::size_t line;
};

struct InvalidWindow : Error {
  explicit InvalidWindow(const std::string& what) : Error(ErrorClass::domain, "invalid_window", what) {}
};

// Carries the indices of the empty buckets so the caller can decide on exclusion.
struct EmptyBucket : Error {
  EmptyBucket(std::string participant, std::vector<int> empty)
      : Error(ErrorClass::domain, "empty_bucket", describe(participant, empty)),
        participant_id(std::move(participant)),
        empty_buckets(std::move(empty)) {}

  std::string participant_id;
  std::vector<int> empty_buckets;

 private:
  static std::string describe(const std::string& pid, const std::vector<int>& empty) {
    std::string s = "participant '" + pid + "' has empty buckets:";
    for (int b : empty) s += " " + std::to_string(b);
    return s;
  }
};

struct InfeasibleBudget : Error {
  explicit InfeasibleBudget(const std::string& what)
      : Error(ErrorClass::domain, "infeasible_budget", what) {}
};

struct DegenerateInput : Error {
  explicit DegenerateInput(const std::string& what)
      : Error(ErrorClass::domain, "degenerate_input", what) {}
};

struct FatigueOutOfDomain : Error {
  explicit FatigueOutOfDomain(const std::string& what)
      : Error(ErrorClass::domain, "fatigue_out_of_domain", what) {}
};

struct EmptyCohort : Error {
  EmptyCohort() : Error(ErrorClass::domain, "empty_cohort", "cohort has no eligible participants") {}
};

struct InfeasibleK : Error {
  explicit InfeasibleK(const std::string& what) : Error(ErrorClass::domain, "infeasible_k", what) {}
};

struct InvalidConfig : Error {
  explicit InvalidConfig(const std::string& what)
      : Error(ErrorClass::domain, "invalid_config", what) {}
};

struct InsufficientPoints : Error {
  explicit InsufficientPoints(const std::string& what)
      : Error(ErrorClass::domain, "insufficient_points", what) {}
};

struct NonFiniteInput : Error {
  explicit NonFiniteInput(const std::string& what)
      : Error(ErrorClass::domain, "non_finite_input", what) {}
};

struct UnconvergedFit : Error {
  explicit UnconvergedFit(const std::string& what)
      : Error(ErrorClass::domain, "unconverged_fit", what) {}
};

struct InvalidSpec : Error {
  explicit InvalidSpec(const std::string& what) : Error(ErrorClass::domain, "invalid_spec", what) {}
};

}  // namespace stressfreq
