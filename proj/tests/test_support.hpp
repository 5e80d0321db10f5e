#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stressfreq/stressfreq.hpp"

namespace testing {

using namespace stressfreq;

// Published per-category saturation results: S, a and the weekly column.
struct ReferenceRow {
  std::string_view label;
  double S;
  double a;
  double weekly;
};

inline constexpr std::array<ReferenceRow, 13> kReferenceTable = {{
    {"Work", 1.76, 0.12, 12.32},
    {"Health, Fatigue, or Pain", 0.59, 0.09, 4.13},
    {"Transportation", 0.55, 0.15, 3.85},
    {"School", 0.42, 0.12, 2.94},
    {"Emotional Turmoil", 0.40, 0.10, 2.80},
    {"Social Relationships", 0.39, 0.13, 2.73},
    {"Family Issues", 0.22, 0.16, 1.54},
    {"Everyday Decision Making", 0.20, 0.20, 1.40},
    {"Playing games/sports", 0.12, 0.31, 0.84},
    {"Chores", 0.07, 0.17, 0.49},
    {"Financial Problem", 0.03, 0.11, 0.21},
    {"Other", 0.79, 0.17, 5.53},
    {"All Stressors", 5.39, 0.14, 37.73},
}};

// Cohort with exactly known per-bucket stressor fractions: bucket j holds
// `per_bucket` events of which round(per_bucket * p(j)) carry `category`.
inline std::vector<ParticipantBuckets> exact_cohort(int participants, int per_bucket,
                                                    const std::function<double(int)>& p,
                                                    StressorCategory category = StressorCategory::work) {
  std::vector<RatedEvent> events;
  for (int i = 0; i < participants; ++i) {
    const std::string pid = "X" + std::to_string(1000 + i);
    int rank = 0;
    for (int j = 0; j < kBucketCount; ++j) {
      const int hits = static_cast<int>(std::lround(per_bucket * p(j)));
      for (int e = 0; e < per_bucket; ++e) {
        RatedEvent ev{pid, 480.0 + 0.01 * rank, 0.1 * i + 0.001 * rank, true, std::nullopt};
        if (e >= per_bucket - hits) ev.category = category;
        events.push_back(ev);
        ++rank;
      }
    }
  }
  return stratify_all(events);
}

inline double exact_fraction(int per_bucket, double p) {
  return std::lround(per_bucket * p) / static_cast<double>(per_bucket);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("stressfreq-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing
