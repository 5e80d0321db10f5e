#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace stressfreq {

// Closed stressor taxonomy. Every reported stressor belongs to exactly one.
enum class StressorCategory : int {
  work = 0,
  health_fatigue_pain,
  transportation,
  school,
  emotional_turmoil,
  social_relationships,
  family_issues,
  everyday_decision_making,
  playing_games_sports,
  chores,
  financial_problem,
  other,
};

inline constexpr std::size_t kCategoryCount = 12;

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryLabels = {
    "Work",
    "Health, Fatigue, or Pain",
    "Transportation",
    "School",
    "Emotional Turmoil",
    "Social Relationships",
    "Family Issues",
    "Everyday Decision Making",
    "Playing games/sports",
    "Chores",
    "Financial Problem",
    "Other",
};

// Category column value used for the all-stressors aggregate in points files.
inline constexpr std::string_view kAllCategoryToken = "ALL";
// Row label used for the aggregate in saturation reports.
inline constexpr std::string_view kAllStressorsLabel = "All Stressors";

inline constexpr std::array<StressorCategory, kCategoryCount> all_categories() {
  std::array<StressorCategory, kCategoryCount> out{};
  for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = static_cast<StressorCategory>(i);
  return out;
}

constexpr std::size_t index_of(StressorCategory c) { return static_cast<std::size_t>(c); }

constexpr std::string_view label(StressorCategory c) { return kCategoryLabels[index_of(c)]; }

// Exact label match; labels are part of the file contract.
inline std::optional<StressorCategory> parse_category(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (kCategoryLabels[i] == text) return static_cast<StressorCategory>(i);
  return std::nullopt;
}

// Category or the aggregate; nullopt means all stressors.
using CategoryKey = std::optional<StressorCategory>;

inline std::string key_token(const CategoryKey& key) {
  return key ? std::string(label(*key)) : std::string(kAllCategoryToken);
}

inline std::string key_label(const CategoryKey& key) {
  return key ? std::string(label(*key)) : std::string(kAllStressorsLabel);
}

// Accepts a category label, "ALL" or "All Stressors".
inline std::optional<CategoryKey> parse_key(std::string_view text) {
  if (text == kAllCategoryToken || text == kAllStressorsLabel) return CategoryKey{};
  if (auto c = parse_category(text)) return CategoryKey{*c};
  return std::nullopt;
}

}  // namespace stressfreq
