#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "test_support.hpp"

using namespace stressfreq;
using Catch::Approx;

namespace {

IngestResult ingest_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_csv(in);
}

const std::string kHeader = "participant_id,time_of_day_min,likelihood,responded,category\n";

std::vector<RatedEvent> increasing(int n, const std::string& pid = "P1") {
  std::vector<RatedEvent> ev;
  for (int i = 0; i < n; ++i) ev.push_back({pid, 480.0 + i, 0.01 * (i + 1), true, std::nullopt});
  return ev;
}

std::vector<RatedEvent> random_events(std::mt19937_64& rng, int participants, int per_participant,
                                      bool with_ties) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 9);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> cat(0, kCategoryCount - 1);
  std::vector<RatedEvent> ev;
  for (int p = 0; p < participants; ++p) {
    std::set<double> used;
    for (int i = 0; i < per_participant; ++i) {
      double t;
      do t = std::floor(u(rng) * 1440.0 * 4.0) / 4.0;
      while (!used.insert(t).second);
      RatedEvent e{"p" + std::to_string(p), t, with_ties ? coarse(rng) / 10.0 : u(rng), coin(rng), std::nullopt};
      if (e.responded && coin(rng)) e.category = static_cast<StressorCategory>(cat(rng));
      ev.push_back(e);
    }
  }
  return ev;
}

}  // namespace

TEST_CASE("well-formed three-row table ingests cleanly") {
  auto r = ingest_text(kHeader +
                       "P01,540,0.91,true,Work\n"
                       "P01,600.5,0.12,false,\n"
                       "P02,700,0.5,true,\"Health, Fatigue, or Pain\"\n");
  REQUIRE(r.clean());
  REQUIRE(r.events.size() == 3);
  CHECK(r.events[0].category == StressorCategory::work);
  CHECK(!r.events[1].responded);
  CHECK(!r.events[1].category);
  CHECK(r.events[2].category == StressorCategory::health_fatigue_pain);
  CHECK(r.events[1].time_of_day == 600.5);
}

TEST_CASE("category on an unanswered event is rejected") {
  auto r = ingest_text(kHeader + "P01,540,0.9,false,Work\n");
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].line == 2);
  CHECK_THROWS_AS(r.require_clean(), SchemaError);
}

TEST_CASE("unknown category names the offending row") {
  auto r = ingest_text(kHeader + "P01,540,0.9,true,Work\nP01,541,0.8,true,Commute\n");
  CHECK(r.events.size() == 1);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].line == 3);
  CHECK(r.rejected[0].message.find("Commute") != std::string::npos);
  try {
    r.require_clean();
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("malformed rows are reported and skipped") {
  auto r = ingest_text(kHeader +
                       "P01,540,0.9,true,Work\n"
                       "P01,abc,0.9,true,Work\n"
                       "P01,1440,0.9,true,Work\n"
                       "P01,600,nan,true,Work\n"
                       "P01,540,0.3,true,\n"
                       ",610,0.3,true,\n"
                       "P01,620,0.3,maybe,\n"
                       "P01,630,0.3\n");
  CHECK(r.events.size() == 1);
  CHECK(r.rejected.size() == 7);
  for (std::size_t i = 1; i < r.rejected.size(); ++i) CHECK(r.rejected[i - 1].line < r.rejected[i].line);
}

TEST_CASE("missing column is a schema error") {
  std::istringstream in("participant_id,time_of_day_min,likelihood\nP1,1,0.5\n");
  CHECK_THROWS_AS(ingest_csv(in), SchemaError);
}

TEST_CASE("json ingest accepts both layouts") {
  auto arr = nlohmann::json::parse(R"([{"participant_id":"A","time_of_day_min":500,"likelihood":0.4,
                                         "responded":true,"category":"Chores"}])");
  auto obj = nlohmann::json{{"events", arr}};
  auto a = ingest_json(arr), b = ingest_json(obj);
  REQUIRE(a.clean());
  REQUIRE(b.clean());
  CHECK(a.events == b.events);
  CHECK(a.events[0].category == StressorCategory::chores);
}

TEST_CASE("window filter boundaries") {
  std::vector<RatedEvent> ev = {{"P", 479, 0.1, true, {}}, {"P", 480, 0.2, true, {}},
                                {"P", 1199.5, 0.3, true, {}}, {"P", 1200, 0.4, true, {}}};
  auto kept = filter_window(ev);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].time_of_day == 480);
  CHECK(kept[1].time_of_day == 1199.5);
  CHECK(filter_window(ev, 0, 1440) == ev);
  CHECK_THROWS_AS(filter_window(ev, 1200, 480), InvalidWindow);
  CHECK_THROWS_AS(filter_window(ev, 0, 1441), InvalidWindow);
}

TEST_CASE("twenty increasing likelihoods fill one bucket each") {
  auto p = bucketize(increasing(20), "P1");
  for (int b = 0; b < kBucketCount; ++b) {
    REQUIRE(p.buckets[b].size() == 1);
    CHECK(p.buckets[b][0].percentile == Approx(5.0 * (b + 1)));
  }
}

TEST_CASE("exact multiples of five fall into the lower bucket") {
  CHECK(bucket_for_rank(2, 20) == 0);    // 5th percentile
  CHECK(bucket_for_rank(4, 20) == 1);    // 10th
  CHECK(bucket_for_rank(40, 20) == 19);  // 100th
  CHECK(bucket_for_rank(3, 20) == 1);    // 7.5th
  CHECK(bucket_for_rank(1, 1000) == 0);
}

TEST_CASE("the top event lands in bucket 19") {
  auto p = stratify(increasing(37), "P1");
  REQUIRE(!p.buckets[19].empty());
  CHECK(p.buckets[19].back().percentile == Approx(100.0));
}

TEST_CASE("all-tied likelihoods leave buckets empty") {
  std::vector<RatedEvent> ev;
  for (int i = 0; i < 40; ++i) ev.push_back({"T", 480.0 + i, 0.5, true, {}});
  try {
    bucketize(ev, "T");
    FAIL("expected EmptyBucket");
  } catch (const EmptyBucket& e) {
    CHECK(e.participant_id == "T");
    CHECK(e.empty_buckets.size() == 19);
  }
  auto p = stratify(ev, "T");
  CHECK(p.event_count() == 40);
  CHECK(p.buckets[10].size() == 40);  // average rank 20.5 of 40 -> 51.25th percentile
}

TEST_CASE("eligible_cohort separates incomplete participants") {
  auto ev = increasing(40, "A");
  auto few = increasing(10, "B");
  ev.insert(ev.end(), few.begin(), few.end());
  auto sel = eligible_cohort(stratify_all(ev));
  REQUIRE(sel.retained.size() == 1);
  CHECK(sel.retained[0].participant_id == "A");
  REQUIRE(sel.excluded.size() == 1);
  CHECK(sel.excluded[0].participant_id == "B");
  CHECK(sel.excluded[0].empty_buckets.size() == 10);
  CHECK(sel.considered() == 2);

  auto none = eligible_cohort({});
  CHECK(none.retained.empty());
  CHECK(none.excluded.empty());
}

TEST_CASE("property: stratification partitions events and respects likelihood order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const bool ties = trial % 2 == 1;
    auto ev = random_events(rng, 1, 20 + trial * 7, ties);
    auto p = stratify(ev, "p0");
    CHECK(p.event_count() == ev.size());

    std::multiset<double> seen;
    for (const auto& b : p.buckets)
      for (const auto& e : b) seen.insert(e.event.time_of_day);
    std::multiset<double> want;
    for (const auto& e : ev) want.insert(e.time_of_day);
    CHECK(seen == want);

    std::vector<std::pair<double, int>> lb;
    for (int b = 0; b < kBucketCount; ++b)
      for (const auto& e : p.buckets[b]) {
        CHECK(e.percentile > 5.0 * b);
        CHECK(e.percentile <= 5.0 * (b + 1) + 1e-12);
        lb.push_back({e.event.likelihood, b});
      }
    for (const auto& [l1, b1] : lb)
      for (const auto& [l2, b2] : lb) {
        if (l1 < l2) CHECK(b1 <= b2);
        if (l1 == l2) CHECK(b1 == b2);
      }
  }
}

TEST_CASE("property: stratify_all groups by participant") {
  std::mt19937_64 rng(11);
  auto ev = random_events(rng, 5, 60, false);
  auto all = stratify_all(ev);
  REQUIRE(all.size() == 5);
  for (const auto& p : all) CHECK(p.event_count() == 60);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].participant_id < all[i].participant_id);
}

TEST_CASE("property: emit then ingest is the identity") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto ev = random_events(rng, 3, 30, trial % 2 == 0);
    std::ostringstream out;
    write_events_csv(out, ev);
    std::istringstream in(out.str());
    auto back = ingest_csv(in);
    REQUIRE(back.clean());
    CHECK(back.events == ev);

    auto j = ingest_json(nlohmann::json::parse(events_to_json(ev).dump()));
    REQUIRE(j.clean());
    CHECK(j.events == ev);
  }
}
