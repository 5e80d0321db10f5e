#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace stressfreq;
using Catch::Approx;

namespace {

std::vector<EfficiencyPoint> sample_points() {
  std::vector<EfficiencyPoint> pts;
  for (int k = 1; k <= 6; ++k) {
    EfficiencyPoint p;
    p.k = k;
    p.rho = k / 30.0;
    p.base_efficiency = 0.5;
    p.category_efficiency[index_of(StressorCategory::work)] = 0.3;
    p.category_efficiency[index_of(StressorCategory::chores)] = 0.2;
    p.stressors_per_day = model_value(3.0, 0.3, k);
    p.category_stressors_per_day[index_of(StressorCategory::work)] = model_value(1.8, 0.3, k);
    p.category_stressors_per_day[index_of(StressorCategory::chores)] = model_value(1.2, 0.3, k);
    p.prompts_delivered_per_day = k;
    p.responses_per_day = k;
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("point records cover ALL plus categories that ever occur") {
  auto recs = point_records(sample_points());
  CHECK(recs.size() == 6 * 3);
  auto curves = curves_by_category(recs);
  CHECK(curves.size() == 3);
  CHECK(curves.count(std::nullopt));
  CHECK(curves.count(StressorCategory::work));
  CHECK(!curves.count(StressorCategory::school));
}

TEST_CASE("points round-trip through both formats") {
  testing::TempDir dir;
  auto recs = point_records(sample_points());
  {
    std::ofstream out(dir.file("p.csv"));
    write_points_csv(out, recs);
  }
  testing::spit(dir.file("p.json"), points_to_json(recs).dump(2));
  for (const auto& path : {dir.file("p.csv"), dir.file("p.json")}) {
    auto back = read_points(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].k == recs[i].k);
      CHECK(back[i].category == recs[i].category);
      CHECK(back[i].stressors_per_day == recs[i].stressors_per_day);
    }
  }
}

TEST_CASE("points file needs its key columns") {
  testing::TempDir dir;
  testing::spit(dir.file("bad.csv"), "k,category\n1,ALL\n");
  CHECK_THROWS_AS(read_points(dir.file("bad.csv")), SchemaError);
  testing::spit(dir.file("cat.csv"), "k,category,stressors_per_day\n1,Commute,0.5\n");
  CHECK_THROWS_AS(read_points(dir.file("cat.csv")), SchemaError);
  CHECK_THROWS_AS(read_points(dir.file("missing.csv")), IoError);
}

TEST_CASE("report round-trips through both formats") {
  testing::TempDir dir;
  auto report = fit_all_categories(curves_by_category(point_records(sample_points())));
  report.rows.back().weekly_observed = 12.5;
  {
    std::ofstream out(dir.file("r.csv"));
    write_report_csv(out, report);
  }
  testing::spit(dir.file("r.json"), report_to_json(report).dump(2));
  for (const auto& path : {dir.file("r.csv"), dir.file("r.json")}) {
    auto back = read_report(path);
    REQUIRE(back.rows.size() == report.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
      CHECK(back.rows[i].category == report.rows[i].category);
      REQUIRE(back.rows[i].fit);
      CHECK(back.rows[i].fit->S == report.rows[i].fit->S);
      CHECK(back.rows[i].fit->a == report.rows[i].fit->a);
      CHECK(back.rows[i].weekly_observed == report.rows[i].weekly_observed);
    }
  }
}

TEST_CASE("observed rates per participant-day") {
  std::vector<RatedEvent> ev = {{"A", 500, 0.1, true, StressorCategory::work},
                                {"A", 600, 0.2, true, StressorCategory::work},
                                {"B", 500, 0.3, true, StressorCategory::chores},
                                {"B", 700, 0.3, false, std::nullopt}};
  auto r = observed_rates(ev, 10);
  CHECK(r.at(std::nullopt) == Approx(3.0 / 20));
  CHECK(r.at(StressorCategory::work) == Approx(2.0 / 20));
  CHECK(r.at(StressorCategory::chores) == Approx(1.0 / 20));
  CHECK_THROWS_AS(observed_rates(ev, 0), DegenerateInput);
  CHECK_THROWS_AS(observed_rates({}, 5), EmptyCohort);
}

TEST_CASE("observed rates file") {
  testing::TempDir dir;
  testing::spit(dir.file("o.csv"), "category,stressors_per_day\nWork,0.5\nAll Stressors,1.62\n");
  auto o = read_observed(dir.file("o.csv"));
  CHECK(o.at(std::nullopt) == 1.62);
  CHECK(o.at(StressorCategory::work) == 0.5);
}

TEST_CASE("csv quoting and number formatting") {
  CHECK(csv::quote("Health, Fatigue, or Pain") == "\"Health, Fatigue, or Pain\"");
  CHECK(csv::quote("Work") == "Work");
  auto f = csv::split_line("a,\"b,\"\"c\"\"\",d", 1);
  REQUIRE(f.size() == 3);
  CHECK(f[1] == "b,\"c\"");
  CHECK_THROWS_AS(csv::split_line("a,\"b", 4), SchemaError);
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(std::stod(csv::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
