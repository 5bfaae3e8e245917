#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "pqlm/metrics.hpp"
#include "test_helpers.hpp"

using namespace pqlm;

TEST_CASE("worked four-document case") {
  // golds [0,0,1,2], preds [0,1,1,2]:
  //   class 0: precision 1, recall 1/2, f1 2/3, support 2
  //   class 1: precision 1/2, recall 1, f1 2/3, support 1
  //   class 2: precision 1, recall 1, f1 1, support 1
  // weighted f1 = (2*(2/3) + 1*(2/3) + 1*1) / 4 = 0.75
  const std::vector<int> golds = {0, 0, 1, 2};
  const std::vector<int> preds = {0, 1, 1, 2};

  CHECK(accuracy(preds, golds) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(weighted_f1(preds, golds) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(weighted_f1(preds, golds, 3) == doctest::Approx(0.75).epsilon(1e-12));
  // A class with zero support must not shift the weighted mean.
  CHECK(weighted_f1(preds, golds, 4) == doctest::Approx(0.75).epsilon(1e-12));

  const auto per = per_class_metrics(preds, golds, 3);
  REQUIRE(per.size() == 3);
  CHECK(per[0].precision == doctest::Approx(1.0));
  CHECK(per[0].recall == doctest::Approx(0.5));
  CHECK(per[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(per[0].support == 2);
  CHECK(per[1].precision == doctest::Approx(0.5));
  CHECK(per[1].recall == doctest::Approx(1.0));
  CHECK(per[1].support == 1);
  CHECK(per[2].f1 == doctest::Approx(1.0));

  const auto report = evaluate_predictions(preds, golds, 3);
  CHECK(report.accuracy == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.weighted_f1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.n_docs == 4);
  REQUIRE(report.per_class.size() == 3);
}

TEST_CASE("degenerate inputs") {
  SUBCASE("all correct") {
    const std::vector<int> v = {0, 1, 2, 3, 1};
    CHECK(accuracy(v, v) == doctest::Approx(1.0));
    CHECK(weighted_f1(v, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("single class everywhere") {
    const std::vector<int> v = {2, 2, 2};
    CHECK(accuracy(v, v) == doctest::Approx(1.0));
    CHECK(weighted_f1(v, v, 4) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("all wrong") {
    CHECK(accuracy({1, 1}, {0, 0}) == doctest::Approx(0.0));
    CHECK(weighted_f1({1, 1}, {0, 0}, 2) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(accuracy({0}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_f1({0}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(per_class_metrics({0}, {0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(per_class_metrics({0, 3}, {0, 1}, 2), std::invalid_argument);
}

TEST_CASE("metrics json parses back with the expected shape") {
  const std::vector<int> golds = {0, 1, 2, 3};
  const std::vector<int> preds = {0, 1, 2, 2};
  const auto report = evaluate_predictions(preds, golds, 4);
  const auto parsed = nlohmann::json::parse(metrics_to_json(report));

  CHECK(parsed.at("accuracy").get<double>() == doctest::Approx(0.75));
  CHECK(parsed.at("weighted_f1").get<double>() == doctest::Approx(report.weighted_f1));
  const auto& per = parsed.at("per_class");
  REQUIRE(per.is_object());
  REQUIRE(per.size() == 4);
  for (const char* name : {"negative", "neutral", "positive", "irrelevant"}) {
    REQUIRE(per.contains(name));
    const auto& cls = per.at(name);
    CHECK(cls.contains("precision"));
    CHECK(cls.contains("recall"));
    CHECK(cls.contains("f1"));
    CHECK(cls.contains("support"));
  }
  CHECK(per.at("irrelevant").at("support").get<int>() == 1);

  testutil::TempDir dir;
  const auto path = dir.file("metrics.json");
  write_metrics_json(path, report);
  CHECK(nlohmann::json::parse(testutil::slurp_text(path)) == parsed);
}
