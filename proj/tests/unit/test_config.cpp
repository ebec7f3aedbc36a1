#include <doctest.h>

#include <fstream>

#include "flairkit/config.hpp"
#include "helpers.hpp"

using namespace flairkit;
using namespace testing;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const Config c;
    CHECK(c.evaluation.detection.positive_threshold_ml == 0.1);
    CHECK(c.cohort.exclusion_ml == 0.1);
    CHECK(c.evaluation.filter.min_ml == 0.05);
    CHECK(c.thresholds.size() == 10);
    CHECK(c.sliding_window.patch_size == Index3{160, 160, 160});
    CHECK(c.jobs == 1);
  }

  TEST_CASE("JSON round trip") {
    Config c;
    c.seed = 99;
    c.sliding_window.overlap = 0.25;
    c.evaluation.filter.connectivity = Connectivity::Six;
    c.evaluation.object.weighting = ObjectWeighting::Volume;
    c.preprocess.normalize = NormalizeMode::MeanOnly;
    const nlohmann::json j = c;
    const Config back = parse_config(j);
    CHECK(nlohmann::json(back) == j);
    CHECK(back.evaluation.filter.connectivity == Connectivity::Six);
  }

  TEST_CASE("partial overrides keep defaults") {
    const Config c = parse_config(nlohmann::json::parse(R"({"sliding_window": {"patch_size": 96}, "seed": 4})"));
    CHECK(c.sliding_window.patch_size == Index3{96, 96, 96});
    CHECK(c.sliding_window.overlap == 0.5);
    CHECK(c.seed == 4);
    CHECK(c.preprocess.clip_high_pct == 99.5);
  }

  TEST_CASE("invalid input is rejected") {
    CHECK_THROWS(parse_config(nlohmann::json::parse(R"({"sliding_windw": {}})")));
    CHECK_THROWS(parse_config(nlohmann::json::parse(R"({"component_filter": {"connectivity": 8}})")));
    CHECK_THROWS(parse_config(nlohmann::json::parse(R"({"preprocess": {"normalize": "minmax"}})")));
    CHECK_THROWS(parse_config(nlohmann::json::parse(R"({"augment": {"crop_size": [1, 2]}})")));
  }

  TEST_CASE("load_config from file") {
    TempDir dir("config");
    std::ofstream(dir / "c.json") << R"({"cohort": {"folds": 3}})";
    CHECK(load_config(dir / "c.json").cohort.folds == 3);
    CHECK_THROWS(load_config(dir / "missing.json"));
  }
}
