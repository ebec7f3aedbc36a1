#pragma once

#include <filesystem>

#include <json.hpp>

#include "flairkit/augment.hpp"
#include "flairkit/postprocess.hpp"
#include "flairkit/preprocess.hpp"

namespace flairkit {

struct SlidingWindowConfig {
  Index3 patch_size{160, 160, 160};
  double overlap = 0.5;
};

struct CohortConfig {
  double exclusion_ml = 0.1;
  int folds = 5;
  std::vector<double> volume_bins{1.0, 10.0, 50.0};
};

/// Every tunable constant of the pipeline.
struct Config {
  PreprocessConfig preprocess;
  AugmentConfig augment;
  SlidingWindowConfig sliding_window;
  EvaluationRules evaluation;
  std::vector<double> thresholds = default_thresholds();
  CohortConfig cohort;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void to_json(nlohmann::json& j, const PreprocessConfig& c);
void from_json(const nlohmann::json& j, PreprocessConfig& c);
void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);
void to_json(nlohmann::json& j, const Config& c);
void from_json(const nlohmann::json& j, Config& c);

void to_json(nlohmann::json& j, const PreprocMeta& m);
void from_json(const nlohmann::json& j, PreprocMeta& m);

/// Missing keys keep their defaults; unknown keys are rejected.
Config load_config(const std::filesystem::path& path);
Config parse_config(const nlohmann::json& j);

}  // namespace flairkit
