#include "flairkit/config.hpp"

#include <fstream>

namespace flairkit {

using nlohmann::json;

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) throw Error("config section '" + std::string(where) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error("unknown config key '" + std::string(where) + "." + key + "'");
    }
  }
}

std::string to_string(Connectivity c) { return c == Connectivity::Six ? "6" : "26"; }

Connectivity parse_connectivity(const json& j) {
  const int v = j.is_string() ? std::stoi(j.get<std::string>()) : j.get<int>();
  if (v == 6) return Connectivity::Six;
  if (v == 26) return Connectivity::TwentySix;
  throw Error("connectivity must be 6 or 26");
}

json box_to_json(const CropBox& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

json geometry_to_json(const Geometry& g) {
  return {{"dims", g.dims}, {"spacing", g.spacing}, {"origin", g.origin}};
}

Geometry geometry_from_json(const json& j) {
  Geometry g;
  g.dims = j.at("dims").get<Index3>();
  g.spacing = j.at("spacing").get<Vec3>();
  g.origin = j.at("origin").get<Vec3>();
  g.validate();
  return g;
}

}  // namespace

void to_json(json& j, const PreprocessConfig& c) {
  j = {{"target_spacing", c.target_spacing},
       {"head_threshold_fraction", c.head_threshold_fraction},
       {"crop_margin", c.crop_margin},
       {"clip_low_pct", c.clip_low_pct},
       {"clip_high_pct", c.clip_high_pct},
       {"normalize", c.normalize == NormalizeMode::ZScore ? "zscore" : "mean_only"}};
}

void from_json(const json& j, PreprocessConfig& c) {
  reject_unknown(j, {"target_spacing", "head_threshold_fraction", "crop_margin", "clip_low_pct", "clip_high_pct",
                     "normalize"},
                 "preprocess");
  get_if(j, "target_spacing", c.target_spacing);
  get_if(j, "head_threshold_fraction", c.head_threshold_fraction);
  get_if(j, "crop_margin", c.crop_margin);
  get_if(j, "clip_low_pct", c.clip_low_pct);
  get_if(j, "clip_high_pct", c.clip_high_pct);
  if (j.contains("normalize")) {
    const auto mode = j.at("normalize").get<std::string>();
    if (mode == "zscore") {
      c.normalize = NormalizeMode::ZScore;
    } else if (mode == "mean_only") {
      c.normalize = NormalizeMode::MeanOnly;
    } else {
      throw Error("preprocess.normalize must be 'zscore' or 'mean_only'");
    }
  }
}

void to_json(json& j, const AugmentConfig& c) {
  j = {{"crop_size", c.crop_size},
       {"rotation_range_deg", c.rotation_range_deg},
       {"rotation_axes", c.rotation_axes},
       {"flip_axes", c.flip_axes},
       {"zoom_max", c.zoom_max},
       {"translate_max", c.translate_max},
       {"intensity_scale_shift_max", c.intensity_scale_shift_max},
       {"noise_std_max", c.noise_std_max},
       {"gamma_range", c.gamma_range},
       {"patch_size", c.patch_size},
       {"patch_max_count", c.patch_max_count},
       {"per_transform_probability", c.per_transform_probability},
       {"seed", c.seed}};
}

void from_json(const json& j, AugmentConfig& c) {
  reject_unknown(j, {"crop_size", "rotation_range_deg", "rotation_axes", "flip_axes", "zoom_max", "translate_max",
                     "intensity_scale_shift_max", "noise_std_max", "gamma_range", "patch_size", "patch_max_count",
                     "per_transform_probability", "seed"},
                 "augment");
  get_if(j, "crop_size", c.crop_size);
  get_if(j, "rotation_range_deg", c.rotation_range_deg);
  get_if(j, "rotation_axes", c.rotation_axes);
  get_if(j, "flip_axes", c.flip_axes);
  get_if(j, "zoom_max", c.zoom_max);
  get_if(j, "translate_max", c.translate_max);
  get_if(j, "intensity_scale_shift_max", c.intensity_scale_shift_max);
  get_if(j, "noise_std_max", c.noise_std_max);
  get_if(j, "gamma_range", c.gamma_range);
  get_if(j, "patch_size", c.patch_size);
  get_if(j, "patch_max_count", c.patch_max_count);
  get_if(j, "per_transform_probability", c.per_transform_probability);
  get_if(j, "seed", c.seed);
  c.validate();
}

void to_json(json& j, const Config& c) {
  const auto& ev = c.evaluation;
  j = {{"preprocess", c.preprocess},
       {"augment", c.augment},
       {"sliding_window", {{"patch_size", c.sliding_window.patch_size}, {"overlap", c.sliding_window.overlap}}},
       {"detection",
        {{"positive_threshold_ml", ev.detection.positive_threshold_ml}, {"tp_dice_min", ev.detection.tp_dice_min}}},
       {"component_filter",
        {{"min_ml", ev.filter.min_ml},
         {"min_consecutive_slices", ev.filter.min_consecutive_slices},
         {"slice_axis", ev.filter.slice_axis},
         {"connectivity", std::stoi(to_string(ev.filter.connectivity))}}},
       {"object",
        {{"unmatched_pred_min_ml", ev.object.unmatched_pred_min_ml},
         {"weighting", ev.object.weighting == ObjectWeighting::Unweighted ? "unweighted" : "volume"}}},
       {"thresholds", c.thresholds},
       {"cohort",
        {{"exclusion_ml", c.cohort.exclusion_ml}, {"folds", c.cohort.folds}, {"volume_bins", c.cohort.volume_bins}}},
       {"seed", c.seed},
       {"jobs", c.jobs}};
}

void from_json(const json& j, Config& c) {
  reject_unknown(j, {"preprocess", "augment", "sliding_window", "detection", "component_filter", "object",
                     "thresholds", "cohort", "seed", "jobs"},
                 "config");
  get_if(j, "preprocess", c.preprocess);
  get_if(j, "augment", c.augment);
  if (j.contains("sliding_window")) {
    const auto& s = j.at("sliding_window");
    reject_unknown(s, {"patch_size", "overlap"}, "sliding_window");
    if (s.contains("patch_size")) {
      const auto& p = s.at("patch_size");
      if (p.is_number_integer()) {
        const auto v = p.get<std::int64_t>();
        c.sliding_window.patch_size = {v, v, v};
      } else {
        c.sliding_window.patch_size = p.get<Index3>();
      }
    }
    get_if(s, "overlap", c.sliding_window.overlap);
  }
  auto& ev = c.evaluation;
  if (j.contains("detection")) {
    const auto& d = j.at("detection");
    reject_unknown(d, {"positive_threshold_ml", "tp_dice_min"}, "detection");
    get_if(d, "positive_threshold_ml", ev.detection.positive_threshold_ml);
    get_if(d, "tp_dice_min", ev.detection.tp_dice_min);
  }
  if (j.contains("component_filter")) {
    const auto& f = j.at("component_filter");
    reject_unknown(f, {"min_ml", "min_consecutive_slices", "slice_axis", "connectivity"}, "component_filter");
    get_if(f, "min_ml", ev.filter.min_ml);
    get_if(f, "min_consecutive_slices", ev.filter.min_consecutive_slices);
    get_if(f, "slice_axis", ev.filter.slice_axis);
    if (f.contains("connectivity")) ev.filter.connectivity = parse_connectivity(f.at("connectivity"));
  }
  if (j.contains("object")) {
    const auto& o = j.at("object");
    reject_unknown(o, {"unmatched_pred_min_ml", "weighting"}, "object");
    get_if(o, "unmatched_pred_min_ml", ev.object.unmatched_pred_min_ml);
    if (o.contains("weighting")) {
      const auto w = o.at("weighting").get<std::string>();
      if (w == "unweighted") {
        ev.object.weighting = ObjectWeighting::Unweighted;
      } else if (w == "volume") {
        ev.object.weighting = ObjectWeighting::Volume;
      } else {
        throw Error("object.weighting must be 'unweighted' or 'volume'");
      }
    }
  }
  get_if(j, "thresholds", c.thresholds);
  if (j.contains("cohort")) {
    const auto& co = j.at("cohort");
    reject_unknown(co, {"exclusion_ml", "folds", "volume_bins"}, "cohort");
    get_if(co, "exclusion_ml", c.cohort.exclusion_ml);
    get_if(co, "folds", c.cohort.folds);
    get_if(co, "volume_bins", c.cohort.volume_bins);
  }
  get_if(j, "seed", c.seed);
  get_if(j, "jobs", c.jobs);
}

void to_json(json& j, const PreprocMeta& m) {
  j = {{"original", geometry_to_json(m.original)},
       {"resampled", geometry_to_json(m.resampled)},
       {"crop", box_to_json(m.crop)},
       {"clip_low", m.clip_low},
       {"clip_high", m.clip_high},
       {"nonzero_mean", m.nonzero_mean},
       {"nonzero_std", m.nonzero_std}};
}

void from_json(const json& j, PreprocMeta& m) {
  m.original = geometry_from_json(j.at("original"));
  m.resampled = geometry_from_json(j.at("resampled"));
  m.crop.lo = j.at("crop").at("lo").get<Index3>();
  m.crop.hi = j.at("crop").at("hi").get<Index3>();
  m.clip_low = j.at("clip_low").get<double>();
  m.clip_high = j.at("clip_high").get<double>();
  m.nonzero_mean = j.at("nonzero_mean").get<double>();
  m.nonzero_std = j.at("nonzero_std").get<double>();
}

Config parse_config(const json& j) {
  Config c;
  from_json(j, c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace flairkit
