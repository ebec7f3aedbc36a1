#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "flairkit/cohort.hpp"
#include "flairkit/config.hpp"
#include "flairkit/evaluate.hpp"
#include "flairkit/nifti.hpp"
#include "flairkit/phantom.hpp"
#include "flairkit/postprocess.hpp"
#include "flairkit/preprocess.hpp"
#include "flairkit/report.hpp"
#include "flairkit/sliding_window.hpp"

namespace fs = std::filesystem;
using namespace flairkit;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kIncomplete = 2;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLAIR hyperintensity segmentation pipeline tools"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "JSON file overriding pipeline constants")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for every randomized step");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Resample, crop, clip and normalize a FLAIR volume");
  std::string pre_in, pre_out, pre_mask, pre_mask_out, pre_meta;
  pre->add_option("--in", pre_in)->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out)->required();
  pre->add_option("--mask", pre_mask, "Mask mapped through the same geometry")->check(CLI::ExistingFile);
  pre->add_option("--mask-out", pre_mask_out);
  pre->add_option("--meta", pre_meta, "Sidecar JSON (default: <out>.json)");

  // infer
  auto* inf = app.add_subcommand("infer", "Sliding-window inference with a pluggable predictor");
  std::string inf_in, inf_out, inf_predictor;
  std::vector<std::int64_t> inf_patch;
  std::optional<double> inf_overlap;
  inf->add_option("--in", inf_in)->required()->check(CLI::ExistingFile);
  inf->add_option("--out", inf_out)->required();
  inf->add_option("--predictor", inf_predictor, "constant:<p> | sphere:<cx,cy,cz,r> | external:<dir>")->required();
  inf->add_option("--patch", inf_patch, "Patch edge, or three edges")->expected(1, 3);
  inf->add_option("--overlap", inf_overlap);

  // postprocess
  auto* post = app.add_subcommand("postprocess", "Brain mask, binarize and component filter a probability map");
  std::string post_prob, post_brain, post_out;
  double post_threshold = 0.5;
  post->add_option("--prob", post_prob)->required()->check(CLI::ExistingFile);
  post->add_option("--brain", post_brain)->check(CLI::ExistingFile);
  post->add_option("--threshold", post_threshold)->required()->check(CLI::Range(0.0, 1.0));
  post->add_option("--out", post_out)->required();

  // split
  auto* split = app.add_subcommand("split", "Patient-wise stratified fold plan");
  std::string split_manifest, split_out;
  std::optional<int> split_k;
  split->add_option("--manifest", split_manifest)->required()->check(CLI::ExistingFile);
  split->add_option("--k", split_k)->check(CLI::Range(2, 1000));
  split->add_option("--out", split_out)->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Threshold sweep, metrics and aggregate tables over a cohort");
  std::string eval_manifest, eval_folds, eval_out;
  eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--folds", eval_folds, "Fold plan JSON from `split`")->check(CLI::ExistingFile);
  eval->add_option("--out-dir", eval_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "Aggregate a per-case metrics CSV");
  std::string rep_cases, rep_format = "markdown", rep_out, rep_scatter;
  rep->add_option("--cases", rep_cases)->required()->check(CLI::ExistingFile);
  rep->add_option("--format", rep_format)->check(CLI::IsMember({"csv", "json", "markdown", "md"}));
  rep->add_option("--out", rep_out, "Table output (default: stdout)");
  rep->add_option("--scatter", rep_scatter, "Scatter-plot data CSV");

  // phantom
  auto* ph = app.add_subcommand("phantom", "Rasterize a synthetic ellipsoid phantom");
  std::string ph_spec, ph_vol, ph_mask;
  ph->add_option("--spec", ph_spec)->required()->check(CLI::ExistingFile);
  ph->add_option("--out-vol", ph_vol)->required();
  ph->add_option("--out-mask", ph_mask)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Config config = config_path.empty() ? Config{} : load_config(config_path);
    if (seed) config.seed = *seed;
    if (jobs) config.jobs = *jobs;

    if (*pre) {
      const ScalarVolume vol = load_volume(pre_in);
      const Preprocessed result = preprocess_pipeline(vol, config.preprocess);
      save_volume(result.volume, pre_out);
      if (!pre_mask.empty()) {
        if (pre_mask_out.empty()) throw Error("--mask requires --mask-out");
        save_volume(map_mask_forward(load_mask(pre_mask), result.meta), pre_mask_out);
      }
      nlohmann::json meta = result.meta;
      meta["config"] = config.preprocess;
      write_text(pre_meta.empty() ? pre_out + ".json" : pre_meta, meta.dump(2) + "\n");
      return kOk;
    }

    if (*inf) {
      Index3 patch = config.sliding_window.patch_size;
      if (inf_patch.size() == 1) patch = {inf_patch[0], inf_patch[0], inf_patch[0]};
      if (inf_patch.size() == 3) patch = {inf_patch[0], inf_patch[1], inf_patch[2]};
      if (inf_patch.size() == 2) throw Error("--patch takes one or three values");
      const double overlap = inf_overlap.value_or(config.sliding_window.overlap);
      const ScalarVolume vol = load_volume(inf_in);
      const auto predictor = make_predictor(inf_predictor, inf_in);
      const TileGrid grid = plan_tiles(vol.dims(), patch, overlap);
      save_volume(stitch(vol, *predictor, grid, config.jobs), inf_out);
      std::cerr << grid.windows.size() << " windows\n";
      return kOk;
    }

    if (*post) {
      ProbabilityMap prob = load_probability(post_prob);
      if (!post_brain.empty()) prob = apply_brain_mask(prob, load_mask(post_brain));
      const BinaryMask mask = filter_small_components(binarize(prob, post_threshold), config.evaluation.filter);
      save_volume(mask, post_out);
      return kOk;
    }

    if (*split) {
      auto records = read_manifest(fs::path(split_manifest));
      const fs::path base = fs::path(split_manifest).parent_path();
      for (auto& r : records) {
        if (r.gt_ml) continue;
        const fs::path gt(r.gt_path);
        r.gt_ml = mask_volume_ml(load_mask(gt.is_absolute() || base.empty() ? gt : base / gt));
      }
      const FoldPlan plan =
          stratified_split(records, split_k.value_or(config.cohort.folds), config.seed, config.cohort.volume_bins);
      write_text(split_out, nlohmann::json(plan).dump(2) + "\n");
      return kOk;
    }

    if (*eval) {
      const auto records = read_manifest(fs::path(eval_manifest));
      std::optional<FoldPlan> plan;
      if (!eval_folds.empty()) plan = read_json(eval_folds).get<FoldPlan>();
      const auto result = run_evaluation(records, plan, config, fs::path(eval_manifest).parent_path());
      write_evaluation(result, config, eval_out);
      std::cerr << result.cases.size() << " evaluated, " << result.excluded.size() << " excluded, "
                << result.failures.size() << " failed\n";
      for (const auto& f : result.failures) std::cerr << "  " << f.case_id << ": " << f.message << '\n';
      return result.complete() ? kOk : kIncomplete;
    }

    if (*rep) {
      std::ifstream in(rep_cases);
      if (!in) throw Error("cannot open " + rep_cases);
      const auto cases = read_case_metrics(in);
      std::vector<AggregateRow> rows;
      if (!cases.empty()) rows = aggregate(cases);
      const std::string table = emit_table(rows, parse_table_format(rep_format), std::cerr);
      if (rep_out.empty()) {
        std::cout << table;
      } else {
        write_text(rep_out, table);
      }
      if (!rep_scatter.empty()) write_text(rep_scatter, emit_scatter_data(cases));
      return kOk;
    }

    if (*ph) {
      PhantomSpec spec = read_json(ph_spec).get<PhantomSpec>();
      if (seed) spec.seed = *seed;
      const Phantom p = make_phantom(spec);
      save_volume(p.volume, ph_vol);
      save_volume(p.mask, ph_mask);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "flairkit: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
