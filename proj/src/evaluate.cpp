#include "flairkit/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "flairkit/nifti.hpp"
#include "flairkit/postprocess.hpp"

namespace flairkit {

namespace fs = std::filesystem;

namespace {

struct CaseWork {
  CaseRecord record;
  int fold = 0;
  bool excluded = false;
  std::optional<std::string> error;
  std::vector<CaseEvaluation> evaluations;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void run_case(CaseWork& w, const Config& config, const fs::path& base) {
  try {
    CaseRecord& rec = w.record;
    const BinaryMask gt = load_mask(resolve(base, rec.gt_path));
    if (!rec.gt_ml) rec.gt_ml = mask_volume_ml(gt);
    if (!apply_exclusion({rec}, config.cohort.exclusion_ml).excluded.empty()) {
      w.excluded = true;
      return;
    }
    ProbabilityMap prob = load_probability(resolve(base, rec.prob_path));
    require_same_geometry(gt.geometry(), prob.geometry(), "prediction vs ground truth");
    if (rec.brain_mask_path) prob = apply_brain_mask(prob, load_mask(resolve(base, *rec.brain_mask_path)));
    std::optional<BinaryMask> tumor;
    if (rec.target == Target::SNFH && rec.tumor_mask_path) tumor = load_mask(resolve(base, *rec.tumor_mask_path));
    w.evaluations = evaluate_thresholds(prob, gt, config.thresholds, config.evaluation, tumor ? &*tumor : nullptr);
  } catch (const std::exception& e) {
    w.error = e.what();
  }
}

void run_all(std::vector<CaseWork>& work, const Config& config, const fs::path& base) {
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.jobs, 1)), 1, work.size());
  if (jobs <= 1) {
    for (auto& w : work)
      if (!w.error) run_case(w, config, base);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < work.size(); i = next++)
        if (!work[i].error) run_case(work[i], config, base);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

EvaluationResult run_evaluation(const std::vector<CaseRecord>& records, const std::optional<FoldPlan>& plan,
                                const Config& config, const fs::path& base_dir) {
  std::vector<CaseWork> work;
  for (const auto& r : records) work.push_back({r, 0, false, std::nullopt, {}});
  std::sort(work.begin(), work.end(), [](const auto& a, const auto& b) { return a.record.case_id < b.record.case_id; });
  for (std::size_t i = 1; i < work.size(); ++i)
    if (work[i].record.case_id == work[i - 1].record.case_id)
      throw Error("duplicate case_id '" + work[i].record.case_id + "'");

  for (auto& w : work) {
    try {
      w.record.validate();
      if (plan) w.fold = plan->fold_of(w.record.patient_id);
    } catch (const std::exception& e) {
      w.error = e.what();
    }
  }
  if (!work.empty()) run_all(work, config, base_dir);

  EvaluationResult result;
  std::set<int> folds;
  for (const auto& w : work) {
    if (w.error) {
      result.failures.push_back({w.record.case_id, *w.error});
    } else if (w.excluded) {
      result.excluded.push_back(w.record.case_id);
    } else {
      folds.insert(w.fold);
    }
  }

  for (const Target target : {Target::FH, Target::SNFH}) {
    for (const int fold : folds) {
      int select_fold = fold;
      if (plan) {
        for (const auto& rot : plan->rotations)
          if (rot.test == fold) select_fold = rot.val;
      }
      auto members = [&](int f) {
        std::vector<const CaseWork*> out;
        for (const auto& w : work)
          if (!w.error && !w.excluded && w.fold == f && w.record.target == target) out.push_back(&w);
        return out;
      };
      const auto test_cases = members(fold);
      if (test_cases.empty()) continue;
      auto selection = members(select_fold);
      if (selection.empty()) {
        select_fold = fold;
        selection = test_cases;
      }
      std::vector<std::vector<CaseEvaluation>> per_case;
      for (const auto* w : selection) per_case.push_back(w->evaluations);
      const SweepResult sweep = select_threshold(per_case, config.thresholds);
      result.thresholds.push_back({fold, target, select_fold, sweep.best_threshold,
                                   sweep.scores[sweep.best_index].mean_dice, selection.size()});
      for (const auto* w : test_cases) {
        result.cases.push_back(
            make_case_metrics(w->record, fold, sweep.best_threshold, w->evaluations[sweep.best_index]));
      }
    }
  }
  std::sort(result.cases.begin(), result.cases.end(),
            [](const auto& a, const auto& b) { return a.case_id < b.case_id; });

  for (const auto& w : work) {
    if (w.error || w.excluded) continue;
    for (std::size_t t = 0; t < config.thresholds.size(); ++t)
      result.all_thresholds.push_back(make_case_metrics(w.record, w.fold, config.thresholds[t], w.evaluations[t]));
  }
  if (!result.cases.empty()) result.table = aggregate(result.cases);
  return result;
}

void write_evaluation(const EvaluationResult& result, const Config& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    return out;
  };
  {
    auto out = open("cases.csv");
    write_case_metrics(out, result.cases);
  }
  {
    auto out = open("cases_all_thresholds.csv");
    write_case_metrics(out, result.all_thresholds);
  }
  open("table.md") << emit_table(result.table, TableFormat::Markdown, std::cerr);
  open("table.csv") << emit_table(result.table, TableFormat::Csv, std::cerr);
  open("table.json") << emit_table(result.table, TableFormat::Json, std::cerr);
  open("scatter.csv") << emit_scatter_data(result.cases);

  nlohmann::json meta;
  meta["n_evaluated"] = result.cases.size();
  meta["excluded"] = result.excluded;
  auto failures = nlohmann::json::array();
  for (const auto& f : result.failures) failures.push_back({{"case_id", f.case_id}, {"message", f.message}});
  meta["failures"] = failures;
  auto thresholds = nlohmann::json::array();
  for (const auto& t : result.thresholds) {
    thresholds.push_back({{"fold", t.fold},
                          {"target", to_string(t.target)},
                          {"selected_on_fold", t.selected_on},
                          {"threshold", t.threshold},
                          {"mean_selection_score", t.mean_score},
                          {"n_selection_cases", t.n_selection_cases}});
  }
  meta["best_thresholds"] = thresholds;
  meta["config"] = config;
  open("metadata.json") << meta.dump(2) << '\n';
}

}  // namespace flairkit
