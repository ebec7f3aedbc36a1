#include <doctest.h>

#include <fstream>
#include <sstream>

#include "flairkit/evaluate.hpp"
#include "flairkit/nifti.hpp"
#include "flairkit/phantom.hpp"
#include "flairkit/report.hpp"
#include "helpers.hpp"

using namespace flairkit;
using namespace testing;

namespace {

CaseMetrics tp_case(std::string id, double dice, double gt_ml = 5.0, double delta = 1.0,
                    Direction dir = Direction::Over) {
  CaseMetrics c;
  c.case_id = std::move(id);
  c.patient_id = "p_" + c.case_id;
  c.outcome = Outcome::TP;
  c.gt_ml = gt_ml;
  c.pred_ml = dir == Direction::Over ? gt_ml + delta : gt_ml - delta;
  c.voxel_dice = dice;
  c.dice = c.recall = c.precision = dice;
  c.hd95_mm = 2.0;
  c.direction = dir;
  c.delta_ml = delta;
  return c;
}

CaseMetrics other_case(std::string id, Outcome o, double gt_ml) {
  CaseMetrics c;
  c.case_id = std::move(id);
  c.patient_id = "p_" + c.case_id;
  c.outcome = o;
  c.gt_ml = gt_ml;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Phantom cohort on disk: identity predictions, one negative case.
std::vector<CaseRecord> write_cohort(const TempDir& dir, int n) {
  std::vector<CaseRecord> recs;
  for (int i = 0; i < n; ++i) {
    PhantomSpec spec;
    spec.geometry = geom(24, 24, 24);
    if (i != 0) spec.ellipsoids.push_back({{12, 12, 12}, {3.0 + i % 4, 4, 3}, 1.0});
    const Phantom p = make_phantom(spec);
    CaseRecord r;
    r.case_id = "case" + std::to_string(i);
    r.patient_id = "pat" + std::to_string(i / 2);
    r.tumor_type = i % 3 ? TumorType::Gli : TumorType::Met;
    r.gt_path = r.case_id + "_gt.nii.gz";
    r.prob_path = r.case_id + "_prob.nii.gz";
    save_volume(p.mask, dir / r.gt_path);
    save_volume(perturb_prediction(p.mask, Perturbation::identity()), dir / r.prob_path);
    recs.push_back(r);
  }
  return recs;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("mean and sample std over TP cases") {
    const std::vector<CaseMetrics> cases{tp_case("a", 0.1), tp_case("b", 0.2), tp_case("c", 0.3),
                                         other_case("d", Outcome::FN, 3.0), other_case("e", Outcome::TN, 0.0)};
    const auto rows = aggregate(cases);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].test_set == "Gli_A_pre");
    CHECK(rows[0].target == "FH");
    CHECK(rows[0].n_cases == 5);
    CHECK(rows[0].n_positive == 4);
    CHECK(rows[0].n_tp == 3);
    CHECK(*rows[0].detection_rate == 75.0);
    CHECK(rows[0].dice->mean == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(rows[0].dice->std == doctest::Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("over/under medians") {
    const std::vector<CaseMetrics> cases{tp_case("a", 0.9, 5, 1.34), tp_case("b", 0.9, 5, 6.89),
                                         tp_case("c", 0.9, 5, 3.30), tp_case("d", 0.9, 5, 0.5, Direction::Under)};
    const auto rows = aggregate(cases);
    REQUIRE(rows[0].over);
    CHECK(format_median_iqr(*rows[0].over) == "3.30 [1.34-6.89]");
    CHECK(rows[0].over->count == 3);
    CHECK(rows[0].under->count == 1);
    std::ostringstream diag;
    CHECK(emit_table(rows, TableFormat::Markdown, diag).find("| 3.30 [1.34-6.89] | 3 |") != std::string::npos);
  }

  TEST_CASE("group without TP") {
    const auto rows = aggregate({other_case("a", Outcome::FN, 2.0), other_case("b", Outcome::TN, 0.0)});
    REQUIRE(rows.size() == 1);
    CHECK(*rows[0].detection_rate == 0.0);
    CHECK_FALSE(rows[0].dice.has_value());
    CHECK_FALSE(rows[0].over.has_value());
    const auto negatives = aggregate({other_case("n", Outcome::TN, 0.0)});
    CHECK_FALSE(negatives[0].detection_rate.has_value());
    CHECK_THROWS_AS(aggregate({}), Error);
  }

  TEST_CASE("grouping and permutation invariance") {
    std::vector<CaseMetrics> cases;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int i = 0; i < 30; ++i) {
      CaseMetrics c = tp_case("c" + std::to_string(i), u(rng), u(rng) * 20, u(rng));
      c.source = i % 2 ? SourceGroup::B : SourceGroup::A;
      c.tumor_type = i % 3 ? TumorType::Gli : TumorType::Men;
      c.time_point = c.tumor_type == TumorType::Gli && i % 4 == 0 ? TimePoint::Post3 : TimePoint::Pre;
      if (c.source == SourceGroup::B && i % 5 == 0) c.target = Target::SNFH;
      cases.push_back(c);
    }
    const auto rows = aggregate(cases);
    std::ostringstream diag;
    const std::string md = emit_table(rows, TableFormat::Markdown, diag);
    for (int t = 0; t < 5; ++t) {
      std::shuffle(cases.begin(), cases.end(), rng);
      CHECK(emit_table(aggregate(cases), TableFormat::Markdown, diag) == md);
    }
    std::size_t total = 0;
    for (const auto& r : rows) total += r.n_cases;
    CHECK(total == cases.size());
    CHECK(rows.front().target == "FH");
    CHECK(rows.back().target == "SNFH");
  }

  TEST_CASE("markdown header") {
    std::ostringstream diag;
    const std::string md = emit_table(aggregate({tp_case("a", 0.5)}), TableFormat::Markdown, diag);
    CHECK(md.rfind("| Test set | Target | Detection rate | Dice | Recall | Precision | HD95 |", 0) == 0);
    CHECK(md.find("| Gli_A_pre | FH | 100.00 | 50.00±00.00 |") != std::string::npos);
    CHECK(diag.str().empty());
  }

  TEST_CASE("empty rows give header and a warning") {
    for (auto f : {TableFormat::Markdown, TableFormat::Csv, TableFormat::Json}) {
      std::ostringstream diag;
      const std::string out = emit_table({}, f, diag);
      CHECK_FALSE(out.empty());
      CHECK(diag.str().find("warning") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_table_format("xlsx"), Error);
  }

  TEST_CASE("csv and json carry the same fields") {
    const auto rows = aggregate({tp_case("a", 0.91), tp_case("b", 0.73, 2, 0.4, Direction::Under),
                                 other_case("c", Outcome::FN, 1)});
    std::ostringstream diag;
    std::istringstream csv(emit_table(rows, TableFormat::Csv, diag));
    const nlohmann::json json = nlohmann::json::parse(emit_table(rows, TableFormat::Json, diag));
    std::string header, line;
    std::getline(csv, header);
    std::getline(csv, line);
    std::vector<std::string> keys, cells;
    for (std::istringstream h(header); std::getline(h, line, ',');) keys.push_back(line);
    std::getline(std::istringstream(emit_table(rows, TableFormat::Csv, diag)).ignore(1 << 20, '\n'), line);
    for (std::istringstream c(line); std::getline(c, header, ',');) cells.push_back(header);
    if (line.back() == ',') cells.emplace_back();
    REQUIRE(keys.size() == cells.size());
    REQUIRE(json.size() == 1);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto& v = json[0].at(keys[i]);
      if (v.is_null()) {
        CHECK(cells[i].empty());
      } else if (v.is_string()) {
        CHECK(v.get<std::string>() == cells[i]);
      } else {
        CHECK(v.get<double>() == doctest::Approx(std::stod(cells[i])).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("csv parse round trip is exact at two decimals") {
    std::vector<CaseMetrics> cases;
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 12; ++i) cases.push_back(tp_case("c" + std::to_string(i), u(rng), 1 + 10 * u(rng), u(rng)));
    std::ostringstream diag;
    const std::string csv = emit_table(aggregate(cases), TableFormat::Csv, diag);
    std::istringstream in(csv);
    CHECK(emit_table(parse_table_csv(in), TableFormat::Csv, diag) == csv);
  }

  TEST_CASE("per-case CSV round trip") {
    CaseMetrics a = tp_case("a", 0.123456789012345, 3.3, 0.7);
    a.target = Target::SNFH;
    a.source = SourceGroup::B;
    a.snfh_subtracted = true;
    a.threshold = 0.35;
    const std::vector<CaseMetrics> in{a, other_case("b", Outcome::FP, 0.0)};
    std::stringstream s;
    write_case_metrics(s, in);
    const auto back = read_case_metrics(s);
    REQUIRE(back.size() == 2);
    CHECK(*back[0].dice == *a.dice);
    CHECK(back[0].snfh_subtracted);
    CHECK(back[0].threshold == 0.35);
    CHECK_FALSE(back[1].dice.has_value());
    CHECK(back[1].outcome == Outcome::FP);
  }

  TEST_CASE("scatter data") {
    CHECK(emit_scatter_data({}) == "group,gt_ml,dice,outcome\n");
    const std::string s =
        emit_scatter_data({tp_case("a", 0.8, 12.5), other_case("b", Outcome::FN, 0.4), other_case("c", Outcome::TN, 0)});
    CHECK(s.find("Gli_A_pre,12.5,0.8,TP") != std::string::npos);
    CHECK(s.find("Gli_A_pre,0.4,0,FN") != std::string::npos);
    CHECK(s.find(",,TN") != std::string::npos);
  }

  TEST_CASE("run_evaluation on identity phantoms") {
    TempDir dir("eval");
    const auto recs = write_cohort(dir, 8);
    Config config;
    config.jobs = 3;
    const auto result = run_evaluation(recs, std::nullopt, config, dir.path());
    CHECK(result.complete());
    REQUIRE(result.cases.size() == 8);
    for (const auto& c : result.cases) {
      if (c.case_id == "case0") {
        CHECK(c.outcome == Outcome::TN);
      } else {
        CHECK(c.outcome == Outcome::TP);
        CHECK(*c.dice == 1.0);
        CHECK(*c.hd95_mm == 0.0);
      }
    }
    for (const auto& r : result.table) {
      if (r.n_positive) CHECK(*r.detection_rate == 100.0);
    }
    CHECK(result.all_thresholds.size() == 80);
  }

  TEST_CASE("missing file is a per-case failure") {
    TempDir dir("eval");
    auto recs = write_cohort(dir, 5);
    std::filesystem::remove(dir / recs[2].prob_path);
    const auto result = run_evaluation(recs, std::nullopt, Config{}, dir.path());
    CHECK_FALSE(result.complete());
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].case_id == "case2");
    CHECK(result.cases.size() == 4);
    recs.push_back(recs[0]);
    CHECK_THROWS_AS(run_evaluation(recs, std::nullopt, Config{}, dir.path()), Error);
  }

  TEST_CASE("evaluation output is byte-identical across runs and job counts") {
    TempDir dir("eval");
    const auto recs = write_cohort(dir, 10);
    const FoldPlan plan = [&] {
      auto with_ml = recs;
      for (auto& r : with_ml) r.gt_ml = mask_volume_ml(load_mask(dir / r.gt_path));
      return stratified_split(with_ml, 3, 5);
    }();
    Config one, four;
    four.jobs = 4;
    write_evaluation(run_evaluation(recs, plan, one, dir.path()), one, dir / "out1");
    write_evaluation(run_evaluation(recs, plan, four, dir.path()), one, dir / "out2");
    for (const char* f : {"cases.csv", "cases_all_thresholds.csv", "table.md", "table.csv", "table.json",
                          "scatter.csv", "metadata.json"}) {
      CHECK_MESSAGE(slurp(dir / "out1" / f) == slurp(dir / "out2" / f), f);
      CHECK_FALSE(slurp(dir / "out1" / f).empty());
    }
    const auto meta = nlohmann::json::parse(slurp(dir / "out1" / "metadata.json"));
    CHECK(meta["best_thresholds"].size() >= 3);
    CHECK(meta["n_evaluated"] == 10);
  }
}
