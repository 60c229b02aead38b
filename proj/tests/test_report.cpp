#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "plr/errors.hpp"
#include "plr/protocol.hpp"
#include "plr/report.hpp"
#include "plr/synthgen.hpp"

namespace fs = std::filesystem;
using namespace plr;

namespace {

fs::path temp_dir(const char* tag) {
  const fs::path dir =
      fs::temp_directory_path() / (std::string("plr_report_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Corpus toy_corpus(std::uint64_t seed = 42) {
  GeneratorConfig cfg;
  cfg.n_subjects = 4;
  cfg.female_count = 2;
  cfg.windows_per_state = 3;
  cfg.sample_rate = 32;
  cfg.master_seed = seed;
  return generate_cohort(cfg);
}

ExperimentPlan toy_plan() {
  ExperimentPlan plan;
  plan.case_id = CaseId::Case5;
  plan.modalities = ModalitySet::single(Channel::EDA);
  plan.classifier.kind = ClassifierKind::KNN;
  plan.master_seed = 9;
  return plan;
}

}  // namespace

TEST_CASE("the config hash pins the fully resolved plan") {
  const PreprocessConfig pre = PreprocessConfig::defaults_for_rate(32);
  const ExperimentPlan plan = toy_plan();
  CHECK(plan_config_hash(plan, pre) == plan_config_hash(plan, pre));

  ExperimentPlan reseeded = plan;
  reseeded.master_seed = 10;
  CHECK(plan_config_hash(reseeded, pre) != plan_config_hash(plan, pre));

  ExperimentPlan recased = plan;
  recased.case_id = CaseId::Case6;
  CHECK(plan_config_hash(recased, pre) != plan_config_hash(plan, pre));

  PreprocessConfig other_pre = pre;
  other_pre.sg_order = 2;
  CHECK(plan_config_hash(plan, other_pre) != plan_config_hash(plan, pre));
}

TEST_CASE("report JSON is deterministic and embeds the config hash") {
  const Corpus corpus = toy_corpus();
  const ExperimentPlan plan = toy_plan();
  const auto a = report_to_json(run_experiment(plan, corpus));
  const auto b = report_to_json(run_experiment(plan, corpus));
  CHECK(a == b);
  CHECK(a.find("\"config_hash\"") != std::string::npos);
  CHECK(a.find("\"schema_version\"") != std::string::npos);
  CHECK(a.find("case5") != std::string::npos);
}

TEST_CASE("report tables reproduce the figure layouts") {
  const fs::path dir = temp_dir("tables");
  const Corpus corpus = toy_corpus();

  // One known-scheme report -> one figure1 row.
  ExperimentPlan plan = toy_plan();
  write_file_atomic(dir / "known.json",
                    report_to_json(run_experiment(plan, corpus)));

  // One person-specific report over 4 subjects -> 4 figure4 rows.
  plan.scheme = PersonSpecificScheme{0.7, 2};
  write_file_atomic(dir / "personal.json",
                    report_to_json(run_experiment(plan, corpus)));

  const auto tables =
      build_report_tables({dir / "known.json", dir / "personal.json"});

  std::size_t fig1_rows = 0;
  for (char c : tables.figure1_csv) fig1_rows += c == '\n' ? 1 : 0;
  CHECK(fig1_rows == 2);  // header + one row
  CHECK(tables.figure1_csv.rfind("modality,case,classifier,mean_f1,std_f1\n",
                                 0) == 0);
  CHECK(tables.figure1_csv.find("eda,case5,knn,") != std::string::npos);

  std::size_t fig4_rows = 0;
  for (char c : tables.figure4_csv) fig4_rows += c == '\n' ? 1 : 0;
  CHECK(fig4_rows == 5);  // header + one row per subject
  CHECK(tables.figure4_csv.rfind("subject,case,classifier,f1\n", 0) == 0);

  fs::remove_all(dir);
}

TEST_CASE("empty input produces header-only tables") {
  const auto tables = build_report_tables({});
  CHECK(tables.figure1_csv == "modality,case,classifier,mean_f1,std_f1\n");
  CHECK(tables.figure4_csv == "subject,case,classifier,f1\n");
}

TEST_CASE("schema version mismatches are rejected") {
  const fs::path dir = temp_dir("schema");
  {
    std::ofstream out(dir / "bad.json");
    out << "{\"schema_version\": 99, \"plan\": {}}";
  }
  CHECK_THROWS_AS(build_report_tables({dir / "bad.json"}), DataError);
  {
    std::ofstream out(dir / "garbage.json");
    out << "not json";
  }
  CHECK_THROWS_AS(build_report_tables({dir / "garbage.json"}), DataError);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temp file behind") {
  const fs::path dir = temp_dir("atomic");
  write_file_atomic(dir / "x.json", "{}");
  CHECK(fs::exists(dir / "x.json"));
  CHECK_FALSE(fs::exists(dir / "x.json.tmp"));
  CHECK(read_file(dir / "x.json") == "{}");
  fs::remove_all(dir);
}
