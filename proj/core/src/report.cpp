#include "plr/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

#include "plr/errors.hpp"
#include "plr/rng.hpp"
#include "plr/version.hpp"

namespace fs = std::filesystem;

namespace plr {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json scheme_json(const EvalScheme& scheme) {
  ordered_json j;
  j["name"] = std::string(scheme_name(scheme));
  if (const auto* known = std::get_if<KnownScheme>(&scheme)) {
    j["train_fraction"] = known->train_fraction;
    j["n_seeds"] = known->n_seeds;
  } else if (const auto* unknown = std::get_if<UnknownScheme>(&scheme)) {
    j["held_out_subjects"] = unknown->held_out_subjects;
    j["n_repeats"] = unknown->n_repeats;
  } else {
    const auto& personal = std::get<PersonSpecificScheme>(scheme);
    j["train_fraction"] = personal.train_fraction;
    j["n_seeds"] = personal.n_seeds;
  }
  return j;
}

ordered_json plan_json(const ExperimentPlan& plan,
                       const PreprocessConfig& preprocess) {
  ordered_json j;
  j["case"] = std::string(to_string(plan.case_id));
  j["scheme"] = scheme_json(plan.scheme);
  j["modalities"] = plan.modalities.name();
  j["classifier"] = {
      {"kind", std::string(to_string(plan.classifier.kind))},
      {"knn_k", plan.classifier.knn_k},
      {"rf_trees", plan.classifier.rf_trees},
      {"gbt_rounds", plan.classifier.gbt_rounds},
      {"gbt_learning_rate", plan.classifier.gbt_learning_rate},
      {"gbt_max_depth", plan.classifier.gbt_max_depth},
      {"seed", plan.classifier.seed},
  };
  j["use_context"] = plan.use_context;
  j["preprocess"] = {
      {"sg_window", preprocess.sg_window},
      {"sg_order", preprocess.sg_order},
      {"ds_window", preprocess.ds_window},
      {"overlap", preprocess.overlap},
  };
  j["master_seed"] = plan.master_seed;
  return j;
}

ordered_json classes_json(const std::vector<TaskLabel>& classes) {
  ordered_json j = ordered_json::array();
  for (TaskLabel l : classes) j.push_back(std::string(to_string(l)));
  return j;
}

ordered_json confusion_json(const ConfusionMatrix& m) {
  ordered_json j;
  j["classes"] = classes_json(m.classes);
  ordered_json counts = ordered_json::array();
  for (const auto& row : m.counts) counts.push_back(row);
  j["counts"] = std::move(counts);
  return j;
}

ordered_json manifest_json(const ClassManifest& m) {
  ordered_json j;
  j["classes"] = classes_json(m.classes);
  j["train"] = m.train;
  j["validation"] = m.validation;
  j["test"] = m.test;
  return j;
}

ordered_json entry_json(const ReportEntry& e) {
  ordered_json j;
  j["kind"] = e.kind;
  j["index"] = e.index;
  j["split_seed"] = e.split_seed;
  j["confusion"] = confusion_json(e.confusion);
  j["f1_macro"] = e.f1_macro;
  j["class_manifest"] = manifest_json(e.manifest);
  if (!e.subjects.empty()) {
    ordered_json subjects = ordered_json::array();
    for (const SubjectEntry& s : e.subjects) {
      ordered_json sj;
      sj["subject_id"] = s.subject_id;
      sj["skipped"] = s.skipped;
      if (s.skipped) {
        sj["skip_reason"] = s.skip_reason;
      } else {
        sj["confusion"] = confusion_json(s.confusion);
        sj["f1_macro"] = s.f1_macro;
        sj["class_manifest"] = manifest_json(s.manifest);
      }
      subjects.push_back(std::move(sj));
    }
    j["subjects"] = std::move(subjects);
  }
  return j;
}

}  // namespace

std::string plan_config_hash(const ExperimentPlan& plan,
                             const PreprocessConfig& resolved_preprocess) {
  const std::string canonical =
      plan_json(plan, resolved_preprocess).dump();
  const std::uint64_t h =
      hash_bytes(canonical.data(), canonical.size(),
                 0x9ae16a3b2f90404full ^ static_cast<std::uint64_t>(
                                             kReportSchemaVersion));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string report_to_json(const EvaluationReport& report) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["config_hash"] =
      plan_config_hash(report.plan, report.resolved_preprocess);
  doc["plan"] = plan_json(report.plan, report.resolved_preprocess);
  doc["corpus"] = {{"subjects", report.corpus_subjects},
                   {"windows", report.corpus_windows}};
  ordered_json entries = ordered_json::array();
  for (const ReportEntry& e : report.entries) entries.push_back(entry_json(e));
  doc["entries"] = std::move(entries);
  doc["aggregate"] = {{"mean_f1_macro", report.f1.mean},
                      {"std_f1_macro", report.f1.stddev}};
  return doc.dump(2) + "\n";
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int modality_rank(const std::string& name) {
  if (name == "eda") return 0;
  if (name == "ecg") return 1;
  if (name == "emg") return 2;
  if (name == "all") return 9;
  return 3;  // explicit combinations between singles and "all"
}

int case_rank(const std::string& name) {
  if (name == "case-1") return 0;
  if (name == "case0") return 1;
  if (name == "case5") return 2;
  if (name == "case6") return 3;
  return 4;
}

int classifier_rank(const std::string& name) {
  if (name == "knn") return 0;
  if (name == "rf") return 1;
  if (name == "gbt") return 2;
  return 3;
}

}  // namespace

ReportTables build_report_tables(const std::vector<fs::path>& report_files) {
  struct Fig1Row {
    std::string modality, case_name, classifier;
    double mean = 0.0, stddev = 0.0;
  };
  struct Fig4Row {
    std::string subject, case_name, classifier, modality;
    double f1 = 0.0;
  };
  std::vector<Fig1Row> fig1;
  std::vector<Fig4Row> fig4;

  for (const fs::path& file : report_files) {
    ordered_json doc;
    try {
      doc = ordered_json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file.string() + ": not a valid report document: " +
                      e.what());
    }
    if (!doc.contains("schema_version") ||
        doc.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw DataError(file.string() + ": report schema version mismatch");
    }
    const auto& plan = doc.at("plan");
    const std::string case_name = plan.at("case").get<std::string>();
    const std::string classifier =
        plan.at("classifier").at("kind").get<std::string>();
    const std::string modality = plan.at("modalities").get<std::string>();
    const std::string scheme =
        plan.at("scheme").at("name").get<std::string>();

    if (scheme == "personal") {
      // Mean F1 per subject over the seed entries.
      std::map<std::string, std::pair<double, int>> acc;
      for (const auto& entry : doc.at("entries")) {
        if (!entry.contains("subjects")) continue;
        for (const auto& s : entry.at("subjects")) {
          if (s.at("skipped").get<bool>()) continue;
          auto& [sum, n] = acc[s.at("subject_id").get<std::string>()];
          sum += s.at("f1_macro").get<double>();
          ++n;
        }
      }
      for (const auto& [subject, sum_n] : acc) {
        fig4.push_back({subject, case_name, classifier, modality,
                        sum_n.first / sum_n.second});
      }
    } else {
      const auto& agg = doc.at("aggregate");
      fig1.push_back({modality, case_name, classifier,
                      agg.at("mean_f1_macro").get<double>(),
                      agg.at("std_f1_macro").get<double>()});
    }
  }

  const auto fig1_key = [](const Fig1Row& r) {
    return std::make_tuple(modality_rank(r.modality), r.modality,
                           case_rank(r.case_name),
                           classifier_rank(r.classifier));
  };
  std::sort(fig1.begin(), fig1.end(), [&](const Fig1Row& a, const Fig1Row& b) {
    return fig1_key(a) < fig1_key(b);
  });
  const auto fig4_key = [](const Fig4Row& r) {
    return std::make_tuple(r.subject, modality_rank(r.modality),
                           case_rank(r.case_name),
                           classifier_rank(r.classifier));
  };
  std::sort(fig4.begin(), fig4.end(), [&](const Fig4Row& a, const Fig4Row& b) {
    return fig4_key(a) < fig4_key(b);
  });

  ReportTables tables;
  tables.figure1_csv = "modality,case,classifier,mean_f1,std_f1\n";
  for (const Fig1Row& r : fig1) {
    tables.figure1_csv += r.modality + ',' + r.case_name + ',' + r.classifier +
                          ',' + format_double(r.mean) + ',' +
                          format_double(r.stddev) + '\n';
  }
  tables.figure4_csv = "subject,case,classifier,f1\n";
  for (const Fig4Row& r : fig4) {
    tables.figure4_csv += r.subject + ',' + r.case_name + ',' + r.classifier +
                          ',' + format_double(r.f1) + '\n';
  }
  return tables;
}

}  // namespace plr
