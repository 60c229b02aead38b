#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plr/protocol.hpp"

namespace plr {

// Hex digest of the fully resolved plan (case, scheme, modalities,
// classifier, context flag, preprocessing, master seed). Identical plans
// always hash identically; the grid runner uses this to resume.
std::string plan_config_hash(const ExperimentPlan& plan,
                             const PreprocessConfig& resolved_preprocess);

// Canonical JSON bytes of a report document. Deterministic: rerunning the
// same plan yields identical bytes.
std::string report_to_json(const EvaluationReport& report);

// Write-temp-then-rename so concurrent readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

struct ReportTables {
  std::string figure1_csv;  // modality,case,classifier,mean_f1,std_f1
  std::string figure4_csv;  // subject,case,classifier,f1
};

// Builds the plot-ready tables from report documents. Known/unknown-scheme
// reports feed figure1; person-specific reports feed figure4 with one row
// per scored subject (F1 averaged over seed entries). Throws DataError on a
// schema-version mismatch.
ReportTables build_report_tables(
    const std::vector<std::filesystem::path>& report_files);

}  // namespace plr
