#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "plr/dataset.hpp"
#include "plr/learners.hpp"
#include "plr/metrics.hpp"
#include "plr/signal.hpp"

namespace plr {

// The four case studies. CaseMinus1 trains and tests on baseline + pain
// only; Case0 reuses that model but tests with affect present; Case5 folds
// baseline into the affect class; Case6 drops baseline and balances training.
enum class CaseId { CaseMinus1, Case0, Case5, Case6 };

inline constexpr std::array<CaseId, 4> kAllCases = {
    CaseId::CaseMinus1, CaseId::Case0, CaseId::Case5, CaseId::Case6};

std::string_view to_string(CaseId c);  // "case-1", "case0", "case5", "case6"
std::optional<CaseId> case_from_string(std::string_view s);

// Labels the model is trained on.
std::vector<TaskLabel> case_model_classes(CaseId c);
// Label universe used for scoring. For Case0 this is the four-class set even
// though the model can never emit A; the A row then contributes a zero F1.
std::vector<TaskLabel> case_eval_classes(CaseId c);

struct KnownScheme {
  double train_fraction = 0.7;
  int n_seeds = 5;
  friend bool operator==(const KnownScheme&, const KnownScheme&) = default;
};

struct UnknownScheme {
  int held_out_subjects = 15;
  int n_repeats = 5;
  friend bool operator==(const UnknownScheme&, const UnknownScheme&) = default;
};

struct PersonSpecificScheme {
  double train_fraction = 0.7;
  int n_seeds = 5;
  friend bool operator==(const PersonSpecificScheme&,
                         const PersonSpecificScheme&) = default;
};

using EvalScheme =
    std::variant<KnownScheme, UnknownScheme, PersonSpecificScheme>;

std::string_view scheme_name(const EvalScheme& s);  // known/unknown/personal
std::optional<EvalScheme> scheme_from_name(std::string_view s);

struct ExperimentPlan {
  CaseId case_id = CaseId::CaseMinus1;
  EvalScheme scheme = KnownScheme{};
  ModalitySet modalities = ModalitySet::all();
  ClassifierSpec classifier;
  bool use_context = false;
  // Preprocessing override; defaults derive from the corpus sample rate.
  std::optional<PreprocessConfig> preprocess;
  std::uint64_t master_seed = 0;

  void validate() const;  // throws ParameterError
  std::string description() const;  // "case5/known/all/rf" style tag
};

// Window indices into Corpus::windows. Train and test are disjoint and
// sorted ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Sample-level random split, stratified by task label: per-class train
// counts follow the global fraction within one sample (largest-remainder
// rounding with a fixed overall total).
Split split_known(const Corpus& corpus, double train_fraction,
                  std::uint64_t seed);

// Leave-n-participants-out: held_out subjects drawn without replacement
// (seeded per repeat); all their windows form the test set.
Split split_unknown(const Corpus& corpus, int held_out, int repeat_index,
                    std::uint64_t master_seed);

// Within-subject stratified split over that subject's windows only. Throws
// ProtocolError when a required class has fewer than 2 samples for this
// subject. required_classes defaults to every class the subject has.
Split split_personal(const Corpus& corpus, std::string_view subject_id,
                     double train_fraction, std::uint64_t seed,
                     const std::vector<TaskLabel>& required_classes = {});

// A corpus window with its case-mapped task label.
struct SampleRef {
  std::size_t window = 0;
  TaskLabel label = TaskLabel::BL;

  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

// Per-split per-class sample counts, aligned with `classes`.
struct ClassManifest {
  std::vector<TaskLabel> classes;
  std::vector<std::int64_t> train;
  std::vector<std::int64_t> validation;
  std::vector<std::int64_t> test;

  friend bool operator==(const ClassManifest&, const ClassManifest&) = default;
};

struct CaseDatasets {
  std::vector<SampleRef> train;
  std::vector<SampleRef> validation;  // recorded, never used for tuning
  std::vector<SampleRef> test;
  std::vector<TaskLabel> model_classes;
  std::vector<TaskLabel> eval_classes;
  ClassManifest manifest;
};

// Applies the case construction rules to a scheme split. The validation
// carve (10% of the train side, stratified, seeded) happens before any case
// filtering, so for one seed every case sees the same train pool; Case0
// training is bit-for-bit CaseMinus1 training.
CaseDatasets build_case_datasets(const Corpus& corpus, CaseId case_id,
                                 const Split& split, std::uint64_t seed);

struct SubjectEntry {
  std::string subject_id;
  bool skipped = false;
  std::string skip_reason;
  ConfusionMatrix confusion;
  double f1_macro = 0.0;
  ClassManifest manifest;
};

struct ReportEntry {
  std::string kind;            // "seed" or "repeat"
  int index = 0;               // 0-based position within the scheme
  std::uint64_t split_seed = 0;
  ConfusionMatrix confusion;
  double f1_macro = 0.0;
  ClassManifest manifest;
  // Person-specific scheme: per-subject results; entry-level figures are the
  // mean (f1) and sum (confusion, manifest) over scored subjects.
  std::vector<SubjectEntry> subjects;
};

struct EvaluationReport {
  ExperimentPlan plan;
  PreprocessConfig resolved_preprocess;
  int corpus_subjects = 0;
  std::size_t corpus_windows = 0;
  std::vector<ReportEntry> entries;
  Aggregate f1;
};

// Feature matrices are pure functions of (corpus, modalities, preprocess,
// context flag); this cache lets a grid of plans share them. One cache per
// corpus; not thread-safe.
class FeatureCache {
 public:
  const Matrix& get(const Corpus& corpus, const ModalitySet& modalities,
                    const PreprocessConfig& config, bool use_context);

 private:
  std::map<std::string, Matrix> cache_;
};

// Feature matrix over all corpus windows, row i = window i.
Matrix featurize_corpus(const Corpus& corpus, const ModalitySet& modalities,
                        const PreprocessConfig& config, bool use_context);

EvaluationReport run_experiment(const ExperimentPlan& plan,
                                const Corpus& corpus);
EvaluationReport run_experiment(const ExperimentPlan& plan,
                                const Corpus& corpus, FeatureCache& cache);

}  // namespace plr
