#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plr/signal.hpp"

namespace plr {

enum class Gender { Female, Male };

// Raw experimental states: baseline, four pain levels, five discrete affects.
enum class RawState {
  BL,
  PL1,
  PL2,
  PL3,
  PL4,
  Amusement,
  Anger,
  Disgust,
  Fear,
  Sadness,
};

inline constexpr std::array<RawState, 10> kAllRawStates = {
    RawState::BL,    RawState::PL1,       RawState::PL2,   RawState::PL3,
    RawState::PL4,   RawState::Amusement, RawState::Anger, RawState::Disgust,
    RawState::Fear,  RawState::Sadness,
};

inline constexpr std::size_t kRawStateCount = kAllRawStates.size();

// Task categories: baseline, low-level pain (PL1+PL2), high-level pain
// (PL3+PL4), and the single merged affect class.
enum class TaskLabel { BL, LLP, HLP, A };

inline constexpr std::array<TaskLabel, 4> kAllTaskLabels = {
    TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A};

// Gender x age bins: [20,30), [30,50), [50,65].
enum class DemographicGroup { F1, F2, F3, M4, M5, M6 };

std::string_view to_string(Gender g);
std::string_view to_string(RawState s);
std::string_view to_string(TaskLabel l);
std::string_view to_string(DemographicGroup g);
std::optional<Gender> gender_from_string(std::string_view s);
std::optional<RawState> raw_state_from_string(std::string_view s);
std::optional<TaskLabel> task_label_from_string(std::string_view s);

struct SubjectRecord {
  std::string subject_id;
  int age = 0;  // years; curated corpora stay within [20, 65]
  Gender gender = Gender::Female;
  bool pain_responder = true;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

inline constexpr double kWindowSeconds = 5.5;

// One fixed-duration multichannel excerpt for one subject in one state.
struct SignalWindow {
  std::string subject_id;
  std::string window_id;  // unique within the subject, e.g. "BL-000"
  RawState raw_state = RawState::BL;
  std::map<Channel, RawTrace> channels;
  double duration_seconds = kWindowSeconds;

  int sample_rate() const;
  std::size_t sample_count() const;
  // Throws DataError if channels disagree on rate or length, or if
  // duration * rate does not match the sample count.
  void validate() const;

  friend bool operator==(const SignalWindow&, const SignalWindow&) = default;
};

// Demographic context appended to feature vectors: binary gender code
// (Female = 0, Male = 1), age normalized to [0, 1] over the cohort range
// [20, 65], and a one-hot demographic group.
struct ContextFeatures {
  double gender_code = 0.0;
  double age_normalized = 0.0;
  std::array<double, 6> group_onehot{};

  static constexpr std::size_t size() { return 8; }
  static ContextFeatures from(const SubjectRecord& subject);
  std::array<double, 8> values() const;
};

// An in-memory corpus: curated subjects plus their signal windows, both in
// canonical order (subjects by id, windows by subject then window id).
struct Corpus {
  std::vector<SubjectRecord> subjects;
  std::vector<SignalWindow> windows;

  const SubjectRecord* find_subject(std::string_view subject_id) const;
  const SubjectRecord& subject_of(const SignalWindow& w) const;
  // Canonical ordering + invariant checks; throws DataError on violation.
  void finalize();

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// BL -> BL, PL1/PL2 -> LLP, PL3/PL4 -> HLP, discrete affects -> A.
TaskLabel map_pain_levels(RawState state);

// (pain n emotion) \ non_responders, ordered by subject id. Subject records
// are taken from the pain set; ids present in both sets are required to
// agree on age and gender.
std::vector<SubjectRecord> merge_datasets(
    const std::vector<SubjectRecord>& pain_subjects,
    const std::vector<SubjectRecord>& emotion_subjects,
    const std::vector<std::string>& non_responders);

// Cuts a full-length recording into fixed-length windows aligned from the
// recording start. Non-overlapping by default (stride = window length).
// Window ids are "<state>-<index>" with a 3-digit zero-padded index starting
// at first_index.
std::vector<SignalWindow> extract_windows(
    const std::string& subject_id, RawState state,
    const std::map<Channel, RawTrace>& recording,
    double window_seconds = kWindowSeconds,
    double stride_seconds = kWindowSeconds, int first_index = 0);

DemographicGroup assign_demographic_group(Gender gender, int age);

// On-disk corpus format: <dir>/manifest.jsonl with one JSON object per
// window plus headerless one-value-per-line CSV signal files. store followed
// by load round-trips exactly.
void store_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace plr
