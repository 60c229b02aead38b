#include "plr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "plr/errors.hpp"

namespace plr {

std::string_view to_string(Gender g) {
  return g == Gender::Female ? "Female" : "Male";
}

std::string_view to_string(RawState s) {
  switch (s) {
    case RawState::BL: return "BL";
    case RawState::PL1: return "PL1";
    case RawState::PL2: return "PL2";
    case RawState::PL3: return "PL3";
    case RawState::PL4: return "PL4";
    case RawState::Amusement: return "Amusement";
    case RawState::Anger: return "Anger";
    case RawState::Disgust: return "Disgust";
    case RawState::Fear: return "Fear";
    case RawState::Sadness: return "Sadness";
  }
  return "?";
}

std::string_view to_string(TaskLabel l) {
  switch (l) {
    case TaskLabel::BL: return "BL";
    case TaskLabel::LLP: return "LLP";
    case TaskLabel::HLP: return "HLP";
    case TaskLabel::A: return "A";
  }
  return "?";
}

std::string_view to_string(DemographicGroup g) {
  switch (g) {
    case DemographicGroup::F1: return "F1";
    case DemographicGroup::F2: return "F2";
    case DemographicGroup::F3: return "F3";
    case DemographicGroup::M4: return "M4";
    case DemographicGroup::M5: return "M5";
    case DemographicGroup::M6: return "M6";
  }
  return "?";
}

std::optional<Gender> gender_from_string(std::string_view s) {
  if (s == "Female") return Gender::Female;
  if (s == "Male") return Gender::Male;
  return std::nullopt;
}

std::optional<RawState> raw_state_from_string(std::string_view s) {
  for (RawState st : kAllRawStates) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

std::optional<TaskLabel> task_label_from_string(std::string_view s) {
  for (TaskLabel l : kAllTaskLabels) {
    if (s == to_string(l)) return l;
  }
  return std::nullopt;
}

int SignalWindow::sample_rate() const {
  return channels.empty() ? 0 : channels.begin()->second.sample_rate;
}

std::size_t SignalWindow::sample_count() const {
  return channels.empty() ? 0 : channels.begin()->second.samples.size();
}

void SignalWindow::validate() const {
  if (channels.empty()) {
    throw DataError("window " + window_id + " has no channels");
  }
  const int rate = sample_rate();
  const std::size_t count = sample_count();
  for (const auto& [ch, trace] : channels) {
    validate_trace(trace);
    if (trace.sample_rate != rate || trace.samples.size() != count) {
      throw DataError("window " + window_id +
                      ": channels disagree on rate or length");
    }
    if (trace.channel != ch) {
      throw DataError("window " + window_id + ": channel key/trace mismatch");
    }
  }
  const auto expected = static_cast<std::size_t>(
      std::llround(duration_seconds * static_cast<double>(rate)));
  if (expected != count) {
    throw DataError("window " + window_id +
                    ": sample count does not match duration * rate");
  }
}

ContextFeatures ContextFeatures::from(const SubjectRecord& subject) {
  ContextFeatures ctx;
  ctx.gender_code = subject.gender == Gender::Male ? 1.0 : 0.0;
  ctx.age_normalized = (static_cast<double>(subject.age) - 20.0) / 45.0;
  const auto group = assign_demographic_group(subject.gender, subject.age);
  ctx.group_onehot[static_cast<std::size_t>(group)] = 1.0;
  return ctx;
}

std::array<double, 8> ContextFeatures::values() const {
  return {gender_code,     age_normalized,  group_onehot[0], group_onehot[1],
          group_onehot[2], group_onehot[3], group_onehot[4], group_onehot[5]};
}

const SubjectRecord* Corpus::find_subject(std::string_view subject_id) const {
  const auto it = std::lower_bound(
      subjects.begin(), subjects.end(), subject_id,
      [](const SubjectRecord& s, std::string_view id) {
        return s.subject_id < id;
      });
  if (it == subjects.end() || it->subject_id != subject_id) return nullptr;
  return &*it;
}

const SubjectRecord& Corpus::subject_of(const SignalWindow& w) const {
  const SubjectRecord* s = find_subject(w.subject_id);
  if (s == nullptr) {
    throw DataError("window " + w.window_id + " references unknown subject " +
                    w.subject_id);
  }
  return *s;
}

void Corpus::finalize() {
  std::sort(subjects.begin(), subjects.end(),
            [](const SubjectRecord& a, const SubjectRecord& b) {
              return a.subject_id < b.subject_id;
            });
  for (std::size_t i = 1; i < subjects.size(); ++i) {
    if (subjects[i].subject_id == subjects[i - 1].subject_id) {
      throw DataError("duplicate subject id " + subjects[i].subject_id);
    }
  }
  std::sort(windows.begin(), windows.end(),
            [](const SignalWindow& a, const SignalWindow& b) {
              if (a.subject_id != b.subject_id) {
                return a.subject_id < b.subject_id;
              }
              return a.window_id < b.window_id;
            });
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const auto& w : windows) {
    w.validate();
    subject_of(w);
    if (!seen.emplace(w.subject_id, w.window_id).second) {
      throw DataError("duplicate window id " + w.window_id + " for subject " +
                      w.subject_id);
    }
  }
}

TaskLabel map_pain_levels(RawState state) {
  switch (state) {
    case RawState::BL:
      return TaskLabel::BL;
    case RawState::PL1:
    case RawState::PL2:
      return TaskLabel::LLP;
    case RawState::PL3:
    case RawState::PL4:
      return TaskLabel::HLP;
    case RawState::Amusement:
    case RawState::Anger:
    case RawState::Disgust:
    case RawState::Fear:
    case RawState::Sadness:
      return TaskLabel::A;
  }
  throw ParameterError("unknown raw state");
}

std::vector<SubjectRecord> merge_datasets(
    const std::vector<SubjectRecord>& pain_subjects,
    const std::vector<SubjectRecord>& emotion_subjects,
    const std::vector<std::string>& non_responders) {
  std::set<std::string_view> emotion_ids;
  for (const auto& s : emotion_subjects) emotion_ids.insert(s.subject_id);
  std::set<std::string_view> excluded(non_responders.begin(),
                                      non_responders.end());

  std::vector<SubjectRecord> merged;
  for (const auto& s : pain_subjects) {
    if (!emotion_ids.contains(s.subject_id)) continue;
    if (excluded.contains(s.subject_id)) continue;
    merged.push_back(s);
  }
  for (const auto& s : emotion_subjects) {
    const auto it = std::find_if(merged.begin(), merged.end(),
                                 [&](const SubjectRecord& m) {
                                   return m.subject_id == s.subject_id;
                                 });
    if (it != merged.end() &&
        (it->age != s.age || it->gender != s.gender)) {
      throw DataError("subject " + s.subject_id +
                      ": pain and emotion records disagree on demographics");
    }
  }
  std::sort(merged.begin(), merged.end(),
            [](const SubjectRecord& a, const SubjectRecord& b) {
              return a.subject_id < b.subject_id;
            });
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const SubjectRecord& a, const SubjectRecord& b) {
                             return a.subject_id == b.subject_id;
                           }),
               merged.end());
  return merged;
}

std::vector<SignalWindow> extract_windows(
    const std::string& subject_id, RawState state,
    const std::map<Channel, RawTrace>& recording, double window_seconds,
    double stride_seconds, int first_index) {
  if (recording.empty()) throw DataError("recording has no channels");
  if (window_seconds <= 0.0 || stride_seconds <= 0.0) {
    throw ParameterError("window and stride must be positive");
  }
  const int rate = recording.begin()->second.sample_rate;
  const std::size_t len = recording.begin()->second.samples.size();
  for (const auto& [ch, trace] : recording) {
    validate_trace(trace);
    if (trace.sample_rate != rate || trace.samples.size() != len) {
      throw DataError("recording channels disagree on rate or length");
    }
  }
  const auto win = static_cast<std::size_t>(
      std::llround(window_seconds * static_cast<double>(rate)));
  const auto stride = static_cast<std::size_t>(
      std::llround(stride_seconds * static_cast<double>(rate)));
  if (win == 0 || stride == 0) {
    throw ParameterError("window and stride must cover at least one sample");
  }

  std::vector<SignalWindow> out;
  if (len < win) return out;
  const std::size_t count = (len - win) / stride + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SignalWindow w;
    w.subject_id = subject_id;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%03d",
                  std::string(to_string(state)).c_str(),
                  first_index + static_cast<int>(i));
    w.window_id = id;
    w.raw_state = state;
    w.duration_seconds = window_seconds;
    const std::size_t begin = i * stride;
    for (const auto& [ch, trace] : recording) {
      RawTrace cut;
      cut.channel = ch;
      cut.sample_rate = rate;
      cut.samples.assign(trace.samples.begin() + static_cast<long>(begin),
                         trace.samples.begin() + static_cast<long>(begin + win));
      w.channels.emplace(ch, std::move(cut));
    }
    out.push_back(std::move(w));
  }
  return out;
}

DemographicGroup assign_demographic_group(Gender gender, int age) {
  if (age < 20 || age > 65) {
    throw ParameterError("age " + std::to_string(age) +
                         " outside the curated range [20, 65]");
  }
  int bin;  // [20,30) -> 0, [30,50) -> 1, [50,65] -> 2
  if (age < 30) {
    bin = 0;
  } else if (age < 50) {
    bin = 1;
  } else {
    bin = 2;
  }
  if (gender == Gender::Female) {
    return static_cast<DemographicGroup>(bin);
  }
  return static_cast<DemographicGroup>(3 + bin);
}

}  // namespace plr
