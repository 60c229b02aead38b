#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "plr/dataset.hpp"
#include "plr/errors.hpp"

namespace fs = std::filesystem;

namespace plr {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string shortest_repr(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string signal_rel_path(const SignalWindow& w, Channel c) {
  return "signals/" + w.subject_id + "/" + w.window_id + "_" +
         std::string(to_string(c)) + ".csv";
}

void write_signal_file(const fs::path& path, const RawTrace& trace) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  std::string buf;
  buf.reserve(trace.samples.size() * 12);
  for (double v : trace.samples) {
    buf += shortest_repr(v);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<double> read_signal_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing signal file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": empty value");
    }
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc{} || res.ptr != line.data() + line.size()) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": not a real number: '" + line + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw DataError(path.string() + ": line 1: signal file is empty");
  }
  return values;
}

[[noreturn]] void manifest_error(const fs::path& manifest, std::size_t line_no,
                                 const std::string& what) {
  throw DataError(manifest.string() + ": line " + std::to_string(line_no) +
                  ": " + what);
}

}  // namespace

void store_corpus(const Corpus& corpus, const fs::path& dir) {
  Corpus ordered = corpus;
  ordered.finalize();

  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.jsonl";
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest) {
    throw DataError("cannot open " + manifest_path.string() + " for writing");
  }

  for (const auto& w : ordered.windows) {
    const SubjectRecord& subj = ordered.subject_of(w);
    ordered_json line;
    line["subject_id"] = subj.subject_id;
    line["age"] = subj.age;
    line["gender"] = std::string(to_string(subj.gender));
    line["pain_responder"] = subj.pain_responder;
    line["window_id"] = w.window_id;
    line["raw_state"] = std::string(to_string(w.raw_state));
    ordered_json files;
    for (const auto& [ch, trace] : w.channels) {
      files[std::string(to_string(ch))] = signal_rel_path(w, ch);
      write_signal_file(dir / signal_rel_path(w, ch), trace);
    }
    line["channel_files"] = std::move(files);
    line["sample_rate"] = w.sample_rate();
    manifest << line.dump() << '\n';
  }
  if (!manifest) throw DataError("failed writing " + manifest_path.string());
}

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.jsonl";
  std::ifstream manifest(manifest_path, std::ios::binary);
  if (!manifest) {
    throw DataError("missing manifest " + manifest_path.string());
  }

  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      manifest_error(manifest_path, line_no, e.what());
    }
    for (const char* key : {"subject_id", "age", "gender", "pain_responder",
                            "window_id", "raw_state", "channel_files",
                            "sample_rate"}) {
      if (!obj.contains(key)) {
        manifest_error(manifest_path, line_no,
                       std::string("missing key '") + key + "'");
      }
    }

    SubjectRecord subj;
    try {
      subj.subject_id = obj.at("subject_id").get<std::string>();
      subj.age = obj.at("age").get<int>();
      const auto gender =
          gender_from_string(obj.at("gender").get<std::string>());
      if (!gender) {
        manifest_error(manifest_path, line_no,
                       "unknown gender '" +
                           obj.at("gender").get<std::string>() + "'");
      }
      subj.gender = *gender;
      subj.pain_responder = obj.at("pain_responder").get<bool>();
    } catch (const nlohmann::json::exception& e) {
      manifest_error(manifest_path, line_no, e.what());
    }

    SignalWindow w;
    w.subject_id = subj.subject_id;
    w.window_id = obj.at("window_id").get<std::string>();
    const auto state =
        raw_state_from_string(obj.at("raw_state").get<std::string>());
    if (!state) {
      manifest_error(manifest_path, line_no,
                     "unknown raw state '" +
                         obj.at("raw_state").get<std::string>() + "'");
    }
    w.raw_state = *state;
    const int rate = obj.at("sample_rate").get<int>();
    if (rate <= 0) {
      manifest_error(manifest_path, line_no, "sample_rate must be > 0");
    }

    if (!obj.at("channel_files").is_object() ||
        obj.at("channel_files").empty()) {
      manifest_error(manifest_path, line_no,
                     "channel_files must be a non-empty object");
    }
    const auto expected_samples = static_cast<std::size_t>(
        std::llround(kWindowSeconds * static_cast<double>(rate)));
    for (const auto& [name, rel] : obj.at("channel_files").items()) {
      const auto ch = channel_from_string(name);
      if (!ch) {
        manifest_error(manifest_path, line_no,
                       "unknown channel name '" + name + "'");
      }
      const fs::path file = dir / rel.get<std::string>();
      RawTrace trace;
      trace.channel = *ch;
      trace.sample_rate = rate;
      trace.samples = read_signal_file(file);
      if (trace.samples.size() != expected_samples) {
        throw DataError(file.string() + ": line " +
                        std::to_string(trace.samples.size()) +
                        ": expected " + std::to_string(expected_samples) +
                        " samples, found " +
                        std::to_string(trace.samples.size()));
      }
      w.channels.emplace(*ch, std::move(trace));
    }

    // Integrity check: equal channel lengths and duration * rate coverage.
    try {
      w.validate();
    } catch (const DataError& e) {
      manifest_error(manifest_path, line_no, e.what());
    }

    if (corpus.find_subject(subj.subject_id) == nullptr) {
      corpus.subjects.push_back(subj);
      std::sort(corpus.subjects.begin(), corpus.subjects.end(),
                [](const SubjectRecord& a, const SubjectRecord& b) {
                  return a.subject_id < b.subject_id;
                });
    } else if (*corpus.find_subject(subj.subject_id) != subj) {
      manifest_error(manifest_path, line_no,
                     "subject " + subj.subject_id +
                         " has conflicting attributes across lines");
    }
    corpus.windows.push_back(std::move(w));
  }

  corpus.finalize();
  return corpus;
}

}  // namespace plr
