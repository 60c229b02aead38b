#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "plr/dataset.hpp"

namespace plr {

// Per-state generator targets for a nominal (unit-multiplier) subject:
// the SCL rise across a window, phasic SCR events per window, heart rate,
// inter-beat variability (coefficient of variation of RR intervals) and EMG
// bursts per window.
struct StateEffect {
  double eda_tonic = 0.0;       // skin conductance rise over the window
  double scr_rate = 0.0;        // phasic events per window
  double heart_rate = 60.0;     // beats per minute
  double hrv = 0.05;            // RR interval variation coefficient
  double emg_burst_rate = 0.0;  // bursts per window

  friend bool operator==(const StateEffect&, const StateEffect&) = default;
};

// Affect states sit between low and high pain on EDA and heart rate but stay
// close to baseline on EMG; the trapezius channel is what separates pain
// from non-pain arousal. That overlap is what makes a pain-only model break
// down when affect shows up in the test data.
std::array<StateEffect, kRawStateCount> default_state_effects();

struct GeneratorConfig {
  int n_subjects = 62;
  int female_count = 33;
  int windows_per_state = 20;  // per subject, per raw state
  int sample_rate = 512;       // samples per second
  std::uint64_t master_seed = 0;

  // Log-scale spread of per-subject rate multipliers. Larger values entangle
  // subjects: one person's baseline looks like another's pain.
  double subject_spread = 0.45;

  // Scales affect-state deltas between baseline (0) and the table values
  // (1). Lower values pull affect toward baseline.
  double affect_pain_overlap = 1.0;

  // Trailing subjects are flagged as non-responders: their pain windows are
  // statistically indistinguishable from baseline.
  int non_responder_count = 0;

  std::array<StateEffect, kRawStateCount> state_effects =
      default_state_effects();

  void validate() const;  // throws ParameterError naming the field

  // Parses the flat key = value config format (see README). Unknown keys are
  // errors so typos cannot silently fall back to defaults.
  static GeneratorConfig from_key_values(std::string_view text);
};

// Per-subject generation parameters. The rate multipliers and the heart-rate
// offset move a subject's whole state ladder up or down, which preserves
// within-subject ordering while blurring states across subjects.
struct SubjectProfile {
  std::string subject_id;
  int age = 35;
  Gender gender = Gender::Female;
  bool pain_responder = true;

  std::array<double, 3> baseline_levels{2.0, 1.0, 0.02};  // EDA, ECG, EMG
  std::array<double, kRawStateCount> responsiveness{};    // per-state gain
  double scr_rate_mult = 1.0;
  double emg_rate_mult = 1.0;
  double eda_ramp_mult = 1.0;
  double heart_rate_offset = 0.0;  // bpm
  double noise_scale = 1.0;

  // Unit-multiplier profile; generated statistics then match the state
  // effect table directly.
  static SubjectProfile neutral(std::string subject_id, int age = 35,
                                Gender gender = Gender::Female);
};

// Event counts actually drawn inside the window; used to check generated
// statistics against the configured table.
struct WindowDiagnostics {
  int scr_events = 0;
  int heart_beats = 0;
  int emg_bursts = 0;
  double mean_rr_seconds = 0.0;
};

SubjectProfile make_subject_profile(const GeneratorConfig& config,
                                    int subject_index);

// Deterministic function of (config.master_seed, profile.subject_id, state,
// window_index); safe to call from any thread in any order.
SignalWindow generate_window(const GeneratorConfig& config,
                             const SubjectProfile& profile, RawState state,
                             int window_index,
                             WindowDiagnostics* diagnostics = nullptr);

// Full synthetic corpus: n_subjects records, windows_per_state windows per
// raw state per subject. Bytes depend only on the config.
Corpus generate_cohort(const GeneratorConfig& config);

}  // namespace plr
