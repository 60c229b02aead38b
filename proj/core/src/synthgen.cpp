#include "plr/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "plr/errors.hpp"
#include "plr/parallel.hpp"
#include "plr/rng.hpp"

namespace plr {

namespace {

constexpr double kTau = 6.283185307179586;

// SCR biexponential shape.
constexpr double kScrRise = 0.7;    // seconds
constexpr double kScrDecay = 2.8;   // seconds
constexpr double kScrAmpMean = 0.10;
constexpr double kScrLeadIn = 4.0;  // seconds of pre-window event history

// ECG bump layout relative to the R peak: offset (s), amplitude, width (s).
struct EcgBump {
  double offset, amplitude, sigma;
};
constexpr std::array<EcgBump, 5> kEcgBumps = {{
    {-0.200, 0.10, 0.025},   // P
    {-0.035, -0.12, 0.010},  // Q
    {0.000, 1.00, 0.012},    // R
    {0.035, -0.20, 0.012},   // S
    {0.220, 0.28, 0.045},    // T
}};

constexpr double kEmgBurstLeadIn = 1.0;  // seconds
constexpr double kEmgBurstGain = 8.0;    // burst amplitude over baseline sd

std::size_t state_index(RawState s) { return static_cast<std::size_t>(s); }

bool is_pain_state(RawState s) {
  return s == RawState::PL1 || s == RawState::PL2 || s == RawState::PL3 ||
         s == RawState::PL4;
}

bool is_affect_state(RawState s) {
  return map_pain_levels(s) == TaskLabel::A;
}

// Resolved per-(subject, state) generation parameters.
struct EffectiveParams {
  double tonic_ramp;    // SCL rise over the window
  double tonic_delay;   // rise onset, seconds
  double tonic_tau;     // rise time constant, seconds
  double scr_rate;
  double heart_rate;
  double hrv;
  double emg_burst_rate;
  double emg_burst_dur;  // mean burst duration, seconds
};

EffectiveParams resolve(const GeneratorConfig& cfg,
                        const SubjectProfile& profile, RawState state) {
  const StateEffect& bl = cfg.state_effects[state_index(RawState::BL)];
  const StateEffect& st = cfg.state_effects[state_index(state)];
  const double resp = profile.responsiveness[state_index(state)];
  const double ov = is_affect_state(state) ? cfg.affect_pain_overlap : 1.0;
  const double k = resp * ov;

  EffectiveParams p;
  p.tonic_ramp = profile.eda_ramp_mult *
                 (bl.eda_tonic + k * (st.eda_tonic - bl.eda_tonic));
  // Higher arousal starts its SCL climb earlier and reaches the plateau
  // faster. Min-max normalization erases the ramp amplitude, but onset and
  // rise speed survive it, so the effective ramp doubles as a deterministic
  // within-window signature.
  const double arousal = std::max(0.0, p.tonic_ramp);
  p.tonic_delay = 1.8 / (0.4 + arousal);
  p.tonic_tau = 2.2 / (0.4 + arousal);
  p.scr_rate = std::max(
      0.05, profile.scr_rate_mult * (bl.scr_rate + k * (st.scr_rate - bl.scr_rate)));
  p.heart_rate = std::max(
      40.0, bl.heart_rate + profile.heart_rate_offset +
                k * (st.heart_rate - bl.heart_rate));
  p.hrv = std::clamp(bl.hrv + k * (st.hrv - bl.hrv), 0.004, 0.25);
  p.emg_burst_rate = std::max(
      0.02, profile.emg_rate_mult *
                (bl.emg_burst_rate + k * (st.emg_burst_rate - bl.emg_burst_rate)));
  // Sustained tension under pain: busier states hold longer bursts, which
  // separates pain from short-burst affect arousal in burst occupancy.
  p.emg_burst_dur = std::clamp(0.18 + 0.14 * p.emg_burst_rate, 0.12, 1.3);
  return p;
}

RawTrace generate_eda(const GeneratorConfig& cfg, const SubjectProfile& prof,
                      const EffectiveParams& p, Rng& rng,
                      WindowDiagnostics* diag) {
  const double T = kWindowSeconds;
  const int rate = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(T * rate));

  RawTrace trace;
  trace.channel = Channel::EDA;
  trace.sample_rate = rate;
  trace.samples.resize(n);

  const double base = prof.baseline_levels[0];
  const double ramp = p.tonic_ramp;

  // Poisson event process including a lead-in, so windows can open on the
  // tail of an earlier response.
  struct Event {
    double t, amp;
  };
  std::vector<Event> events;
  const double per_second = p.scr_rate / T;
  double t = -kScrLeadIn;
  int inside = 0;
  for (;;) {
    t += rng.exponential(per_second);
    if (t >= T) break;
    const double amp = kScrAmpMean * rng.lognormal(0.0, 0.35);
    events.push_back({t, amp});
    if (t >= 0.0) ++inside;
  }
  if (diag != nullptr) diag->scr_events = inside;

  const double noise_sd = 0.006 * prof.noise_scale;
  const double drift_phase = rng.uniform(0.0, kTau);
  const double inv_tau = 1.0 / p.tonic_tau;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / rate;
    const double since_onset = std::max(0.0, ti - p.tonic_delay);
    double v = base + ramp * (1.0 - std::exp(-since_onset * inv_tau));
    v += 0.02 * base * std::sin(kTau * ti / 23.0 + drift_phase);
    for (const Event& e : events) {
      const double dt = ti - e.t;
      if (dt <= 0.0) continue;
      v += e.amp * (std::exp(-dt / kScrDecay) - std::exp(-dt / kScrRise));
    }
    v += noise_sd * rng.normal();
    trace.samples[i] = v;
  }
  return trace;
}

RawTrace generate_ecg(const GeneratorConfig& cfg, const SubjectProfile& prof,
                      const EffectiveParams& p, Rng& rng,
                      WindowDiagnostics* diag) {
  const double T = kWindowSeconds;
  const int rate = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(T * rate));

  RawTrace trace;
  trace.channel = Channel::ECG;
  trace.sample_rate = rate;
  trace.samples.assign(n, 0.0);

  const double mean_rr = 60.0 / p.heart_rate;
  std::vector<double> beats;
  double t = -mean_rr * rng.uniform();  // random phase at window start
  double rr_sum = 0.0;
  int rr_count = 0;
  while (t < T + 0.5) {
    beats.push_back(t);
    const double z = std::clamp(rng.normal(), -3.0, 3.0);
    const double rr = std::max(0.25, mean_rr * (1.0 + p.hrv * z));
    if (t >= 0.0 && t < T) {
      rr_sum += rr;
      ++rr_count;
    }
    t += rr;
  }
  if (diag != nullptr) {
    int inside = 0;
    for (double b : beats) {
      if (b >= 0.0 && b < T) ++inside;
    }
    diag->heart_beats = inside;
    diag->mean_rr_seconds = rr_count > 0 ? rr_sum / rr_count : 0.0;
  }

  const double amp = prof.baseline_levels[1];
  for (double beat : beats) {
    for (const EcgBump& bump : kEcgBumps) {
      const double center = beat + bump.offset;
      const double lo = center - 4.0 * bump.sigma;
      const double hi = center + 4.0 * bump.sigma;
      const auto i0 = static_cast<long>(std::ceil(lo * rate));
      const auto i1 = static_cast<long>(std::floor(hi * rate));
      for (long i = std::max(0L, i0);
           i <= std::min(static_cast<long>(n) - 1, i1); ++i) {
        const double dt = static_cast<double>(i) / rate - center;
        trace.samples[static_cast<std::size_t>(i)] +=
            amp * bump.amplitude *
            std::exp(-0.5 * dt * dt / (bump.sigma * bump.sigma));
      }
    }
  }

  const double noise_sd = 0.030 * prof.noise_scale;
  const double wander_phase = rng.uniform(0.0, kTau);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / rate;
    trace.samples[i] += 0.05 * amp * std::sin(kTau * 0.25 * ti + wander_phase);
    trace.samples[i] += noise_sd * rng.normal();
  }
  return trace;
}

RawTrace generate_emg(const GeneratorConfig& cfg, const SubjectProfile& prof,
                      const EffectiveParams& p, Rng& rng,
                      WindowDiagnostics* diag) {
  const double T = kWindowSeconds;
  const int rate = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(T * rate));

  RawTrace trace;
  trace.channel = Channel::EMG;
  trace.sample_rate = rate;
  trace.samples.resize(n);

  const double base_sd = prof.baseline_levels[2] * prof.noise_scale;
  for (std::size_t i = 0; i < n; ++i) {
    trace.samples[i] = base_sd * rng.normal();
  }

  struct Burst {
    double t, dur, amp;
  };
  std::vector<Burst> bursts;
  const double per_second = p.emg_burst_rate / T;
  double t = -kEmgBurstLeadIn;
  int inside = 0;
  for (;;) {
    t += rng.exponential(per_second);
    if (t >= T) break;
    Burst b;
    b.t = t;
    b.dur = p.emg_burst_dur * rng.uniform(0.75, 1.25);
    b.amp = base_sd * kEmgBurstGain * rng.lognormal(0.0, 0.25);
    bursts.push_back(b);
    if (t >= 0.0) ++inside;
  }
  if (diag != nullptr) diag->emg_bursts = inside;

  // Bursts carry a sustained-tension offset on top of the noise so their
  // amplitude survives moving-average downsampling.
  for (const Burst& b : bursts) {
    const auto i0 = static_cast<long>(std::ceil(b.t * rate));
    const auto i1 = static_cast<long>(std::floor((b.t + b.dur) * rate));
    for (long i = std::max(0L, i0);
         i <= std::min(static_cast<long>(n) - 1, i1); ++i) {
      const double u = (static_cast<double>(i) / rate - b.t) / b.dur;
      const double envelope = 0.5 * (1.0 - std::cos(kTau * u));  // Hann
      trace.samples[static_cast<std::size_t>(i)] +=
          b.amp * envelope * (0.55 + 0.8 * rng.normal());
    }
  }
  return trace;
}

}  // namespace

std::array<StateEffect, kRawStateCount> default_state_effects() {
  std::array<StateEffect, kRawStateCount> table{};
  const auto set = [&table](RawState s, StateEffect e) {
    table[state_index(s)] = e;
  };
  //                      tonic  scr   hr    hrv    emg
  set(RawState::BL,        {0.02, 0.6, 62.0, 0.055, 0.3});
  set(RawState::PL1,       {0.80, 2.2, 68.0, 0.048, 2.5});
  set(RawState::PL2,       {1.40, 3.2, 71.0, 0.044, 3.5});
  set(RawState::PL3,       {2.20, 5.2, 78.0, 0.036, 5.5});
  set(RawState::PL4,       {3.00, 6.8, 84.0, 0.030, 7.0});
  set(RawState::Amusement, {0.70, 2.6, 72.0, 0.050, 0.5});
  set(RawState::Anger,     {1.50, 4.2, 79.0, 0.038, 1.0});
  set(RawState::Disgust,   {0.95, 3.0, 73.0, 0.044, 0.7});
  set(RawState::Fear,      {1.65, 4.6, 81.0, 0.034, 0.9});
  set(RawState::Sadness,   {0.45, 1.6, 66.0, 0.052, 0.4});
  return table;
}

void GeneratorConfig::validate() const {
  if (n_subjects < 1) throw ParameterError("n_subjects must be >= 1");
  if (female_count < 0 || female_count > n_subjects) {
    throw ParameterError("female_count must lie in [0, n_subjects]");
  }
  if (windows_per_state < 1) {
    throw ParameterError("windows_per_state must be >= 1");
  }
  if (sample_rate < 8) throw ParameterError("sample_rate must be >= 8");
  if (subject_spread < 0.0) {
    throw ParameterError("subject_spread must be >= 0");
  }
  if (affect_pain_overlap < 0.0 || affect_pain_overlap > 2.0) {
    throw ParameterError("affect_pain_overlap must lie in [0, 2]");
  }
  if (non_responder_count < 0 || non_responder_count > n_subjects) {
    throw ParameterError("non_responder_count must lie in [0, n_subjects]");
  }
  for (const StateEffect& e : state_effects) {
    if (e.scr_rate < 0.0 || e.emg_burst_rate < 0.0 || e.heart_rate <= 0.0 ||
        e.hrv <= 0.0) {
      throw ParameterError("state_effects rates must be positive");
    }
  }
}

SubjectProfile SubjectProfile::neutral(std::string subject_id, int age,
                                       Gender gender) {
  SubjectProfile p;
  p.subject_id = std::move(subject_id);
  p.age = age;
  p.gender = gender;
  p.responsiveness.fill(1.0);
  return p;
}

SubjectProfile make_subject_profile(const GeneratorConfig& cfg,
                                    int subject_index) {
  Rng rng(derive_seed(cfg.master_seed, "subject",
                      static_cast<std::uint64_t>(subject_index)));

  SubjectProfile p;
  char id[16];
  std::snprintf(id, sizeof(id), "S%03d", subject_index + 1);
  p.subject_id = id;

  // Piecewise-uniform ages on [20, 36] and [37, 65]; the cohort median lands
  // near 36.
  const double u = rng.uniform();
  if (u < 0.5) {
    p.age = 20 + static_cast<int>(std::floor(u * 2.0 * 17.0));
    p.age = std::min(p.age, 36);
  } else {
    p.age = 37 + static_cast<int>(std::floor((u - 0.5) * 2.0 * 29.0));
    p.age = std::min(p.age, 65);
  }

  p.gender =
      subject_index < cfg.female_count ? Gender::Female : Gender::Male;
  p.pain_responder =
      subject_index < cfg.n_subjects - cfg.non_responder_count;

  p.baseline_levels[0] = 2.0 * rng.lognormal(0.0, 0.30);
  p.baseline_levels[1] = rng.lognormal(0.0, 0.15);
  p.baseline_levels[2] = 0.02 * rng.lognormal(0.0, 0.30);

  p.scr_rate_mult = rng.lognormal(0.0, cfg.subject_spread);
  p.emg_rate_mult = rng.lognormal(0.0, cfg.subject_spread);
  p.eda_ramp_mult = rng.lognormal(0.0, cfg.subject_spread);
  p.heart_rate_offset = rng.normal(0.0, 7.0);
  p.noise_scale = rng.lognormal(0.0, 0.25);

  for (RawState s : kAllRawStates) {
    const bool muted = !p.pain_responder && is_pain_state(s);
    p.responsiveness[state_index(s)] =
        muted ? 0.03 * rng.lognormal(0.0, 0.20) : rng.lognormal(0.0, 0.12);
  }
  return p;
}

SignalWindow generate_window(const GeneratorConfig& cfg,
                             const SubjectProfile& profile, RawState state,
                             int window_index, WindowDiagnostics* diag) {
  const std::uint64_t unit =
      (static_cast<std::uint64_t>(state_index(state)) << 32) |
      static_cast<std::uint64_t>(static_cast<std::uint32_t>(window_index));
  const std::uint64_t seed = derive_seed(
      cfg.master_seed, "window", hash_string(profile.subject_id), unit);

  const EffectiveParams p = resolve(cfg, profile, state);

  SignalWindow w;
  w.subject_id = profile.subject_id;
  char id[32];
  std::snprintf(id, sizeof(id), "%s-%03d",
                std::string(to_string(state)).c_str(), window_index);
  w.window_id = id;
  w.raw_state = state;
  w.duration_seconds = kWindowSeconds;

  // Independent streams per channel; channel generation order is free.
  Rng eda_rng(derive_seed(seed, "eda"));
  Rng ecg_rng(derive_seed(seed, "ecg"));
  Rng emg_rng(derive_seed(seed, "emg"));
  w.channels.emplace(Channel::EDA, generate_eda(cfg, profile, p, eda_rng, diag));
  w.channels.emplace(Channel::ECG, generate_ecg(cfg, profile, p, ecg_rng, diag));
  w.channels.emplace(Channel::EMG, generate_emg(cfg, profile, p, emg_rng, diag));
  return w;
}

Corpus generate_cohort(const GeneratorConfig& cfg) {
  cfg.validate();

  std::vector<SubjectProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(cfg.n_subjects));
  Corpus corpus;
  for (int i = 0; i < cfg.n_subjects; ++i) {
    profiles.push_back(make_subject_profile(cfg, i));
    const SubjectProfile& p = profiles.back();
    corpus.subjects.push_back(
        {p.subject_id, p.age, p.gender, p.pain_responder});
  }

  const std::size_t per_subject =
      kRawStateCount * static_cast<std::size_t>(cfg.windows_per_state);
  const std::size_t total =
      per_subject * static_cast<std::size_t>(cfg.n_subjects);
  corpus.windows.resize(total);
  parallel_for(total, [&](std::size_t flat) {
    const auto subject = static_cast<int>(flat / per_subject);
    const std::size_t rem = flat % per_subject;
    const RawState state =
        kAllRawStates[rem / static_cast<std::size_t>(cfg.windows_per_state)];
    const auto k =
        static_cast<int>(rem % static_cast<std::size_t>(cfg.windows_per_state));
    corpus.windows[flat] =
        generate_window(cfg, profiles[static_cast<std::size_t>(subject)],
                        state, k);
  });

  corpus.finalize();
  return corpus;
}

GeneratorConfig GeneratorConfig::from_key_values(std::string_view text) {
  GeneratorConfig cfg;

  const auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
      s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                          s.back() == '\r')) {
      s.remove_suffix(1);
    }
    return s;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": expected key = value");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    const auto bad_value = [&]() -> ParameterError {
      return ParameterError("config line " + std::to_string(line_no) +
                            ": invalid value for " + key);
    };
    const auto as_int = [&] {
      int v = 0;
      const auto res =
          std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw bad_value();
      }
      return v;
    };
    const auto as_u64 = [&] {
      std::uint64_t v = 0;
      const auto res =
          std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw bad_value();
      }
      return v;
    };
    const auto as_double = [&] {
      double v = 0.0;
      const auto res =
          std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
        throw bad_value();
      }
      return v;
    };

    if (key == "n_subjects") {
      cfg.n_subjects = as_int();
    } else if (key == "female_count") {
      cfg.female_count = as_int();
    } else if (key == "windows_per_state") {
      cfg.windows_per_state = as_int();
    } else if (key == "sample_rate") {
      cfg.sample_rate = as_int();
    } else if (key == "master_seed") {
      cfg.master_seed = as_u64();
    } else if (key == "subject_spread") {
      cfg.subject_spread = as_double();
    } else if (key == "affect_pain_overlap") {
      cfg.affect_pain_overlap = as_double();
    } else if (key == "non_responder_count") {
      cfg.non_responder_count = as_int();
    } else if (key.starts_with("state.")) {
      const std::size_t dot = key.find('.', 6);
      if (dot == std::string::npos) {
        throw ParameterError("config line " + std::to_string(line_no) +
                             ": expected state.<name>.<field>, got " + key);
      }
      const auto state = raw_state_from_string(key.substr(6, dot - 6));
      if (!state) {
        throw ParameterError("config line " + std::to_string(line_no) +
                             ": unknown state in " + key);
      }
      StateEffect& e = cfg.state_effects[state_index(*state)];
      const std::string field = key.substr(dot + 1);
      if (field == "eda_tonic") {
        e.eda_tonic = as_double();
      } else if (field == "scr_rate") {
        e.scr_rate = as_double();
      } else if (field == "heart_rate") {
        e.heart_rate = as_double();
      } else if (field == "hrv") {
        e.hrv = as_double();
      } else if (field == "emg_burst_rate") {
        e.emg_burst_rate = as_double();
      } else {
        throw ParameterError("config line " + std::to_string(line_no) +
                             ": unknown field in " + key);
      }
    } else {
      throw ParameterError("config line " + std::to_string(line_no) +
                           ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace plr
