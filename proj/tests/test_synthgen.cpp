#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "plr/dataset.hpp"
#include "plr/errors.hpp"
#include "plr/learners.hpp"
#include "plr/metrics.hpp"
#include "plr/parallel.hpp"
#include "plr/protocol.hpp"
#include "plr/synthgen.hpp"

using namespace plr;

namespace {

GeneratorConfig small_config(int subjects = 6, int windows = 2, int rate = 32) {
  GeneratorConfig cfg;
  cfg.n_subjects = subjects;
  cfg.female_count = subjects / 2;
  cfg.windows_per_state = windows;
  cfg.sample_rate = rate;
  cfg.master_seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("generator defaults match the curated cohort shape") {
  const GeneratorConfig cfg;
  CHECK(cfg.n_subjects == 62);
  CHECK(cfg.female_count == 33);
  CHECK(cfg.windows_per_state == 20);
  CHECK(cfg.sample_rate == 512);
}

TEST_CASE("generate_cohort is deterministic for a fixed config") {
  const GeneratorConfig cfg = small_config();
  const Corpus a = generate_cohort(cfg);
  const Corpus b = generate_cohort(cfg);
  CHECK(a == b);

  GeneratorConfig other = cfg;
  other.master_seed = 43;
  CHECK_FALSE(generate_cohort(other) == a);
}

TEST_CASE("generation is independent of the thread count") {
  const GeneratorConfig cfg = small_config();
  set_thread_count(1);
  const Corpus serial = generate_cohort(cfg);
  set_thread_count(4);
  const Corpus parallel = generate_cohort(cfg);
  set_thread_count(2);
  CHECK(serial == parallel);
}

TEST_CASE("cohort shape follows the config") {
  GeneratorConfig cfg = small_config(62, 1, 16);
  cfg.female_count = 33;
  const Corpus corpus = generate_cohort(cfg);
  CHECK(corpus.subjects.size() == 62);
  int female = 0;
  std::vector<int> ages;
  for (const auto& s : corpus.subjects) {
    if (s.gender == Gender::Female) ++female;
    CHECK(s.age >= 20);
    CHECK(s.age <= 65);
    ages.push_back(s.age);
  }
  CHECK(female == 33);
  std::sort(ages.begin(), ages.end());
  const double median = 0.5 * (ages[30] + ages[31]);
  CHECK(median > 26.0);  // median stays near the middle of the range
  CHECK(median < 46.0);
  CHECK(corpus.windows.size() == 62 * kRawStateCount);
}

TEST_CASE("one subject with one window per state yields ten windows") {
  const Corpus corpus = generate_cohort(small_config(1, 1));
  CHECK(corpus.windows.size() == 10);
  std::set<RawState> states;
  for (const auto& w : corpus.windows) {
    states.insert(w.raw_state);
    w.validate();
    CHECK(w.channels.size() == 3);
  }
  CHECK(states.size() == kRawStateCount);
}

TEST_CASE("zero subjects is a parameter error") {
  GeneratorConfig cfg = small_config(0);
  cfg.female_count = 0;
  CHECK_THROWS_AS(generate_cohort(cfg), ParameterError);
}

TEST_CASE("generate_window repeats exactly for fixed inputs") {
  const GeneratorConfig cfg = small_config();
  const SubjectProfile profile = make_subject_profile(cfg, 2);
  const SignalWindow a = generate_window(cfg, profile, RawState::Fear, 3);
  const SignalWindow b = generate_window(cfg, profile, RawState::Fear, 3);
  CHECK(a == b);
  const SignalWindow c = generate_window(cfg, profile, RawState::Fear, 4);
  CHECK_FALSE(a == c);
}

TEST_CASE("non-responders show no pain response") {
  GeneratorConfig cfg = small_config(2, 1, 64);
  cfg.non_responder_count = 2;
  const SubjectProfile profile = make_subject_profile(cfg, 0);
  CHECK_FALSE(profile.pain_responder);

  const int draws = 200;
  double bl_events = 0.0, pl4_events = 0.0;
  for (int i = 0; i < draws; ++i) {
    WindowDiagnostics bl, pl4;
    generate_window(cfg, profile, RawState::BL, i, &bl);
    generate_window(cfg, profile, RawState::PL4, i, &pl4);
    bl_events += bl.scr_events;
    pl4_events += pl4.scr_events;
  }
  bl_events /= draws;
  pl4_events /= draws;
  // Mean SCR counts agree within the Poisson noise floor.
  const double noise_floor = 3.0 * std::sqrt(bl_events / draws) + 0.2;
  CHECK(std::abs(pl4_events - bl_events) < noise_floor);
}

TEST_CASE("responders produce more phasic events under high pain") {
  const GeneratorConfig cfg = small_config(2, 1, 64);
  const SubjectProfile profile = make_subject_profile(cfg, 0);
  REQUIRE(profile.pain_responder);
  const int draws = 200;
  double bl_events = 0.0, hlp_events = 0.0;
  for (int i = 0; i < draws; ++i) {
    WindowDiagnostics bl, pl4;
    generate_window(cfg, profile, RawState::BL, i, &bl);
    generate_window(cfg, profile, RawState::PL4, i, &pl4);
    bl_events += bl.scr_events;
    hlp_events += pl4.scr_events;
  }
  CHECK(hlp_events / draws > bl_events / draws);
}

TEST_CASE("generated statistics track the state effect table") {
  GeneratorConfig cfg = small_config(1, 1, 128);
  const SubjectProfile neutral = SubjectProfile::neutral("N1");
  const int draws = 500;

  for (RawState state : {RawState::BL, RawState::PL2, RawState::PL4,
                         RawState::Anger, RawState::Sadness}) {
    const StateEffect& effect =
        cfg.state_effects[static_cast<std::size_t>(state)];
    double scr_sum = 0.0, burst_sum = 0.0, rr_sum = 0.0;
    double scr_sq = 0.0, burst_sq = 0.0, rr_sq = 0.0;
    int rr_n = 0;
    for (int i = 0; i < draws; ++i) {
      WindowDiagnostics diag;
      generate_window(cfg, neutral, state, i, &diag);
      scr_sum += diag.scr_events;
      scr_sq += static_cast<double>(diag.scr_events) * diag.scr_events;
      burst_sum += diag.emg_bursts;
      burst_sq += static_cast<double>(diag.emg_bursts) * diag.emg_bursts;
      if (diag.mean_rr_seconds > 0.0) {
        rr_sum += diag.mean_rr_seconds;
        rr_sq += diag.mean_rr_seconds * diag.mean_rr_seconds;
        ++rr_n;
      }
    }
    const auto check_within = [&](double sum, double sq, int n,
                                  double expected) {
      const double mean = sum / n;
      const double var = std::max(0.0, sq / n - mean * mean);
      const double se = std::sqrt(var / n);
      CHECK(std::abs(mean - expected) <= 3.0 * se + 1e-9);
    };
    check_within(scr_sum, scr_sq, draws, effect.scr_rate);
    check_within(burst_sum, burst_sq, draws, effect.emg_burst_rate);
    check_within(rr_sum, rr_sq, rr_n, 60.0 / effect.heart_rate);
  }
}

TEST_CASE("config parsing accepts the documented keys and rejects typos") {
  const auto cfg = GeneratorConfig::from_key_values(
      "# comment\n"
      "n_subjects = 8\n"
      "female_count = 3\n"
      "windows_per_state = 2\n"
      "sample_rate = 64\n"
      "master_seed = 7\n"
      "subject_spread = 0.3\n"
      "affect_pain_overlap = 0.9\n"
      "state.PL4.scr_rate = 9.5\n");
  CHECK(cfg.n_subjects == 8);
  CHECK(cfg.female_count == 3);
  CHECK(cfg.sample_rate == 64);
  CHECK(cfg.master_seed == 7);
  CHECK(cfg.subject_spread == doctest::Approx(0.3));
  CHECK(cfg.affect_pain_overlap == doctest::Approx(0.9));
  CHECK(cfg.state_effects[static_cast<std::size_t>(RawState::PL4)].scr_rate ==
        doctest::Approx(9.5));

  CHECK_THROWS_AS(GeneratorConfig::from_key_values("n_subject = 8\n"),
                  ParameterError);
  CHECK_THROWS_AS(GeneratorConfig::from_key_values("n_subjects = eight\n"),
                  ParameterError);
  CHECK_THROWS_AS(GeneratorConfig::from_key_values("state.XX.scr_rate = 1\n"),
                  ParameterError);
}

TEST_CASE("within-subject states separate better than cross-subject ones") {
  // Default cohort: a KNN trained and tested inside one subject beats the
  // full-cohort KNN for at least 90% of subjects.
  const GeneratorConfig cfg;  // defaults, seed 0
  const Corpus corpus = generate_cohort(cfg);
  FeatureCache cache;
  const PreprocessConfig pre =
      PreprocessConfig::defaults_for_rate(cfg.sample_rate);
  const Matrix& features = cache.get(corpus, ModalitySet::all(), pre, false);

  const std::vector<TaskLabel> classes{TaskLabel::BL, TaskLabel::LLP,
                                       TaskLabel::HLP, TaskLabel::A};
  const auto label_of = [&](std::size_t w) {
    return map_pain_levels(corpus.windows[w].raw_state);
  };

  const auto score = [&](const Split& split) {
    Matrix xtr(split.train.size(), features.cols);
    Matrix xte(split.test.size(), features.cols);
    std::vector<TaskLabel> ytr(split.train.size()), yte(split.test.size());
    for (std::size_t i = 0; i < split.train.size(); ++i) {
      std::copy(features.row(split.train[i]),
                features.row(split.train[i]) + features.cols, xtr.row(i));
      ytr[i] = label_of(split.train[i]);
    }
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      std::copy(features.row(split.test[i]),
                features.row(split.test[i]) + features.cols, xte.row(i));
      yte[i] = label_of(split.test[i]);
    }
    ClassifierSpec spec;  // KNN, k = 5
    const auto pred = fit(spec, xtr, ytr).predict(xte);
    return f1_macro(confusion(yte, pred, classes));
  };

  const double general_f1 = score(split_known(corpus, 0.7, 11));

  int better = 0;
  for (const SubjectRecord& s : corpus.subjects) {
    const double personal_f1 =
        score(split_personal(corpus, s.subject_id, 0.7, 11));
    if (personal_f1 > general_f1) ++better;
  }
  MESSAGE("general F1 = " << general_f1 << ", personal better for " << better
                          << "/" << corpus.subjects.size());
  CHECK(better * 10 >= static_cast<int>(corpus.subjects.size()) * 9);
}
