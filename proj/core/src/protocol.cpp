#include "plr/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>

#include "plr/errors.hpp"
#include "plr/parallel.hpp"
#include "plr/rng.hpp"

namespace plr {

std::string_view to_string(CaseId c) {
  switch (c) {
    case CaseId::CaseMinus1: return "case-1";
    case CaseId::Case0: return "case0";
    case CaseId::Case5: return "case5";
    case CaseId::Case6: return "case6";
  }
  return "?";
}

std::optional<CaseId> case_from_string(std::string_view s) {
  if (s == "case-1" || s == "-1") return CaseId::CaseMinus1;
  if (s == "case0" || s == "0") return CaseId::Case0;
  if (s == "case5" || s == "5") return CaseId::Case5;
  if (s == "case6" || s == "6") return CaseId::Case6;
  return std::nullopt;
}

std::vector<TaskLabel> case_model_classes(CaseId c) {
  switch (c) {
    case CaseId::CaseMinus1:
    case CaseId::Case0:
      return {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP};
    case CaseId::Case5:
    case CaseId::Case6:
      return {TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A};
  }
  return {};
}

std::vector<TaskLabel> case_eval_classes(CaseId c) {
  if (c == CaseId::Case0) {
    return {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A};
  }
  return case_model_classes(c);
}

std::string_view scheme_name(const EvalScheme& s) {
  if (std::holds_alternative<KnownScheme>(s)) return "known";
  if (std::holds_alternative<UnknownScheme>(s)) return "unknown";
  return "personal";
}

std::optional<EvalScheme> scheme_from_name(std::string_view s) {
  if (s == "known") return EvalScheme{KnownScheme{}};
  if (s == "unknown") return EvalScheme{UnknownScheme{}};
  if (s == "personal" || s == "person-specific") {
    return EvalScheme{PersonSpecificScheme{}};
  }
  return std::nullopt;
}

void ExperimentPlan::validate() const {
  if (modalities.empty()) {
    throw ParameterError("plan: modality set must be non-empty");
  }
  classifier.validate();
  if (preprocess) preprocess->validate();
  if (const auto* known = std::get_if<KnownScheme>(&scheme)) {
    if (!(known->train_fraction > 0.0 && known->train_fraction < 1.0)) {
      throw ParameterError("known scheme: train_fraction must lie in (0, 1)");
    }
    if (known->n_seeds < 1) {
      throw ParameterError("known scheme: n_seeds must be >= 1");
    }
  } else if (const auto* unknown = std::get_if<UnknownScheme>(&scheme)) {
    if (unknown->held_out_subjects < 1) {
      throw ParameterError("unknown scheme: held_out_subjects must be >= 1");
    }
    if (unknown->n_repeats < 1) {
      throw ParameterError("unknown scheme: n_repeats must be >= 1");
    }
  } else {
    const auto& personal = std::get<PersonSpecificScheme>(scheme);
    if (!(personal.train_fraction > 0.0 && personal.train_fraction < 1.0)) {
      throw ParameterError(
          "personal scheme: train_fraction must lie in (0, 1)");
    }
    if (personal.n_seeds < 1) {
      throw ParameterError("personal scheme: n_seeds must be >= 1");
    }
  }
}

std::string ExperimentPlan::description() const {
  std::string d;
  d += to_string(case_id);
  d += '/';
  d += scheme_name(scheme);
  d += '/';
  d += modalities.name();
  d += '/';
  d += to_string(classifier.kind);
  if (use_context) d += "+ctx";
  return d;
}

namespace {

constexpr double kValidationFraction = 0.1;

std::size_t label_slot(TaskLabel l) { return static_cast<std::size_t>(l); }

// Largest-remainder allocation: per-class take counts whose sum is exactly
// `total` and whose deviation from fraction * size stays below one sample.
std::array<std::size_t, 4> proportional_allocation(
    const std::array<std::size_t, 4>& sizes, std::size_t total,
    double fraction) {
  std::array<std::size_t, 4> take{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    const double quota = fraction * static_cast<double>(sizes[c]);
    take[c] = static_cast<std::size_t>(std::floor(quota));
    remainder[c] = quota - static_cast<double>(take[c]);
    assigned += take[c];
  }
  while (assigned < total) {
    int best = -1;
    for (int c = 0; c < 4; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (take[cu] >= sizes[cu]) continue;
      if (best < 0 || remainder[cu] > remainder[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    if (best < 0) break;  // every class exhausted
    ++take[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] -= 1.0;
    ++assigned;
  }
  return take;
}

// Splits `indices` into (taken, rest): a stratified draw of round(fraction*n)
// elements. Input must be sorted; outputs are sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_take(
    const std::vector<std::size_t>& indices,
    const std::function<TaskLabel(std::size_t)>& label_of, double fraction,
    Rng& rng) {
  std::array<std::vector<std::size_t>, 4> groups;
  for (std::size_t w : indices) groups[label_slot(label_of(w))].push_back(w);

  std::array<std::size_t, 4> sizes{};
  for (std::size_t c = 0; c < 4; ++c) sizes[c] = groups[c].size();
  const auto total = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(indices.size())));
  const auto take = proportional_allocation(sizes, total, fraction);

  std::vector<std::size_t> taken;
  std::vector<std::size_t> rest;
  taken.reserve(total);
  rest.reserve(indices.size() - total);
  for (std::size_t c = 0; c < 4; ++c) {
    rng.shuffle(groups[c]);
    for (std::size_t i = 0; i < groups[c].size(); ++i) {
      (i < take[c] ? taken : rest).push_back(groups[c][i]);
    }
  }
  std::sort(taken.begin(), taken.end());
  std::sort(rest.begin(), rest.end());
  return {std::move(taken), std::move(rest)};
}

std::vector<std::size_t> subsample_sorted(const std::vector<std::size_t>& pool,
                                          std::size_t k, Rng& rng) {
  const auto picks = rng.sample_without_replacement(pool.size(), k);
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t p : picks) out.push_back(pool[p]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Split split_known(const Corpus& corpus, double train_fraction,
                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("split_known: train_fraction must lie in (0, 1)");
  }
  if (corpus.windows.empty()) {
    throw ParameterError("split_known: corpus has no windows");
  }
  std::vector<std::size_t> all(corpus.windows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Rng rng(derive_seed(seed, "known-strata"));
  auto [train, test] = stratified_take(
      all,
      [&](std::size_t w) {
        return map_pain_levels(corpus.windows[w].raw_state);
      },
      train_fraction, rng);
  return {std::move(train), std::move(test)};
}

Split split_unknown(const Corpus& corpus, int held_out, int repeat_index,
                    std::uint64_t master_seed) {
  if (held_out < 1) {
    throw ParameterError("split_unknown: held_out must be >= 1");
  }
  if (static_cast<std::size_t>(held_out) >= corpus.subjects.size()) {
    throw ParameterError(
        "split_unknown: held_out must be smaller than the cohort");
  }
  Rng rng(derive_seed(master_seed, "unknown-split",
                      static_cast<std::uint64_t>(repeat_index)));
  const auto picks = rng.sample_without_replacement(
      corpus.subjects.size(), static_cast<std::size_t>(held_out));
  std::set<std::string_view> held;
  for (std::size_t p : picks) held.insert(corpus.subjects[p].subject_id);

  Split split;
  for (std::size_t w = 0; w < corpus.windows.size(); ++w) {
    if (held.contains(corpus.windows[w].subject_id)) {
      split.test.push_back(w);
    } else {
      split.train.push_back(w);
    }
  }
  return split;
}

Split split_personal(const Corpus& corpus, std::string_view subject_id,
                     double train_fraction, std::uint64_t seed,
                     const std::vector<TaskLabel>& required_classes) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("split_personal: train_fraction must lie in (0, 1)");
  }
  if (corpus.find_subject(subject_id) == nullptr) {
    throw ParameterError("split_personal: unknown subject " +
                         std::string(subject_id));
  }
  std::vector<std::size_t> own;
  std::array<std::size_t, 4> counts{};
  for (std::size_t w = 0; w < corpus.windows.size(); ++w) {
    if (corpus.windows[w].subject_id != subject_id) continue;
    own.push_back(w);
    ++counts[label_slot(map_pain_levels(corpus.windows[w].raw_state))];
  }
  std::vector<TaskLabel> required = required_classes;
  if (required.empty()) {
    for (TaskLabel l : kAllTaskLabels) {
      if (counts[label_slot(l)] > 0) required.push_back(l);
    }
  }
  for (TaskLabel l : required) {
    if (counts[label_slot(l)] < 2) {
      throw ProtocolError("subject " + std::string(subject_id) +
                          ": fewer than 2 samples of class " +
                          std::string(to_string(l)));
    }
  }
  Rng rng(derive_seed(seed, "personal-strata"));
  auto [train, test] = stratified_take(
      own,
      [&](std::size_t w) {
        return map_pain_levels(corpus.windows[w].raw_state);
      },
      train_fraction, rng);
  return {std::move(train), std::move(test)};
}

namespace {

std::vector<SampleRef> with_labels(
    const Corpus& corpus, const std::vector<std::size_t>& windows,
    const std::function<std::optional<TaskLabel>(TaskLabel)>& remap) {
  std::vector<SampleRef> out;
  out.reserve(windows.size());
  for (std::size_t w : windows) {
    const TaskLabel raw = map_pain_levels(corpus.windows[w].raw_state);
    if (const auto mapped = remap(raw)) out.push_back({w, *mapped});
  }
  return out;
}

ClassManifest make_manifest(const std::vector<TaskLabel>& classes,
                            const CaseDatasets& cd) {
  ClassManifest m;
  m.classes = classes;
  m.train.assign(classes.size(), 0);
  m.validation.assign(classes.size(), 0);
  m.test.assign(classes.size(), 0);
  const auto slot = [&](TaskLabel l) {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == l) return static_cast<long>(i);
    }
    return -1L;
  };
  for (const SampleRef& s : cd.train) ++m.train[static_cast<std::size_t>(slot(s.label))];
  for (const SampleRef& s : cd.validation) {
    ++m.validation[static_cast<std::size_t>(slot(s.label))];
  }
  for (const SampleRef& s : cd.test) ++m.test[static_cast<std::size_t>(slot(s.label))];
  return m;
}

void check_case_feasible(CaseId case_id, const CaseDatasets& cd) {
  const auto count_of = [](const std::vector<SampleRef>& samples, TaskLabel l) {
    std::size_t n = 0;
    for (const SampleRef& s : samples) {
      if (s.label == l) ++n;
    }
    return n;
  };
  for (TaskLabel l : cd.model_classes) {
    if (count_of(cd.train, l) == 0) {
      throw ProtocolError(std::string(to_string(case_id)) + ": class " +
                          std::string(to_string(l)) +
                          " is empty in the train split");
    }
  }
  for (TaskLabel l : cd.eval_classes) {
    if (count_of(cd.test, l) == 0) {
      throw ProtocolError(std::string(to_string(case_id)) + ": class " +
                          std::string(to_string(l)) +
                          " is empty in the test split");
    }
  }
}

}  // namespace

CaseDatasets build_case_datasets(const Corpus& corpus, CaseId case_id,
                                 const Split& split, std::uint64_t seed) {
  const auto label_of = [&](std::size_t w) {
    return map_pain_levels(corpus.windows[w].raw_state);
  };

  // The validation carve precedes case filtering and depends only on the
  // seed, so every case shares one train pool per (split, seed).
  Rng val_rng(derive_seed(seed, "validation"));
  auto [validation_idx, pool_idx] =
      stratified_take(split.train, label_of, kValidationFraction, val_rng);

  const auto identity = [](TaskLabel l) { return std::optional<TaskLabel>(l); };
  const auto drop_a = [](TaskLabel l) {
    return l == TaskLabel::A ? std::nullopt : std::optional<TaskLabel>(l);
  };
  const auto bl_to_a = [](TaskLabel l) {
    return std::optional<TaskLabel>(l == TaskLabel::BL ? TaskLabel::A : l);
  };
  const auto drop_bl = [](TaskLabel l) {
    return l == TaskLabel::BL ? std::nullopt : std::optional<TaskLabel>(l);
  };

  CaseDatasets cd;
  cd.model_classes = case_model_classes(case_id);
  cd.eval_classes = case_eval_classes(case_id);

  switch (case_id) {
    case CaseId::CaseMinus1: {
      cd.train = with_labels(corpus, pool_idx, drop_a);
      cd.validation = with_labels(corpus, validation_idx, drop_a);
      cd.test = with_labels(corpus, split.test, drop_a);
      break;
    }
    case CaseId::Case0: {
      // Same trained model as CaseMinus1; only the test side gains affect.
      CaseDatasets base =
          build_case_datasets(corpus, CaseId::CaseMinus1, split, seed);
      cd.train = std::move(base.train);
      cd.validation = std::move(base.validation);
      cd.test = with_labels(corpus, split.test, identity);
      break;
    }
    case CaseId::Case5: {
      // Uniformity with CaseMinus1: the A class is subsampled to the size
      // of the baseline pool, so totals and per-class proportions match
      // under the BL <-> A correspondence.
      std::vector<std::size_t> a_pool;
      std::size_t bl_count = 0;
      std::vector<std::size_t> pain_pool;
      for (std::size_t w : pool_idx) {
        const TaskLabel l = label_of(w);
        if (l == TaskLabel::BL) {
          ++bl_count;
          a_pool.push_back(w);
        } else if (l == TaskLabel::A) {
          a_pool.push_back(w);
        } else {
          pain_pool.push_back(w);
        }
      }
      Rng u_rng(derive_seed(seed, "case5-uniform"));
      std::vector<std::size_t> chosen_a =
          subsample_sorted(a_pool, bl_count, u_rng);
      std::vector<std::size_t> train_idx;
      train_idx.reserve(pain_pool.size() + chosen_a.size());
      train_idx.insert(train_idx.end(), pain_pool.begin(), pain_pool.end());
      train_idx.insert(train_idx.end(), chosen_a.begin(), chosen_a.end());
      std::sort(train_idx.begin(), train_idx.end());

      cd.train = with_labels(corpus, train_idx, bl_to_a);
      cd.validation = with_labels(corpus, validation_idx, bl_to_a);
      cd.test = with_labels(corpus, split.test, bl_to_a);
      break;
    }
    case CaseId::Case6: {
      std::array<std::vector<std::size_t>, 4> pools;
      for (std::size_t w : pool_idx) {
        const TaskLabel l = label_of(w);
        if (l != TaskLabel::BL) pools[label_slot(l)].push_back(w);
      }
      std::size_t m = std::string::npos;
      for (TaskLabel l : {TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A}) {
        m = std::min(m, pools[label_slot(l)].size());
      }
      if (m == 0) {
        // Feasibility reporting happens below with the precise class name.
        m = 0;
      }
      Rng b_rng(derive_seed(seed, "case6-balance"));
      std::vector<std::size_t> train_idx;
      for (TaskLabel l : {TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A}) {
        const auto chosen = subsample_sorted(pools[label_slot(l)], m, b_rng);
        train_idx.insert(train_idx.end(), chosen.begin(), chosen.end());
      }
      std::sort(train_idx.begin(), train_idx.end());

      cd.train = with_labels(corpus, train_idx, drop_bl);
      cd.validation = with_labels(corpus, validation_idx, drop_bl);
      cd.test = with_labels(corpus, split.test, drop_bl);
      break;
    }
  }

  check_case_feasible(case_id, cd);
  cd.manifest = make_manifest(cd.eval_classes, cd);
  return cd;
}

Matrix featurize_corpus(const Corpus& corpus, const ModalitySet& modalities,
                        const PreprocessConfig& config, bool use_context) {
  if (corpus.windows.empty()) {
    throw DataError("featurize_corpus: corpus has no windows");
  }
  const auto features_of = [&](std::size_t w) {
    const SignalWindow& window = corpus.windows[w];
    if (use_context) {
      const ContextFeatures ctx =
          ContextFeatures::from(corpus.subject_of(window));
      return build_feature_vector(window, modalities, config, &ctx);
    }
    return build_feature_vector(window, modalities, config, nullptr);
  };

  const FeatureVector first = features_of(0);
  const std::size_t dim = first.values.size();
  Matrix X(corpus.windows.size(), dim);
  std::copy(first.values.begin(), first.values.end(), X.row(0));
  parallel_for(corpus.windows.size() - 1, [&](std::size_t k) {
    const std::size_t w = k + 1;
    const FeatureVector fv = features_of(w);
    if (fv.values.size() != dim) {
      throw DataError("feature length differs across windows (mixed sample "
                      "rates in corpus?)");
    }
    std::copy(fv.values.begin(), fv.values.end(), X.row(w));
  });
  return X;
}

const Matrix& FeatureCache::get(const Corpus& corpus,
                                const ModalitySet& modalities,
                                const PreprocessConfig& config,
                                bool use_context) {
  std::string key = modalities.name();
  key += '|';
  key += std::to_string(config.sg_window) + ',' +
         std::to_string(config.sg_order) + ',' +
         std::to_string(config.ds_window) + ',';
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), config.overlap);
  key.append(buf, res.ptr);
  key += use_context ? "|ctx" : "|noctx";

  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_
             .emplace(std::move(key),
                      featurize_corpus(corpus, modalities, config, use_context))
             .first;
  }
  return it->second;
}

namespace {

struct GatheredData {
  Matrix X;
  std::vector<TaskLabel> y;
};

GatheredData gather(const Matrix& features,
                    const std::vector<SampleRef>& samples) {
  GatheredData g;
  g.X = Matrix(samples.size(), features.cols);
  g.y.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double* src = features.row(samples[i].window);
    std::copy(src, src + features.cols, g.X.row(i));
    g.y[i] = samples[i].label;
  }
  return g;
}

ReportEntry score_split(const Corpus& corpus, const Matrix& features,
                        const ExperimentPlan& plan, const Split& split,
                        std::uint64_t case_seed, std::uint64_t clf_seed) {
  const CaseDatasets cd =
      build_case_datasets(corpus, plan.case_id, split, case_seed);
  GatheredData train = gather(features, cd.train);
  GatheredData test = gather(features, cd.test);

  ClassifierSpec spec = plan.classifier;
  spec.seed = clf_seed;
  const TrainedModel model = fit(spec, train.X, train.y);
  const std::vector<TaskLabel> pred = model.predict(test.X);

  ReportEntry entry;
  entry.confusion = confusion(test.y, pred, cd.eval_classes);
  entry.f1_macro = f1_macro(entry.confusion);
  entry.manifest = cd.manifest;
  return entry;
}

template <typename Fn>
auto annotate_errors(const ExperimentPlan& plan, const std::string& where,
                     Fn&& fn) {
  const auto prefix = [&](const char* what) {
    return plan.description() + " " + where + ": " + what;
  };
  try {
    return fn();
  } catch (const ParameterError& e) {
    throw ParameterError(prefix(e.what()));
  } catch (const ProtocolError& e) {
    throw ProtocolError(prefix(e.what()));
  } catch (const DataError& e) {
    throw DataError(prefix(e.what()));
  }
}

}  // namespace

EvaluationReport run_experiment(const ExperimentPlan& plan,
                                const Corpus& corpus) {
  FeatureCache cache;
  return run_experiment(plan, corpus, cache);
}

EvaluationReport run_experiment(const ExperimentPlan& plan,
                                const Corpus& corpus, FeatureCache& cache) {
  plan.validate();
  if (corpus.windows.empty()) {
    throw DataError("run_experiment: corpus has no windows");
  }

  EvaluationReport report;
  report.plan = plan;
  report.resolved_preprocess =
      plan.preprocess.value_or(PreprocessConfig::defaults_for_rate(
          corpus.windows.front().sample_rate()));
  report.resolved_preprocess.validate();
  report.corpus_subjects = static_cast<int>(corpus.subjects.size());
  report.corpus_windows = corpus.windows.size();

  const Matrix& features = cache.get(corpus, plan.modalities,
                                     report.resolved_preprocess,
                                     plan.use_context);

  if (const auto* known = std::get_if<KnownScheme>(&plan.scheme)) {
    for (int i = 0; i < known->n_seeds; ++i) {
      const auto iu = static_cast<std::uint64_t>(i);
      const std::uint64_t split_seed =
          derive_seed(plan.master_seed, "known-split", iu);
      ReportEntry entry = annotate_errors(plan, "seed=" + std::to_string(i), [&] {
        const Split split =
            split_known(corpus, known->train_fraction, split_seed);
        return score_split(corpus, features, plan, split,
                           derive_seed(plan.master_seed, "case", iu),
                           derive_seed(plan.master_seed, "clf", iu));
      });
      entry.kind = "seed";
      entry.index = i;
      entry.split_seed = split_seed;
      report.entries.push_back(std::move(entry));
    }
  } else if (const auto* unknown = std::get_if<UnknownScheme>(&plan.scheme)) {
    for (int r = 0; r < unknown->n_repeats; ++r) {
      const auto ru = static_cast<std::uint64_t>(r);
      ReportEntry entry =
          annotate_errors(plan, "repeat=" + std::to_string(r), [&] {
            const Split split = split_unknown(
                corpus, unknown->held_out_subjects, r, plan.master_seed);
            return score_split(corpus, features, plan, split,
                               derive_seed(plan.master_seed, "case", ru),
                               derive_seed(plan.master_seed, "clf", ru));
          });
      entry.kind = "repeat";
      entry.index = r;
      entry.split_seed = derive_seed(plan.master_seed, "unknown-split", ru);
      report.entries.push_back(std::move(entry));
    }
  } else {
    const auto& personal = std::get<PersonSpecificScheme>(plan.scheme);
    // Class requirements: every class the case needs somewhere in the
    // subject's data, expressed over pre-case task labels.
    std::vector<TaskLabel> required;
    switch (plan.case_id) {
      case CaseId::CaseMinus1:
        required = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP};
        break;
      case CaseId::Case0:
      case CaseId::Case5:
        required = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP,
                    TaskLabel::A};
        break;
      case CaseId::Case6:
        required = {TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A};
        break;
    }
    for (int i = 0; i < personal.n_seeds; ++i) {
      const auto iu = static_cast<std::uint64_t>(i);
      ReportEntry entry;
      entry.kind = "seed";
      entry.index = i;
      entry.split_seed = derive_seed(plan.master_seed, "personal-split", iu);
      std::vector<double> subject_f1;
      for (const SubjectRecord& subj : corpus.subjects) {
        const std::uint64_t sid = hash_string(subj.subject_id);
        SubjectEntry se;
        se.subject_id = subj.subject_id;
        try {
          const Split split = split_personal(
              corpus, subj.subject_id, personal.train_fraction,
              derive_seed(plan.master_seed, "personal-split", iu, sid),
              required);
          ReportEntry scored = score_split(
              corpus, features, plan, split,
              derive_seed(plan.master_seed, "case", iu, sid),
              derive_seed(plan.master_seed, "clf", iu, sid));
          se.confusion = std::move(scored.confusion);
          se.f1_macro = scored.f1_macro;
          se.manifest = std::move(scored.manifest);
        } catch (const ProtocolError& e) {
          se.skipped = true;
          se.skip_reason = e.what();
        }
        if (!se.skipped) {
          subject_f1.push_back(se.f1_macro);
          if (entry.confusion.classes.empty()) {
            entry.confusion = se.confusion;
            entry.manifest = se.manifest;
          } else {
            entry.confusion += se.confusion;
            for (std::size_t c = 0; c < entry.manifest.classes.size(); ++c) {
              entry.manifest.train[c] += se.manifest.train[c];
              entry.manifest.validation[c] += se.manifest.validation[c];
              entry.manifest.test[c] += se.manifest.test[c];
            }
          }
        }
        entry.subjects.push_back(std::move(se));
      }
      if (subject_f1.empty()) {
        throw ProtocolError(plan.description() + " seed=" + std::to_string(i) +
                            ": every subject was skipped");
      }
      entry.f1_macro = aggregate(subject_f1).mean;
      report.entries.push_back(std::move(entry));
    }
  }

  std::vector<double> f1s;
  f1s.reserve(report.entries.size());
  for (const ReportEntry& e : report.entries) f1s.push_back(e.f1_macro);
  report.f1 = aggregate(f1s);
  return report;
}

}  // namespace plr
