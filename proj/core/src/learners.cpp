#include "plr/learners.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

#include "learners_impl.hpp"
#include "plr/errors.hpp"

namespace plr {

std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::KNN: return "knn";
    case ClassifierKind::RF: return "rf";
    case ClassifierKind::GBT: return "gbt";
  }
  return "?";
}

std::optional<ClassifierKind> classifier_kind_from_string(std::string_view s) {
  if (s == "knn") return ClassifierKind::KNN;
  if (s == "rf") return ClassifierKind::RF;
  if (s == "gbt" || s == "xgb") return ClassifierKind::GBT;
  return std::nullopt;
}

void ClassifierSpec::validate() const {
  if (knn_k < 1) throw ParameterError("knn_k must be >= 1");
  if (rf_trees < 1) throw ParameterError("rf_trees must be >= 1");
  if (gbt_rounds < 1) throw ParameterError("gbt_rounds must be >= 1");
  if (gbt_learning_rate <= 0.0) {
    throw ParameterError("gbt_learning_rate must be > 0");
  }
  if (gbt_max_depth < 1) throw ParameterError("gbt_max_depth must be >= 1");
}

int ClassTree::predict(const double* x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const ClassTreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].label;
}

double RegTree::predict(const double* x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const RegTreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

TrainedModel fit(const ClassifierSpec& spec, const Matrix& X,
                 const std::vector<TaskLabel>& y,
                 FitDiagnostics* diagnostics) {
  spec.validate();
  if (X.rows == 0 || y.empty()) {
    throw ParameterError("fit: training data is empty");
  }
  if (X.rows != y.size()) {
    throw ParameterError("fit: X row count does not match label count");
  }
  if (X.cols == 0) throw ParameterError("fit: zero feature dimension");

  TrainedModel model;
  model.spec_ = spec;
  model.dim_ = X.cols;

  // Class list: labels present in y, in TaskLabel enum order.
  std::array<bool, 4> present{};
  for (TaskLabel l : y) present[static_cast<std::size_t>(l)] = true;
  std::array<int, 4> to_index;
  to_index.fill(-1);
  for (TaskLabel l : kAllTaskLabels) {
    if (present[static_cast<std::size_t>(l)]) {
      to_index[static_cast<std::size_t>(l)] =
          static_cast<int>(model.classes_.size());
      model.classes_.push_back(l);
    }
  }
  const int n_classes = static_cast<int>(model.classes_.size());
  std::vector<int> yi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    yi[i] = to_index[static_cast<std::size_t>(y[i])];
  }

  switch (spec.kind) {
    case ClassifierKind::KNN:
      model.state_ = KnnState{X, std::move(yi)};
      break;
    case ClassifierKind::RF:
      model.state_ = detail::rf_fit(spec, X, yi, n_classes);
      break;
    case ClassifierKind::GBT:
      model.state_ = detail::gbt_fit(spec, X, yi, n_classes, diagnostics);
      break;
  }
  return model;
}

std::vector<TaskLabel> TrainedModel::predict(const Matrix& X) const {
  if (classes_.empty()) throw ParameterError("predict: model is not fitted");
  if (X.cols != dim_) {
    throw ParameterError("predict: feature dimension mismatch (got " +
                         std::to_string(X.cols) + ", fitted " +
                         std::to_string(dim_) + ")");
  }
  const int n_classes = static_cast<int>(classes_.size());
  std::vector<int> idx;
  if (const auto* knn = std::get_if<KnnState>(&state_)) {
    idx = detail::knn_predict(spec_, *knn, X, n_classes);
  } else if (const auto* forest = std::get_if<ForestState>(&state_)) {
    idx = detail::rf_predict(*forest, X, n_classes);
  } else {
    idx = detail::gbt_predict(std::get<GbtState>(state_), X);
  }
  std::vector<TaskLabel> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[i] = classes_[static_cast<std::size_t>(idx[i])];
  }
  return out;
}

// --- serialization ----------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json class_tree_json(const ClassTree& t) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
  }
  return nodes;
}

ClassTree class_tree_from_json(const ordered_json& j) {
  ClassTree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                       n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<int>()});
  }
  return t;
}

ordered_json reg_tree_json(const RegTree& t) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  }
  return nodes;
}

RegTree reg_tree_from_json(const ordered_json& j) {
  RegTree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                       n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  return t;
}

}  // namespace

std::string TrainedModel::to_json() const {
  ordered_json doc;
  doc["format"] = "plr-model";
  doc["kind"] = std::string(to_string(spec_.kind));
  doc["spec"] = {{"knn_k", spec_.knn_k},
                 {"rf_trees", spec_.rf_trees},
                 {"gbt_rounds", spec_.gbt_rounds},
                 {"gbt_learning_rate", spec_.gbt_learning_rate},
                 {"gbt_max_depth", spec_.gbt_max_depth},
                 {"seed", spec_.seed}};
  ordered_json classes = ordered_json::array();
  for (TaskLabel l : classes_) classes.push_back(std::string(to_string(l)));
  doc["classes"] = std::move(classes);
  doc["feature_dim"] = dim_;

  if (const auto* knn = std::get_if<KnnState>(&state_)) {
    doc["state"] = {{"rows", knn->train.rows},
                    {"cols", knn->train.cols},
                    {"data", knn->train.data},
                    {"labels", knn->labels}};
  } else if (const auto* forest = std::get_if<ForestState>(&state_)) {
    ordered_json trees = ordered_json::array();
    for (const auto& t : forest->trees) trees.push_back(class_tree_json(t));
    doc["state"] = {{"trees", std::move(trees)}};
  } else {
    const auto& gbt = std::get<GbtState>(state_);
    ordered_json trees = ordered_json::array();
    for (const auto& t : gbt.trees) trees.push_back(reg_tree_json(t));
    doc["state"] = {{"n_classes", gbt.n_classes},
                    {"trees", std::move(trees)}};
  }
  return doc.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model blob is not valid JSON: ") + e.what());
  }
  if (!doc.contains("format") || doc.at("format") != "plr-model") {
    throw DataError("model blob has an unexpected format tag");
  }

  TrainedModel model;
  const auto kind = classifier_kind_from_string(doc.at("kind").get<std::string>());
  if (!kind) throw DataError("model blob names an unknown classifier kind");
  model.spec_.kind = *kind;
  const auto& spec = doc.at("spec");
  model.spec_.knn_k = spec.at("knn_k").get<int>();
  model.spec_.rf_trees = spec.at("rf_trees").get<int>();
  model.spec_.gbt_rounds = spec.at("gbt_rounds").get<int>();
  model.spec_.gbt_learning_rate = spec.at("gbt_learning_rate").get<double>();
  model.spec_.gbt_max_depth = spec.at("gbt_max_depth").get<int>();
  model.spec_.seed = spec.at("seed").get<std::uint64_t>();

  for (const auto& c : doc.at("classes")) {
    const auto label = task_label_from_string(c.get<std::string>());
    if (!label) throw DataError("model blob names an unknown class");
    model.classes_.push_back(*label);
  }
  model.dim_ = doc.at("feature_dim").get<std::size_t>();

  const auto& state = doc.at("state");
  switch (model.spec_.kind) {
    case ClassifierKind::KNN: {
      KnnState knn;
      knn.train.rows = state.at("rows").get<std::size_t>();
      knn.train.cols = state.at("cols").get<std::size_t>();
      knn.train.data = state.at("data").get<std::vector<double>>();
      knn.labels = state.at("labels").get<std::vector<int>>();
      if (knn.train.data.size() != knn.train.rows * knn.train.cols ||
          knn.labels.size() != knn.train.rows) {
        throw DataError("model blob: inconsistent KNN state sizes");
      }
      model.state_ = std::move(knn);
      break;
    }
    case ClassifierKind::RF: {
      ForestState forest;
      for (const auto& t : state.at("trees")) {
        forest.trees.push_back(class_tree_from_json(t));
      }
      model.state_ = std::move(forest);
      break;
    }
    case ClassifierKind::GBT: {
      GbtState gbt;
      gbt.n_classes = state.at("n_classes").get<int>();
      for (const auto& t : state.at("trees")) {
        gbt.trees.push_back(reg_tree_from_json(t));
      }
      model.state_ = std::move(gbt);
      break;
    }
  }
  return model;
}

}  // namespace plr
