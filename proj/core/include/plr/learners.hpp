#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "plr/dataset.hpp"
#include "plr/matrix.hpp"

namespace plr {

enum class ClassifierKind { KNN, RF, GBT };

std::string_view to_string(ClassifierKind k);
std::optional<ClassifierKind> classifier_kind_from_string(std::string_view s);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::KNN;
  int knn_k = 5;
  int rf_trees = 750;
  int gbt_rounds = 750;
  double gbt_learning_rate = 0.1;
  int gbt_max_depth = 6;
  std::uint64_t seed = 0;

  void validate() const;  // throws ParameterError

  friend bool operator==(const ClassifierSpec&,
                         const ClassifierSpec&) = default;
};

// --- fitted state -----------------------------------------------------------

struct KnnState {
  Matrix train;
  std::vector<int> labels;  // indices into the fitted class list
};

struct ClassTreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;  // leaf: majority class index
};

struct ClassTree {
  std::vector<ClassTreeNode> nodes;
  int predict(const double* x) const;
};

struct ForestState {
  std::vector<ClassTree> trees;
};

struct RegTreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: additive score, learning rate already applied
};

struct RegTree {
  std::vector<RegTreeNode> nodes;
  double predict(const double* x) const;
};

struct GbtState {
  // rounds x classes trees, flat: tree for class c of round m sits at
  // index m * n_classes + c.
  std::vector<RegTree> trees;
  int n_classes = 0;
};

// --- model ------------------------------------------------------------------

struct FitDiagnostics {
  // Training log-loss after each boosting round (GBT only).
  std::vector<double> gbt_round_logloss;
};

class TrainedModel {
 public:
  TrainedModel() = default;

  const ClassifierSpec& spec() const { return spec_; }
  const std::vector<TaskLabel>& classes() const { return classes_; }
  std::size_t feature_dim() const { return dim_; }

  // Throws ParameterError if X.cols != feature_dim().
  std::vector<TaskLabel> predict(const Matrix& X) const;

  // Self-describing JSON blob; round-trips through from_json exactly.
  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);

  friend TrainedModel fit(const ClassifierSpec&, const Matrix&,
                          const std::vector<TaskLabel>&, FitDiagnostics*);

 private:
  ClassifierSpec spec_;
  std::vector<TaskLabel> classes_;  // TaskLabel enum order
  std::size_t dim_ = 0;
  std::variant<KnnState, ForestState, GbtState> state_;
};

// Trains a classifier. Deterministic given (spec, X, y) including spec.seed;
// tree training is parallelized internally without affecting the result.
// Single-class data yields a constant predictor.
TrainedModel fit(const ClassifierSpec& spec, const Matrix& X,
                 const std::vector<TaskLabel>& y,
                 FitDiagnostics* diagnostics = nullptr);

}  // namespace plr
