#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plr/dataset.hpp"

namespace plr {

// Rows are true labels, columns are predictions, both in class_list order.
struct ConfusionMatrix {
  std::vector<TaskLabel> classes;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const TaskLabel> y_true,
                          std::span<const TaskLabel> y_pred,
                          const std::vector<TaskLabel>& class_list);

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-class precision/recall/F1 with every 0/0 defined as 0 (absent class,
// never-predicted class, or precision + recall == 0).
std::vector<ClassScore> per_class_scores(const ConfusionMatrix& m);

// Unweighted mean of per-class F1 over the declared class list.
double f1_macro(const ConfusionMatrix& m);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for fewer than 2 values
};

Aggregate aggregate(std::span<const double> values);

}  // namespace plr
