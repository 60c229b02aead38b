#include "plr/metrics.hpp"

#include <cmath>

#include "plr/errors.hpp"

namespace plr {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) sum += c;
  }
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (classes != other.classes) {
    throw ParameterError("cannot add confusion matrices over different classes");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts.size(); ++j) {
      counts[i][j] += other.counts[i][j];
    }
  }
  return *this;
}

ConfusionMatrix confusion(std::span<const TaskLabel> y_true,
                          std::span<const TaskLabel> y_pred,
                          const std::vector<TaskLabel>& class_list) {
  if (y_true.size() != y_pred.size()) {
    throw ParameterError("confusion: y_true and y_pred lengths differ");
  }
  if (class_list.empty()) {
    throw ParameterError("confusion: class list is empty");
  }
  std::array<int, 4> index;
  index.fill(-1);
  for (std::size_t i = 0; i < class_list.size(); ++i) {
    index[static_cast<std::size_t>(class_list[i])] = static_cast<int>(i);
  }

  ConfusionMatrix m;
  m.classes = class_list;
  m.counts.assign(class_list.size(),
                  std::vector<std::int64_t>(class_list.size(), 0));
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    const int i = index[static_cast<std::size_t>(y_true[k])];
    const int j = index[static_cast<std::size_t>(y_pred[k])];
    if (i < 0) {
      throw ParameterError("confusion: true label " +
                           std::string(to_string(y_true[k])) +
                           " not in class list");
    }
    if (j < 0) {
      throw ParameterError("confusion: predicted label " +
                           std::string(to_string(y_pred[k])) +
                           " not in class list");
    }
    ++m.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

std::vector<ClassScore> per_class_scores(const ConfusionMatrix& m) {
  const std::size_t k = m.classes.size();
  std::vector<ClassScore> scores(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::int64_t row = 0;
    std::int64_t col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += m.counts[i][j];
      col += m.counts[j][i];
    }
    const auto diag = static_cast<double>(m.counts[i][i]);
    ClassScore& s = scores[i];
    s.precision = col > 0 ? diag / static_cast<double>(col) : 0.0;
    s.recall = row > 0 ? diag / static_cast<double>(row) : 0.0;
    const double pr = s.precision + s.recall;
    s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  }
  return scores;
}

double f1_macro(const ConfusionMatrix& m) {
  if (m.classes.empty()) {
    throw ParameterError("f1_macro: confusion matrix has no classes");
  }
  const auto scores = per_class_scores(m);
  double sum = 0.0;
  for (const ClassScore& s : scores) sum += s.f1;
  return sum / static_cast<double>(scores.size());
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return a;
}

}  // namespace plr
