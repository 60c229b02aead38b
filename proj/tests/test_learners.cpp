#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "plr/errors.hpp"
#include "plr/learners.hpp"
#include "plr/rng.hpp"

using namespace plr;

namespace {

Matrix matrix_from(const std::vector<std::vector<double>>& rows) {
  Matrix m;
  for (const auto& r : rows) m.push_row(r);
  return m;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<TaskLabel> random_labels(std::size_t n, int n_classes, Rng& rng) {
  std::vector<TaskLabel> y(n);
  for (auto& l : y) {
    l = kAllTaskLabels[rng.bounded(static_cast<std::uint64_t>(n_classes))];
  }
  return y;
}

// Brute-force KNN oracle: full sort of (distance, index) pairs, majority
// vote, ties by smaller summed distance then class order. Written
// independently of the library path it checks.
TaskLabel knn_oracle(const Matrix& train, const std::vector<TaskLabel>& y,
                     const double* query, int k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < train.cols; ++j) {
      const double diff = query[j] - train.at(i, j);
      acc += diff * diff;
    }
    d.emplace_back(acc, i);
  }
  std::sort(d.begin(), d.end());
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k),
                                               d.size());
  std::map<TaskLabel, int> votes;
  std::map<TaskLabel, double> sums;
  for (std::size_t i = 0; i < kk; ++i) {
    votes[y[d[i].second]] += 1;
    sums[y[d[i].second]] += std::sqrt(d[i].first);
  }
  TaskLabel best = TaskLabel::BL;
  bool first = true;
  for (TaskLabel l : kAllTaskLabels) {  // class order = enum order
    if (!votes.contains(l)) continue;
    if (first) {
      best = l;
      first = false;
      continue;
    }
    if (votes[l] > votes[best] ||
        (votes[l] == votes[best] && sums[l] < sums[best])) {
      best = l;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("fit validates its inputs") {
  ClassifierSpec spec;
  Matrix empty;
  CHECK_THROWS_AS(fit(spec, empty, {}), ParameterError);
  Matrix x = matrix_from({{1.0, 2.0}});
  CHECK_THROWS_AS(fit(spec, x, {TaskLabel::A, TaskLabel::BL}), ParameterError);

  const auto model = fit(spec, x, {TaskLabel::A});
  Matrix wrong = matrix_from({{1.0, 2.0, 3.0}});
  CHECK_THROWS_AS(model.predict(wrong), ParameterError);
}

TEST_CASE("single-class training yields a constant predictor for all kinds") {
  Rng rng(3);
  const Matrix x = random_matrix(12, 4, rng);
  const std::vector<TaskLabel> y(12, TaskLabel::LLP);
  const Matrix probe = random_matrix(20, 4, rng);
  for (ClassifierKind kind :
       {ClassifierKind::KNN, ClassifierKind::RF, ClassifierKind::GBT}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.rf_trees = 5;
    spec.gbt_rounds = 3;
    const auto model = fit(spec, x, y);
    CHECK(model.classes() == std::vector<TaskLabel>{TaskLabel::LLP});
    for (TaskLabel l : model.predict(probe)) CHECK(l == TaskLabel::LLP);
  }
}

TEST_CASE("knn with five training points all labeled A answers A") {
  Rng rng(5);
  const Matrix x = random_matrix(5, 3, rng);
  const std::vector<TaskLabel> y(5, TaskLabel::A);
  ClassifierSpec spec;  // knn_k = 5
  const auto model = fit(spec, x, y);
  const Matrix probe = random_matrix(10, 3, rng);
  for (TaskLabel l : model.predict(probe)) CHECK(l == TaskLabel::A);
}

TEST_CASE("knn equals the brute-force oracle on 200 random instances") {
  Rng rng(2024);
  for (int instance = 0; instance < 200; ++instance) {
    const std::size_t n = 5 + rng.bounded(46);   // <= 50 points
    const std::size_t d = 1 + rng.bounded(8);    // <= 8 dims
    const int n_classes = 2 + static_cast<int>(rng.bounded(3));
    const Matrix train = random_matrix(n, d, rng);
    const auto y = random_labels(n, n_classes, rng);
    const Matrix queries = random_matrix(6, d, rng);

    ClassifierSpec spec;
    const auto model = fit(spec, train, y);
    const auto pred = model.predict(queries);
    for (std::size_t q = 0; q < queries.rows; ++q) {
      CHECK(pred[q] == knn_oracle(train, y, queries.row(q), spec.knn_k));
    }
  }
}

TEST_CASE("fitting the same data twice gives identical predictions") {
  Rng rng(41);
  const Matrix x = random_matrix(60, 6, rng);
  const auto y = random_labels(60, 3, rng);
  const Matrix probe = random_matrix(40, 6, rng);
  for (ClassifierKind kind :
       {ClassifierKind::KNN, ClassifierKind::RF, ClassifierKind::GBT}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.rf_trees = 30;
    spec.gbt_rounds = 20;
    spec.seed = 99;
    const auto a = fit(spec, x, y).predict(probe);
    const auto b = fit(spec, x, y).predict(probe);
    CHECK(a == b);
  }
}

TEST_CASE("rf reaches full training accuracy on a separable set") {
  // 40 samples, two classes separated by a margin along a diagonal.
  Rng rng(8);
  Matrix x(40, 3);
  std::vector<TaskLabel> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    const bool hi = i % 2 == 0;
    x.at(i, 0) = (hi ? 2.0 : -2.0) + rng.uniform(-0.5, 0.5);
    x.at(i, 1) = (hi ? 1.5 : -1.5) + rng.uniform(-0.5, 0.5);
    x.at(i, 2) = rng.uniform(-1.0, 1.0);
    y[i] = hi ? TaskLabel::HLP : TaskLabel::LLP;
  }
  ClassifierSpec spec;
  spec.kind = ClassifierKind::RF;
  spec.rf_trees = 25;
  spec.seed = 4;
  const auto model = fit(spec, x, y);
  const auto pred = model.predict(x);
  // Exhaustive check over every training sample.
  for (std::size_t i = 0; i < 40; ++i) CHECK(pred[i] == y[i]);
}

TEST_CASE("one gbt round at unit learning rate equals a depth-1 tree") {
  // Two classes split perfectly by one threshold on feature 0.
  Rng rng(6);
  Matrix x(30, 2);
  std::vector<TaskLabel> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    const bool hi = i < 14;
    x.at(i, 0) = hi ? rng.uniform(1.0, 2.0) : rng.uniform(-2.0, -1.0);
    x.at(i, 1) = rng.uniform(-1.0, 1.0);
    y[i] = hi ? TaskLabel::A : TaskLabel::BL;
  }
  ClassifierSpec spec;
  spec.kind = ClassifierKind::GBT;
  spec.gbt_rounds = 1;
  spec.gbt_learning_rate = 1.0;
  const auto model = fit(spec, x, y);
  const auto pred = model.predict(x);

  // Independent stump oracle: best single threshold by exhaustive scan,
  // majority label per side.
  double best_thr = 0.0;
  std::size_t best_err = x.rows + 1;
  std::vector<double> vals;
  for (std::size_t i = 0; i < x.rows; ++i) vals.push_back(x.at(i, 0));
  std::sort(vals.begin(), vals.end());
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    if (vals[i] == vals[i + 1]) continue;
    const double thr = 0.5 * (vals[i] + vals[i + 1]);
    std::map<TaskLabel, int> left, right;
    for (std::size_t r = 0; r < x.rows; ++r) {
      (x.at(r, 0) <= thr ? left : right)[y[r]] += 1;
    }
    const auto majority_miss = [](const std::map<TaskLabel, int>& side) {
      int total = 0, best = 0;
      for (const auto& [l, c] : side) {
        total += c;
        best = std::max(best, c);
      }
      return total - best;
    };
    const auto err = static_cast<std::size_t>(majority_miss(left) +
                                              majority_miss(right));
    if (err < best_err) {
      best_err = err;
      best_thr = thr;
    }
  }
  const auto majority_of_side = [&](bool left_side) {
    std::map<TaskLabel, int> c;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if ((x.at(r, 0) <= best_thr) == left_side) c[y[r]] += 1;
    }
    TaskLabel best = TaskLabel::BL;
    int most = -1;
    for (TaskLabel l : kAllTaskLabels) {
      if (c.contains(l) && c[l] > most) {
        most = c[l];
        best = l;
      }
    }
    return best;
  };
  for (std::size_t i = 0; i < x.rows; ++i) {
    CHECK(pred[i] == majority_of_side(x.at(i, 0) <= best_thr));
  }
}

TEST_CASE("gbt training log-loss is non-increasing over rounds") {
  Rng rng(12);
  const Matrix x = random_matrix(150, 6, rng);
  std::vector<TaskLabel> y(150);
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Noisy but learnable structure.
    const double s = x.at(i, 0) + 0.5 * x.at(i, 1) + 0.3 * rng.normal();
    y[i] = s > 0.4 ? TaskLabel::HLP : (s < -0.4 ? TaskLabel::BL : TaskLabel::LLP);
  }
  ClassifierSpec spec;
  spec.kind = ClassifierKind::GBT;
  spec.gbt_rounds = 750;
  FitDiagnostics diag;
  fit(spec, x, y, &diag);
  REQUIRE(diag.gbt_round_logloss.size() == 750);
  for (int checkpoint : {1, 10, 100, 750}) {
    for (int r = 1; r < checkpoint; ++r) {
      CHECK(diag.gbt_round_logloss[static_cast<std::size_t>(r)] <=
            diag.gbt_round_logloss[static_cast<std::size_t>(r - 1)] + 1e-12);
    }
  }
}

TEST_CASE("knn relabeled by a bijection permutes predictions exactly") {
  Rng rng(71);
  // Vote ties fall to summed distances, which never tie on continuous
  // features, so KNN equivariance is exact even with three classes.
  const std::map<TaskLabel, TaskLabel> bijection{
      {TaskLabel::BL, TaskLabel::HLP},
      {TaskLabel::LLP, TaskLabel::A},
      {TaskLabel::HLP, TaskLabel::BL},
      {TaskLabel::A, TaskLabel::LLP}};
  ClassifierSpec spec;
  for (int instance = 0; instance < 20; ++instance) {
    const Matrix x = random_matrix(50, 5, rng);
    const auto y = random_labels(50, 3, rng);
    std::vector<TaskLabel> y_mapped(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y_mapped[i] = bijection.at(y[i]);
    const Matrix probe = random_matrix(30, 5, rng);

    const auto base = fit(spec, x, y).predict(probe);
    const auto mapped = fit(spec, x, y_mapped).predict(probe);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(mapped[i] == bijection.at(base[i]));
    }
  }
}

TEST_CASE("rf and gbt are equivariant once class-order ties cannot fire") {
  Rng rng(72);
  // With two classes and an odd tree count the class-order tie rule is dead
  // code, which canonicalizes the comparison across the relabeling.
  const std::map<TaskLabel, TaskLabel> bijection{
      {TaskLabel::BL, TaskLabel::A}, {TaskLabel::A, TaskLabel::BL}};
  for (ClassifierKind kind : {ClassifierKind::RF, ClassifierKind::GBT}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.rf_trees = 25;
    spec.gbt_rounds = 15;
    spec.seed = 5150;
    for (int instance = 0; instance < 10; ++instance) {
      const Matrix x = random_matrix(50, 5, rng);
      std::vector<TaskLabel> y(50);
      for (auto& l : y) l = rng.bounded(2) ? TaskLabel::A : TaskLabel::BL;
      std::vector<TaskLabel> y_mapped(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) y_mapped[i] = bijection.at(y[i]);
      const Matrix probe = random_matrix(30, 5, rng);

      const auto base = fit(spec, x, y).predict(probe);
      const auto mapped = fit(spec, x, y_mapped).predict(probe);
      for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(mapped[i] == bijection.at(base[i]));
      }
    }
  }
}

TEST_CASE("models serialize to JSON and back") {
  Rng rng(314);
  const Matrix x = random_matrix(40, 4, rng);
  const auto y = random_labels(40, 3, rng);
  const Matrix probe = random_matrix(25, 4, rng);
  for (ClassifierKind kind :
       {ClassifierKind::KNN, ClassifierKind::RF, ClassifierKind::GBT}) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.rf_trees = 10;
    spec.gbt_rounds = 5;
    spec.seed = 1;
    const auto model = fit(spec, x, y);
    const auto restored = TrainedModel::from_json(model.to_json());
    CHECK(restored.classes() == model.classes());
    CHECK(restored.feature_dim() == model.feature_dim());
    CHECK(restored.predict(probe) == model.predict(probe));
    CHECK(restored.to_json() == model.to_json());
  }
  CHECK_THROWS_AS(TrainedModel::from_json("{\"format\":\"nope\"}"), DataError);
}
