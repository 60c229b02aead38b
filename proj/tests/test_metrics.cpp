#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "plr/errors.hpp"
#include "plr/metrics.hpp"
#include "plr/rng.hpp"

using namespace plr;

TEST_CASE("confusion counts the listed examples") {
  {
    const std::vector<TaskLabel> t{TaskLabel::A, TaskLabel::A};
    const auto m = confusion(t, t, {TaskLabel::A});
    CHECK(m.counts[0][0] == 2);
  }
  {
    const std::vector<TaskLabel> t{TaskLabel::LLP, TaskLabel::HLP};
    const std::vector<TaskLabel> p{TaskLabel::HLP, TaskLabel::LLP};
    const auto m = confusion(t, p, {TaskLabel::LLP, TaskLabel::HLP});
    CHECK(m.counts[0][0] == 0);
    CHECK(m.counts[1][1] == 0);
    CHECK(m.counts[0][1] == 1);
    CHECK(m.counts[1][0] == 1);
  }
}

TEST_CASE("confusion rejects bad input") {
  const std::vector<TaskLabel> t{TaskLabel::A};
  const std::vector<TaskLabel> p{TaskLabel::A, TaskLabel::A};
  CHECK_THROWS_AS(confusion(t, p, {TaskLabel::A}), ParameterError);
  const std::vector<TaskLabel> q{TaskLabel::BL};
  CHECK_THROWS_AS(confusion(t, q, {TaskLabel::A}), ParameterError);
}

TEST_CASE("confusion matches a direct tally on random label pairs") {
  Rng rng(17);
  const std::vector<TaskLabel> classes{TaskLabel::BL, TaskLabel::LLP,
                                       TaskLabel::HLP, TaskLabel::A};
  std::vector<TaskLabel> t(1000), p(1000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = classes[rng.bounded(4)];
    p[i] = classes[rng.bounded(4)];
  }
  const auto m = confusion(t, p, classes);
  std::map<std::pair<int, int>, std::int64_t> tally;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++tally[{static_cast<int>(t[i]), static_cast<int>(p[i])}];
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m.counts[i][j] ==
            tally[{static_cast<int>(classes[i]), static_cast<int>(classes[j])}]);
    }
  }
  CHECK(m.total() == 1000);
}

TEST_CASE("f1_macro is exact on hand-computed matrices") {
  {
    // Perfect predictions, several class volumes.
    ConfusionMatrix m;
    m.classes = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP};
    m.counts = {{7, 0, 0}, {0, 3, 0}, {0, 0, 12}};
    CHECK(f1_macro(m) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // [[1,1],[1,1]]: P = R = F1 = 0.5 per class.
    ConfusionMatrix m;
    m.classes = {TaskLabel::LLP, TaskLabel::HLP};
    m.counts = {{1, 1}, {1, 1}};
    CHECK(f1_macro(m) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("a truth-present but never-predicted class pulls the macro down") {
  // Case-0-shaped matrix: A appears in the truth but the model can only emit
  // the first three classes.
  ConfusionMatrix with_a;
  with_a.classes = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP, TaskLabel::A};
  with_a.counts = {{8, 1, 1, 0}, {1, 8, 1, 0}, {1, 1, 8, 0}, {4, 3, 3, 0}};

  ConfusionMatrix without_a;
  without_a.classes = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::HLP};
  without_a.counts = {{8, 1, 1}, {1, 8, 1}, {1, 1, 8}};

  const auto scores = per_class_scores(with_a);
  CHECK(scores[3].f1 == 0.0);
  CHECK(f1_macro(with_a) < f1_macro(without_a));
}

TEST_CASE("f1_macro is invariant under class permutations") {
  Rng rng(23);
  const std::vector<TaskLabel> classes{TaskLabel::BL, TaskLabel::LLP,
                                       TaskLabel::HLP, TaskLabel::A};
  for (int draw = 0; draw < 100; ++draw) {
    ConfusionMatrix m;
    m.classes = classes;
    m.counts.assign(4, std::vector<std::int64_t>(4, 0));
    for (auto& row : m.counts) {
      for (auto& v : row) v = static_cast<std::int64_t>(rng.bounded(30));
    }
    std::vector<std::size_t> perm{0, 1, 2, 3};
    rng.shuffle(perm);
    ConfusionMatrix p;
    p.classes.resize(4);
    p.counts.assign(4, std::vector<std::int64_t>(4, 0));
    for (std::size_t i = 0; i < 4; ++i) {
      p.classes[perm[i]] = m.classes[i];
      for (std::size_t j = 0; j < 4; ++j) {
        p.counts[perm[i]][perm[j]] = m.counts[i][j];
      }
    }
    CHECK(f1_macro(p) == doctest::Approx(f1_macro(m)).epsilon(1e-15));
  }
}

TEST_CASE("f1_macro stays within [0, 1] and hits 1 only when diagonal") {
  Rng rng(29);
  for (int draw = 0; draw < 200; ++draw) {
    ConfusionMatrix m;
    m.classes = {TaskLabel::BL, TaskLabel::LLP, TaskLabel::A};
    m.counts.assign(3, std::vector<std::int64_t>(3, 0));
    for (auto& row : m.counts) {
      for (auto& v : row) v = static_cast<std::int64_t>(rng.bounded(5));
    }
    if (m.total() == 0) m.counts[0][0] = 1;
    const double f1 = f1_macro(m);
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
    bool diagonal_full = true;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (i != j && m.counts[i][j] != 0) diagonal_full = false;
      }
      if (m.counts[i][i] == 0) diagonal_full = false;
    }
    CHECK((f1 == 1.0) == diagonal_full);
  }
}

TEST_CASE("aggregate computes mean and sample standard deviation") {
  const std::vector<double> v{0.5, 0.7, 0.6};
  const auto a = aggregate(v);
  CHECK(a.mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(a.stddev == doctest::Approx(0.1).epsilon(1e-12));
  const std::vector<double> single{0.4};
  CHECK(aggregate(single).stddev == 0.0);
  CHECK(aggregate(single).mean == doctest::Approx(0.4));
}
