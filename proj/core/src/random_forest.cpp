#include <algorithm>
#include <cmath>
#include <vector>

#include "learners_impl.hpp"
#include "plr/parallel.hpp"
#include "plr/rng.hpp"

namespace plr::detail {

namespace {

constexpr double kMinGiniGain = 1e-12;

struct SplitChoice {
  bool found = false;
  double weighted_gini = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double gini_from_counts(const std::vector<int>& counts, int total) {
  std::int64_t sq = 0;
  for (int c : counts) sq += static_cast<std::int64_t>(c) * c;
  return 1.0 - static_cast<double>(sq) /
                   (static_cast<double>(total) * static_cast<double>(total));
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const std::vector<int>& y, int n_classes,
              int max_features)
      : x_(X), y_(y), n_classes_(n_classes), max_features_(max_features) {}

  ClassTree build(std::vector<std::uint32_t> sample_indices, Rng& rng) {
    ClassTree tree;
    indices_ = std::move(sample_indices);
    scratch_.resize(indices_.size());

    struct Work {
      int node;
      std::size_t begin, end;
    };
    std::vector<Work> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, indices_.size()});

    std::vector<int> counts(static_cast<std::size_t>(n_classes_));
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const auto n = static_cast<int>(w.end - w.begin);

      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = w.begin; i < w.end; ++i) {
        ++counts[static_cast<std::size_t>(y_[indices_[i]])];
      }
      const int majority = majority_class(counts);
      const double parent_gini = gini_from_counts(counts, n);
      SplitChoice split;
      if (parent_gini > 0.0 && n >= 2) {
        split = best_split(w.begin, w.end, counts, rng);
      }
      if (!split.found ||
          split.weighted_gini >= parent_gini - kMinGiniGain) {
        tree.nodes[static_cast<std::size_t>(w.node)].label = majority;
        continue;
      }

      const std::size_t mid =
          partition(w.begin, w.end, split.feature, split.threshold);
      ClassTreeNode& node = tree.nodes[static_cast<std::size_t>(w.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      const int left = tree.nodes[static_cast<std::size_t>(w.node)].left;
      const int right = tree.nodes[static_cast<std::size_t>(w.node)].right;
      stack.push_back({right, mid, w.end});
      stack.push_back({left, w.begin, mid});
    }
    return tree;
  }

 private:
  int majority_class(const std::vector<int>& counts) const {
    int best = 0;
    for (int c = 1; c < n_classes_; ++c) {
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    return best;
  }

  // Candidate features are a fresh sqrt(d) draw per node; ties in impurity
  // fall to the lower feature index, then the lower threshold, which the
  // ascending scan realizes with strict comparisons.
  //
  // The squared class counts are accumulated in exact integer arithmetic so
  // the impurity of a split is a pure function of its count pattern,
  // independent of class ordering; relabeling classes by a bijection then
  // reproduces the same tree shapes.
  SplitChoice best_split(std::size_t begin, std::size_t end,
                         const std::vector<int>& parent_counts, Rng& rng) {
    const auto n = static_cast<int>(end - begin);
    auto candidates = rng.sample_without_replacement(
        x_.cols, static_cast<std::size_t>(max_features_));
    std::sort(candidates.begin(), candidates.end());

    // Minimizing the weighted Gini 1 - S/n is maximizing
    // S = sum(cl^2)/n_left + sum(cr^2)/n_right.
    SplitChoice best;
    double best_score = 0.0;
    std::vector<std::pair<double, int>> vals(static_cast<std::size_t>(n));
    std::vector<int> left_counts(static_cast<std::size_t>(n_classes_));
    for (std::size_t f : candidates) {
      for (std::size_t i = begin; i < end; ++i) {
        vals[i - begin] = {x_.at(indices_[i], f), y_[indices_[i]]};
      }
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (vals.front().first == vals.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::int64_t sq_left = 0;  // sum over classes of left count squared
      for (int i = 0; i + 1 < n; ++i) {
        const int cls = vals[static_cast<std::size_t>(i)].second;
        // (c+1)^2 - c^2 = 2c + 1
        sq_left += 2 * left_counts[static_cast<std::size_t>(cls)] + 1;
        ++left_counts[static_cast<std::size_t>(cls)];
        const double v = vals[static_cast<std::size_t>(i)].first;
        const double next = vals[static_cast<std::size_t>(i) + 1].first;
        if (v == next) continue;

        const int n_left = i + 1;
        const int n_right = n - n_left;
        std::int64_t sq_right = 0;
        for (int c = 0; c < n_classes_; ++c) {
          const std::int64_t cr =
              parent_counts[static_cast<std::size_t>(c)] -
              left_counts[static_cast<std::size_t>(c)];
          sq_right += cr * cr;
        }
        const double score =
            static_cast<double>(sq_left) / static_cast<double>(n_left) +
            static_cast<double>(sq_right) / static_cast<double>(n_right);
        if (!best.found || score > best_score) {
          best.found = true;
          best_score = score;
          best.feature = static_cast<int>(f);
          best.threshold = v + 0.5 * (next - v);
        }
      }
    }
    if (best.found) {
      best.weighted_gini = 1.0 - best_score / static_cast<double>(n);
    }
    return best;
  }

  // Stable partition through a scratch buffer; the resulting child order is
  // the same on every platform.
  std::size_t partition(std::size_t begin, std::size_t end, int feature,
                        double threshold) {
    std::size_t n_left = 0;
    std::size_t n_right = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (x_.at(indices_[i], static_cast<std::size_t>(feature)) <= threshold) {
        scratch_[n_left++] = indices_[i];
      } else {
        scratch_[end - begin - (++n_right)] = indices_[i];
      }
    }
    for (std::size_t i = 0; i < n_left; ++i) indices_[begin + i] = scratch_[i];
    for (std::size_t i = 0; i < n_right; ++i) {
      indices_[begin + n_left + i] = scratch_[end - begin - n_right + i];
    }
    return begin + n_left;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  const int n_classes_;
  const int max_features_;
  std::vector<std::uint32_t> indices_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace

ForestState rf_fit(const ClassifierSpec& spec, const Matrix& X,
                   const std::vector<int>& y, int n_classes) {
  const std::size_t n = X.rows;
  const int max_features = std::max(
      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols)))));

  ForestState state;
  state.trees.resize(static_cast<std::size_t>(spec.rf_trees));
  parallel_for(state.trees.size(), [&](std::size_t t) {
    Rng rng(derive_seed(spec.seed, "rf-tree", t));
    std::vector<std::uint32_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) {
      bootstrap[i] = static_cast<std::uint32_t>(rng.bounded(n));
    }
    TreeBuilder builder(X, y, n_classes, max_features);
    state.trees[t] = builder.build(std::move(bootstrap), rng);
  });
  return state;
}

std::vector<int> rf_predict(const ForestState& state, const Matrix& X,
                            int n_classes) {
  std::vector<int> out(X.rows, 0);
  parallel_for(X.rows, [&](std::size_t i) {
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    const double* x = X.row(i);
    for (const ClassTree& tree : state.trees) {
      ++votes[static_cast<std::size_t>(tree.predict(x))];
    }
    int best = 0;
    for (int c = 1; c < n_classes; ++c) {
      if (votes[static_cast<std::size_t>(c)] >
          votes[static_cast<std::size_t>(best)]) {
        best = c;
      }
    }
    out[i] = best;
  });
  return out;
}

}  // namespace plr::detail
