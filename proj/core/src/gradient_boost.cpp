#include <algorithm>
#include <cmath>
#include <vector>

#include "learners_impl.hpp"
#include "plr/parallel.hpp"

namespace plr::detail {

namespace {

constexpr double kLambda = 1.0;     // L2 leaf regularization
constexpr double kMinGain = 1e-12;  // required split gain
constexpr double kMinHessian = 1e-16;

// Depth-wise exact-greedy regression tree on (gradient, hessian) targets,
// walking globally presorted feature orders once per level.
class RegTreeBuilder {
 public:
  RegTreeBuilder(const Matrix& X, const std::vector<std::uint32_t>& order,
                 int max_depth, double learning_rate)
      : x_(X), order_(order), max_depth_(max_depth), lr_(learning_rate) {}

  RegTree build(const std::vector<double>& g, const std::vector<double>& h) {
    const std::size_t n = x_.rows;
    RegTree tree;
    tree.nodes.emplace_back();
    node_of_.assign(n, 0);

    struct NodeAgg {
      int id;
      int depth;
      double sum_g, sum_h;
      std::size_t count;
    };
    std::vector<NodeAgg> active;
    {
      double sg = 0.0, sh = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sg += g[i];
        sh += h[i];
      }
      active.push_back({0, 0, sg, sh, n});
    }

    struct BestSplit {
      double gain = kMinGain;
      int feature = -1;
      double threshold = 0.0;
    };

    while (!active.empty()) {
      // Map node id -> slot in the active list.
      slot_of_.assign(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < active.size(); ++s) {
        slot_of_[static_cast<std::size_t>(active[s].id)] =
            static_cast<int>(s);
      }

      std::vector<BestSplit> best(active.size());
      const bool can_split =
          !active.empty() && active.front().depth < max_depth_;
      if (can_split) {
        scan_features(g, h, active, best);
      }

      // Split or finalize each active node, then reassign samples.
      std::vector<NodeAgg> next;
      std::vector<int> split_left(tree.nodes.size(), -1);
      bool any_split = false;
      for (std::size_t s = 0; s < active.size(); ++s) {
        NodeAgg& a = active[s];
        RegTreeNode& node = tree.nodes[static_cast<std::size_t>(a.id)];
        if (a.depth < max_depth_ && best[s].feature >= 0) {
          node.feature = best[s].feature;
          node.threshold = best[s].threshold;
          node.left = static_cast<int>(tree.nodes.size());
          node.right = node.left + 1;
          tree.nodes.emplace_back();
          tree.nodes.emplace_back();
          const int left = tree.nodes[static_cast<std::size_t>(a.id)].left;
          split_left.resize(tree.nodes.size(), -1);
          split_left[static_cast<std::size_t>(a.id)] = left;
          next.push_back({left, a.depth + 1, 0.0, 0.0, 0});
          next.push_back({left + 1, a.depth + 1, 0.0, 0.0, 0});
          any_split = true;
        } else {
          node.value = -lr_ * a.sum_g / (a.sum_h + kLambda);
        }
      }

      if (any_split) {
        slot_of_.assign(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < next.size(); ++s) {
          slot_of_[static_cast<std::size_t>(next[s].id)] =
              static_cast<int>(s);
        }
        for (std::size_t i = 0; i < n; ++i) {
          const int nd = node_of_[i];
          const int left = split_left[static_cast<std::size_t>(nd)];
          if (left < 0) continue;  // sample already reached a leaf
          const RegTreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
          const int child =
              x_.at(i, static_cast<std::size_t>(node.feature)) <=
                      node.threshold
                  ? left
                  : left + 1;
          node_of_[i] = child;
          NodeAgg& agg = next[static_cast<std::size_t>(
              slot_of_[static_cast<std::size_t>(child)])];
          agg.sum_g += g[i];
          agg.sum_h += h[i];
          ++agg.count;
        }
      }
      active = std::move(next);
    }
    return tree;
  }

  // Leaf id per training sample from the last build; lets callers update
  // scores without walking the tree.
  const std::vector<int>& leaf_assignment() const { return node_of_; }

 private:
  struct RunState {
    double g = 0.0, h = 0.0;
    std::size_t count = 0;
    double prev = 0.0;
  };

  template <typename NodeAgg, typename BestSplit>
  void scan_features(const std::vector<double>& g, const std::vector<double>& h,
                     const std::vector<NodeAgg>& active,
                     std::vector<BestSplit>& best) {
    const std::size_t n = x_.rows;
    std::vector<RunState> run(active.size());
    for (std::size_t f = 0; f < x_.cols; ++f) {
      std::fill(run.begin(), run.end(), RunState{});
      const std::uint32_t* ord = order_.data() + f * n;
      for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t i = ord[k];
        const int slot = slot_of_[static_cast<std::size_t>(node_of_[i])];
        if (slot < 0) continue;
        RunState& r = run[static_cast<std::size_t>(slot)];
        const double v = x_.at(i, f);
        if (r.count > 0 && v > r.prev) {
          const NodeAgg& a = active[static_cast<std::size_t>(slot)];
          const double gl = r.g, hl = r.h;
          const double gr = a.sum_g - gl, hr = a.sum_h - hl;
          const double gain = gl * gl / (hl + kLambda) +
                              gr * gr / (hr + kLambda) -
                              a.sum_g * a.sum_g / (a.sum_h + kLambda);
          BestSplit& b = best[static_cast<std::size_t>(slot)];
          if (gain > b.gain) {
            b.gain = gain;
            b.feature = static_cast<int>(f);
            b.threshold = r.prev + 0.5 * (v - r.prev);
          }
        }
        r.g += g[i];
        r.h += h[i];
        r.count += 1;
        r.prev = v;
      }
    }
  }

  const Matrix& x_;
  const std::vector<std::uint32_t>& order_;
  const int max_depth_;
  const double lr_;
  std::vector<int> node_of_;
  std::vector<int> slot_of_;
};

void softmax_rows(const std::vector<double>& scores, std::size_t n, int k,
                  std::vector<double>& probs) {
  probs.resize(scores.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double* s = scores.data() + i * static_cast<std::size_t>(k);
    double* p = probs.data() + i * static_cast<std::size_t>(k);
    double mx = s[0];
    for (int c = 1; c < k; ++c) mx = std::max(mx, s[c]);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      p[c] = std::exp(s[c] - mx);
      sum += p[c];
    }
    const double inv = 1.0 / sum;
    for (int c = 0; c < k; ++c) p[c] *= inv;
  }
}

double mean_logloss(const std::vector<double>& probs,
                    const std::vector<int>& y, int k) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p =
        probs[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(y[i])];
    loss -= std::log(std::max(p, 1e-15));
  }
  return loss / static_cast<double>(y.size());
}

}  // namespace

GbtState gbt_fit(const ClassifierSpec& spec, const Matrix& X,
                 const std::vector<int>& y, int n_classes,
                 FitDiagnostics* diagnostics) {
  const std::size_t n = X.rows;
  const std::size_t d = X.cols;
  const int k = n_classes;

  // Global presort, shared by every tree; sample index breaks value ties.
  std::vector<std::uint32_t> order(d * n);
  parallel_for(d, [&](std::size_t f) {
    std::uint32_t* ord = order.data() + f * n;
    for (std::size_t i = 0; i < n; ++i) ord[i] = static_cast<std::uint32_t>(i);
    std::sort(ord, ord + n, [&](std::uint32_t a, std::uint32_t b) {
      const double va = X.at(a, f);
      const double vb = X.at(b, f);
      if (va != vb) return va < vb;
      return a < b;
    });
  });

  GbtState state;
  state.n_classes = k;
  state.trees.resize(static_cast<std::size_t>(spec.gbt_rounds) *
                     static_cast<std::size_t>(k));

  std::vector<double> scores(n * static_cast<std::size_t>(k), 0.0);
  std::vector<double> probs;
  if (diagnostics != nullptr) diagnostics->gbt_round_logloss.clear();

  std::vector<std::vector<int>> leaf_of(static_cast<std::size_t>(k));
  for (int round = 0; round < spec.gbt_rounds; ++round) {
    softmax_rows(scores, n, k, probs);
    parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = probs[i * static_cast<std::size_t>(k) + c];
        g[i] = p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
        h[i] = std::max(p * (1.0 - p), kMinHessian);
      }
      RegTreeBuilder builder(X, order, spec.gbt_max_depth,
                             spec.gbt_learning_rate);
      RegTree tree = builder.build(g, h);
      leaf_of[c] = builder.leaf_assignment();
      state.trees[static_cast<std::size_t>(round) *
                      static_cast<std::size_t>(k) +
                  c] = std::move(tree);
    });
    for (int c = 0; c < k; ++c) {
      const RegTree& tree =
          state.trees[static_cast<std::size_t>(round) *
                          static_cast<std::size_t>(k) +
                      static_cast<std::size_t>(c)];
      const auto& leaves = leaf_of[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < n; ++i) {
        scores[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] +=
            tree.nodes[static_cast<std::size_t>(leaves[i])].value;
      }
    }
    if (diagnostics != nullptr) {
      softmax_rows(scores, n, k, probs);
      diagnostics->gbt_round_logloss.push_back(mean_logloss(probs, y, k));
    }
  }
  return state;
}

std::vector<int> gbt_predict(const GbtState& state, const Matrix& X) {
  const auto k = static_cast<std::size_t>(state.n_classes);
  std::vector<int> out(X.rows, 0);
  parallel_for(X.rows, [&](std::size_t i) {
    const double* x = X.row(i);
    std::vector<double> score(k, 0.0);
    for (std::size_t t = 0; t < state.trees.size(); ++t) {
      score[t % k] += state.trees[t].predict(x);
    }
    int best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (score[c] > score[static_cast<std::size_t>(best)]) {
        best = static_cast<int>(c);
      }
    }
    out[i] = best;
  });
  return out;
}

}  // namespace plr::detail
