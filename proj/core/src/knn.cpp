#include <algorithm>
#include <cmath>
#include <vector>

#include "learners_impl.hpp"
#include "plr/parallel.hpp"

namespace plr::detail {

namespace {

// Majority vote over the k nearest neighbors. Vote ties go to the class with
// the smaller summed neighbor distance, remaining ties to class-list order.
int vote(const std::vector<std::pair<double, std::size_t>>& neighbors,
         const std::vector<int>& labels, int n_classes) {
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  std::vector<double> dist_sums(static_cast<std::size_t>(n_classes), 0.0);
  for (const auto& [d2, idx] : neighbors) {
    const auto c = static_cast<std::size_t>(labels[idx]);
    ++votes[c];
    dist_sums[c] += std::sqrt(d2);
  }
  int best = -1;
  for (int c = 0; c < n_classes; ++c) {
    if (best < 0) {
      if (votes[static_cast<std::size_t>(c)] > 0) best = c;
      continue;
    }
    const auto cu = static_cast<std::size_t>(c);
    const auto bu = static_cast<std::size_t>(best);
    if (votes[cu] > votes[bu] ||
        (votes[cu] == votes[bu] && dist_sums[cu] < dist_sums[bu])) {
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<int> knn_predict(const ClassifierSpec& spec, const KnnState& state,
                             const Matrix& X, int n_classes) {
  const std::size_t n_train = state.train.rows;
  const std::size_t k =
      std::min(static_cast<std::size_t>(spec.knn_k), n_train);
  const std::size_t dim = state.train.cols;

  std::vector<int> out(X.rows, 0);
  parallel_for(X.rows, [&](std::size_t q) {
    const double* query = X.row(q);
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
      const double* t = state.train.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = query[j] - t[j];
        acc += diff * diff;
      }
      dist[i] = {acc, i};
    }
    // Neighbor order: distance, then training index, so equal distances
    // resolve the same way everywhere.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                      dist.end());
    dist.resize(k);
    out[q] = vote(dist, state.labels, n_classes);
  });
  return out;
}

}  // namespace plr::detail
