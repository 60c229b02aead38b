#pragma once

#include <vector>

#include "plr/learners.hpp"

// Internal seams between the per-algorithm translation units. Labels are
// already mapped to dense class indices here.
namespace plr::detail {

std::vector<int> knn_predict(const ClassifierSpec& spec, const KnnState& state,
                             const Matrix& X, int n_classes);

ForestState rf_fit(const ClassifierSpec& spec, const Matrix& X,
                   const std::vector<int>& y, int n_classes);
std::vector<int> rf_predict(const ForestState& state, const Matrix& X,
                            int n_classes);

GbtState gbt_fit(const ClassifierSpec& spec, const Matrix& X,
                 const std::vector<int>& y, int n_classes,
                 FitDiagnostics* diagnostics);
std::vector<int> gbt_predict(const GbtState& state, const Matrix& X);

}  // namespace plr::detail
