#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plr/errors.hpp"

namespace plr {

// Dense row-major matrix of doubles; one row per sample.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  std::span<const double> row_span(std::size_t i) const {
    return {row(i), cols};
  }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  void push_row(std::span<const double> values) {
    if (cols == 0) {
      cols = values.size();
    } else if (values.size() != cols) {
      throw ParameterError("Matrix::push_row: inconsistent row length");
    }
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

}  // namespace plr
