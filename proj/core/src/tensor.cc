/* Copyright 2026 The ROO Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "roo/tensor.h"

#include <algorithm>
#include <string>

namespace roo {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix data size " +
                                std::to_string(data_.size()) + " != " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b, std::span<const float> bias) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul shape mismatch: [" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + "] * [" +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + "]");
  }
  if (!bias.empty() && bias.size() != b.cols()) {
    throw std::invalid_argument("matmul bias length mismatch");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      float acc = 0.0f;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      dst[j] = bias.empty() ? acc : acc + bias[j];
    }
  }
  return out;
}

Matrix gather_rows(const Matrix& src, std::span<const std::uint32_t> index) {
  Matrix out(index.size(), src.cols());
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] >= src.rows()) {
      throw std::out_of_range("gather index " + std::to_string(index[j]) +
                              " out of range");
    }
    auto from = src.row(index[j]);
    std::copy(from.begin(), from.end(), out.row(j).begin());
  }
  return out;
}

Matrix concat_cols(std::span<const Matrix* const> parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts.front()->rows();
  std::size_t cols = 0;
  for (const Matrix* m : parts) {
    if (m->rows() != rows) {
      throw std::invalid_argument("concat_cols row count mismatch");
    }
    cols += m->cols();
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto dst = out.row(r).begin();
    for (const Matrix* m : parts) {
      auto src = m->row(r);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

void relu_inplace(Matrix& m) {
  for (float& v : m.data()) v = std::max(v, 0.0f);
}

}  // namespace roo
