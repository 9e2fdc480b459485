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

#ifndef ROO_TENSOR_H_
#define ROO_TENSOR_H_

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace roo {

// Dense row-major f32 matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  float& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  float operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// Dense row-major f32 tensor of rank 3, indexed [i][j][k].
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, float fill = 0.0f)
      : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

  std::size_t dim0() const { return d0_; }
  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }

  float& operator()(std::size_t i, std::size_t j, std::size_t k) {
    assert(i < d0_ && j < d1_ && k < d2_);
    return data_[(i * d1_ + j) * d2_ + k];
  }
  float operator()(std::size_t i, std::size_t j, std::size_t k) const {
    assert(i < d0_ && j < d1_ && k < d2_);
    return data_[(i * d1_ + j) * d2_ + k];
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t d0_ = 0;
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::vector<float> data_;
};

// out = a * b (+ bias broadcast over rows when non-empty). Accumulates in
// ascending k, so identical rows of `a` give bit-identical output rows.
Matrix matmul(const Matrix& a, const Matrix& b,
              std::span<const float> bias = {});

// Rows of `src` selected by `index` (out.row(j) = src.row(index[j])).
Matrix gather_rows(const Matrix& src, std::span<const std::uint32_t> index);

// Column-wise concatenation of matrices with equal row counts.
Matrix concat_cols(std::span<const Matrix* const> parts);

void relu_inplace(Matrix& m);

}  // namespace roo

#endif  // ROO_TENSOR_H_
