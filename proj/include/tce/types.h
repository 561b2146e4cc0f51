// Copyright 2026 The TCompoundE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TCE_TYPES_H_
#define TCE_TYPES_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tce {

using Id = std::uint32_t;

// One temporal fact. `rel` lives in the augmented range [0, 2|R|): ids at or
// above |R| denote the reciprocal of relation `rel - |R|`.
struct Quadruple {
  Id head = 0;
  Id rel = 0;
  Id tail = 0;
  Id time = 0;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

// Dense row-major matrix of parameters.
template <class Real>
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Real(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::span<Real> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const Real> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Real& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Real at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<Real>& data() { return data_; }
  const std::vector<Real>& data() const { return data_; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

class IdError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace tce

#endif  // TCE_TYPES_H_
