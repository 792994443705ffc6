// Copyright 2026 The bandlimit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bandlimit/memory_ledger.hpp"

namespace bandlimit {

// Codes match the BLT1 file format.
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

std::size_t element_size(DType dtype);
const char* dtype_name(DType dtype);
DType parse_dtype(const std::string& name);

using Shape = std::vector<std::size_t>;

std::size_t shape_elements(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense real tensor, row-major. Storage is always double; an f32 tensor keeps
// every element rounded to the nearest float and is accounted at 4 bytes per
// element.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, DType dtype = DType::f64,
                  std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());
  Tensor(Shape shape, std::vector<double> values, DType dtype = DType::f64,
         std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  DType dtype() const { return dtype_; }
  std::uint64_t payload_bytes() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Multi-index access (row-major); bounds are checked.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  // Contiguous sub-tensor along the leading axis.
  std::span<double> slice(std::size_t i);
  std::span<const double> slice(std::size_t i) const;
  std::size_t slice_size() const;

  Tensor reshaped(Shape shape) const;
  void fill(double value);

  // Re-applies the dtype rounding after in-place writes through data().
  void round_to_dtype();
  Tensor as_dtype(DType dtype) const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
  DType dtype_ = DType::f64;
  LedgerCharge charge_;
};

Tensor tensor_create(const Shape& shape, double fill, DType dtype = DType::f64,
                     std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());
Tensor tensor_create(const Shape& shape, std::vector<double> values,
                     DType dtype = DType::f64,
                     std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());

double round_to(DType dtype, double value);

}  // namespace bandlimit
