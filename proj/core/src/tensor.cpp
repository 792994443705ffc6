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

#include "bandlimit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "bandlimit/errors.hpp"

namespace bandlimit {

std::size_t element_size(DType dtype) {
  return dtype == DType::f32 ? 4 : 8;
}

const char* dtype_name(DType dtype) {
  return dtype == DType::f32 ? "f32" : "f64";
}

DType parse_dtype(const std::string& name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw ParameterError("unknown precision '" + name + "' (expected f32 or f64)");
}

std::size_t shape_elements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

double round_to(DType dtype, double value) {
  return dtype == DType::f32 ? static_cast<double>(static_cast<float>(value))
                             : value;
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) {
      throw DimensionError("tensor extents must be >= 1, got " +
                           shape_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill, DType dtype,
               std::shared_ptr<MemoryLedger> ledger)
    : shape_(std::move(shape)), dtype_(dtype) {
  check_shape(shape_);
  data_.assign(shape_elements(shape_), round_to(dtype_, fill));
  charge_ = LedgerCharge(std::move(ledger), "tensor", payload_bytes());
}

Tensor::Tensor(Shape shape, std::vector<double> values, DType dtype,
               std::shared_ptr<MemoryLedger> ledger)
    : shape_(std::move(shape)), data_(std::move(values)), dtype_(dtype) {
  check_shape(shape_);
  if (data_.size() != shape_elements(shape_)) {
    throw DimensionError("value count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
  }
  round_to_dtype();
  charge_ = LedgerCharge(std::move(ledger), "tensor", payload_bytes());
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(shape_));
  }
  return shape_[axis];
}

std::uint64_t Tensor::payload_bytes() const {
  return static_cast<std::uint64_t>(data_.size()) * element_size(dtype_);
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw DimensionError("index rank does not match tensor rank");
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw DimensionError("index out of bounds");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(index)];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

std::size_t Tensor::slice_size() const {
  return shape_.empty() ? 0 : data_.size() / shape_[0];
}

std::span<double> Tensor::slice(std::size_t i) {
  const std::size_t n = slice_size();
  return std::span<double>(data_).subspan(i * n, n);
}

std::span<const double> Tensor::slice(std::size_t i) const {
  const std::size_t n = slice_size();
  return std::span<const double>(data_).subspan(i * n, n);
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_elements(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                         shape_string(shape));
  }
  return Tensor(std::move(shape), data_, dtype_, charge_.ledger());
}

void Tensor::fill(double value) {
  std::fill(data_.begin(), data_.end(), round_to(dtype_, value));
}

void Tensor::round_to_dtype() {
  if (dtype_ == DType::f32) {
    for (double& v : data_) v = round_to(DType::f32, v);
  }
}

Tensor Tensor::as_dtype(DType dtype) const {
  return Tensor(shape_, data_, dtype, charge_.ledger());
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor tensor_create(const Shape& shape, double fill, DType dtype,
                     std::shared_ptr<MemoryLedger> ledger) {
  return Tensor(shape, fill, dtype, std::move(ledger));
}

Tensor tensor_create(const Shape& shape, std::vector<double> values,
                     DType dtype, std::shared_ptr<MemoryLedger> ledger) {
  return Tensor(shape, std::move(values), dtype, std::move(ledger));
}

}  // namespace bandlimit
