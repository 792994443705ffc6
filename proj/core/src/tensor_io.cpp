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

#include "bandlimit/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "bandlimit/errors.hpp"

namespace bandlimit {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'L', 'T', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError(std::string("BLT1: truncated ") + what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_raw_tensor(std::ostream& out, const Tensor& tensor) {
  if (tensor.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw DimensionError("BLT1 supports rank <= 255");
  }
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.dtype()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.rank()));
  for (std::size_t e : tensor.shape()) {
    if (e > std::numeric_limits<std::uint32_t>::max()) {
      throw DimensionError("BLT1 extents must fit in u32");
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
  }
  if (tensor.dtype() == DType::f32) {
    for (double v : tensor.data()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  } else {
    for (double v : tensor.data()) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  if (!out) throw FormatError("BLT1: write failed");
}

void write_raw_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_raw_tensor(out, tensor);
}

Tensor read_raw_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("BLT1: bad magic");
  const auto code = get_le<std::uint8_t>(in, "dtype");
  if (code != 1 && code != 2) {
    throw FormatError("BLT1: unknown element type code " + std::to_string(code));
  }
  const auto dtype = static_cast<DType>(code);
  const auto rank = get_le<std::uint8_t>(in, "rank");
  if (rank == 0) throw FormatError("BLT1: rank must be >= 1");
  Shape shape(rank);
  for (auto& e : shape) {
    e = get_le<std::uint32_t>(in, "extent");
    if (e == 0) throw FormatError("BLT1: zero extent");
  }
  std::vector<double> values(shape_elements(shape));
  for (double& v : values) {
    if (dtype == DType::f32) {
      v = std::bit_cast<float>(get_le<std::uint32_t>(in, "payload"));
    } else {
      v = std::bit_cast<double>(get_le<std::uint64_t>(in, "payload"));
    }
  }
  return Tensor(std::move(shape), std::move(values), dtype);
}

Tensor load_raw_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_raw_tensor(in);
}

}  // namespace bandlimit
