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

#include <filesystem>
#include <iosfwd>

#include "bandlimit/tensor.hpp"

namespace bandlimit {

// BLT1 raw tensor format:
//   "BLT1" | u8 dtype (1=f32, 2=f64) | u8 rank | rank x u32 LE extents |
//   row-major LE payload.
void write_raw_tensor(std::ostream& out, const Tensor& tensor);
void write_raw_tensor(const std::filesystem::path& path, const Tensor& tensor);

Tensor read_raw_tensor(std::istream& in);
Tensor load_raw_tensor(const std::filesystem::path& path);

}  // namespace bandlimit
