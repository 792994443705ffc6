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
#include <functional>

namespace bandlimit {

// Process-wide worker count for layer-internal parallelism. 1 (the default)
// runs everything on the calling thread.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

// Runs body(i) for i in [0, count). Each index is handled by exactly one
// worker, so results do not depend on the worker count as long as body(i)
// only writes state owned by index i. The caller's ledger scope is installed
// on every worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bandlimit
