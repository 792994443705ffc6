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

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace bandlimit {

struct LedgerEvent {
  std::string label;
  std::int64_t delta_bytes = 0;
};

// Counts the logical payload of live tensors and spectra. Allocator overhead
// is never included: a tensor of n doubles accounts exactly 8n bytes.
//
// All members are safe to call concurrently.
class MemoryLedger {
 public:
  MemoryLedger() = default;
  MemoryLedger(const MemoryLedger&) = delete;
  MemoryLedger& operator=(const MemoryLedger&) = delete;

  void allocate(std::string_view label, std::uint64_t bytes);
  void release(std::string_view label, std::uint64_t bytes);

  std::uint64_t live_bytes() const;
  std::uint64_t peak_bytes() const;
  std::vector<LedgerEvent> events() const;

  // Event logging can be switched off for long training runs; live/peak
  // accounting is unaffected.
  void set_event_logging(bool enabled);

 private:
  mutable std::mutex mutex_;
  std::int64_t live_ = 0;
  std::int64_t peak_ = 0;
  bool log_events_ = true;
  std::vector<LedgerEvent> events_;
};

// Maximum of live_bytes over the ledger's whole history.
std::uint64_t ledger_peak(const MemoryLedger& ledger);

// Installs a ledger as the current thread's default. Tensors and spectra
// created without an explicit ledger charge the innermost active scope.
class LedgerScope {
 public:
  explicit LedgerScope(std::shared_ptr<MemoryLedger> ledger);
  ~LedgerScope();
  LedgerScope(const LedgerScope&) = delete;
  LedgerScope& operator=(const LedgerScope&) = delete;

  static std::shared_ptr<MemoryLedger> current();

 private:
  std::shared_ptr<MemoryLedger> previous_;
};

// RAII charge against a ledger. Copies charge again, moves transfer.
class LedgerCharge {
 public:
  LedgerCharge() = default;
  LedgerCharge(std::shared_ptr<MemoryLedger> ledger, std::string label,
               std::uint64_t bytes);
  ~LedgerCharge();

  LedgerCharge(const LedgerCharge& other);
  LedgerCharge& operator=(const LedgerCharge& other);
  LedgerCharge(LedgerCharge&& other) noexcept;
  LedgerCharge& operator=(LedgerCharge&& other) noexcept;

  std::uint64_t bytes() const { return bytes_; }
  const std::shared_ptr<MemoryLedger>& ledger() const { return ledger_; }

 private:
  void reset() noexcept;

  std::shared_ptr<MemoryLedger> ledger_;
  std::string label_;
  std::uint64_t bytes_ = 0;
};

}  // namespace bandlimit
