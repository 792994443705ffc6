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

#include "bandlimit/memory_ledger.hpp"

#include <algorithm>
#include <utility>

namespace bandlimit {

void MemoryLedger::allocate(std::string_view label, std::uint64_t bytes) {
  std::lock_guard<std::mutex> lock(mutex_);
  live_ += static_cast<std::int64_t>(bytes);
  peak_ = std::max(peak_, live_);
  if (log_events_) {
    events_.push_back({std::string(label), static_cast<std::int64_t>(bytes)});
  }
}

void MemoryLedger::release(std::string_view label, std::uint64_t bytes) {
  std::lock_guard<std::mutex> lock(mutex_);
  live_ -= static_cast<std::int64_t>(bytes);
  if (log_events_) {
    events_.push_back({std::string(label), -static_cast<std::int64_t>(bytes)});
  }
}

std::uint64_t MemoryLedger::live_bytes() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return static_cast<std::uint64_t>(live_);
}

std::uint64_t MemoryLedger::peak_bytes() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return static_cast<std::uint64_t>(peak_);
}

std::vector<LedgerEvent> MemoryLedger::events() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return events_;
}

void MemoryLedger::set_event_logging(bool enabled) {
  std::lock_guard<std::mutex> lock(mutex_);
  log_events_ = enabled;
}

std::uint64_t ledger_peak(const MemoryLedger& ledger) {
  return ledger.peak_bytes();
}

namespace {
thread_local std::shared_ptr<MemoryLedger> current_ledger;
}  // namespace

LedgerScope::LedgerScope(std::shared_ptr<MemoryLedger> ledger)
    : previous_(std::move(current_ledger)) {
  current_ledger = std::move(ledger);
}

LedgerScope::~LedgerScope() { current_ledger = std::move(previous_); }

std::shared_ptr<MemoryLedger> LedgerScope::current() { return current_ledger; }

LedgerCharge::LedgerCharge(std::shared_ptr<MemoryLedger> ledger,
                           std::string label, std::uint64_t bytes)
    : ledger_(std::move(ledger)), label_(std::move(label)), bytes_(bytes) {
  if (ledger_) ledger_->allocate(label_, bytes_);
}

LedgerCharge::~LedgerCharge() { reset(); }

LedgerCharge::LedgerCharge(const LedgerCharge& other)
    : ledger_(other.ledger_), label_(other.label_), bytes_(other.bytes_) {
  if (ledger_) ledger_->allocate(label_, bytes_);
}

LedgerCharge& LedgerCharge::operator=(const LedgerCharge& other) {
  if (this != &other) {
    LedgerCharge copy(other);
    *this = std::move(copy);
  }
  return *this;
}

LedgerCharge::LedgerCharge(LedgerCharge&& other) noexcept
    : ledger_(std::move(other.ledger_)),
      label_(std::move(other.label_)),
      bytes_(std::exchange(other.bytes_, 0)) {}

LedgerCharge& LedgerCharge::operator=(LedgerCharge&& other) noexcept {
  if (this != &other) {
    reset();
    ledger_ = std::move(other.ledger_);
    label_ = std::move(other.label_);
    bytes_ = std::exchange(other.bytes_, 0);
  }
  return *this;
}

void LedgerCharge::reset() noexcept {
  if (ledger_) {
    ledger_->release(label_, bytes_);
    ledger_.reset();
  }
  bytes_ = 0;
}

}  // namespace bandlimit
