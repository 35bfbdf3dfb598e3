// Copyright 2026 The insitu Authors
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

#include "insitu/column_cache.h"

#include "insitu/error.h"

namespace insitu {

CacheEntry ColumnCache::Get(const CacheKey& key) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = slots_.find(key);
  if (it == slots_.end()) return {};
  lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
  return it->second.entry;
}

bool ColumnCache::Contains(const CacheKey& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  return slots_.count(key) > 0;
}

void ColumnCache::Put(const CacheKey& key, CacheEntry entry) {
  const std::uint64_t bytes = entry.byte_size();
  std::lock_guard<std::mutex> lock(mu_);
  if (bytes > budget_) {
    throw Error(ErrorKind::kBudgetExceeded,
                "cache entry " + key.first + ":" + key.second + " needs " +
                    std::to_string(bytes) + " bytes, budget is " +
                    std::to_string(budget_));
  }
  if (auto it = slots_.find(key); it != slots_.end()) EraseLocked(it);
  while (resident_ + bytes > budget_ && !lru_.empty()) {
    EraseLocked(slots_.find(lru_.back()));
    ++evictions_;
  }
  lru_.push_front(key);
  slots_.emplace(key, Slot{std::move(entry), bytes, lru_.begin()});
  resident_ += bytes;
  if (resident_ > peak_) peak_ = resident_;
}

void ColumnCache::EraseLocked(std::map<CacheKey, Slot>::iterator it) {
  resident_ -= it->second.bytes;
  lru_.erase(it->second.lru_pos);
  slots_.erase(it);
}

void ColumnCache::EraseFile(const std::string& file) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = slots_.lower_bound({file, ""});
  while (it != slots_.end() && it->first.first == file) {
    auto next = std::next(it);
    EraseLocked(it);
    it = next;
  }
}

void ColumnCache::Clear() {
  std::lock_guard<std::mutex> lock(mu_);
  slots_.clear();
  lru_.clear();
  resident_ = 0;
}

std::uint64_t ColumnCache::resident_bytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return resident_;
}

std::uint64_t ColumnCache::peak_bytes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return peak_;
}

std::size_t ColumnCache::entry_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return slots_.size();
}

std::uint64_t ColumnCache::evictions() const {
  std::lock_guard<std::mutex> lock(mu_);
  return evictions_;
}

}  // namespace insitu
