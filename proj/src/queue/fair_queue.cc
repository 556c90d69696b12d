// Copyright 2026 The vcsim Authors.
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

#include "vcsim/queue/fair_queue.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace vcsim {

FairQueue::FairQueue(const Clock& clock, Options options)
    : clock_(clock), options_(options) {}

absl::Status FairQueue::RegisterTenant(const std::string& tenant,
                                       int weight) {
  if (weight < 1) return absl::InvalidArgumentError("weight must be >= 1");
  std::lock_guard lock(mu_);
  if (tenants_.count(tenant)) {
    return absl::AlreadyExistsError(
        absl::StrCat("tenant ", tenant, " already registered"));
  }
  TenantQueue& q = tenants_[tenant];
  q.weight = weight;
  q.next_weight = weight;
  order_.push_back(tenant);
  return absl::OkStatus();
}

absl::Status FairQueue::SetWeight(const std::string& tenant, int weight) {
  if (weight < 1) return absl::InvalidArgumentError("weight must be >= 1");
  std::lock_guard lock(mu_);
  auto it = tenants_.find(tenant);
  if (it == tenants_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant));
  }
  it->second.next_weight = weight;
  return absl::OkStatus();
}

absl::StatusOr<int64_t> FairQueue::RemoveTenant(const std::string& tenant) {
  std::lock_guard lock(mu_);
  auto it = tenants_.find(tenant);
  if (it == tenants_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant));
  }
  int64_t discarded = 0;
  if (options_.fair) {
    pending_ -= it->second.fifo.size();
  } else {
    auto before = shared_fifo_.size();
    shared_fifo_.erase(
        std::remove_if(shared_fifo_.begin(), shared_fifo_.end(),
                       [&](const ItemId& id) { return id.first == tenant; }),
        shared_fifo_.end());
    pending_ -= before - shared_fifo_.size();
  }
  for (auto d = dirty_.begin(); d != dirty_.end();) {
    if (d->first.first == tenant) {
      ++discarded;
      dirty_.erase(d++);
    } else {
      ++d;
    }
  }
  tenants_.erase(it);
  order_.erase(std::find(order_.begin(), order_.end(), tenant));
  return discarded;
}

void FairQueue::PushLocked(const std::string& tenant, const ObjectKey& key) {
  TenantQueue& q = tenants_[tenant];
  if (options_.fair) {
    q.fifo.push_back(key);
  } else {
    shared_fifo_.emplace_back(tenant, key);
  }
  ++q.stats.pending;
  ++pending_;
}

void FairQueue::NotifyReady(std::unique_lock<std::mutex>& lock) {
  auto callback = ready_callback_;
  lock.unlock();
  cv_.notify_one();
  if (callback) callback();
}

absl::StatusOr<bool> FairQueue::Enqueue(const std::string& tenant,
                                        const ObjectKey& key) {
  std::unique_lock lock(mu_);
  if (!tenants_.count(tenant)) {
    return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant));
  }
  if (shutdown_) return false;
  ItemId id(tenant, key);
  auto [it, inserted] = dirty_.try_emplace(id, clock_.Now());
  if (!inserted) return false;
  if (processing_.contains(id)) return true;
  PushLocked(tenant, key);
  NotifyReady(lock);
  return true;
}

void FairQueue::StartCycleLocked() {
  cycle_.clear();
  max_weight_ = 0;
  for (const auto& t : order_) {
    TenantQueue& q = tenants_[t];
    q.weight = q.next_weight;
    cycle_.emplace_back(t, q.weight);
    max_weight_ = std::max(max_weight_, q.weight);
  }
  round_ = 1;
  index_ = 0;
}

std::optional<std::string> FairQueue::NextTenantLocked() {
  // The current cycle may be exhausted for everyone with work; a fresh cycle
  // covers every registered tenant and so always finds one.
  for (int pass = 0; pass < 2; ++pass) {
    if (cycle_.empty() || round_ > max_weight_) StartCycleLocked();
    while (round_ <= max_weight_) {
      while (index_ < cycle_.size()) {
        const auto& [tenant, weight] = cycle_[index_++];
        if (weight < round_) continue;
        auto it = tenants_.find(tenant);
        if (it != tenants_.end() && !it->second.fifo.empty()) return tenant;
      }
      index_ = 0;
      ++round_;
    }
  }
  return std::nullopt;
}

std::optional<QueueItem> FairQueue::DequeueLocked() {
  if (pending_ == 0) return std::nullopt;
  ItemId id;
  if (options_.fair) {
    auto tenant = NextTenantLocked();
    if (!tenant) return std::nullopt;
    TenantQueue& q = tenants_[*tenant];
    id = ItemId(*tenant, std::move(q.fifo.front()));
    q.fifo.pop_front();
  } else {
    id = std::move(shared_fifo_.front());
    shared_fifo_.pop_front();
  }
  --pending_;
  QueueItem item{id.first, id.second, Duration::zero()};
  auto d = dirty_.find(id);
  if (d != dirty_.end()) {
    item.enqueued_at = d->second;
    dirty_.erase(d);
  }
  TenantQueueStats& stats = tenants_[id.first].stats;
  --stats.pending;
  ++stats.dispatched;
  stats.total_wait += clock_.Now() - item.enqueued_at;
  processing_.insert(std::move(id));
  return item;
}

std::optional<QueueItem> FairQueue::Dequeue() {
  std::lock_guard lock(mu_);
  return DequeueLocked();
}

std::optional<QueueItem> FairQueue::WaitDequeue() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return pending_ > 0 || shutdown_; });
  if (shutdown_) return std::nullopt;
  auto item = DequeueLocked();
  if (pending_ > 0) cv_.notify_one();
  return item;
}

absl::Status FairQueue::Done(const std::string& tenant, const ObjectKey& key) {
  std::unique_lock lock(mu_);
  ItemId id(tenant, key);
  auto it = processing_.find(id);
  if (it == processing_.end()) {
    return absl::FailedPreconditionError(
        absl::StrCat(key.ToString(), " of ", tenant, " is not processing"));
  }
  processing_.erase(it);
  if (dirty_.contains(id) && tenants_.count(tenant)) {
    PushLocked(tenant, key);
    NotifyReady(lock);
  }
  return absl::OkStatus();
}

void FairQueue::ShutDown() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

bool FairQueue::shutting_down() const {
  std::lock_guard lock(mu_);
  return shutdown_;
}

void FairQueue::SetReadyCallback(std::function<void()> callback) {
  std::lock_guard lock(mu_);
  ready_callback_ = std::move(callback);
}

size_t FairQueue::pending() const {
  std::lock_guard lock(mu_);
  return pending_;
}

size_t FairQueue::processing() const {
  std::lock_guard lock(mu_);
  return processing_.size();
}

bool FairQueue::IsPending(const std::string& tenant,
                          const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  ItemId id(tenant, key);
  return dirty_.contains(id) && !processing_.contains(id);
}

bool FairQueue::IsProcessing(const std::string& tenant,
                             const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  return processing_.contains(ItemId(tenant, key));
}

std::map<std::string, TenantQueueStats> FairQueue::Stats() const {
  std::lock_guard lock(mu_);
  std::map<std::string, TenantQueueStats> out;
  for (const auto& [t, q] : tenants_) out[t] = q.stats;
  return out;
}

}  // namespace vcsim
