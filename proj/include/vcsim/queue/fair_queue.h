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

#ifndef VCSIM_QUEUE_FAIR_QUEUE_H_
#define VCSIM_QUEUE_FAIR_QUEUE_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"

namespace vcsim {

struct QueueItem {
  std::string tenant;
  ObjectKey key;
  Duration enqueued_at{0};
};

struct TenantQueueStats {
  int64_t pending = 0;
  int64_t dispatched = 0;
  int64_t discarded = 0;
  Duration total_wait{0};  // summed enqueue -> dequeue latency
};

// Deduplicating work queue with one FIFO per tenant, dispatched by
// interleaved weighted round-robin: in round r of a cycle every tenant whose
// weight is at least r gets one turn, tenants visited in registration order.
// Tenants whose sub-queue is empty lose their turn.
//
// An item is "pending" while it sits in a sub-queue and "processing" between
// Dequeue and Done. Enqueueing a processing item defers it; Done puts it
// back at the tail of its sub-queue.
//
// With `fair` false every tenant shares one FIFO and weights are ignored.
class FairQueue {
 public:
  struct Options {
    bool fair = true;
  };

  FairQueue(const Clock& clock, Options options);
  FairQueue(const FairQueue&) = delete;
  FairQueue& operator=(const FairQueue&) = delete;

  absl::Status RegisterTenant(const std::string& tenant, int weight);
  // Takes effect at the next cycle boundary.
  absl::Status SetWeight(const std::string& tenant, int weight);
  // Discards the tenant's pending and deferred items; returns how many.
  absl::StatusOr<int64_t> RemoveTenant(const std::string& tenant);

  // False when the item was already pending or deferred.
  absl::StatusOr<bool> Enqueue(const std::string& tenant, const ObjectKey& key);
  std::optional<QueueItem> Dequeue();
  // Blocks until an item is available or the queue is shut down.
  std::optional<QueueItem> WaitDequeue();
  absl::Status Done(const std::string& tenant, const ObjectKey& key);

  void ShutDown();
  bool shutting_down() const;

  // Called (outside the lock) whenever an item becomes dispatchable.
  void SetReadyCallback(std::function<void()> callback);

  size_t pending() const;
  size_t processing() const;
  bool IsPending(const std::string& tenant, const ObjectKey& key) const;
  bool IsProcessing(const std::string& tenant, const ObjectKey& key) const;
  std::map<std::string, TenantQueueStats> Stats() const;
  bool fair() const { return options_.fair; }

 private:
  using ItemId = std::pair<std::string, ObjectKey>;

  struct TenantQueue {
    int weight = 1;
    int next_weight = 1;
    std::deque<ObjectKey> fifo;
    TenantQueueStats stats;
  };

  void PushLocked(const std::string& tenant, const ObjectKey& key);
  std::optional<QueueItem> DequeueLocked();
  std::optional<std::string> NextTenantLocked();
  void StartCycleLocked();
  void NotifyReady(std::unique_lock<std::mutex>& lock);

  const Clock& clock_;
  const Options options_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool shutdown_ = false;

  std::vector<std::string> order_;
  std::map<std::string, TenantQueue> tenants_;
  std::deque<ItemId> shared_fifo_;  // unfair mode only
  size_t pending_ = 0;

  // Items waiting for dispatch (pending or deferred), with enqueue time.
  absl::flat_hash_map<ItemId, Duration> dirty_;
  absl::flat_hash_set<ItemId> processing_;

  // Current cycle: snapshot of (tenant, weight), round and position.
  std::vector<std::pair<std::string, int>> cycle_;
  int round_ = 1;
  int max_weight_ = 0;
  size_t index_ = 0;

  std::function<void()> ready_callback_;
};

}  // namespace vcsim

#endif  // VCSIM_QUEUE_FAIR_QUEUE_H_
