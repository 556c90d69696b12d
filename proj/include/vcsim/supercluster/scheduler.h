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

#ifndef VCSIM_SUPERCLUSTER_SCHEDULER_H_
#define VCSIM_SUPERCLUSTER_SCHEDULER_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"

namespace vcsim {

struct SchedulerConfig {
  Duration per_pod_service_time = Duration(2'500'000);  // 400 pods/s
  Duration unschedulable_backoff = Millis(1000);
};

// A pod as the scheduler sees it when checking placement constraints.
struct PlacedPod {
  ObjectKey key;
  Labels labels;
  std::vector<LabelSelector> anti_affinity;
};

struct NodeSlot {
  std::string name;
  int capacity = 0;
  std::vector<PlacedPod> pods;
};

// Least-loaded feasible node, ties broken by lowest index. A node is
// infeasible when full or when an anti-affinity term on either side matches
// a pod of the same namespace already there.
std::optional<size_t> PickNode(const std::vector<NodeSlot>& nodes,
                               const PlacedPod& pod);

// Single-queue sequential scheduler: one pod at a time, each taking
// `per_pod_service_time`. All state lives on the runtime thread.
class Scheduler {
 public:
  Scheduler(Runtime& runtime, ObjectStore& store, SchedulerConfig config);
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  // Loads the node roster and any existing pods, then watches Pods.
  void Start();
  void Stop();

  size_t queue_length() const { return queue_.size(); }
  int64_t bindings() const { return static_cast<int64_t>(bind_times_.size()); }
  int64_t unschedulable_attempts() const { return unschedulable_; }
  const std::vector<Duration>& bind_times() const { return bind_times_; }
  const std::vector<NodeSlot>& nodes() const { return nodes_; }

  // Bindings per second between the first and last binding of the longest
  // stretch during which the queue never ran dry.
  double SaturatedThroughput() const;

 private:
  void Drain();
  void Kick();
  void Finish(ObjectKey key);
  void Forget(const ObjectKey& key);

  Runtime& runtime_;
  ObjectStore& store_;
  const SchedulerConfig config_;

  std::unique_ptr<WatchStream> watch_;
  std::vector<NodeSlot> nodes_;
  std::map<std::string, size_t> node_index_;
  std::map<ObjectKey, size_t> placed_;  // pod -> node index
  std::deque<ObjectKey> queue_;
  bool busy_ = false;
  bool running_ = false;
  bool in_period_ = false;
  int64_t unschedulable_ = 0;

  std::vector<Duration> bind_times_;
  // [start, end) indices into bind_times_ of saturated stretches.
  std::vector<std::pair<size_t, size_t>> busy_periods_;
  size_t period_start_ = 0;

  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace vcsim

#endif  // VCSIM_SUPERCLUSTER_SCHEDULER_H_
