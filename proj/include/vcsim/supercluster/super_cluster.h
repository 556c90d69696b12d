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

#ifndef VCSIM_SUPERCLUSTER_SUPER_CLUSTER_H_
#define VCSIM_SUPERCLUSTER_SUPER_CLUSTER_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"
#include "vcsim/supercluster/kube_proxy.h"
#include "vcsim/supercluster/scheduler.h"

namespace vcsim {

// Marks bound pods Running and ready once the proxy's init gate admits
// them. A null proxy admits every pod.
class MockKubelet {
 public:
  MockKubelet(Runtime& runtime, ObjectStore& store, KubeProxy* proxy,
              Duration ready_delay);
  ~MockKubelet();
  MockKubelet(const MockKubelet&) = delete;
  MockKubelet& operator=(const MockKubelet&) = delete;

  void Start();
  void Stop();
  // Re-evaluates a pod that was held at the gate.
  void Recheck(const ObjectKey& pod);

  int64_t ready_count() const { return ready_count_; }
  size_t waiting() const { return waiting_.size(); }
  // Per pod, when it was marked ready.
  const std::map<ObjectKey, Duration>& ready_times() const {
    return ready_times_;
  }
  // Pods found closed at the gate when their start came due. Stays zero
  // unless the gate regresses.
  int64_t gate_violations() const { return gate_violations_; }

 private:
  void Drain();
  void Consider(const VersionedObject& pod);
  void MarkReady(const ObjectKey& pod);

  Runtime& runtime_;
  ObjectStore& store_;
  KubeProxy* proxy_;
  const Duration ready_delay_;

  std::unique_ptr<WatchStream> watch_;
  std::atomic<bool> drain_posted_{false};
  std::set<ObjectKey> waiting_;
  std::set<ObjectKey> starting_;
  std::map<ObjectKey, Duration> ready_times_;
  int64_t ready_count_ = 0;
  int64_t gate_violations_ = 0;
  bool running_ = false;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

// Physical nodes and their heartbeats.
class NodeAgent {
 public:
  NodeAgent(Runtime& runtime, ObjectStore& store, int nodes, int capacity,
            Duration heartbeat_period);
  ~NodeAgent();
  NodeAgent(const NodeAgent&) = delete;
  NodeAgent& operator=(const NodeAgent&) = delete;

  // Creates the Node objects; names sort in index order.
  absl::Status CreateNodes();
  void Start();
  void Stop();

  void StopHeartbeat(const std::string& node) { silent_.insert(node); }
  void ResumeHeartbeat(const std::string& node) { silent_.erase(node); }
  const std::vector<std::string>& node_names() const { return names_; }
  int64_t heartbeats() const { return heartbeats_; }

  static std::string NodeName(int index, int total);

 private:
  void Beat();

  Runtime& runtime_;
  ObjectStore& store_;
  const int count_;
  const int capacity_;
  const Duration period_;
  std::vector<std::string> names_;
  std::set<std::string> silent_;
  int64_t heartbeats_ = 0;
  bool running_ = false;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

struct SuperSimConfig {
  int nodes = 100;
  int node_capacity = 110;
  SchedulerConfig scheduler;
  KubeProxyConfig proxy;
  Duration kubelet_ready_delay{0};
  Duration heartbeat_period = std::chrono::seconds(10);
};

// The super cluster's active components over one store.
class SuperCluster {
 public:
  SuperCluster(Runtime& runtime, ObjectStore& store, ScopeFn scope,
               SuperSimConfig config);
  ~SuperCluster();

  // Creates nodes and starts the proxy, scheduler, kubelet and heartbeats.
  absl::Status Start();
  void Stop();

  Scheduler& scheduler() { return *scheduler_; }
  KubeProxy& proxy() { return *proxy_; }
  MockKubelet& kubelet() { return *kubelet_; }
  NodeAgent& nodes() { return *nodes_; }
  const SuperSimConfig& config() const { return config_; }

 private:
  const SuperSimConfig config_;
  std::unique_ptr<NodeAgent> nodes_;
  std::unique_ptr<KubeProxy> proxy_;
  std::unique_ptr<Scheduler> scheduler_;
  std::unique_ptr<MockKubelet> kubelet_;
  bool started_ = false;
};

}  // namespace vcsim

#endif  // VCSIM_SUPERCLUSTER_SUPER_CLUSTER_H_
