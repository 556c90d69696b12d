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

#include "vcsim/supercluster/super_cluster.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_format.h"

namespace vcsim {

MockKubelet::MockKubelet(Runtime& runtime, ObjectStore& store,
                         KubeProxy* proxy, Duration ready_delay)
    : runtime_(runtime),
      store_(store),
      proxy_(proxy),
      ready_delay_(ready_delay) {}

MockKubelet::~MockKubelet() {
  Stop();
  *alive_ = false;
}

void MockKubelet::Start() {
  if (running_) return;
  running_ = true;
  ListResult pods = store_.List(Kind::kPod);
  std::weak_ptr<bool> alive = alive_;
  auto watch = store_.Watch(Kind::kPod, pods.store_version, [this, alive] {
    if (drain_posted_.exchange(true)) return;
    runtime_.Post(Duration::zero(), [this, alive] {
      if (!alive.lock()) return;
      drain_posted_ = false;
      Drain();
    });
  });
  if (watch.ok()) watch_ = std::move(*watch);
  for (const auto& obj : pods.objects) Consider(obj);
}

void MockKubelet::Stop() {
  if (!running_) return;
  running_ = false;
  if (watch_) watch_->Stop();
}

void MockKubelet::Drain() {
  if (!running_ || !watch_) return;
  while (auto ev = watch_->Next()) {
    if (ev->type == EventType::kDeleted) {
      waiting_.erase(ev->object.key);
      starting_.erase(ev->object.key);
      continue;
    }
    Consider(ev->object);
  }
}

void MockKubelet::Consider(const VersionedObject& pod) {
  const PodSpec* spec = pod.pod_spec();
  if (!spec || spec->node_name.empty()) return;
  const PodStatus* status = pod.pod_status();
  if (status && status->ready) return;
  if (starting_.count(pod.key)) return;
  if (proxy_ && !proxy_->InitGate(pod)) {
    waiting_.insert(pod.key);
    return;
  }
  waiting_.erase(pod.key);
  starting_.insert(pod.key);
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(ready_delay_, [this, alive, key = pod.key] {
    if (alive.lock()) MarkReady(key);
  });
}

void MockKubelet::Recheck(const ObjectKey& pod) {
  if (!running_ || !waiting_.count(pod)) return;
  auto obj = store_.Get(pod);
  if (!obj.ok()) {
    waiting_.erase(pod);
    return;
  }
  Consider(*obj);
}

void MockKubelet::MarkReady(const ObjectKey& key) {
  if (!starting_.erase(key) || !running_) return;
  auto pod = store_.Get(key);
  if (!pod.ok()) return;
  if (proxy_ && !proxy_->InitGate(*pod)) {
    ++gate_violations_;
    waiting_.insert(key);
    return;
  }
  Duration now = runtime_.Now();
  PodStatus status{PodPhase::kRunning, true, now};
  if (store_.UpdateStatus(key, status).ok()) {
    ready_times_[key] = now;
    ++ready_count_;
  }
}

NodeAgent::NodeAgent(Runtime& runtime, ObjectStore& store, int nodes,
                     int capacity, Duration heartbeat_period)
    : runtime_(runtime),
      store_(store),
      count_(nodes),
      capacity_(capacity),
      period_(heartbeat_period) {}

NodeAgent::~NodeAgent() {
  Stop();
  *alive_ = false;
}

std::string NodeAgent::NodeName(int index, int total) {
  int width = 3;
  for (int n = 1000; n < total; n *= 10) ++width;
  return absl::StrFormat("node-%0*d", width, index);
}

absl::Status NodeAgent::CreateNodes() {
  names_.clear();
  for (int i = 0; i < count_; ++i) {
    VersionedObject node;
    node.key = {Kind::kNode, "", NodeName(i, count_)};
    node.spec = NodeSpec{capacity_};
    node.status = NodeStatus{runtime_.Now(), true};
    auto created = store_.Create(node);
    if (!created.ok()) return created.status();
    names_.push_back(node.key.name);
  }
  return absl::OkStatus();
}

void NodeAgent::Start() {
  if (running_) return;
  running_ = true;
  if (period_ <= Duration::zero()) return;
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(period_, [this, alive] {
    if (alive.lock()) Beat();
  });
}

void NodeAgent::Stop() { running_ = false; }

void NodeAgent::Beat() {
  if (!running_) return;
  for (const auto& name : names_) {
    if (silent_.count(name)) continue;
    if (store_.UpdateStatus({Kind::kNode, "", name},
                            NodeStatus{runtime_.Now(), true})
            .ok()) {
      ++heartbeats_;
    }
  }
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(period_, [this, alive] {
    if (alive.lock()) Beat();
  });
}

SuperCluster::SuperCluster(Runtime& runtime, ObjectStore& store, ScopeFn scope,
                           SuperSimConfig config)
    : config_(config) {
  nodes_ = std::make_unique<NodeAgent>(runtime, store, config.nodes,
                                       config.node_capacity,
                                       config.heartbeat_period);
  proxy_ = std::make_unique<KubeProxy>(runtime, store, std::move(scope),
                                       config.proxy);
  scheduler_ = std::make_unique<Scheduler>(runtime, store, config.scheduler);
  kubelet_ = std::make_unique<MockKubelet>(runtime, store, proxy_.get(),
                                           config.kubelet_ready_delay);
  proxy_->SetSyncedCallback(
      [k = kubelet_.get()](const ObjectKey& pod) { k->Recheck(pod); });
}

SuperCluster::~SuperCluster() { Stop(); }

absl::Status SuperCluster::Start() {
  if (started_) return absl::OkStatus();
  if (absl::Status s = nodes_->CreateNodes(); !s.ok()) return s;
  proxy_->Start();
  scheduler_->Start();
  kubelet_->Start();
  nodes_->Start();
  started_ = true;
  return absl::OkStatus();
}

void SuperCluster::Stop() {
  if (!started_) return;
  started_ = false;
  nodes_->Stop();
  kubelet_->Stop();
  scheduler_->Stop();
  proxy_->Stop();
}

}  // namespace vcsim
