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

#include "vcsim/supercluster/scheduler.h"

#include <algorithm>
#include <utility>

namespace vcsim {
namespace {

bool AnyMatch(const std::vector<LabelSelector>& terms, const Labels& labels) {
  return std::any_of(terms.begin(), terms.end(), [&](const LabelSelector& s) {
    return s.Matches(labels);
  });
}

bool Conflicts(const PlacedPod& a, const PlacedPod& b) {
  if (a.key.ns != b.key.ns) return false;
  return AnyMatch(a.anti_affinity, b.labels) ||
         AnyMatch(b.anti_affinity, a.labels);
}

}  // namespace

std::optional<size_t> PickNode(const std::vector<NodeSlot>& nodes,
                               const PlacedPod& pod) {
  std::optional<size_t> best;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const NodeSlot& n = nodes[i];
    if (static_cast<int>(n.pods.size()) >= n.capacity) continue;
    bool clash =
        std::any_of(n.pods.begin(), n.pods.end(),
                    [&](const PlacedPod& q) { return Conflicts(pod, q); });
    if (clash) continue;
    if (!best || n.pods.size() < nodes[*best].pods.size()) best = i;
  }
  return best;
}

Scheduler::Scheduler(Runtime& runtime, ObjectStore& store,
                     SchedulerConfig config)
    : runtime_(runtime), store_(store), config_(config) {}

Scheduler::~Scheduler() {
  Stop();
  *alive_ = false;
}

void Scheduler::Start() {
  if (running_) return;
  running_ = true;
  nodes_.clear();
  node_index_.clear();
  for (const auto& obj : store_.List(Kind::kNode).objects) {
    const auto* spec = std::get_if<NodeSpec>(&obj.spec);
    node_index_[obj.key.name] = nodes_.size();
    nodes_.push_back({obj.key.name, spec ? spec->capacity_pods : 0, {}});
  }
  ListResult pods = store_.List(Kind::kPod);
  for (const auto& obj : pods.objects) {
    const PodSpec* spec = obj.pod_spec();
    if (!spec) continue;
    if (spec->node_name.empty()) {
      queue_.push_back(obj.key);
      continue;
    }
    auto it = node_index_.find(spec->node_name);
    if (it == node_index_.end()) continue;
    nodes_[it->second].pods.push_back(
        {obj.key, obj.labels, spec->anti_affinity});
    placed_[obj.key] = it->second;
  }
  std::weak_ptr<bool> alive = alive_;
  auto watch = store_.Watch(Kind::kPod, pods.store_version, [this, alive] {
    runtime_.Post(Duration::zero(), [this, alive] {
      if (alive.lock()) Drain();
    });
  });
  if (watch.ok()) watch_ = std::move(*watch);
  Kick();
}

void Scheduler::Stop() {
  if (!running_) return;
  running_ = false;
  if (watch_) watch_->Stop();
}

void Scheduler::Forget(const ObjectKey& key) {
  auto it = placed_.find(key);
  if (it == placed_.end()) return;
  auto& pods = nodes_[it->second].pods;
  pods.erase(std::remove_if(pods.begin(), pods.end(),
                            [&](const PlacedPod& p) { return p.key == key; }),
             pods.end());
  placed_.erase(it);
}

void Scheduler::Drain() {
  if (!running_ || !watch_) return;
  while (auto ev = watch_->Next()) {
    const VersionedObject& obj = ev->object;
    switch (ev->type) {
      case EventType::kAdded: {
        const PodSpec* spec = obj.pod_spec();
        if (spec && spec->node_name.empty() && !placed_.count(obj.key)) {
          queue_.push_back(obj.key);
        }
        break;
      }
      case EventType::kDeleted:
        Forget(obj.key);
        break;
      case EventType::kUpdated:
        break;
    }
  }
  Kick();
}

void Scheduler::Kick() {
  if (!running_ || busy_ || queue_.empty()) return;
  if (!in_period_) {
    in_period_ = true;
    period_start_ = bind_times_.size();
  }
  busy_ = true;
  ObjectKey key = std::move(queue_.front());
  queue_.pop_front();
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(config_.per_pod_service_time,
                [this, alive, key = std::move(key)]() mutable {
                  if (alive.lock()) Finish(std::move(key));
                });
}

void Scheduler::Finish(ObjectKey key) {
  busy_ = false;
  if (!running_) return;
  auto pod = store_.Get(key);
  if (pod.ok() && pod->pod_spec() && pod->pod_spec()->node_name.empty()) {
    PlacedPod placed{key, pod->labels, pod->pod_spec()->anti_affinity};
    auto idx = PickNode(nodes_, placed);
    if (idx) {
      if (store_.Bind(key, nodes_[*idx].name).ok()) {
        nodes_[*idx].pods.push_back(std::move(placed));
        placed_[key] = *idx;
        bind_times_.push_back(runtime_.Now());
      }
    } else {
      ++unschedulable_;
      std::weak_ptr<bool> alive = alive_;
      runtime_.Post(config_.unschedulable_backoff, [this, alive, key] {
        if (!alive.lock() || !running_) return;
        queue_.push_back(key);
        Kick();
      });
    }
  }
  if (queue_.empty() && in_period_) {
    in_period_ = false;
    busy_periods_.emplace_back(period_start_, bind_times_.size());
  }
  Kick();
}

double Scheduler::SaturatedThroughput() const {
  auto periods = busy_periods_;
  if (in_period_) periods.emplace_back(period_start_, bind_times_.size());
  size_t best_n = 0;
  double best = 0;
  for (auto [b, e] : periods) {
    size_t n = e - b;
    if (n < 2 || n <= best_n) continue;
    Duration span = bind_times_[e - 1] - bind_times_[b];
    if (span <= Duration::zero()) continue;
    best_n = n;
    best = static_cast<double>(n - 1) / ToSeconds(span);
  }
  return best;
}

}  // namespace vcsim
