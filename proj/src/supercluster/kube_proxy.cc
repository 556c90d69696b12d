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

#include "vcsim/supercluster/kube_proxy.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace vcsim {

KubeProxy::KubeProxy(Runtime& runtime, ObjectStore& store, ScopeFn scope,
                     KubeProxyConfig config)
    : runtime_(runtime),
      store_(store),
      scope_(std::move(scope)),
      config_(config),
      rng_(config.seed) {}

KubeProxy::~KubeProxy() {
  Stop();
  *alive_ = false;
}

void KubeProxy::Start() {
  if (running_) return;
  running_ = true;
  std::weak_ptr<bool> alive = alive_;

  store_.SetAdmissionHook([this](VersionedObject& obj) {
    PodSpec* spec = obj.mutable_pod_spec();
    if (spec) spec->service_epoch_at_admission = generation(scope_(obj.key.ns));
  });

  // Service state is tracked from the watch itself, under the commit lock,
  // so that a pod admitted after a service commit sees the new generation.
  int64_t from = 0;
  {
    ListResult services = store_.List(Kind::kService);
    ListResult endpoints = store_.List(Kind::kEndpoints);
    from = std::min(services.store_version, endpoints.store_version);
    std::lock_guard lock(gen_mu_);
    for (const auto& obj : services.objects) {
      if (const auto* s = std::get_if<ServiceSpec>(&obj.spec)) {
        services_[obj.key] = *s;
        ++generations_[scope_(obj.key.ns)];
      }
    }
    for (const auto& obj : endpoints.objects) {
      if (const auto* e = std::get_if<EndpointsSpec>(&obj.spec)) {
        endpoints_[{obj.key.ns, obj.key.name}] = e->addresses;
        ++generations_[scope_(obj.key.ns)];
      }
    }
    seen_version_ = from;
  }
  auto on_service = [this, alive] {
    if (!alive.lock()) return;
    OnServiceNotify();
  };
  auto sw = store_.Watch(Kind::kService, from, on_service);
  auto ew = store_.Watch(Kind::kEndpoints, from, on_service);
  {
    std::lock_guard lock(gen_mu_);
    if (sw.ok()) service_watch_ = std::move(*sw);
    if (ew.ok()) endpoints_watch_ = std::move(*ew);
  }
  OnServiceNotify();

  ListResult pods = store_.List(Kind::kPod);
  for (const auto& obj : pods.objects) {
    const PodSpec* spec = obj.pod_spec();
    if (!spec || spec->node_name.empty()) continue;
    Sandbox& sb = sandboxes_[obj.key];
    sb.scope = scope_(obj.key.ns);
    sb.created_at = runtime_.Now();
    StartSync(obj.key);
  }
  auto pw = store_.Watch(Kind::kPod, pods.store_version, [this, alive] {
    if (pod_drain_posted_.exchange(true)) return;
    runtime_.Post(Duration::zero(), [this, alive] {
      if (!alive.lock()) return;
      pod_drain_posted_ = false;
      DrainPods();
    });
  });
  if (pw.ok()) pod_watch_ = std::move(*pw);
  if (config_.scan_period > Duration::zero()) ScheduleScan();
}

void KubeProxy::Stop() {
  if (!running_) return;
  running_ = false;
  store_.SetAdmissionHook(nullptr);
  if (pod_watch_) pod_watch_->Stop();
  std::lock_guard lock(gen_mu_);
  if (service_watch_) service_watch_->Stop();
  if (endpoints_watch_) endpoints_watch_->Stop();
}

void KubeProxy::ApplyServiceEventLocked(const WatchEvent& ev) {
  if (ev.store_version <= seen_version_) return;
  const VersionedObject& obj = ev.object;
  std::string scope = scope_(obj.key.ns);
  if (obj.key.kind == Kind::kService) {
    if (ev.type == EventType::kDeleted) {
      services_.erase(obj.key);
    } else if (const auto* s = std::get_if<ServiceSpec>(&obj.spec)) {
      services_[obj.key] = *s;
    }
  } else {
    std::pair<std::string, std::string> id(obj.key.ns, obj.key.name);
    if (ev.type == EventType::kDeleted) {
      endpoints_.erase(id);
    } else if (const auto* e = std::get_if<EndpointsSpec>(&obj.spec)) {
      endpoints_[id] = e->addresses;
    }
  }
  ++generations_[scope];
  dirty_scopes_.insert(std::move(scope));
}

void KubeProxy::OnServiceNotify() {
  bool post = false;
  {
    std::lock_guard lock(gen_mu_);
    for (WatchStream* w : {service_watch_.get(), endpoints_watch_.get()}) {
      if (!w) continue;
      while (auto ev = w->Next()) ApplyServiceEventLocked(*ev);
    }
    post = !dirty_scopes_.empty() && !service_drain_posted_;
    if (post) service_drain_posted_ = true;
  }
  if (!post) return;
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(Duration::zero(), [this, alive] {
    if (alive.lock()) DrainServices();
  });
}

void KubeProxy::DrainServices() {
  std::set<std::string> scopes;
  {
    std::lock_guard lock(gen_mu_);
    scopes.swap(dirty_scopes_);
    service_drain_posted_ = false;
  }
  if (!running_) return;
  for (auto& [key, sb] : sandboxes_) {
    if (scopes.count(sb.scope)) StartSync(key);
  }
}

void KubeProxy::DrainPods() {
  if (!running_ || !pod_watch_) return;
  while (auto ev = pod_watch_->Next()) {
    const VersionedObject& obj = ev->object;
    if (ev->type == EventType::kDeleted) {
      sandboxes_.erase(obj.key);
      continue;
    }
    const PodSpec* spec = obj.pod_spec();
    if (!spec || spec->node_name.empty() || sandboxes_.count(obj.key)) {
      continue;
    }
    Sandbox& sb = sandboxes_[obj.key];
    sb.scope = scope_(obj.key.ns);
    sb.created_at = runtime_.Now();
    StartSync(obj.key);
  }
}

int64_t KubeProxy::generation(const std::string& scope) const {
  std::lock_guard lock(gen_mu_);
  auto it = generations_.find(scope);
  return it == generations_.end() ? 0 : it->second;
}

std::vector<ServiceRule> KubeProxy::DesiredRules(
    const std::string& scope) const {
  std::vector<ServiceRule> rules;
  std::lock_guard lock(gen_mu_);
  for (const auto& [key, svc] : services_) {
    if (scope_(key.ns) != scope) continue;
    ServiceRule rule{svc.cluster_ip, svc.port, {}};
    auto e = endpoints_.find({key.ns, key.name});
    if (e != endpoints_.end()) rule.endpoints = e->second;
    rules.push_back(std::move(rule));
  }
  std::sort(rules.begin(), rules.end(),
            [](const ServiceRule& a, const ServiceRule& b) {
              return std::tie(a.cluster_ip, a.port) <
                     std::tie(b.cluster_ip, b.port);
            });
  return rules;
}

void KubeProxy::StartSync(const ObjectKey& pod) {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) return;
  Sandbox& sb = it->second;
  if (sb.syncing) {
    sb.dirty = true;
    return;
  }
  sb.syncing = true;
  sb.dirty = false;
  int64_t gen = generation(sb.scope);
  std::vector<ServiceRule> rules = DesiredRules(sb.scope);
  Duration cost = config_.per_rule_latency * static_cast<int64_t>(rules.size());
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(cost, [this, alive, pod, rules = std::move(rules),
                       gen]() mutable {
    if (alive.lock()) FinishSync(pod, std::move(rules), gen);
  });
}

absl::StatusOr<SyncResult> KubeProxy::SyncServiceRules(
    const ObjectKey& pod, std::vector<ServiceRule> rules, int64_t generation) {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) {
    return absl::NotFoundError(absl::StrCat("no sandbox for ", pod.ToString()));
  }
  GuestRuleTable& t = it->second.table;
  SyncResult result;
  result.cost = config_.per_rule_latency * static_cast<int64_t>(rules.size());
  t.rules = std::move(rules);
  ++t.rule_epoch;
  t.applied_generation = std::max(t.applied_generation, generation);
  result.applied_epoch = t.rule_epoch;
  return result;
}

void KubeProxy::FinishSync(const ObjectKey& pod, std::vector<ServiceRule> rules,
                           int64_t gen) {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) return;  // sandbox gone: no-op
  (void)SyncServiceRules(pod, std::move(rules), gen);
  Sandbox& sb = it->second;
  sb.syncing = false;
  if (!sb.first_done) sb.first_done = runtime_.Now();
  bool again = sb.dirty || generation(sb.scope) > sb.table.applied_generation;
  if (synced_) synced_(pod);
  if (again && running_) StartSync(pod);
}

bool KubeProxy::InitGate(const VersionedObject& pod) const {
  const PodSpec* spec = pod.pod_spec();
  if (!spec || spec->service_epoch_at_admission == 0) return true;
  auto it = sandboxes_.find(pod.key);
  if (it == sandboxes_.end()) return false;
  return it->second.table.applied_generation >=
         spec->service_epoch_at_admission;
}

absl::StatusOr<std::string> KubeProxy::RouteLookup(
    const ObjectKey& pod, const std::string& cluster_ip, int port) {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) {
    return absl::NotFoundError(absl::StrCat("no sandbox for ", pod.ToString()));
  }
  for (const ServiceRule& r : it->second.table.rules) {
    if (r.cluster_ip != cluster_ip || r.port != port) continue;
    if (r.endpoints.empty()) break;
    std::uniform_int_distribution<size_t> pick(0, r.endpoints.size() - 1);
    return r.endpoints[pick(rng_)];
  }
  return absl::NotFoundError(
      absl::StrCat("no rule for ", cluster_ip, ":", port));
}

std::optional<GuestRuleTable> KubeProxy::Table(const ObjectKey& pod) const {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) return std::nullopt;
  return it->second.table;
}

std::optional<Duration> KubeProxy::FirstInjectionDone(
    const ObjectKey& pod) const {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end()) return std::nullopt;
  return it->second.first_done;
}

std::optional<Duration> KubeProxy::FirstInjectionTime(
    const ObjectKey& pod) const {
  auto it = sandboxes_.find(pod);
  if (it == sandboxes_.end() || !it->second.first_done) return std::nullopt;
  return *it->second.first_done - it->second.created_at;
}

bool KubeProxy::idle() const {
  return std::none_of(sandboxes_.begin(), sandboxes_.end(),
                      [](const auto& e) { return e.second.syncing; });
}

void KubeProxy::ScheduleScan() {
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(config_.scan_period, [this, alive] {
    if (alive.lock() && running_) Scan();
  });
}

// A pass over every sandbox; any that lag their scope are resynced when the
// pass completes.
void KubeProxy::Scan() {
  Duration cost =
      config_.per_pod_scan_cost * static_cast<int64_t>(sandboxes_.size());
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(cost, [this, alive, cost] {
    if (!alive.lock() || !running_) return;
    last_scan_cost_ = cost;
    ++scans_;
    for (auto& [key, sb] : sandboxes_) {
      if (!sb.syncing && sb.table.applied_generation < generation(sb.scope)) {
        StartSync(key);
      }
    }
    ScheduleScan();
  });
}

}  // namespace vcsim
