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

#ifndef VCSIM_SUPERCLUSTER_KUBE_PROXY_H_
#define VCSIM_SUPERCLUSTER_KUBE_PROXY_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"

namespace vcsim {

struct ServiceRule {
  std::string cluster_ip;
  int port = 0;
  std::vector<std::string> endpoints;
  bool operator==(const ServiceRule&) const = default;
};

// Routing rules inside one pod sandbox.
struct GuestRuleTable {
  std::vector<ServiceRule> rules;  // ordered by (cluster_ip, port)
  int64_t rule_epoch = 0;          // rule sets applied so far
  // Service generation of the scope that the current rules reflect.
  int64_t applied_generation = 0;
};

struct SyncResult {
  int64_t applied_epoch = 0;
  Duration cost{0};
};

// Maps a super namespace to the scope whose services are visible to pods in
// it. Pods only ever see services of their own scope.
using ScopeFn = std::function<std::string(const std::string& ns)>;

struct KubeProxyConfig {
  Duration per_rule_latency = Millis(10);
  Duration per_pod_scan_cost = Millis(10);
  Duration scan_period = std::chrono::seconds(10);
  uint64_t seed = 1;
};

// Per-sandbox rule injection with init gating. A sandbox is created when a
// pod is bound and removed when the pod is deleted. Whenever a scope's
// service set changes, each of its sandboxes is resynced; a sync of n rules
// takes n * per_rule_latency.
//
// The service generation of a scope counts Service and Endpoints commits in
// it. The store's admission hook stamps each new pod with the generation at
// admission; the pod may start once its sandbox has applied that
// generation.
class KubeProxy {
 public:
  KubeProxy(Runtime& runtime, ObjectStore& store, ScopeFn scope,
            KubeProxyConfig config);
  ~KubeProxy();
  KubeProxy(const KubeProxy&) = delete;
  KubeProxy& operator=(const KubeProxy&) = delete;

  // Installs the admission hook and starts watching. Must precede any pod
  // creation that should be gated.
  void Start();
  void Stop();

  // Replaces the sandbox's rules. NotFound if the sandbox is gone.
  absl::StatusOr<SyncResult> SyncServiceRules(const ObjectKey& pod,
                                              std::vector<ServiceRule> rules,
                                              int64_t generation);
  bool InitGate(const VersionedObject& pod) const;
  // One endpoint, uniformly. NotFound when the sandbox has no rule for the
  // address or the rule has no endpoints.
  absl::StatusOr<std::string> RouteLookup(const ObjectKey& pod,
                                          const std::string& cluster_ip,
                                          int port);

  // Rules every sandbox of `scope` should converge to, from the store.
  std::vector<ServiceRule> DesiredRules(const std::string& scope) const;
  int64_t generation(const std::string& scope) const;

  std::optional<GuestRuleTable> Table(const ObjectKey& pod) const;
  // Time from sandbox creation to the end of its first completed sync.
  std::optional<Duration> FirstInjectionTime(const ObjectKey& pod) const;
  std::optional<Duration> FirstInjectionDone(const ObjectKey& pod) const;
  size_t sandboxes() const { return sandboxes_.size(); }
  bool idle() const;
  Duration last_scan_cost() const { return last_scan_cost_; }
  int64_t scans() const { return scans_; }

  // Invoked after each completed sync with the pod key.
  void SetSyncedCallback(std::function<void(const ObjectKey&)> callback) {
    synced_ = std::move(callback);
  }

 private:
  struct Sandbox {
    std::string scope;
    GuestRuleTable table;
    Duration created_at{0};
    std::optional<Duration> first_done;
    bool syncing = false;
    bool dirty = false;
  };

  void OnServiceNotify();
  void ApplyServiceEventLocked(const WatchEvent& ev);
  void DrainPods();
  void DrainServices();
  void StartSync(const ObjectKey& pod);
  void FinishSync(const ObjectKey& pod, std::vector<ServiceRule> rules,
                  int64_t generation);
  void ScheduleScan();
  void Scan();

  Runtime& runtime_;
  ObjectStore& store_;
  const ScopeFn scope_;
  const KubeProxyConfig config_;

  // Written under the store's commit lock; read from the runtime thread.
  mutable std::mutex gen_mu_;
  std::map<std::string, int64_t> generations_;
  std::map<ObjectKey, ServiceSpec> services_;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>>
      endpoints_;
  std::set<std::string> dirty_scopes_;
  bool service_drain_posted_ = false;
  int64_t seen_version_ = 0;

  std::unique_ptr<WatchStream> pod_watch_;
  std::unique_ptr<WatchStream> service_watch_;
  std::unique_ptr<WatchStream> endpoints_watch_;
  std::map<ObjectKey, Sandbox> sandboxes_;
  bool running_ = false;
  std::atomic<bool> pod_drain_posted_{false};
  std::mt19937_64 rng_;
  Duration last_scan_cost_{0};
  int64_t scans_ = 0;
  std::function<void(const ObjectKey&)> synced_;

  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace vcsim

#endif  // VCSIM_SUPERCLUSTER_KUBE_PROXY_H_
