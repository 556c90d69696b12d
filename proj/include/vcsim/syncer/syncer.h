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

#ifndef VCSIM_SYNCER_SYNCER_H_
#define VCSIM_SYNCER_SYNCER_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vcsim/core/tenant.h"
#include "vcsim/core/types.h"
#include "vcsim/informer/informer.h"
#include "vcsim/queue/fair_queue.h"
#include "vcsim/queue/worker_pool.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"
#include "vcsim/syncer/provenance.h"

namespace vcsim {

inline constexpr char kTenantAnnotation[] = "vcsim.io/tenant";
inline constexpr char kTenantUidAnnotation[] = "vcsim.io/tenant-uid";

enum class Direction { kDownward, kUpward };
std::string_view DirectionName(Direction d);

struct SyncWorkItem {
  std::string tenant;
  ObjectKey key;  // always the tenant-side key
  Direction direction = Direction::kDownward;
};

enum class ReconcileOutcome { kCreated, kUpdated, kDeleted, kNoOp };
std::string_view OutcomeName(ReconcileOutcome outcome);

// Kinds copied from tenant stores into the super store.
inline constexpr std::array<Kind, 6> kDownwardKinds = {
    Kind::kNamespace, Kind::kPod,       Kind::kService,
    Kind::kEndpoints, Kind::kSecret,    Kind::kConfigMap};
bool IsDownwardKind(Kind kind);

struct CommitInfo {
  Direction direction = Direction::kDownward;
  std::string tenant;
  ObjectKey key;
  ReconcileOutcome outcome = ReconcileOutcome::kNoOp;
  Duration dequeued_at{0};
  Duration committed_at{0};
  // Set when this commit made the tenant Pod ready: when the super Pod
  // became ready.
  std::optional<Duration> super_ready_at;
};

// Instrumentation hooks. In realtime mode they are called from worker
// threads concurrently.
class SyncObserver {
 public:
  virtual ~SyncObserver() = default;
  virtual void OnEnqueue(Direction /*direction*/,
                         const std::string& /*tenant*/,
                         const ObjectKey& /*key*/, Duration /*at*/) {}
  virtual void OnCommit(const CommitInfo& /*info*/) {}
};

struct SyncerOptions {
  int downward_workers = 20;
  int upward_workers = 100;
  bool fair_queuing = true;  // both directions
  // Simulated service time of one reconcile; ignored in realtime mode.
  Duration downward_process_cost = Millis(2);
  Duration upward_process_cost = Millis(2);
  LagPolicy informer_lag;
  Duration scan_interval = std::chrono::seconds(60);
  Duration heartbeat_period = std::chrono::seconds(10);
  Duration gc_period = std::chrono::seconds(10);
  Duration retry_base = Millis(10);
  double retry_factor = 2;
  Duration retry_cap = std::chrono::seconds(5);
  // Unbound super Pods the downward workers may have outstanding; 0 means
  // unlimited.
  size_t admission_window = 0;
  uint64_t seed = 1;
};

struct SyncerStats {
  std::map<ReconcileOutcome, int64_t> downward;
  std::map<ReconcileOutcome, int64_t> upward;
  int64_t retries = 0;
  int64_t foreign_events = 0;
  int64_t scan_mismatches = 0;
  int64_t vnodes_created = 0;
  int64_t vnodes_deleted = 0;
  int64_t heartbeat_updates = 0;
};

// Centralized syncer between many tenant stores and one super store.
//
// Tenant informers feed a downward fair queue keyed by tenant; a single
// super informer feeds an upward fair queue keyed by the demangled tenant.
// Each dispatch plans from the informer caches when dequeued and commits to
// the stores when the worker finishes.
class Syncer {
 public:
  Syncer(Runtime& runtime, std::shared_ptr<ObjectStore> super_store,
         TenantRegistry& registry, SyncerOptions options);
  ~Syncer();
  Syncer(const Syncer&) = delete;
  Syncer& operator=(const Syncer&) = delete;

  // Starts the super informer, tenant informers, workers and timers.
  absl::Status Start();
  void Stop();

  // Adds the tenant to the registry and starts syncing it.
  absl::Status RegisterTenant(const TenantRecord& record);
  // Stops syncing, discards queued work and deletes the tenant's super
  // objects.
  absl::Status UnregisterTenant(const std::string& tenant_id);

  // Synchronous plan and commit, as one worker dispatch would do.
  absl::StatusOr<ReconcileOutcome> DownwardReconcile(const SyncWorkItem& item);
  absl::StatusOr<ReconcileOutcome> UpwardReconcile(const SyncWorkItem& item);

  absl::Status EnsureVNode(const std::string& tenant,
                           const std::string& node_name);
  // Removes vNodes with no bound Pods; returns how many.
  int64_t GcVNodes();
  // Refreshes vNodes whose physical node reported a heartbeat since the
  // last broadcast; returns the number of vNode updates.
  int64_t BroadcastHeartbeats();
  // Diffs the tenant against the super store, enqueues every mismatch and
  // returns their number.
  absl::StatusOr<int64_t> PeriodicScan(const std::string& tenant);
  absl::StatusOr<ObjectKey> ResolveProxyTarget(const Fingerprint& fingerprint,
                                               const ObjectKey& tenant_pod);

  absl::StatusOr<ObjectKey> SuperKey(const std::string& tenant,
                                     const ObjectKey& tenant_key) const;

  void SetObserver(SyncObserver* observer) { observer_ = observer; }
  ProvenanceAudit& audit() { return audit_; }
  FairQueue& downward_queue() { return downward_queue_; }
  FairQueue& upward_queue() { return upward_queue_; }
  AdmissionWindow& window() { return window_; }
  Informer& super_informer() { return *super_informer_; }
  // Null for an unknown tenant.
  Informer* tenant_informer(const std::string& tenant);
  int downward_busy() const;
  int upward_busy() const;
  SyncerStats stats() const;

  // tenant node name -> bound tenant Pods.
  std::map<std::string, std::set<ObjectKey>> VNodeBindings(
      const std::string& tenant) const;

 private:
  struct TenantState {
    TenantRecord record;
    std::unique_ptr<Informer> informer;
  };
  struct Plan;

  std::shared_ptr<TenantState> FindTenant(const std::string& tenant) const;
  void StartTenant(const std::shared_ptr<TenantState>& t);

  Plan PlanDownward(const SyncWorkItem& item) const;
  Plan PlanUpward(const SyncWorkItem& item) const;
  absl::StatusOr<ReconcileOutcome> Commit(Plan& plan);
  absl::StatusOr<ReconcileOutcome> CommitDownward(Plan& plan);
  absl::StatusOr<ReconcileOutcome> CommitUpward(Plan& plan);
  std::function<void()> Begin(Direction direction, const QueueItem& item);

  void Enqueue(Direction direction, const std::string& tenant,
               const ObjectKey& key);
  void Retry(Direction direction, const std::string& tenant,
             const ObjectKey& key);
  void OnTenantEvent(const std::string& tenant, const ObjectKey& key,
                     EventType type);
  void OnSuperEvent(const ObjectKey& key, EventType type);
  bool DownwardInSync(const TenantState& t, const ObjectKey& tenant_key) const;
  bool UpwardInSync(const TenantState& t, const ObjectKey& tenant_key) const;

  void AddBinding(const std::string& tenant, const std::string& node,
                  const ObjectKey& pod);
  void RemoveBinding(const std::string& tenant, const ObjectKey& pod);
  void RebuildBindings(const TenantState& t);

  absl::Status SuperWrite(const std::string& tenant, const ObjectKey& key);
  absl::Status TenantWrite(const std::string& source_tenant,
                           const TenantState& target, const ObjectKey& key);
  void SchedulePeriodic(Duration period, void (Syncer::*tick)());
  void ScanTick();
  void HeartbeatTick();
  void GcTick();

  Runtime& runtime_;
  std::shared_ptr<ObjectStore> super_;
  TenantRegistry& registry_;
  const SyncerOptions options_;

  FairQueue downward_queue_;
  FairQueue upward_queue_;
  AdmissionWindow window_;
  std::unique_ptr<WorkerPool> downward_pool_;
  std::unique_ptr<WorkerPool> upward_pool_;
  std::unique_ptr<Informer> super_informer_;
  ProvenanceAudit audit_;
  SyncObserver* observer_ = nullptr;

  mutable std::shared_mutex tenants_mu_;
  std::map<std::string, std::shared_ptr<TenantState>> tenants_;

  // Guards the binding table, vNode set and heartbeat bookkeeping. Store
  // writes made under it never call back into the syncer.
  mutable std::mutex bind_mu_;
  std::map<std::string, std::map<std::string, std::set<ObjectKey>>> bindings_;
  std::map<std::string, std::map<ObjectKey, std::string>> pod_node_;
  std::map<std::string, std::set<std::string>> vnodes_;
  std::map<std::string, Duration> last_broadcast_;

  mutable std::mutex stats_mu_;
  SyncerStats stats_;
  std::map<std::tuple<Direction, std::string, ObjectKey>, int> attempts_;

  std::atomic<bool> running_{false};
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace vcsim

#endif  // VCSIM_SYNCER_SYNCER_H_
