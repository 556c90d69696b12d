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

#include "vcsim/syncer/syncer.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"

namespace vcsim {
namespace {

constexpr std::array<Kind, 7> kSuperKinds = {
    Kind::kNamespace, Kind::kPod,       Kind::kService, Kind::kEndpoints,
    Kind::kSecret,    Kind::kConfigMap, Kind::kNode};

// The part of a spec that is copied downward. Fields the super cluster owns
// are blanked.
ObjectSpec ProjectSpec(ObjectSpec spec) {
  if (auto* pod = std::get_if<PodSpec>(&spec)) {
    pod->node_name.clear();
    pod->service_epoch_at_admission = 0;
  }
  return spec;
}

std::string AnnotationOr(const VersionedObject& obj, const char* key) {
  auto it = obj.annotations.find(key);
  return it == obj.annotations.end() ? std::string() : it->second;
}

const PodSpec* PodSpecOf(const VersionedObject& obj) { return obj.pod_spec(); }

}  // namespace

std::string_view DirectionName(Direction d) {
  return d == Direction::kDownward ? "down" : "up";
}

std::string_view OutcomeName(ReconcileOutcome outcome) {
  switch (outcome) {
    case ReconcileOutcome::kCreated:
      return "Created";
    case ReconcileOutcome::kUpdated:
      return "Updated";
    case ReconcileOutcome::kDeleted:
      return "Deleted";
    case ReconcileOutcome::kNoOp:
      return "NoOp";
  }
  return "NoOp";
}

bool IsDownwardKind(Kind kind) {
  return std::find(kDownwardKinds.begin(), kDownwardKinds.end(), kind) !=
         kDownwardKinds.end();
}

struct Syncer::Plan {
  enum class Op { kNone, kCreate, kRecreate, kUpdate, kDelete, kUpward };

  SyncWorkItem item;
  std::shared_ptr<TenantState> tenant;
  Op op = Op::kNone;
  ObjectKey super_key;
  VersionedObject desired;  // downward create/update
  int64_t super_version = 0;
  Uid tenant_uid;  // upward: the tenant Pod the plan was made for
  std::string bind_node;
  std::optional<ObjectStatus> status;
  bool becomes_ready = false;
  std::optional<Duration> super_ready_at;
  bool made_ready = false;
};

Syncer::Syncer(Runtime& runtime, std::shared_ptr<ObjectStore> super_store,
               TenantRegistry& registry, SyncerOptions options)
    : runtime_(runtime),
      super_(std::move(super_store)),
      registry_(registry),
      options_(options),
      downward_queue_(runtime, {options.fair_queuing}),
      upward_queue_(runtime, {options.fair_queuing}),
      window_(options.admission_window) {
  super_informer_ = std::make_unique<Informer>(
      runtime_, *super_,
      std::vector<Kind>(kSuperKinds.begin(), kSuperKinds.end()),
      [this](const ObjectKey& key, EventType type) { OnSuperEvent(key, type); },
      options_.informer_lag, options_.seed);
}

Syncer::~Syncer() {
  Stop();
  *alive_ = false;
}

absl::Status Syncer::Start() {
  if (running_) return absl::OkStatus();
  running_ = true;
  super_informer_->Start();
  std::vector<std::shared_ptr<TenantState>> tenants;
  {
    std::shared_lock lock(tenants_mu_);
    for (const auto& [id, t] : tenants_) tenants.push_back(t);
  }
  for (const auto& t : tenants) StartTenant(t);

  auto down = [this](const QueueItem& item) {
    return Begin(Direction::kDownward, item);
  };
  auto up = [this](const QueueItem& item) {
    return Begin(Direction::kUpward, item);
  };
  if (runtime_.simulated()) {
    downward_pool_ = std::make_unique<SimWorkerPool>(
        runtime_, downward_queue_, options_.downward_workers,
        options_.downward_process_cost, down, &window_);
    upward_pool_ = std::make_unique<SimWorkerPool>(
        runtime_, upward_queue_, options_.upward_workers,
        options_.upward_process_cost, up);
  } else {
    downward_pool_ = std::make_unique<ThreadWorkerPool>(
        downward_queue_, options_.downward_workers, down, &window_);
    upward_pool_ = std::make_unique<ThreadWorkerPool>(
        upward_queue_, options_.upward_workers, up);
  }
  downward_pool_->Start();
  upward_pool_->Start();
  SchedulePeriodic(options_.scan_interval, &Syncer::ScanTick);
  SchedulePeriodic(options_.heartbeat_period, &Syncer::HeartbeatTick);
  SchedulePeriodic(options_.gc_period, &Syncer::GcTick);
  return absl::OkStatus();
}

void Syncer::Stop() {
  if (!running_.exchange(false)) return;
  if (downward_pool_) downward_pool_->Stop();
  if (upward_pool_) upward_pool_->Stop();
  super_informer_->Stop();
  std::shared_lock lock(tenants_mu_);
  for (const auto& [id, t] : tenants_) t->informer->Stop();
}

void Syncer::StartTenant(const std::shared_ptr<TenantState>& t) {
  t->informer->Start();
  RebuildBindings(*t);
}

absl::Status Syncer::RegisterTenant(const TenantRecord& record) {
  if (!record.store) {
    return absl::InvalidArgumentError(
        absl::StrCat("tenant ", record.tenant_id, " has no store"));
  }
  if (absl::Status s = registry_.Register(record); !s.ok()) return s;
  auto t = std::make_shared<TenantState>();
  t->record = record;
  const std::string id = record.tenant_id;
  uint64_t seed = options_.seed ^ (uint64_t{Fnv1a32(id)} << 16);
  t->informer = std::make_unique<Informer>(
      runtime_, *record.store,
      std::vector<Kind>{Kind::kNamespace, Kind::kPod, Kind::kService,
                        Kind::kEndpoints, Kind::kSecret, Kind::kConfigMap,
                        Kind::kNode},
      [this, id](const ObjectKey& key, EventType type) {
        OnTenantEvent(id, key, type);
      },
      options_.informer_lag, seed);
  (void)downward_queue_.RegisterTenant(id, record.weight);
  (void)upward_queue_.RegisterTenant(id, record.weight);
  {
    std::unique_lock lock(tenants_mu_);
    tenants_[id] = t;
  }
  if (running_) StartTenant(t);
  return absl::OkStatus();
}

absl::Status Syncer::UnregisterTenant(const std::string& tenant_id) {
  std::shared_ptr<TenantState> t;
  {
    std::unique_lock lock(tenants_mu_);
    auto it = tenants_.find(tenant_id);
    if (it == tenants_.end()) {
      return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant_id));
    }
    t = it->second;
    tenants_.erase(it);
  }
  t->informer->Stop();
  auto down = downward_queue_.RemoveTenant(tenant_id);
  auto up = upward_queue_.RemoveTenant(tenant_id);
  audit_.Log(absl::StrCat("t=", runtime_.Now().count(),
                          " unregister tenant=", tenant_id, " discarded=",
                          (down.ok() ? *down : 0) + (up.ok() ? *up : 0)));

  const std::string& prefix = t->record.prefix;
  for (Kind kind : kDownwardKinds) {
    for (const auto& obj : super_->List(kind).objects) {
      const std::string& scope =
          kind == Kind::kNamespace ? obj.key.name : obj.key.ns;
      if (!absl::StartsWith(scope, prefix)) continue;
      if (!SuperWrite(tenant_id, obj.key).ok()) continue;
      (void)super_->Delete(obj.key);
    }
  }
  {
    std::lock_guard lock(bind_mu_);
    bindings_.erase(tenant_id);
    pod_node_.erase(tenant_id);
    vnodes_.erase(tenant_id);
  }
  return registry_.Unregister(tenant_id);
}

std::shared_ptr<Syncer::TenantState> Syncer::FindTenant(
    const std::string& tenant) const {
  std::shared_lock lock(tenants_mu_);
  auto it = tenants_.find(tenant);
  return it == tenants_.end() ? nullptr : it->second;
}

Informer* Syncer::tenant_informer(const std::string& tenant) {
  auto t = FindTenant(tenant);
  return t ? t->informer.get() : nullptr;
}

absl::StatusOr<ObjectKey> Syncer::SuperKey(const std::string& tenant,
                                           const ObjectKey& tenant_key) const {
  if (tenant_key.kind == Kind::kNamespace) {
    auto name = registry_.Mangle(tenant, tenant_key.name);
    if (!name.ok()) return name.status();
    return ObjectKey{Kind::kNamespace, "", *name};
  }
  if (IsClusterScoped(tenant_key.kind)) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(KindName(tenant_key.kind)), " is not synced downward"));
  }
  auto ns = registry_.Mangle(tenant, tenant_key.ns);
  if (!ns.ok()) return ns.status();
  return ObjectKey{tenant_key.kind, *ns, tenant_key.name};
}

Syncer::Plan Syncer::PlanDownward(const SyncWorkItem& item) const {
  Plan p;
  p.item = item;
  p.tenant = FindTenant(item.tenant);
  if (!p.tenant || !IsDownwardKind(item.key.kind)) return p;
  auto sk = SuperKey(item.tenant, item.key);
  if (!sk.ok()) return p;
  p.super_key = *sk;
  auto tobj = p.tenant->informer->Get(item.key);
  auto sobj = super_informer_->Get(p.super_key);
  if (!tobj.ok()) {
    if (sobj.ok() && AnnotationOr(*sobj, kTenantAnnotation) == item.tenant) {
      p.op = Plan::Op::kDelete;
      p.super_version = sobj->resource_version;
    }
    return p;
  }
  VersionedObject& d = p.desired;
  d.key = p.super_key;
  d.spec = ProjectSpec(tobj->spec);
  d.status = DefaultStatus(item.key.kind);
  d.labels = tobj->labels;
  d.annotations = tobj->annotations;
  d.annotations[kTenantAnnotation] = item.tenant;
  d.annotations[kTenantUidAnnotation] = tobj->uid.ToString();
  if (!sobj.ok()) {
    p.op = Plan::Op::kCreate;
  } else if (AnnotationOr(*sobj, kTenantUidAnnotation) !=
             d.annotations[kTenantUidAnnotation]) {
    p.op = Plan::Op::kRecreate;
    p.super_version = sobj->resource_version;
  } else if (ProjectSpec(sobj->spec) != d.spec || sobj->labels != d.labels ||
             sobj->annotations != d.annotations) {
    p.op = Plan::Op::kUpdate;
    p.super_version = sobj->resource_version;
  }
  return p;
}

Syncer::Plan Syncer::PlanUpward(const SyncWorkItem& item) const {
  Plan p;
  p.item = item;
  p.tenant = FindTenant(item.tenant);
  if (!p.tenant || item.key.kind != Kind::kPod) return p;
  auto sk = SuperKey(item.tenant, item.key);
  if (!sk.ok()) return p;
  p.super_key = *sk;
  auto tobj = p.tenant->informer->Get(item.key);
  auto sobj = super_informer_->Get(p.super_key);
  if (!tobj.ok() || !sobj.ok()) return p;
  if (AnnotationOr(*sobj, kTenantUidAnnotation) != tobj->uid.ToString()) {
    return p;
  }
  p.tenant_uid = tobj->uid;
  const PodSpec* tspec = PodSpecOf(*tobj);
  const PodSpec* sspec = PodSpecOf(*sobj);
  if (tspec && sspec && tspec->node_name.empty() &&
      !sspec->node_name.empty()) {
    p.bind_node = sspec->node_name;
  }
  if (sobj->status != tobj->status) {
    p.status = sobj->status;
    const PodStatus* ss = sobj->pod_status();
    const PodStatus* ts = tobj->pod_status();
    p.becomes_ready = ss && ss->ready && !(ts && ts->ready);
    if (p.becomes_ready) p.super_ready_at = ss->ready_since;
  }
  if (!p.bind_node.empty() || p.status) p.op = Plan::Op::kUpward;
  return p;
}

absl::Status Syncer::SuperWrite(const std::string& tenant,
                                const ObjectKey& key) {
  const std::string& scope =
      key.kind == Kind::kNamespace ? key.name : key.ns;
  std::string owner;
  if (auto d = registry_.Demangle(scope); d.ok()) owner = d->first;
  audit_.Record(runtime_.Now(), tenant, "super", key, owner);
  if (owner != tenant) {
    return absl::PermissionDeniedError(
        absl::StrCat(key.ToString(), " is outside tenant ", tenant));
  }
  return absl::OkStatus();
}

absl::Status Syncer::TenantWrite(const std::string& source_tenant,
                                 const TenantState& target,
                                 const ObjectKey& key) {
  const std::string& owner = target.record.tenant_id;
  audit_.Record(runtime_.Now(), source_tenant, "tenant/" + owner, key, owner);
  if (owner != source_tenant) {
    return absl::PermissionDeniedError(absl::StrCat(
        "write for tenant ", source_tenant, " into store of ", owner));
  }
  return absl::OkStatus();
}

absl::StatusOr<ReconcileOutcome> Syncer::Commit(Plan& plan) {
  if (plan.op == Plan::Op::kNone) return ReconcileOutcome::kNoOp;
  // A tenant removed after planning gets nothing more written.
  if (!FindTenant(plan.item.tenant)) return ReconcileOutcome::kNoOp;
  return plan.item.direction == Direction::kDownward ? CommitDownward(plan)
                                                     : CommitUpward(plan);
}

absl::StatusOr<ReconcileOutcome> Syncer::CommitDownward(Plan& plan) {
  const std::string& tenant = plan.item.tenant;
  const ObjectKey& sk = plan.super_key;
  if (absl::Status s = SuperWrite(tenant, sk); !s.ok()) return s;
  switch (plan.op) {
    // Deletes carry the planned version: a stale cache must not remove a
    // newer incarnation.
    case Plan::Op::kDelete: {
      absl::Status s = super_->Delete(sk, plan.super_version);
      if (!s.ok() && !absl::IsNotFound(s)) return s;
      if (sk.kind == Kind::kPod) window_.Release(sk);
      return s.ok() ? ReconcileOutcome::kDeleted : ReconcileOutcome::kNoOp;
    }
    case Plan::Op::kRecreate: {
      absl::Status s = super_->Delete(sk, plan.super_version);
      if (!s.ok() && !absl::IsNotFound(s)) return s;
      if (sk.kind == Kind::kPod) window_.Release(sk);
      [[fallthrough]];
    }
    case Plan::Op::kCreate: {
      auto v = super_->Create(plan.desired);
      if (!v.ok()) return v.status();
      if (sk.kind == Kind::kPod) window_.Add(sk);
      return ReconcileOutcome::kCreated;
    }
    case Plan::Op::kUpdate: {
      auto v = super_->UpdateSpec(sk, plan.desired.spec, plan.desired.labels,
                                  plan.desired.annotations,
                                  plan.super_version);
      if (!v.ok()) return v.status();
      return ReconcileOutcome::kUpdated;
    }
    default:
      return ReconcileOutcome::kNoOp;
  }
}

absl::StatusOr<ReconcileOutcome> Syncer::CommitUpward(Plan& plan) {
  const std::string& tenant = plan.item.tenant;
  const ObjectKey& key = plan.item.key;
  TenantState& t = *plan.tenant;
  ObjectStore& store = *t.record.store;
  auto current = store.Get(key);
  if (!current.ok() || current->uid != plan.tenant_uid) {
    return ReconcileOutcome::kNoOp;
  }
  bool wrote = false;
  if (!plan.bind_node.empty()) {
    AddBinding(tenant, plan.bind_node, key);
    absl::Status s = EnsureVNode(tenant, plan.bind_node);
    if (s.ok()) s = TenantWrite(tenant, t, key);
    if (s.ok()) {
      auto v = store.Bind(key, plan.bind_node);
      s = v.status();
      if (absl::IsNotFound(s)) {
        RemoveBinding(tenant, key);
        return ReconcileOutcome::kNoOp;
      }
    }
    if (!s.ok()) {
      RemoveBinding(tenant, key);
      return s;
    }
    wrote = true;
  }
  if (plan.status) {
    if (absl::Status s = TenantWrite(tenant, t, key); !s.ok()) return s;
    auto v = store.UpdateStatus(key, *plan.status);
    if (absl::IsNotFound(v.status())) return ReconcileOutcome::kNoOp;
    if (!v.ok()) return v.status();
    wrote = true;
    plan.made_ready = plan.becomes_ready;
  }
  return wrote ? ReconcileOutcome::kUpdated : ReconcileOutcome::kNoOp;
}

absl::StatusOr<ReconcileOutcome> Syncer::DownwardReconcile(
    const SyncWorkItem& item) {
  if (item.direction != Direction::kDownward) {
    return absl::InvalidArgumentError("item is not downward");
  }
  Plan plan = PlanDownward(item);
  return Commit(plan);
}

absl::StatusOr<ReconcileOutcome> Syncer::UpwardReconcile(
    const SyncWorkItem& item) {
  if (item.direction != Direction::kUpward) {
    return absl::InvalidArgumentError("item is not upward");
  }
  if (!FindTenant(item.tenant)) {
    audit_.Log(absl::StrCat("t=", runtime_.Now().count(),
                            " drop up tenant=", item.tenant,
                            " key=", item.key.ToString()));
    return absl::NotFoundError(absl::StrCat("unknown tenant ", item.tenant));
  }
  Plan plan = PlanUpward(item);
  return Commit(plan);
}

std::function<void()> Syncer::Begin(Direction direction,
                                    const QueueItem& qitem) {
  SyncWorkItem item{qitem.tenant, qitem.key, direction};
  auto plan = std::make_shared<Plan>(direction == Direction::kDownward
                                         ? PlanDownward(item)
                                         : PlanUpward(item));
  Duration dequeued_at = runtime_.Now();
  return [this, plan, dequeued_at] {
    const SyncWorkItem& item = plan->item;
    auto outcome = Commit(*plan);
    Duration now = runtime_.Now();
    if (!outcome.ok()) {
      audit_.Log(absl::StrCat("t=", now.count(), " reconcile dir=",
                              std::string(DirectionName(item.direction)),
                              " tenant=", item.tenant,
                              " key=", item.key.ToString(),
                              " error=", outcome.status().ToString()));
      Retry(item.direction, item.tenant, item.key);
      return;
    }
    {
      std::lock_guard lock(stats_mu_);
      attempts_.erase({item.direction, item.tenant, item.key});
      auto& counts = item.direction == Direction::kDownward ? stats_.downward
                                                            : stats_.upward;
      ++counts[*outcome];
    }
    if (*outcome != ReconcileOutcome::kNoOp) {
      audit_.Log(absl::StrCat("t=", now.count(), " reconcile dir=",
                              std::string(DirectionName(item.direction)),
                              " tenant=", item.tenant,
                              " key=", item.key.ToString(), " outcome=",
                              std::string(OutcomeName(*outcome))));
    }
    if (observer_) {
      CommitInfo info{item.direction, item.tenant,  item.key, *outcome,
                      dequeued_at,    now,          std::nullopt};
      if (plan->made_ready) info.super_ready_at = plan->super_ready_at;
      observer_->OnCommit(info);
    }
  };
}

void Syncer::Enqueue(Direction direction, const std::string& tenant,
                     const ObjectKey& key) {
  FairQueue& q =
      direction == Direction::kDownward ? downward_queue_ : upward_queue_;
  auto added = q.Enqueue(tenant, key);
  if (!added.ok()) return;
  if (observer_) observer_->OnEnqueue(direction, tenant, key, runtime_.Now());
}

void Syncer::Retry(Direction direction, const std::string& tenant,
                   const ObjectKey& key) {
  int n;
  {
    std::lock_guard lock(stats_mu_);
    n = ++attempts_[{direction, tenant, key}];
    ++stats_.retries;
  }
  double scale = std::pow(options_.retry_factor, std::min(n - 1, 62));
  double ns = static_cast<double>(options_.retry_base.count()) * scale;
  Duration delay =
      ns >= static_cast<double>(options_.retry_cap.count())
          ? options_.retry_cap
          : Duration(static_cast<int64_t>(ns));
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(delay, [this, alive, direction, tenant, key] {
    if (alive.lock() && running_) Enqueue(direction, tenant, key);
  });
}

void Syncer::OnTenantEvent(const std::string& tenant, const ObjectKey& key,
                           EventType type) {
  if (key.kind == Kind::kPod && type == EventType::kDeleted) {
    RemoveBinding(tenant, key);
  }
  if (!IsDownwardKind(key.kind)) return;
  auto t = FindTenant(tenant);
  if (!t || DownwardInSync(*t, key)) return;
  Enqueue(Direction::kDownward, tenant, key);
}

void Syncer::OnSuperEvent(const ObjectKey& key, EventType type) {
  if (key.kind == Kind::kNode) return;
  const std::string& scope = key.kind == Kind::kNamespace ? key.name : key.ns;
  auto owner = registry_.Demangle(scope);
  if (key.kind == Kind::kPod) {
    auto obj = super_informer_->Get(key);
    const PodSpec* spec = obj.ok() ? PodSpecOf(*obj) : nullptr;
    if (type == EventType::kDeleted || !obj.ok() ||
        (spec && !spec->node_name.empty())) {
      window_.Release(key);
    }
  }
  if (!owner.ok()) {
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.foreign_events;
    }
    audit_.Log(absl::StrCat("t=", runtime_.Now().count(),
                            " foreign key=", key.ToString()));
    return;
  }
  auto t = FindTenant(owner->first);
  if (!t) return;
  ObjectKey tkey = key.kind == Kind::kNamespace
                       ? ObjectKey{Kind::kNamespace, "", owner->second}
                       : ObjectKey{key.kind, owner->second, key.name};
  if (key.kind == Kind::kPod && !UpwardInSync(*t, tkey)) {
    Enqueue(Direction::kUpward, owner->first, tkey);
  }
  if (!DownwardInSync(*t, tkey)) {
    Enqueue(Direction::kDownward, owner->first, tkey);
  }
}

bool Syncer::DownwardInSync(const TenantState& t,
                            const ObjectKey& tenant_key) const {
  return PlanDownward({t.record.tenant_id, tenant_key, Direction::kDownward})
             .op == Plan::Op::kNone;
}

bool Syncer::UpwardInSync(const TenantState& t,
                          const ObjectKey& tenant_key) const {
  return PlanUpward({t.record.tenant_id, tenant_key, Direction::kUpward})
             .op == Plan::Op::kNone;
}

void Syncer::AddBinding(const std::string& tenant, const std::string& node,
                        const ObjectKey& pod) {
  std::lock_guard lock(bind_mu_);
  auto& pods = pod_node_[tenant];
  auto it = pods.find(pod);
  if (it != pods.end()) {
    if (it->second == node) return;
    bindings_[tenant][it->second].erase(pod);
  }
  pods[pod] = node;
  bindings_[tenant][node].insert(pod);
}

void Syncer::RemoveBinding(const std::string& tenant, const ObjectKey& pod) {
  std::lock_guard lock(bind_mu_);
  auto& pods = pod_node_[tenant];
  auto it = pods.find(pod);
  if (it == pods.end()) return;
  bindings_[tenant][it->second].erase(pod);
  pods.erase(it);
}

// Bindings come from the tenant cache. A binding the cache does not show yet
// is kept while its Pod still exists, since a bind commit may be in flight.
void Syncer::RebuildBindings(const TenantState& t) {
  const std::string& id = t.record.tenant_id;
  auto pods = t.informer->List(Kind::kPod);
  auto nodes = t.informer->List(Kind::kNode);
  std::map<ObjectKey, std::string> fresh;
  std::set<ObjectKey> present;
  for (const auto& pod : pods) {
    present.insert(pod.key);
    const PodSpec* spec = PodSpecOf(pod);
    if (spec && !spec->node_name.empty()) fresh[pod.key] = spec->node_name;
  }
  std::lock_guard lock(bind_mu_);
  auto& pn = pod_node_[id];
  for (const auto& [pod, node] : pn) {
    if (present.count(pod)) fresh.emplace(pod, node);
  }
  pn = fresh;
  auto& b = bindings_[id];
  b.clear();
  for (const auto& [pod, node] : pn) b[node].insert(pod);
  for (const auto& node : nodes) vnodes_[id].insert(node.key.name);
}

std::map<std::string, std::set<ObjectKey>> Syncer::VNodeBindings(
    const std::string& tenant) const {
  std::lock_guard lock(bind_mu_);
  std::map<std::string, std::set<ObjectKey>> out;
  auto it = bindings_.find(tenant);
  if (it == bindings_.end()) return out;
  for (const auto& [node, pods] : it->second) {
    if (!pods.empty()) out[node] = pods;
  }
  return out;
}

absl::Status Syncer::EnsureVNode(const std::string& tenant,
                                 const std::string& node_name) {
  auto t = FindTenant(tenant);
  if (!t) return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant));
  ObjectKey key{Kind::kNode, "", node_name};
  auto node = super_informer_->Get(key);
  if (!node.ok()) {
    return absl::NotFoundError(
        absl::StrCat("node ", node_name, " not in super cluster"));
  }
  std::lock_guard lock(bind_mu_);
  auto& known = vnodes_[tenant];
  if (known.count(node_name)) return absl::OkStatus();
  if (t->informer->Get(key).ok()) {
    known.insert(node_name);
    return absl::OkStatus();
  }
  if (absl::Status s = TenantWrite(tenant, *t, key); !s.ok()) return s;
  VersionedObject vnode;
  vnode.key = key;
  vnode.spec = node->spec;
  vnode.status = node->status;
  vnode.labels = {{"vcsim.io/vnode", "true"}};
  auto v = t->record.store->Create(vnode);
  if (!v.ok() && !absl::IsAlreadyExists(v.status())) return v.status();
  known.insert(node_name);
  if (v.ok()) {
    std::lock_guard slock(stats_mu_);
    ++stats_.vnodes_created;
  }
  return absl::OkStatus();
}

int64_t Syncer::GcVNodes() {
  std::vector<std::shared_ptr<TenantState>> tenants;
  {
    std::shared_lock lock(tenants_mu_);
    for (const auto& [id, t] : tenants_) tenants.push_back(t);
  }
  int64_t removed = 0;
  for (const auto& t : tenants) {
    const std::string& id = t->record.tenant_id;
    std::set<std::string> candidates;
    for (const auto& n : t->informer->List(Kind::kNode)) {
      candidates.insert(n.key.name);
    }
    std::lock_guard lock(bind_mu_);
    auto& known = vnodes_[id];
    candidates.insert(known.begin(), known.end());
    auto& b = bindings_[id];
    for (const auto& name : candidates) {
      auto it = b.find(name);
      if (it != b.end() && !it->second.empty()) continue;
      ObjectKey key{Kind::kNode, "", name};
      if (!TenantWrite(id, *t, key).ok()) continue;
      absl::Status s = t->record.store->Delete(key);
      if (!s.ok() && !absl::IsNotFound(s)) continue;
      known.erase(name);
      if (it != b.end()) b.erase(it);
      if (s.ok()) ++removed;
    }
  }
  if (removed) {
    std::lock_guard lock(stats_mu_);
    stats_.vnodes_deleted += removed;
  }
  return removed;
}

int64_t Syncer::BroadcastHeartbeats() {
  std::vector<std::shared_ptr<TenantState>> tenants;
  {
    std::shared_lock lock(tenants_mu_);
    for (const auto& [id, t] : tenants_) tenants.push_back(t);
  }
  int64_t updates = 0;
  auto nodes = super_informer_->List(Kind::kNode);
  std::lock_guard lock(bind_mu_);
  for (const auto& node : nodes) {
    const NodeStatus* hb = node.node_status();
    if (!hb) continue;
    auto last = last_broadcast_.find(node.key.name);
    if (last != last_broadcast_.end() && hb->last_heartbeat <= last->second) {
      continue;
    }
    last_broadcast_[node.key.name] = hb->last_heartbeat;
    for (const auto& t : tenants) {
      const std::string& id = t->record.tenant_id;
      auto b = bindings_.find(id);
      if (b == bindings_.end()) continue;
      auto pods = b->second.find(node.key.name);
      if (pods == b->second.end() || pods->second.empty()) continue;
      if (!vnodes_[id].count(node.key.name)) continue;
      if (!TenantWrite(id, *t, node.key).ok()) continue;
      if (t->record.store->UpdateStatus(node.key, *hb).ok()) ++updates;
    }
  }
  if (updates) {
    std::lock_guard slock(stats_mu_);
    stats_.heartbeat_updates += updates;
  }
  return updates;
}

absl::StatusOr<int64_t> Syncer::PeriodicScan(const std::string& tenant) {
  auto t = FindTenant(tenant);
  if (!t) return absl::NotFoundError(absl::StrCat("unknown tenant ", tenant));
  RebuildBindings(*t);
  int64_t mismatches = 0;
  for (Kind kind : kDownwardKinds) {
    for (const auto& obj : t->informer->List(kind)) {
      if (!DownwardInSync(*t, obj.key)) {
        Enqueue(Direction::kDownward, tenant, obj.key);
        ++mismatches;
      }
      if (kind == Kind::kPod && !UpwardInSync(*t, obj.key)) {
        Enqueue(Direction::kUpward, tenant, obj.key);
        ++mismatches;
      }
    }
    // Super objects whose tenant object is gone.
    for (const auto& obj : super_informer_->List(kind)) {
      const std::string& scope =
          kind == Kind::kNamespace ? obj.key.name : obj.key.ns;
      if (!absl::StartsWith(scope, t->record.prefix)) continue;
      std::string tail = scope.substr(t->record.prefix.size());
      ObjectKey tkey = kind == Kind::kNamespace
                           ? ObjectKey{kind, "", tail}
                           : ObjectKey{kind, tail, obj.key.name};
      if (t->informer->Get(tkey).ok()) continue;
      if (!DownwardInSync(*t, tkey)) {
        Enqueue(Direction::kDownward, tenant, tkey);
        ++mismatches;
      }
    }
  }
  {
    std::lock_guard lock(stats_mu_);
    stats_.scan_mismatches += mismatches;
  }
  audit_.Log(absl::StrCat("t=", runtime_.Now().count(), " scan tenant=",
                          tenant, " mismatches=", mismatches));
  return mismatches;
}

absl::StatusOr<ObjectKey> Syncer::ResolveProxyTarget(
    const Fingerprint& fingerprint, const ObjectKey& tenant_pod) {
  auto record = registry_.ResolveByCredential(fingerprint);
  if (!record.ok()) return record.status();
  auto key = SuperKey(record->tenant_id, tenant_pod);
  if (!key.ok()) return key.status();
  if (!super_->Get(*key).ok()) {
    return absl::NotFoundError(
        absl::StrCat("pod ", tenant_pod.ToString(), " not found"));
  }
  return *key;
}

void Syncer::SchedulePeriodic(Duration period, void (Syncer::*tick)()) {
  if (period <= Duration::zero()) return;
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(period, [this, alive, period, tick] {
    if (!alive.lock() || !running_) return;
    (this->*tick)();
    SchedulePeriodic(period, tick);
  });
}

void Syncer::ScanTick() {
  std::vector<std::string> ids;
  {
    std::shared_lock lock(tenants_mu_);
    for (const auto& [id, t] : tenants_) ids.push_back(id);
  }
  for (const auto& id : ids) (void)PeriodicScan(id);
}

void Syncer::HeartbeatTick() { BroadcastHeartbeats(); }

void Syncer::GcTick() { GcVNodes(); }

int Syncer::downward_busy() const {
  return downward_pool_ ? downward_pool_->busy() : 0;
}

int Syncer::upward_busy() const {
  return upward_pool_ ? upward_pool_->busy() : 0;
}

SyncerStats Syncer::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

}  // namespace vcsim
