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

#include "vcsim/harness/runner.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "vcsim/core/tenant.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"
#include "vcsim/supercluster/super_cluster.h"
#include "vcsim/syncer/syncer.h"

namespace vcsim {
namespace {

constexpr char kPodNamespace[] = "default";

std::string PodName(int i) { return absl::StrFormat("pod-%05d", i); }

VersionedObject MakeObject(Kind kind, std::string ns, std::string name,
                           ObjectSpec spec) {
  VersionedObject obj;
  obj.key = ObjectKey{kind, std::move(ns), std::move(name)};
  obj.spec = std::move(spec);
  obj.status = DefaultStatus(kind);
  return obj;
}

VersionedObject MakePod(const std::string& ns, int i) {
  PodSpec spec;
  spec.containers.push_back({"app", "registry.local/app:1"});
  VersionedObject pod = MakeObject(Kind::kPod, ns, PodName(i), spec);
  pod.labels["app"] = "load";
  return pod;
}

// Timestamps reported by the syncer, keyed by (tenant, pod name). -1 means
// not seen.
class PhaseRecorder : public SyncObserver {
 public:
  struct Marks {
    int64_t dws_enq = -1;
    int64_t dws_deq = -1;
    int64_t dws_done = -1;
    int64_t super_ready = -1;
    int64_t uws_deq = -1;
    int64_t ready = -1;
    std::vector<int64_t> uws_enq;
  };

  void OnEnqueue(Direction direction, const std::string& tenant,
                 const ObjectKey& key, Duration at) override {
    if (key.kind != Kind::kPod || key.ns != kPodNamespace) return;
    std::lock_guard lock(mu_);
    Marks& m = marks_[{tenant, key.name}];
    if (direction == Direction::kDownward) {
      if (m.dws_enq < 0) m.dws_enq = at.count();
    } else {
      m.uws_enq.push_back(at.count());
    }
  }

  void OnCommit(const CommitInfo& info) override {
    if (info.key.kind != Kind::kPod || info.key.ns != kPodNamespace) return;
    std::lock_guard lock(mu_);
    Marks& m = marks_[{info.tenant, info.key.name}];
    if (info.direction == Direction::kDownward) {
      if (info.outcome == ReconcileOutcome::kCreated && m.dws_deq < 0) {
        m.dws_deq = info.dequeued_at.count();
        m.dws_done = info.committed_at.count();
      }
    } else if (info.super_ready_at && m.ready < 0) {
      m.super_ready = info.super_ready_at->count();
      m.uws_deq = info.dequeued_at.count();
      m.ready = info.committed_at.count();
    }
  }

  Marks Get(const std::string& tenant, const std::string& pod) const {
    std::lock_guard lock(mu_);
    auto it = marks_.find({tenant, pod});
    return it == marks_.end() ? Marks{} : it->second;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Marks> marks_;
};

// Reports each pod of one namespace the first time a watch shows it ready.
// All callbacks run on the runtime thread.
class ReadyWatcher {
 public:
  using Callback = std::function<void(const std::string& pod, Duration at)>;

  ReadyWatcher(Runtime& runtime, ObjectStore& store, std::string ns,
               Callback callback)
      : runtime_(runtime),
        store_(store),
        ns_(std::move(ns)),
        callback_(std::move(callback)) {}
  ~ReadyWatcher() {
    *alive_ = false;
    std::lock_guard lock(mu_);
    if (stream_) stream_->Stop();
  }

  absl::Status Start() {
    auto stream = store_.Watch(Kind::kPod, store_.version(), [this] {
      if (!posted_.exchange(true)) PostDrain();
    });
    if (!stream.ok()) return stream.status();
    {
      std::lock_guard lock(mu_);
      stream_ = std::move(*stream);
    }
    // Events that raced the assignment above are drained here.
    PostDrain();
    return absl::OkStatus();
  }

 private:
  void PostDrain() {
    runtime_.Post(Duration::zero(), [this, alive = alive_] {
      if (*alive) Drain();
    });
  }

  void Drain() {
    posted_ = false;
    std::vector<std::pair<std::string, Duration>> ready;
    {
      std::lock_guard lock(mu_);
      if (!stream_) return;
      while (auto ev = stream_->Next()) {
        const VersionedObject& obj = ev->object;
        if (ev->type == EventType::kDeleted || obj.key.ns != ns_) continue;
        const PodStatus* st = obj.pod_status();
        if (!st || !st->ready || !seen_.insert(obj.key.name).second) continue;
        ready.emplace_back(obj.key.name, ev->commit_time);
      }
    }
    for (const auto& [pod, at] : ready) callback_(pod, at);
  }

  Runtime& runtime_;
  ObjectStore& store_;
  const std::string ns_;
  Callback callback_;
  std::mutex mu_;
  std::unique_ptr<WatchStream> stream_;
  std::set<std::string> seen_;
  std::atomic<bool> posted_{false};
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

struct TenantRun {
  std::string id;
  std::string group;
  int weight = 1;
  int pods = 0;
  LoadPattern load = LoadPattern::kBurst;
  std::shared_ptr<ObjectStore> store;  // null in baseline mode
  ObjectStore* target = nullptr;       // receives the tenant's pods
  std::string ns;                      // namespace in `target`
  // Guarded by ScenarioRun::mu_.
  int next = 0;
  int ready = 0;
  std::vector<int64_t> create_ns;
  std::vector<int64_t> ready_ns;
};

class ScenarioRun {
 public:
  explicit ScenarioRun(const Scenario& s) : s_(s) {}
  ~ScenarioRun() { Teardown(); }

  absl::StatusOr<Report> Run();

 private:
  absl::Status Setup();
  absl::Status CreateBlocking(ObjectStore& store, const VersionedObject& obj);
  absl::Status Settle();
  bool Quiescent();
  void Pump(size_t t);
  void GenerateRealtime(size_t t);
  void OnReady(size_t t, const std::string& pod, Duration at);
  void Sample();
  absl::Status Wait();
  void Teardown();
  Report Collect();

  // Runs `f` on the runtime thread and returns its result.
  template <typename F>
  auto OnRuntime(F f) -> decltype(f()) {
    if (sim_) return f();
    std::promise<decltype(f())> done;
    auto result = done.get_future();
    runtime_->Post(Duration::zero(), [&] { done.set_value(f()); });
    return result.get();
  }

  const Scenario s_;
  // Declared first so that it outlives every component posting to it.
  std::unique_ptr<Runtime> runtime_;
  SimRuntime* sim_ = nullptr;
  std::shared_ptr<ObjectStore> super_;
  TenantRegistry registry_;
  std::unique_ptr<SuperCluster> cluster_;
  PhaseRecorder recorder_;
  std::unique_ptr<Syncer> syncer_;
  std::vector<TenantRun> tenants_;
  std::vector<std::unique_ptr<ReadyWatcher>> watchers_;
  std::vector<std::thread> generators_;

  std::mutex mu_;
  std::condition_variable cv_;
  int64_t created_ = 0;
  int64_t ready_ = 0;
  absl::Status failure_;
  bool stopping_ = false;
  bool finished_ = false;
  bool torn_down_ = false;
  std::vector<QueueSample> samples_;
};

absl::StatusOr<Report> ScenarioRun::Run() {
  if (absl::Status v = s_.Validate(); !v.ok()) return v;
  if (absl::Status st = Setup(); !st.ok()) return st;
  if (absl::Status st = Settle(); !st.ok()) return st;
  if (sim_) {
    for (size_t t = 0; t < tenants_.size(); ++t) {
      runtime_->Post(Duration::zero(), [this, t] { Pump(t); });
    }
  } else {
    for (size_t t = 0; t < tenants_.size(); ++t) {
      generators_.emplace_back([this, t] { GenerateRealtime(t); });
    }
  }
  runtime_->Post(Duration::zero(), [this] { Sample(); });
  absl::Status waited = Wait();
  Teardown();
  if (!waited.ok()) return waited;
  return Collect();
}

absl::Status ScenarioRun::Setup() {
  if (s_.clock == ClockMode::kSimulated) {
    auto sim = std::make_unique<SimRuntime>();
    sim_ = sim.get();
    runtime_ = std::move(sim);
  } else {
    runtime_ = std::make_unique<RealRuntime>();
  }
  StoreOptions super_opts;
  super_opts.name = "super";
  super_opts.uid_seed = s_.seed;
  super_ = std::make_shared<ObjectStore>(*runtime_, super_opts);

  SuperSimConfig config;
  config.nodes = s_.nodes;
  config.node_capacity = s_.node_capacity;
  config.scheduler.per_pod_service_time = Millis(s_.scheduler_service_time_ms);
  config.proxy.per_rule_latency = Millis(s_.rule_latency_ms);
  config.proxy.per_pod_scan_cost = Millis(s_.proxy_scan_cost_ms);
  config.proxy.seed = s_.seed;
  config.kubelet_ready_delay = Millis(s_.kubelet_ready_delay_ms);
  // Service scope: the owning tenant for mangled namespaces, otherwise the
  // namespace itself (baseline tenants own one plain namespace each).
  ScopeFn scope = [this](const std::string& ns) {
    auto owner = registry_.Demangle(ns);
    return owner.ok() ? owner->first : ns;
  };
  cluster_ = std::make_unique<SuperCluster>(*runtime_, *super_, scope, config);

  std::mt19937_64 rng(s_.seed);
  for (const auto& g : s_.groups) {
    for (int i = 0; i < g.tenants; ++i) {
      TenantRun t;
      t.id = absl::StrCat(g.name, "-", i);
      t.group = g.name;
      t.weight = g.weight;
      t.pods = g.pods;
      t.load = g.load;
      tenants_.push_back(std::move(t));
    }
  }

  if (s_.baseline_mode) {
    for (auto& t : tenants_) {
      t.target = super_.get();
      t.ns = t.id;
    }
  } else {
    SyncerOptions opts;
    opts.downward_workers = s_.downward_workers;
    opts.upward_workers = s_.upward_workers;
    opts.fair_queuing = s_.fair_queuing;
    opts.downward_process_cost = Millis(s_.dws_process_ms);
    opts.upward_process_cost = Millis(s_.uws_process_ms);
    opts.informer_lag = LagPolicy::Uniform(Millis(s_.informer_lag_min_ms),
                                           Millis(s_.informer_lag_max_ms));
    opts.admission_window = static_cast<size_t>(s_.admission_window);
    opts.seed = s_.seed;
    syncer_ = std::make_unique<Syncer>(*runtime_, super_, registry_, opts);
    syncer_->SetObserver(&recorder_);
    for (auto& t : tenants_) {
      StoreOptions o;
      o.name = t.id;
      o.uid_seed = s_.seed ^ (uint64_t{Fnv1a32(t.id)} << 20);
      if (s_.tenant_qps > 0) {
        o.rate_limit = RateLimitPolicy{s_.tenant_qps, s_.tenant_burst};
      }
      t.store = std::make_shared<ObjectStore>(*runtime_, o);
      t.target = t.store.get();
      t.ns = kPodNamespace;
      Uid uid(rng(), rng());
      auto record = MakeTenantRecord(t.id, uid, absl::StrCat("cred-", t.id),
                                     t.weight, t.store);
      if (!record.ok()) return record.status();
      if (absl::Status st = syncer_->RegisterTenant(*record); !st.ok()) {
        return st;
      }
    }
  }

  if (absl::Status st = cluster_->Start(); !st.ok()) return st;
  if (syncer_) {
    if (absl::Status st = syncer_->Start(); !st.ok()) return st;
  }

  for (size_t i = 0; i < tenants_.size(); ++i) {
    TenantRun& t = tenants_[i];
    t.create_ns.assign(t.pods, -1);
    t.ready_ns.assign(t.pods, -1);
    watchers_.push_back(std::make_unique<ReadyWatcher>(
        *runtime_, *t.target, t.ns,
        [this, i](const std::string& pod, Duration at) {
          OnReady(i, pod, at);
        }));
    if (absl::Status st = watchers_.back()->Start(); !st.ok()) return st;

    VersionedObject ns = MakeObject(Kind::kNamespace, "", t.ns,
                                    DefaultSpec(Kind::kNamespace));
    if (absl::Status st = CreateBlocking(*t.target, ns); !st.ok()) return st;
    for (int k = 0; k < s_.services_per_tenant; ++k) {
      std::string name = absl::StrFormat("svc-%03d", k);
      ServiceSpec svc{absl::StrFormat("10.%d.%d.%d", i / 250 % 250,
                                      i % 250, k + 1),
                      80};
      EndpointsSpec ep{{absl::StrFormat("172.16.%d.%d", k % 250, 1),
                        absl::StrFormat("172.16.%d.%d", k % 250, 2)}};
      for (VersionedObject obj :
           {MakeObject(Kind::kService, t.ns, name, svc),
            MakeObject(Kind::kEndpoints, t.ns, name, ep)}) {
        if (absl::Status st = CreateBlocking(*t.target, obj); !st.ok()) {
          return st;
        }
      }
    }
  }
  return absl::OkStatus();
}

absl::Status ScenarioRun::CreateBlocking(ObjectStore& store,
                                         const VersionedObject& obj) {
  while (true) {
    auto created = store.Create(obj);
    if (created.ok()) return absl::OkStatus();
    if (!absl::IsResourceExhausted(created.status())) return created.status();
    Duration wait = std::max(store.RetryAfter(), Millis(1));
    if (sim_) {
      sim_->RunFor(wait);
    } else {
      std::this_thread::sleep_for(wait);
    }
  }
}

bool ScenarioRun::Quiescent() {
  size_t expected = static_cast<size_t>(s_.nodes) + tenants_.size() *
                        (1 + 2 * static_cast<size_t>(s_.services_per_tenant));
  if (super_->size() != expected || !cluster_->proxy().idle()) return false;
  if (!syncer_) return true;
  return syncer_->downward_queue().pending() == 0 &&
         syncer_->downward_queue().processing() == 0 &&
         syncer_->upward_queue().pending() == 0 &&
         syncer_->upward_queue().processing() == 0;
}

absl::Status ScenarioRun::Settle() {
  const Duration limit = runtime_->Now() + std::chrono::seconds(600);
  if (sim_) {
    if (sim_->RunUntil([this] { return Quiescent(); }, limit)) {
      return absl::OkStatus();
    }
  } else {
    while (runtime_->Now() < limit) {
      if (OnRuntime([this] { return Quiescent(); })) return absl::OkStatus();
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  return absl::DeadlineExceededError("setup objects did not settle");
}

// Simulated generator: creates as many pods as the load pattern allows,
// backing off while the tenant store is rate limited.
void ScenarioRun::Pump(size_t i) {
  TenantRun& t = tenants_[i];
  while (failure_.ok() && t.next < t.pods) {
    if (t.load == LoadPattern::kSequential && t.next > t.ready) return;
    auto created = t.target->Create(MakePod(t.ns, t.next));
    if (absl::IsResourceExhausted(created.status())) {
      Duration wait = std::max(t.target->RetryAfter(), Millis(1));
      runtime_->Post(wait, [this, i] { Pump(i); });
      return;
    }
    if (!created.ok()) {
      failure_ = created.status();
      return;
    }
    t.create_ns[t.next++] = runtime_->Now().count();
    ++created_;
  }
}

// Realtime generator thread for one tenant.
void ScenarioRun::GenerateRealtime(size_t i) {
  TenantRun& t = tenants_[i];
  for (int k = 0; k < t.pods; ++k) {
    if (t.load == LoadPattern::kSequential) {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || t.ready >= k; });
    }
    VersionedObject pod = MakePod(t.ns, k);
    while (true) {
      {
        std::lock_guard lock(mu_);
        if (stopping_) return;
      }
      Duration issued = runtime_->Now();
      auto created = t.target->Create(pod);
      if (absl::IsResourceExhausted(created.status())) {
        std::this_thread::sleep_for(
            std::max(t.target->RetryAfter(), Millis(1)));
        continue;
      }
      std::lock_guard lock(mu_);
      if (!created.ok()) {
        failure_ = created.status();
        cv_.notify_all();
        return;
      }
      t.create_ns[k] = issued.count();
      ++t.next;
      ++created_;
      break;
    }
  }
}

void ScenarioRun::OnReady(size_t i, const std::string& pod, Duration at) {
  TenantRun& t = tenants_[i];
  // Pod names are "pod-NNNNN".
  int k = std::stoi(pod.substr(4));
  {
    std::lock_guard lock(mu_);
    if (k < 0 || k >= t.pods || t.ready_ns[k] >= 0) return;
    t.ready_ns[k] = at.count();
    ++t.ready;
    ++ready_;
  }
  cv_.notify_all();
  if (sim_ && t.load == LoadPattern::kSequential) Pump(i);
}

void ScenarioRun::Sample() {
  QueueSample q;
  q.t = runtime_->Now().count();
  if (syncer_) {
    q.dws_pending = static_cast<int64_t>(syncer_->downward_queue().pending());
    q.uws_pending = static_cast<int64_t>(syncer_->upward_queue().pending());
    q.window = static_cast<int64_t>(syncer_->window().outstanding());
  }
  q.sched_queue = static_cast<int64_t>(cluster_->scheduler().queue_length());
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    q.ready = ready_;
    samples_.push_back(q);
  }
  runtime_->Post(Millis(s_.sample_interval_ms), [this] { Sample(); });
}

absl::Status ScenarioRun::Wait() {
  const int64_t total = s_.pods_total();
  const Duration deadline =
      runtime_->Now() + Duration(static_cast<int64_t>(s_.deadline_s * 1e9));
  bool done;
  if (sim_) {
    done = sim_->RunUntil([&] { return ready_ == total || !failure_.ok(); },
                          deadline);
  } else {
    std::unique_lock lock(mu_);
    auto wall = std::chrono::steady_clock::now() +
                (deadline - runtime_->Now());
    done = cv_.wait_until(lock, wall,
                          [&] { return ready_ == total || !failure_.ok(); });
  }
  std::lock_guard lock(mu_);
  finished_ = true;
  if (!failure_.ok()) return failure_;
  if (!done || ready_ != total) {
    return absl::DeadlineExceededError(
        absl::StrCat(ready_, " of ", total, " pods ready at the deadline"));
  }
  return absl::OkStatus();
}

void ScenarioRun::Teardown() {
  if (torn_down_) return;
  torn_down_ = true;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    finished_ = true;
  }
  cv_.notify_all();
  for (auto& g : generators_) g.join();
  generators_.clear();
  if (!sim_ && runtime_) static_cast<RealRuntime*>(runtime_.get())->Shutdown();
  if (syncer_) syncer_->Stop();
  if (cluster_) cluster_->Stop();
}

Report ScenarioRun::Collect() {
  Report r;
  r.scenario = s_;
  r.pods_created = created_;
  r.pods_ready = ready_;
  std::vector<std::pair<std::string, std::string>> groups;
  double injection_sum = 0;
  int64_t injection_n = 0;
  for (const TenantRun& t : tenants_) {
    groups.emplace_back(t.id, t.group);
    for (int k = 0; k < t.pods; ++k) {
      if (t.create_ns[k] < 0 || t.ready_ns[k] < 0) continue;
      PhaseTrace tr;
      tr.tenant = t.id;
      tr.pod = PodName(k);
      tr.t_create = t.create_ns[k];
      // Clamp into field order; only realtime runs ever need it.
      auto after = [](int64_t prev, int64_t v) { return std::max(prev, v); };
      if (syncer_) {
        PhaseRecorder::Marks m = recorder_.Get(t.id, tr.pod);
        tr.t_dws_enq = after(tr.t_create, m.dws_enq);
        tr.t_dws_deq = after(tr.t_dws_enq, m.dws_deq);
        tr.t_dws_done = after(tr.t_dws_deq, m.dws_done);
        tr.t_super_ready = after(tr.t_dws_done, m.super_ready);
        tr.t_uws_deq = after(tr.t_super_ready, m.uws_deq);
        tr.t_ready = after(tr.t_uws_deq, m.ready);
        int64_t enq = tr.t_uws_deq;
        for (int64_t e : m.uws_enq) {
          if (e >= tr.t_super_ready) enq = std::min(enq, e);
        }
        tr.t_uws_enq = enq;
        auto key = syncer_->SuperKey(t.id, {Kind::kPod, t.ns, tr.pod});
        if (key.ok()) {
          if (auto inj = cluster_->proxy().FirstInjectionTime(*key)) {
            injection_sum += ToSeconds(*inj);
            ++injection_n;
          }
        }
      } else {
        tr.t_dws_enq = tr.t_dws_deq = tr.t_dws_done = tr.t_create;
        tr.t_ready = after(tr.t_create, t.ready_ns[k]);
        tr.t_super_ready = tr.t_uws_enq = tr.t_uws_deq = tr.t_ready;
        ObjectKey key{Kind::kPod, t.ns, tr.pod};
        if (auto inj = cluster_->proxy().FirstInjectionTime(key)) {
          injection_sum += ToSeconds(*inj);
          ++injection_n;
        }
      }
      r.traces.push_back(std::move(tr));
    }
  }
  r.Summarize(groups);
  for (size_t i = 0; i < tenants_.size(); ++i) {
    r.tenants[i].pods = tenants_[i].pods;
  }
  if (!r.traces.empty()) {
    int64_t first = r.traces.front().t_create;
    int64_t last = r.traces.front().t_ready;
    for (const auto& tr : r.traces) {
      first = std::min(first, tr.t_create);
      last = std::max(last, tr.t_ready);
    }
    r.makespan_s = (last - first) / 1e9;
    if (last > first) r.throughput = r.traces.size() / r.makespan_s;
  }
  r.scheduler_throughput = cluster_->scheduler().SaturatedThroughput();
  r.queue_depth = samples_;
  r.gate_violations = cluster_->kubelet().gate_violations();
  if (injection_n > 0) r.injection_mean_s = injection_sum / injection_n;
  if (syncer_) {
    ProvenanceCounts c = syncer_->audit().counts();
    r.provenance_writes = c.writes;
    r.cross_tenant_writes = c.cross_tenant;
    r.unprefixed_writes = c.unprefixed;
    r.retries = syncer_->stats().retries;
  }
  return r;
}

}  // namespace

absl::StatusOr<Report> RunScenario(const Scenario& scenario) {
  ScenarioRun run(scenario);
  return run.Run();
}

Scenario FairnessScenario(uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.groups = {{"greedy", 10, 900, LoadPattern::kBurst, 1},
              {"regular", 40, 10, LoadPattern::kSequential, 1}};
  return s;
}

absl::StatusOr<FairnessResult> RunFairnessExperiment(const Scenario& base) {
  FairnessResult out;
  Scenario s = base;
  s.fair_queuing = true;
  auto on = RunScenario(s);
  if (!on.ok()) return on.status();
  out.fq_on = std::move(*on);
  s.fair_queuing = false;
  auto off = RunScenario(s);
  if (!off.ok()) return off.status();
  out.fq_off = std::move(*off);
  return out;
}

Scenario BurstScenario(uint64_t seed, int tenants, int pods_per_tenant) {
  Scenario s;
  s.seed = seed;
  s.groups = {{"t", tenants, pods_per_tenant, LoadPattern::kBurst, 1}};
  return s;
}

Scenario BreakdownScenario(uint64_t seed) {
  return BurstScenario(seed, 100, 100);
}

absl::StatusOr<std::vector<SweepRow>> RunThroughputSweep(
    const std::vector<int>& pods, const std::vector<int>& tenants,
    const Scenario& base, bool include_baseline) {
  std::vector<SweepRow> rows;
  for (int p : pods) {
    for (int n : tenants) {
      if (n < 1 || p < n || p % n != 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            p, " pods cannot be split evenly over ", n, " tenants"));
      }
      for (bool baseline : {false, true}) {
        if (baseline && !include_baseline) continue;
        Scenario s = base;
        s.groups = {{"t", n, p / n, LoadPattern::kBurst, 1}};
        s.baseline_mode = baseline;
        auto r = RunScenario(s);
        if (!r.ok()) return r.status();
        rows.push_back({p, n, baseline, r->throughput, r->total});
      }
    }
  }
  return rows;
}

std::string SweepToCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "pods,tenants,mode,throughput,mean_s,p50_s,p90_s,p99_s,max_s\n";
  for (const auto& r : rows) {
    absl::StrAppend(&out, r.pods, ",", r.tenants, ",",
                    r.baseline ? "baseline" : "syncer", ",",
                    FormatDouble(r.throughput), ",",
                    FormatDouble(r.latency.mean_s), ",",
                    FormatDouble(r.latency.p50_s), ",",
                    FormatDouble(r.latency.p90_s), ",",
                    FormatDouble(r.latency.p99_s), ",",
                    FormatDouble(r.latency.max_s), "\n");
  }
  return out;
}

std::string SweepToJson(const std::vector<SweepRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"pods", r.pods},
                 {"tenants", r.tenants},
                 {"mode", r.baseline ? "baseline" : "syncer"},
                 {"throughput", r.throughput},
                 {"mean_s", r.latency.mean_s},
                 {"p50_s", r.latency.p50_s},
                 {"p90_s", r.latency.p90_s},
                 {"p99_s", r.latency.p99_s},
                 {"max_s", r.latency.max_s}});
  }
  return j.dump(1);
}

}  // namespace vcsim
