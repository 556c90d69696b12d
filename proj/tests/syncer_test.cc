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

#include <map>
#include <random>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "absl/strings/str_cat.h"
#include "sync_world.h"
#include "vcsim/syncer/syncer.h"

namespace vcsim {
namespace {

using std::chrono::seconds;
using testing::ConvergenceMismatches;
using testing::MakeNamespace;
using testing::MakePod;
using testing::SyncWorld;

ObjectKey PodKey(const std::string& name) {
  return {Kind::kPod, "default", name};
}

SuperSimConfig Nodes(int n) {
  SuperSimConfig c;
  c.nodes = n;
  return c;
}

TEST(SyncerTest, NamespaceAppearsMangled) {
  SyncWorld w;
  w.AddTenant("vc-a");
  w.Settle();
  auto name = w.registry().Mangle("vc-a", "default");
  ASSERT_TRUE(name.ok());
  auto ns = w.super().Get({Kind::kNamespace, "", *name});
  ASSERT_TRUE(ns.ok());
  EXPECT_EQ(ns->annotations.at(kTenantAnnotation), "vc-a");
}

TEST(SyncerTest, PodLifecycleDownward) {
  SyncWorld w;
  auto& store = *w.AddTenant("vc-a");
  ASSERT_TRUE(store.Create(MakePod("default", "p", {{"app", "web"}})).ok());
  w.Settle();
  auto sk = w.syncer().SuperKey("vc-a", PodKey("p"));
  ASSERT_TRUE(sk.ok());
  auto super_pod = w.super().Get(*sk);
  ASSERT_TRUE(super_pod.ok());
  EXPECT_EQ(super_pod->pod_spec()->containers,
            store.Get(PodKey("p"))->pod_spec()->containers);
  EXPECT_EQ(super_pod->labels, (Labels{{"app", "web"}}));
  EXPECT_GE(w.syncer().stats().downward.at(ReconcileOutcome::kCreated), 2);

  // Idempotent once converged, in both directions.
  SyncWorkItem down{"vc-a", PodKey("p"), Direction::kDownward};
  SyncWorkItem up{"vc-a", PodKey("p"), Direction::kUpward};
  EXPECT_EQ(*w.syncer().DownwardReconcile(down), ReconcileOutcome::kNoOp);
  EXPECT_EQ(*w.syncer().DownwardReconcile(down), ReconcileOutcome::kNoOp);
  EXPECT_EQ(*w.syncer().UpwardReconcile(up), ReconcileOutcome::kNoOp);

  auto cur = *store.Get(PodKey("p"));
  ASSERT_TRUE(store
                  .UpdateSpec(PodKey("p"), cur.spec, {{"app", "api"}},
                              cur.annotations)
                  .ok());
  w.Settle();
  EXPECT_EQ(w.super().Get(*sk)->labels, (Labels{{"app", "api"}}));
  // The bound node survives a tenant spec update.
  EXPECT_FALSE(w.super().Get(*sk)->pod_spec()->node_name.empty());

  ASSERT_TRUE(store.Delete(PodKey("p")).ok());
  w.Settle();
  EXPECT_EQ(w.super().Get(*sk).status().code(), absl::StatusCode::kNotFound);
  EXPECT_GE(w.syncer().stats().downward.at(ReconcileOutcome::kDeleted), 1);
}

TEST(SyncerTest, DeleteWhileUpdateInFlight) {
  SyncWorld w;
  auto& store = *w.AddTenant("vc-a");
  ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  w.Settle();
  auto cur = *store.Get(PodKey("p"));
  ASSERT_TRUE(
      store.UpdateSpec(PodKey("p"), cur.spec, {{"v", "2"}}, {}).ok());
  // Past the informer lag, inside the 2ms reconcile.
  w.rt().RunFor(Millis(6));
  ASSERT_TRUE(store.Delete(PodKey("p")).ok());
  w.Settle();
  EXPECT_FALSE(w.super().Get(*w.syncer().SuperKey("vc-a", PodKey("p"))).ok());
  EXPECT_EQ(ConvergenceMismatches(store, w.super(), w.record("vc-a")), 0);
}

// Randomized create / update / delete interleavings over a few keys with
// jittered informer lag; the final super state must mirror the tenant.
TEST(SyncerTest, RandomInterleavingsLeaveNoOrphans) {
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    SyncerOptions opts;
    opts.seed = seed;
    opts.informer_lag = LagPolicy::Uniform(Millis(1), Millis(8));
    SyncWorld w(opts, Nodes(4));
    auto& store = *w.AddTenant("vc-a");
    std::mt19937 rng(static_cast<uint32_t>(seed));
    for (int step = 0; step < 200; ++step) {
      ObjectKey key = PodKey("p" + std::to_string(rng() % 4));
      switch (rng() % 3) {
        case 0:
          (void)store.Create(MakePod("default", key.name));
          break;
        case 1:
          if (auto cur = store.Get(key); cur.ok()) {
            (void)store.UpdateSpec(key, cur->spec,
                                   {{"step", std::to_string(step)}}, {});
          }
          break;
        default:
          (void)store.Delete(key);
      }
      w.rt().RunFor(Millis(rng() % 4));
    }
    w.Settle(seconds(10));
    ASSERT_EQ(ConvergenceMismatches(store, w.super(), w.record("vc-a")), 0)
        << "seed " << seed;
    EXPECT_TRUE(w.syncer().audit().clean());
  }
}

TEST(SyncerTest, UpwardReadyAndVNode) {
  SyncWorld w(SyncerOptions{}, Nodes(3));
  auto& store = *w.AddTenant("vc-a");
  ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  w.Settle();
  auto pod = store.Get(PodKey("p"));
  ASSERT_TRUE(pod.ok());
  EXPECT_TRUE(pod->pod_status()->ready);
  EXPECT_EQ(pod->pod_status()->phase, PodPhase::kRunning);
  auto super_pod = w.super().Get(*w.syncer().SuperKey("vc-a", PodKey("p")));
  const std::string& node = super_pod->pod_spec()->node_name;
  EXPECT_EQ(pod->pod_spec()->node_name, node);
  auto vnode = store.Get({Kind::kNode, "", node});
  ASSERT_TRUE(vnode.ok());
  EXPECT_EQ(vnode->labels.at("vcsim.io/vnode"), "true");
  EXPECT_EQ(store.List(Kind::kNode).objects.size(), 1u);
}

TEST(SyncerTest, AntiAffinePodsGetDistinctVNodes) {
  SyncWorld w(SyncerOptions{}, Nodes(4));
  auto& store = *w.AddTenant("vc-a");
  LabelSelector sel{{{"app", "db"}}};
  for (const char* n : {"db-0", "db-1"}) {
    ASSERT_TRUE(
        store.Create(MakePod("default", n, {{"app", "db"}}, {sel})).ok());
  }
  w.Settle();
  std::string a = store.Get(PodKey("db-0"))->pod_spec()->node_name;
  std::string b = store.Get(PodKey("db-1"))->pod_spec()->node_name;
  EXPECT_FALSE(a.empty());
  EXPECT_FALSE(b.empty());
  EXPECT_NE(a, b);
  EXPECT_TRUE(store.Get({Kind::kNode, "", a}).ok());
  EXPECT_TRUE(store.Get({Kind::kNode, "", b}).ok());
}

TEST(SyncerTest, VNodeCollectedAfterLastPod) {
  SyncerOptions opts;
  opts.gc_period = Duration::zero();
  SyncWorld w(opts, Nodes(1));
  auto& store = *w.AddTenant("vc-a");
  ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  ASSERT_TRUE(store.Create(MakePod("default", "q")).ok());
  w.Settle();
  ObjectKey vnode{Kind::kNode, "", "node-000"};
  ASSERT_TRUE(store.Get(vnode).ok());
  ASSERT_TRUE(store.Delete(PodKey("p")).ok());
  w.Settle();
  EXPECT_EQ(w.syncer().GcVNodes(), 0);
  EXPECT_TRUE(store.Get(vnode).ok());
  ASSERT_TRUE(store.Delete(PodKey("q")).ok());
  w.Settle();
  EXPECT_EQ(w.syncer().GcVNodes(), 1);
  EXPECT_FALSE(store.Get(vnode).ok());
  EXPECT_EQ(w.syncer().stats().vnodes_deleted, 1);
}

// vNodes per tenant equal the distinct physical nodes its Pods use, and the
// mapping is one-to-one.
TEST(SyncerTest, TenantsSharingNodesSeeOwnVNodes) {
  SyncWorld w(SyncerOptions{}, Nodes(6));
  std::mt19937 rng(5);
  for (int t = 0; t < 3; ++t) {
    auto& store = *w.AddTenant("t" + std::to_string(t));
    int pods = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < pods; ++i) {
      ASSERT_TRUE(store.Create(MakePod("default", "p" + std::to_string(i)))
                      .ok());
    }
  }
  w.Settle(seconds(30));
  for (int t = 0; t < 3; ++t) {
    std::string id = "t" + std::to_string(t);
    auto& store = w.store(id);
    std::set<std::string> used, vnodes;
    for (const auto& pod : store.List(Kind::kPod).objects) {
      used.insert(pod.pod_spec()->node_name);
    }
    for (const auto& n : store.List(Kind::kNode).objects) {
      vnodes.insert(n.key.name);
    }
    EXPECT_EQ(vnodes, used) << id;
    std::set<std::string> bound;
    for (const auto& [node, pods] : w.syncer().VNodeBindings(id)) {
      bound.insert(node);
    }
    EXPECT_EQ(bound, used) << id;
  }
}

TEST(SyncerTest, HeartbeatsFanOutToTenantsUsingTheNode) {
  SyncerOptions opts;
  opts.heartbeat_period = Duration::zero();
  SyncWorld w(opts, Nodes(1));
  for (const char* id : {"a", "b", "c"}) {
    ASSERT_TRUE(w.AddTenant(id)->Create(MakePod("default", "p")).ok());
  }
  w.Settle();
  EXPECT_EQ(w.syncer().BroadcastHeartbeats(), 3);
  EXPECT_EQ(w.syncer().BroadcastHeartbeats(), 0);
  w.Settle(seconds(10));
  EXPECT_EQ(w.syncer().BroadcastHeartbeats(), 3);
  ObjectKey vnode{Kind::kNode, "", "node-000"};
  Duration fresh = w.store("a").Get(vnode)->node_status()->last_heartbeat;
  EXPECT_EQ(fresh, seconds(10));

  w.cluster().nodes().StopHeartbeat("node-000");
  w.Settle(seconds(30));
  EXPECT_EQ(w.syncer().BroadcastHeartbeats(), 0);
  EXPECT_EQ(w.store("a").Get(vnode)->node_status()->last_heartbeat, fresh);
}

TEST(SyncerTest, SparseHeartbeatCountsUsedNodesOnly) {
  SyncerOptions opts;
  opts.heartbeat_period = Duration::zero();
  SyncWorld w(opts, Nodes(100));
  std::mt19937 rng(9);
  for (int t = 0; t < 100; ++t) {
    auto& store = *w.AddTenant("t" + std::to_string(t));
    int pods = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < pods; ++i) {
      ASSERT_TRUE(store.Create(MakePod("default", "p" + std::to_string(i)))
                      .ok());
    }
  }
  w.Settle(seconds(9));
  int64_t expected = 0;
  for (int t = 0; t < 100; ++t) {
    std::set<std::string> used;
    for (const auto& pod :
         w.store("t" + std::to_string(t)).List(Kind::kPod).objects) {
      ASSERT_TRUE(pod.pod_status()->ready);
      used.insert(pod.pod_spec()->node_name);
    }
    expected += static_cast<int64_t>(used.size());
  }
  EXPECT_EQ(w.syncer().BroadcastHeartbeats(), expected);
  EXPECT_LT(expected, 100 * 100);
}

TEST(SyncerTest, PeriodicScanFindsCorruption) {
  SyncWorld w;
  auto& store = *w.AddTenant("vc-a");
  ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  w.Settle();
  EXPECT_EQ(*w.syncer().PeriodicScan("vc-a"), 0);

  // The super cache sees the corruption but its notification is lost.
  w.syncer().super_informer().SetFaults({1.0, Duration::zero()});
  auto sk = *w.syncer().SuperKey("vc-a", PodKey("p"));
  auto cur = *w.super().Get(sk);
  ASSERT_TRUE(
      w.super()
          .UpdateSpec(sk, cur.spec, {{"evil", "1"}}, cur.annotations)
          .ok());
  w.Settle(Millis(100));
  EXPECT_EQ(w.super().Get(sk)->labels, (Labels{{"evil", "1"}}));
  w.syncer().super_informer().SetFaults({});
  EXPECT_EQ(*w.syncer().PeriodicScan("vc-a"), 1);
  w.Settle(Millis(100));
  EXPECT_TRUE(w.super().Get(sk)->labels.empty());
  EXPECT_EQ(*w.syncer().PeriodicScan("vc-a"), 0);
  EXPECT_EQ(w.syncer().PeriodicScan("nobody").status().code(),
            absl::StatusCode::kNotFound);
}

// Dropped notifications, extra delay and forced relists during churn; one
// scan interval after the stores go quiet everything matches.
void ChurnWithFaults(uint32_t seed) {
  SyncerOptions opts;
  opts.seed = seed;
  opts.informer_lag = LagPolicy::Uniform(Millis(1), Millis(10));
  SyncWorld w(opts, Nodes(20));
  std::vector<std::string> ids;
  for (int t = 0; t < 5; ++t) {
    ids.push_back("t" + std::to_string(t));
    w.AddTenant(ids.back());
    w.syncer().tenant_informer(ids.back())->SetFaults({0.3, Millis(20)});
  }
  w.syncer().super_informer().SetFaults({0.3, Millis(20)});
  std::mt19937 rng(seed);
  for (int step = 0; step < 3000; ++step) {
    auto& store = w.store(ids[rng() % ids.size()]);
    std::string name = "o" + std::to_string(rng() % 200);
    bool pod = rng() % 2 == 0;
    ObjectKey key{pod ? Kind::kPod : Kind::kConfigMap, "default", name};
    switch (rng() % 4) {
      case 0:
        (void)store.Delete(key);
        break;
      case 1:
        if (auto cur = store.Get(key); cur.ok()) {
          (void)store.UpdateSpec(key, cur->spec,
                                 {{"s", std::to_string(step)}}, {});
        }
        break;
      default:
        if (pod) {
          (void)store.Create(MakePod("default", name));
        } else {
          VersionedObject cm;
          cm.key = key;
          cm.spec = DataSpec{{{"k", std::to_string(step)}}};
          (void)store.Create(cm);
        }
    }
    if (step % 250 == 0) {
      w.syncer().tenant_informer(ids[rng() % ids.size()])->DropWatch(
          Kind::kPod);
      w.syncer().super_informer().Relist(Kind::kPod);
    }
    w.rt().RunFor(Millis(rng() % 3));
  }
  w.Settle(seconds(10));
  for (const auto& id : ids) {
    w.syncer().tenant_informer(id)->SetFaults({});
  }
  w.syncer().super_informer().SetFaults({});
  w.Settle(seconds(60));
  for (const auto& id : ids) {
    EXPECT_EQ(ConvergenceMismatches(w.store(id), w.super(), w.record(id)), 0)
        << "seed " << seed << " " << id;
    EXPECT_EQ(*w.syncer().PeriodicScan(id), 0) << "seed " << seed << " " << id;
  }
  EXPECT_TRUE(w.syncer().audit().clean());
}

TEST(SyncerTest, ConvergesUnderInjectedFaults) {
  for (uint32_t seed = 1; seed <= 10; ++seed) ChurnWithFaults(seed);
}

TEST(SyncerTest, ResolveProxyTarget) {
  SyncWorld w(SyncerOptions{}, Nodes(4));
  std::set<ObjectKey> targets;
  for (int t = 0; t < 10; ++t) {
    auto& store = *w.AddTenant("t" + std::to_string(t));
    for (int i = 0; i < 5; ++i) {
      ASSERT_TRUE(store.Create(MakePod("default", "p" + std::to_string(i)))
                      .ok());
    }
  }
  w.Settle();
  auto a = w.syncer().ResolveProxyTarget(FingerprintOf("cred-t0"),
                                         PodKey("p0"));
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->ns, w.record("t0").prefix + "default");
  EXPECT_EQ(a->name, "p0");
  EXPECT_EQ(w.syncer()
                .ResolveProxyTarget(FingerprintOf("stranger"), PodKey("p0"))
                .status()
                .code(),
            absl::StatusCode::kUnauthenticated);
  EXPECT_EQ(w.syncer()
                .ResolveProxyTarget(FingerprintOf("cred-t0"), PodKey("none"))
                .status()
                .code(),
            absl::StatusCode::kNotFound);
  for (int t = 0; t < 10; ++t) {
    std::string id = "t" + std::to_string(t);
    for (const auto& pod : w.store(id).List(Kind::kPod).objects) {
      auto target =
          w.syncer().ResolveProxyTarget(FingerprintOf("cred-" + id), pod.key);
      ASSERT_TRUE(target.ok());
      EXPECT_TRUE(w.super().Get(*target).ok());
      EXPECT_TRUE(targets.insert(*target).second);
    }
  }
  EXPECT_EQ(targets.size(), 50u);
  EXPECT_EQ(w.super().List(Kind::kPod).objects.size(), 50u);
}

TEST(SyncerTest, UnregisterCollectsTenantObjects) {
  SyncWorld w(SyncerOptions{}, Nodes(4));
  for (const char* id : {"a", "b"}) {
    auto& store = *w.AddTenant(id);
    ASSERT_TRUE(store.Create(MakeNamespace("prod")).ok());
    for (int i = 0; i < 3; ++i) {
      ASSERT_TRUE(
          store.Create(MakePod("default", "p" + std::to_string(i))).ok());
      ASSERT_TRUE(store.Create(MakePod("prod", "p" + std::to_string(i))).ok());
    }
  }
  w.Settle();
  auto snapshot = [&] {
    std::set<ObjectKey> keys;
    for (Kind k : kDownwardKinds) {
      for (const auto& o : w.super().List(k).objects) keys.insert(o.key);
    }
    return keys;
  };
  std::set<ObjectKey> before = snapshot();
  std::string prefix_a = w.record("a").prefix;
  ASSERT_TRUE(w.syncer().UnregisterTenant("a").ok());
  w.Settle();
  std::set<ObjectKey> after = snapshot();
  std::set<ObjectKey> expected;
  for (const auto& k : before) {
    const std::string& scope = k.kind == Kind::kNamespace ? k.name : k.ns;
    if (!absl::StartsWith(scope, prefix_a)) expected.insert(k);
  }
  EXPECT_EQ(after, expected);
  EXPECT_EQ(before.size() - after.size(), 8u);  // 2 namespaces + 6 pods
  EXPECT_FALSE(w.registry().Get("a").ok());
  EXPECT_EQ(w.syncer().UnregisterTenant("a").code(),
            absl::StatusCode::kNotFound);
  EXPECT_TRUE(w.syncer().audit().clean());
}

TEST(SyncerTest, HundredTenantsShareOneQueue) {
  SyncWorld w(SyncerOptions{}, Nodes(10));
  for (int t = 0; t < 100; ++t) {
    auto& store = *w.AddTenant(absl::StrCat("t", t));
    ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  }
  EXPECT_EQ(w.syncer().downward_queue().Stats().size(), 100u);
  EXPECT_EQ(w.syncer().upward_queue().Stats().size(), 100u);
  w.Settle(seconds(10));
  EXPECT_EQ(w.super().List(Kind::kPod).objects.size(), 100u);
  for (int t = 0; t < 100; ++t) {
    std::string id = absl::StrCat("t", t);
    EXPECT_EQ(ConvergenceMismatches(w.store(id), w.super(), w.record(id)), 0);
  }
}

TEST(SyncerTest, RestartListsEachSuperKindOnce) {
  SyncWorld w(SyncerOptions{}, Nodes(4));
  for (int t = 0; t < 30; ++t) {
    auto& store = *w.AddTenant(absl::StrCat("t", t));
    ASSERT_TRUE(store.Create(MakePod("default", "p")).ok());
  }
  w.Settle();
  std::map<Kind, int64_t> before;
  const Kind kinds[] = {Kind::kNamespace, Kind::kPod,       Kind::kService,
                        Kind::kEndpoints, Kind::kSecret,    Kind::kConfigMap,
                        Kind::kNode};
  for (Kind k : kinds) before[k] = w.super().list_calls(k);
  w.RestartSyncer();
  for (Kind k : kinds) {
    EXPECT_EQ(w.super().list_calls(k) - before[k], 1) << KindName(k);
  }
  w.Settle();
  // Nothing to redo after the restart.
  EXPECT_EQ(w.syncer().stats().downward.count(ReconcileOutcome::kCreated), 0u);
  for (int t = 0; t < 30; ++t) {
    std::string id = absl::StrCat("t", t);
    EXPECT_EQ(ConvergenceMismatches(w.store(id), w.super(), w.record(id)), 0);
  }
}

TEST(SyncerTest, AuditStaysClean) {
  SyncWorld w(SyncerOptions{}, Nodes(8));
  for (int t = 0; t < 5; ++t) {
    auto& store = *w.AddTenant(absl::StrCat("t", t));
    for (int i = 0; i < 20; ++i) {
      ASSERT_TRUE(store.Create(MakePod("default", absl::StrCat("p", i))).ok());
    }
  }
  w.Settle(seconds(20));
  ProvenanceCounts c = w.syncer().audit().counts();
  EXPECT_GT(c.writes, 200);
  EXPECT_EQ(c.cross_tenant, 0);
  EXPECT_EQ(c.unprefixed, 0);
}

TEST(ProvenanceAuditTest, CountsViolations) {
  ProvenanceAudit audit(2);
  ObjectKey key{Kind::kPod, "x", "p"};
  audit.Record(Duration::zero(), "a", "super", key, "a");
  audit.Record(Duration::zero(), "a", "tenant/b", key, "b");
  audit.Record(Duration::zero(), "a", "super", key, "");
  ProvenanceCounts c = audit.counts();
  EXPECT_EQ(c.writes, 3);
  EXPECT_EQ(c.cross_tenant, 1);
  EXPECT_EQ(c.unprefixed, 1);
  EXPECT_FALSE(audit.clean());
  EXPECT_EQ(audit.log().size(), 2u);
}

}  // namespace
}  // namespace vcsim
