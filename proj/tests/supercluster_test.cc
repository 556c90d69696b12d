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
#include <memory>
#include <string>
#include <vector>

#include "absl/strings/str_format.h"
#include "gtest/gtest.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"
#include "vcsim/supercluster/super_cluster.h"

namespace vcsim {
namespace {

using std::chrono::seconds;

VersionedObject MakePod(const std::string& ns, const std::string& name,
                        Labels labels = {},
                        std::vector<LabelSelector> anti = {}) {
  VersionedObject obj;
  obj.key = {Kind::kPod, ns, name};
  obj.labels = std::move(labels);
  PodSpec spec;
  spec.containers = {{"app", "registry.local/app:1"}};
  spec.anti_affinity = std::move(anti);
  obj.spec = spec;
  obj.status = PodStatus{};
  return obj;
}

std::string Ip(int i) {
  return absl::StrFormat("10.0.%d.%d", i / 250, i % 250 + 1);
}

class SuperClusterTest : public ::testing::Test {
 protected:
  void Boot(SuperSimConfig config) {
    cluster_ = std::make_unique<SuperCluster>(
        rt_, store_, [](const std::string& ns) { return ns; }, config);
    ASSERT_TRUE(cluster_->Start().ok());
  }

  void AddService(const std::string& ns, int i,
                  std::vector<std::string> endpoints) {
    std::string name = absl::StrFormat("svc-%03d", i);
    VersionedObject svc;
    svc.key = {Kind::kService, ns, name};
    svc.spec = ServiceSpec{Ip(i), 80};
    ASSERT_TRUE(store_.Create(svc).ok());
    VersionedObject ep;
    ep.key = {Kind::kEndpoints, ns, name};
    ep.spec = EndpointsSpec{std::move(endpoints)};
    ASSERT_TRUE(store_.Create(ep).ok());
  }

  std::string NodeOf(const ObjectKey& key) {
    auto obj = store_.Get(key);
    EXPECT_TRUE(obj.ok());
    return obj.ok() ? obj->pod_spec()->node_name : "";
  }

  bool Ready(const ObjectKey& key) {
    auto obj = store_.Get(key);
    return obj.ok() && obj->pod_status()->ready;
  }

  SimRuntime rt_;
  ObjectStore store_{rt_, StoreOptions{}};
  std::unique_ptr<SuperCluster> cluster_;
};

TEST_F(SuperClusterTest, OnePodBoundAfterOneServiceTime) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  ASSERT_EQ(cluster_->scheduler().bind_times().size(), 1u);
  EXPECT_EQ(cluster_->scheduler().bind_times()[0], Duration(2'500'000));
  EXPECT_EQ(NodeOf({Kind::kPod, "ns", "p"}), "node-000");
}

TEST_F(SuperClusterTest, ThousandPodsAreCappedAtServiceRate) {
  SuperSimConfig config;
  config.nodes = 10;
  Boot(config);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_TRUE(store_.Create(MakePod("ns", "p" + std::to_string(i))).ok());
  }
  rt_.RunFor(seconds(10));
  const auto& binds = cluster_->scheduler().bind_times();
  ASSERT_EQ(binds.size(), 1000u);
  double makespan = ToSeconds(binds.back());
  EXPECT_GE(makespan, 2.5);
  EXPECT_LE(1000 / makespan, 400.0);
  EXPECT_NEAR(cluster_->scheduler().SaturatedThroughput(), 400.0, 20.0);
  // Any saturated window of W binds spans W service times.
  for (size_t w : {10u, 100u, 999u}) {
    for (size_t b = 0; b + w < binds.size(); b += 97) {
      double rate = w / ToSeconds(binds[b + w] - binds[b]);
      EXPECT_NEAR(rate, 400.0, 20.0);
    }
  }
  // Least loaded first: 1000 pods over 10 nodes is 100 each.
  for (const auto& n : cluster_->scheduler().nodes()) {
    EXPECT_EQ(n.pods.size(), 100u);
  }
}

// Every placement of a first anti-affine pod and unrelated filler pods on
// two nodes: the partner never shares the first pod's node.
TEST(PickNodeTest, MutualAntiAffinityExhaustive) {
  LabelSelector sel{{{"app", "db"}}};
  for (int first_node = 0; first_node < 2; ++first_node) {
    for (int fill0 = 0; fill0 <= 4; ++fill0) {
      for (int fill1 = 0; fill1 <= 4; ++fill1) {
        std::vector<NodeSlot> nodes = {{"n0", 5, {}}, {"n1", 5, {}}};
        int n = 0;
        for (int i = 0; i < fill0; ++i) {
          ObjectKey key{Kind::kPod, "ns", "f" + std::to_string(n++)};
          nodes[0].pods.push_back({key, {{"app", "web"}}, {}});
        }
        for (int i = 0; i < fill1; ++i) {
          ObjectKey key{Kind::kPod, "ns", "f" + std::to_string(n++)};
          nodes[1].pods.push_back({key, {{"app", "web"}}, {}});
        }
        auto& home = nodes[first_node].pods;
        bool full = home.size() >= 5;
        if (!full) {
          home.push_back({{Kind::kPod, "ns", "a"}, {{"app", "db"}}, {sel}});
        }
        PlacedPod b{{Kind::kPod, "ns", "b"}, {{"app", "db"}}, {sel}};
        auto pick = PickNode(nodes, b);
        if (full) continue;
        int other = 1 - first_node;
        bool other_free = nodes[other].pods.size() < 5;
        if (other_free) {
          ASSERT_TRUE(pick.has_value());
          EXPECT_EQ(*pick, static_cast<size_t>(other));
        } else {
          EXPECT_FALSE(pick.has_value());
        }
      }
    }
  }
}

TEST(PickNodeTest, LeastLoadedLowestIndexAndNamespaceScope) {
  std::vector<NodeSlot> nodes = {{"n0", 3, {}}, {"n1", 3, {}}, {"n2", 3, {}}};
  PlacedPod plain{{Kind::kPod, "ns", "x"}, {}, {}};
  EXPECT_EQ(*PickNode(nodes, plain), 0u);
  nodes[0].pods.push_back(plain);
  EXPECT_EQ(*PickNode(nodes, plain), 1u);
  // Anti-affinity only binds within a namespace.
  LabelSelector sel{{{"app", "db"}}};
  std::vector<NodeSlot> one = {{"n0", 3, {{{Kind::kPod, "a", "p"},
                                            {{"app", "db"}}, {sel}}}}};
  EXPECT_TRUE(PickNode(one, {{Kind::kPod, "b", "q"}, {{"app", "db"}}, {sel}}));
  EXPECT_FALSE(PickNode(one, {{Kind::kPod, "a", "q"}, {{"app", "db"}}, {}}));
}

TEST_F(SuperClusterTest, AntiAffinePairLandsOnDistinctNodes) {
  SuperSimConfig config;
  config.nodes = 2;
  Boot(config);
  LabelSelector sel{{{"app", "db"}}};
  ASSERT_TRUE(store_.Create(MakePod("ns", "a", {{"app", "db"}}, {sel})).ok());
  ASSERT_TRUE(store_.Create(MakePod("ns", "b", {{"app", "db"}}, {sel})).ok());
  rt_.RunFor(seconds(1));
  std::string na = NodeOf({Kind::kPod, "ns", "a"});
  std::string nb = NodeOf({Kind::kPod, "ns", "b"});
  EXPECT_FALSE(na.empty());
  EXPECT_FALSE(nb.empty());
  EXPECT_NE(na, nb);
}

TEST_F(SuperClusterTest, NoFeasibleNodeRetriesWithBackoff) {
  SuperSimConfig config;
  config.nodes = 1;
  config.node_capacity = 1;
  Boot(config);
  ASSERT_TRUE(store_.Create(MakePod("ns", "a")).ok());
  ASSERT_TRUE(store_.Create(MakePod("ns", "b")).ok());
  rt_.RunFor(seconds(3));
  EXPECT_EQ(NodeOf({Kind::kPod, "ns", "b"}), "");
  EXPECT_GE(cluster_->scheduler().unschedulable_attempts(), 2);
  ASSERT_TRUE(store_.Delete({Kind::kPod, "ns", "a"}).ok());
  rt_.RunFor(seconds(3));
  EXPECT_EQ(NodeOf({Kind::kPod, "ns", "b"}), "node-000");
}

TEST_F(SuperClusterTest, BoundPodWithoutServicesIsReadyImmediately) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  ASSERT_TRUE(Ready(key));
  EXPECT_EQ(cluster_->kubelet().ready_times().at(key),
            cluster_->scheduler().bind_times()[0]);
  // An empty rule set still counts as one applied epoch, at no cost.
  auto table = cluster_->proxy().Table(key);
  ASSERT_TRUE(table);
  EXPECT_EQ(table->rule_epoch, 1);
  EXPECT_TRUE(table->rules.empty());
  EXPECT_EQ(*cluster_->proxy().FirstInjectionTime(key), Duration::zero());
}

TEST_F(SuperClusterTest, ReadyDelayIsApplied) {
  SuperSimConfig config;
  config.nodes = 1;
  config.kubelet_ready_delay = Millis(5);
  Boot(config);
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  EXPECT_EQ(cluster_->kubelet().ready_times().at(key),
            cluster_->scheduler().bind_times()[0] + Millis(5));
}

TEST_F(SuperClusterTest, PodWaitsForRuleInjection) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  AddService("ns", 0, {"172.16.0.1"});
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  EXPECT_EQ(store_.Get(key)->pod_spec()->service_epoch_at_admission, 2);
  rt_.RunFor(Millis(5));
  EXPECT_FALSE(Ready(key));
  EXPECT_EQ(cluster_->kubelet().waiting(), 1u);
  rt_.RunFor(seconds(1));
  ASSERT_TRUE(Ready(key));
  // One rule at 10ms, starting at the bind.
  Duration bind = cluster_->scheduler().bind_times()[0];
  EXPECT_EQ(*cluster_->proxy().FirstInjectionDone(key), bind + Millis(10));
  EXPECT_EQ(cluster_->kubelet().ready_times().at(key), bind + Millis(10));
}

TEST_F(SuperClusterTest, HundredServicesTakeOneSecond) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  for (int i = 0; i < 100; ++i) AddService("ns", i, {"172.16.0.1"});
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(Millis(500));
  // Sandbox exists but its rules are not in yet.
  EXPECT_EQ(cluster_->proxy().RouteLookup(key, Ip(0), 80).status().code(),
            absl::StatusCode::kNotFound);
  rt_.RunFor(seconds(2));
  EXPECT_EQ(*cluster_->proxy().FirstInjectionTime(key), seconds(1));
  for (int i = 0; i < 100; ++i) {
    auto ep = cluster_->proxy().RouteLookup(key, Ip(i), 80);
    ASSERT_TRUE(ep.ok());
    EXPECT_EQ(*ep, "172.16.0.1");
  }
  EXPECT_EQ(cluster_->proxy().RouteLookup(key, Ip(0), 81).status().code(),
            absl::StatusCode::kNotFound);
}

TEST_F(SuperClusterTest, EndpointChangeReachesLookups) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  AddService("ns", 0, {"172.16.0.1"});
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  EXPECT_EQ(*cluster_->proxy().RouteLookup(key, Ip(0), 80), "172.16.0.1");
  int64_t epoch = cluster_->proxy().Table(key)->rule_epoch;
  ASSERT_TRUE(store_
                  .UpdateSpec({Kind::kEndpoints, "ns", "svc-000"},
                              EndpointsSpec{{"172.16.9.9"}}, {}, {})
                  .ok());
  rt_.RunFor(seconds(1));
  EXPECT_EQ(cluster_->proxy().Table(key)->rule_epoch, epoch + 1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(*cluster_->proxy().RouteLookup(key, Ip(0), 80), "172.16.9.9");
  }
}

TEST_F(SuperClusterTest, InitGateComparesGenerations) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  VersionedObject pod = *store_.Get(key);
  // No services ever: open.
  EXPECT_TRUE(cluster_->proxy().InitGate(pod));
  ASSERT_TRUE(cluster_->proxy().SyncServiceRules(key, {}, 4).ok());
  pod.mutable_pod_spec()->service_epoch_at_admission = 5;
  EXPECT_FALSE(cluster_->proxy().InitGate(pod));
  pod.mutable_pod_spec()->service_epoch_at_admission = 4;
  EXPECT_TRUE(cluster_->proxy().InitGate(pod));
  EXPECT_EQ(cluster_->proxy()
                .SyncServiceRules({Kind::kPod, "ns", "gone"}, {}, 1)
                .status()
                .code(),
            absl::StatusCode::kNotFound);
}

TEST_F(SuperClusterTest, ThirtyPodsHundredServicesTimeline) {
  SuperSimConfig config;
  config.nodes = 4;
  Boot(config);
  for (int i = 0; i < 100; ++i) AddService("ns", i, {"172.16.0.1"});
  for (int i = 0; i < 30; ++i) {
    ASSERT_TRUE(store_.Create(MakePod("ns", "p" + std::to_string(i))).ok());
  }
  rt_.RunFor(seconds(25));
  auto& proxy = cluster_->proxy();
  auto& kubelet = cluster_->kubelet();
  ASSERT_EQ(kubelet.ready_times().size(), 30u);
  std::vector<ServiceRule> want = proxy.DesiredRules("ns");
  ASSERT_EQ(want.size(), 100u);
  for (const auto& [key, ready_at] : kubelet.ready_times()) {
    ASSERT_TRUE(proxy.FirstInjectionDone(key));
    EXPECT_GE(ready_at, *proxy.FirstInjectionDone(key));
    EXPECT_EQ(*proxy.FirstInjectionTime(key), seconds(1));
    EXPECT_EQ(proxy.Table(key)->rules, want);
  }
  EXPECT_EQ(kubelet.gate_violations(), 0);
  // Two scan passes have completed; each costs 10ms per sandbox.
  EXPECT_GE(proxy.scans(), 2);
  EXPECT_EQ(proxy.last_scan_cost(), Millis(300));
}

TEST_F(SuperClusterTest, RouteLookupIsUniform) {
  SuperSimConfig config;
  config.nodes = 1;
  Boot(config);
  AddService("ns", 0, {"172.16.0.1", "172.16.0.2", "172.16.0.3"});
  ObjectKey key{Kind::kPod, "ns", "p"};
  ASSERT_TRUE(store_.Create(MakePod("ns", "p")).ok());
  rt_.RunFor(seconds(1));
  std::map<std::string, int> counts;
  for (int i = 0; i < 3000; ++i) {
    auto ep = cluster_->proxy().RouteLookup(key, Ip(0), 80);
    ASSERT_TRUE(ep.ok());
    ++counts[*ep];
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [ep, n] : counts) {
    EXPECT_GE(n, 900) << ep;
    EXPECT_LE(n, 1100) << ep;
  }
}

TEST_F(SuperClusterTest, TenThousandPodsCensus) {
  SuperSimConfig config;
  config.nodes = 100;
  Boot(config);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_TRUE(store_.Create(MakePod("ns", "p" + std::to_string(i))).ok());
  }
  rt_.RunFor(seconds(40));
  EXPECT_EQ(cluster_->scheduler().bindings(), 10000);
  EXPECT_EQ(cluster_->kubelet().ready_count(), 10000);
  int ready = 0;
  for (const auto& obj : store_.List(Kind::kPod).objects) {
    if (obj.pod_status()->ready && !obj.pod_spec()->node_name.empty()) {
      ++ready;
    }
  }
  EXPECT_EQ(ready, 10000);
}

TEST_F(SuperClusterTest, HeartbeatsRefreshNodes) {
  SuperSimConfig config;
  config.nodes = 3;
  Boot(config);
  auto& agent = cluster_->nodes();
  agent.StopHeartbeat(agent.node_names()[1]);
  rt_.RunFor(seconds(35));
  EXPECT_EQ(agent.heartbeats(), 6);
  auto beat = [&](int i) {
    return store_.Get({Kind::kNode, "", agent.node_names()[i]})
        ->node_status()
        ->last_heartbeat;
  };
  EXPECT_EQ(beat(0), seconds(30));
  EXPECT_EQ(beat(1), Duration::zero());
  EXPECT_EQ(beat(2), seconds(30));
}

TEST(NodeNameTest, SortsInIndexOrder) {
  EXPECT_EQ(NodeAgent::NodeName(7, 100), "node-007");
  EXPECT_EQ(NodeAgent::NodeName(7, 5000), "node-0007");
  EXPECT_LT(NodeAgent::NodeName(99, 1000), NodeAgent::NodeName(100, 1000));
}

}  // namespace
}  // namespace vcsim
