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

#ifndef VCSIM_CORE_TYPES_H_
#define VCSIM_CORE_TYPES_H_

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace vcsim {

// All timestamps are offsets from the start of a run, on whichever clock
// (virtual or wall) drives the run.
using Duration = std::chrono::nanoseconds;

inline constexpr Duration Millis(double ms) {
  return Duration(static_cast<int64_t>(ms * 1e6));
}
inline constexpr double ToSeconds(Duration d) { return d.count() / 1e9; }
inline constexpr double ToMillis(Duration d) { return d.count() / 1e6; }

enum class Kind {
  kNamespace,
  kPod,
  kService,
  kEndpoints,
  kSecret,
  kConfigMap,
  kNode,
  kEvent,
};

inline constexpr std::array<Kind, 8> kAllKinds = {
    Kind::kNamespace, Kind::kPod,       Kind::kService, Kind::kEndpoints,
    Kind::kSecret,    Kind::kConfigMap, Kind::kNode,    Kind::kEvent};

std::string_view KindName(Kind kind);
absl::StatusOr<Kind> ParseKind(std::string_view name);
bool IsClusterScoped(Kind kind);

struct ObjectKey {
  Kind kind = Kind::kPod;
  std::string ns;  // empty for cluster-scoped kinds
  std::string name;

  auto operator<=>(const ObjectKey&) const = default;
  bool operator==(const ObjectKey&) const = default;

  // "Kind/namespace/name"
  std::string ToString() const;

  template <typename H>
  friend H AbslHashValue(H h, const ObjectKey& k) {
    return H::combine(std::move(h), k.kind, k.ns, k.name);
  }
};

absl::Status ValidateKey(const ObjectKey& key);

// 128-bit opaque identifier. Text form is the dashed 8-4-4-4-12 lowercase
// hex layout used for Kubernetes object UIDs.
class Uid {
 public:
  constexpr Uid() = default;
  constexpr Uid(uint64_t hi, uint64_t lo) : hi_(hi), lo_(lo) {}

  static absl::StatusOr<Uid> Parse(std::string_view text);

  std::string ToString() const;
  uint64_t hi() const { return hi_; }
  uint64_t lo() const { return lo_; }
  bool IsZero() const { return hi_ == 0 && lo_ == 0; }

  auto operator<=>(const Uid&) const = default;

  template <typename H>
  friend H AbslHashValue(H h, const Uid& u) {
    return H::combine(std::move(h), u.hi_, u.lo_);
  }

 private:
  uint64_t hi_ = 0;
  uint64_t lo_ = 0;
};

using Labels = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Kind payloads.

struct NamespaceSpec {
  bool operator==(const NamespaceSpec&) const = default;
};

struct Container {
  std::string name;
  std::string image;
  bool operator==(const Container&) const = default;
};

// An anti-affinity term: the pod refuses to share a node with any pod in the
// same namespace whose labels contain all of `match_labels`.
struct LabelSelector {
  Labels match_labels;
  bool Matches(const Labels& labels) const;
  bool operator==(const LabelSelector&) const = default;
};

struct PodSpec {
  std::vector<Container> containers;
  std::string node_name;  // empty until bound; set at most once
  std::vector<LabelSelector> anti_affinity;
  int64_t service_epoch_at_admission = 0;
  bool operator==(const PodSpec&) const = default;
};

enum class PodPhase { kPending, kRunning };
std::string_view PodPhaseName(PodPhase phase);

struct PodStatus {
  PodPhase phase = PodPhase::kPending;
  bool ready = false;
  Duration ready_since{0};
  bool operator==(const PodStatus&) const = default;
};

struct ServiceSpec {
  std::string cluster_ip;
  int port = 0;
  bool operator==(const ServiceSpec&) const = default;
};

struct EndpointsSpec {
  std::vector<std::string> addresses;
  bool operator==(const EndpointsSpec&) const = default;
};

// Secret and ConfigMap share a string map payload.
struct DataSpec {
  std::map<std::string, std::string> data;
  bool operator==(const DataSpec&) const = default;
};

struct NodeSpec {
  int capacity_pods = 0;
  bool operator==(const NodeSpec&) const = default;
};

struct NodeStatus {
  Duration last_heartbeat{0};
  bool ready = false;
  bool operator==(const NodeStatus&) const = default;
};

struct EventSpec {
  std::string reason;
  std::string message;
  bool operator==(const EventSpec&) const = default;
};

using ObjectSpec = std::variant<std::monostate, NamespaceSpec, PodSpec,
                                ServiceSpec, EndpointsSpec, DataSpec, NodeSpec,
                                EventSpec>;
using ObjectStatus = std::variant<std::monostate, PodStatus, NodeStatus>;

struct VersionedObject {
  ObjectKey key;
  Uid uid;
  int64_t resource_version = 0;
  ObjectSpec spec;
  ObjectStatus status;
  Labels labels;
  Labels annotations;
  bool deletion_marked = false;
  Duration creation_timestamp{0};

  // "Kind/namespace/name@version"
  std::string ToString() const;

  const PodSpec* pod_spec() const { return std::get_if<PodSpec>(&spec); }
  PodSpec* mutable_pod_spec() { return std::get_if<PodSpec>(&spec); }
  const PodStatus* pod_status() const {
    return std::get_if<PodStatus>(&status);
  }
  const NodeStatus* node_status() const {
    return std::get_if<NodeStatus>(&status);
  }
};

// Checks that the payload alternatives agree with the key's kind.
absl::Status ValidateObject(const VersionedObject& obj);

// Default payloads for a kind, used when a caller supplies none.
ObjectSpec DefaultSpec(Kind kind);
ObjectStatus DefaultStatus(Kind kind);

}  // namespace vcsim

#endif  // VCSIM_CORE_TYPES_H_
