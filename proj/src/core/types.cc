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

#include "vcsim/core/types.h"

#include <cstdio>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace vcsim {

std::string_view KindName(Kind kind) {
  switch (kind) {
    case Kind::kNamespace:
      return "Namespace";
    case Kind::kPod:
      return "Pod";
    case Kind::kService:
      return "Service";
    case Kind::kEndpoints:
      return "Endpoints";
    case Kind::kSecret:
      return "Secret";
    case Kind::kConfigMap:
      return "ConfigMap";
    case Kind::kNode:
      return "Node";
    case Kind::kEvent:
      return "Event";
  }
  return "Unknown";
}

absl::StatusOr<Kind> ParseKind(std::string_view name) {
  for (Kind k : kAllKinds) {
    if (KindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown kind ", std::string(name)));
}

bool IsClusterScoped(Kind kind) {
  return kind == Kind::kNamespace || kind == Kind::kNode;
}

std::string ObjectKey::ToString() const {
  return absl::StrCat(std::string(KindName(kind)), "/", ns, "/",
                      std::string(name));
}

absl::Status ValidateKey(const ObjectKey& key) {
  if (key.name.empty()) {
    return absl::InvalidArgumentError("object name must not be empty");
  }
  if (IsClusterScoped(key.kind) != key.ns.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(key.ToString(), ": namespace must be empty iff ",
                     std::string(KindName(key.kind)), " is cluster-scoped"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Uid> Uid::Parse(std::string_view text) {
  if (text.size() != 36) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed uid ", std::string(text)));
  }
  uint64_t parts[2] = {0, 0};
  int nibble = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (c != '-') {
        return absl::InvalidArgumentError(
        absl::StrCat("malformed uid ", std::string(text)));
      }
      continue;
    }
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else {
      return absl::InvalidArgumentError(
        absl::StrCat("malformed uid ", std::string(text)));
    }
    uint64_t& word = parts[nibble / 16];
    word = (word << 4) | static_cast<uint64_t>(v);
    ++nibble;
  }
  return Uid(parts[0], parts[1]);
}

std::string Uid::ToString() const {
  return absl::StrFormat("%08x-%04x-%04x-%04x-%012x", hi_ >> 32,
                         (hi_ >> 16) & 0xffff, hi_ & 0xffff, lo_ >> 48,
                         lo_ & 0xffffffffffffULL);
}

bool LabelSelector::Matches(const Labels& labels) const {
  if (match_labels.empty()) return false;
  for (const auto& [k, v] : match_labels) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return true;
}

std::string_view PodPhaseName(PodPhase phase) {
  return phase == PodPhase::kRunning ? "Running" : "Pending";
}

std::string VersionedObject::ToString() const {
  return absl::StrCat(key.ToString(), "@", resource_version);
}

ObjectSpec DefaultSpec(Kind kind) {
  switch (kind) {
    case Kind::kNamespace:
      return NamespaceSpec{};
    case Kind::kPod:
      return PodSpec{};
    case Kind::kService:
      return ServiceSpec{};
    case Kind::kEndpoints:
      return EndpointsSpec{};
    case Kind::kSecret:
    case Kind::kConfigMap:
      return DataSpec{};
    case Kind::kNode:
      return NodeSpec{};
    case Kind::kEvent:
      return EventSpec{};
  }
  return std::monostate{};
}

ObjectStatus DefaultStatus(Kind kind) {
  switch (kind) {
    case Kind::kPod:
      return PodStatus{};
    case Kind::kNode:
      return NodeStatus{};
    default:
      return std::monostate{};
  }
}

absl::Status ValidateObject(const VersionedObject& obj) {
  if (auto s = ValidateKey(obj.key); !s.ok()) return s;
  ObjectSpec want_spec = DefaultSpec(obj.key.kind);
  if (obj.spec.index() != want_spec.index()) {
    return absl::InvalidArgumentError(
        absl::StrCat(obj.key.ToString(), ": spec payload does not match kind"));
  }
  ObjectStatus want_status = DefaultStatus(obj.key.kind);
  if (obj.status.index() != want_status.index()) {
    return absl::InvalidArgumentError(absl::StrCat(
        obj.key.ToString(), ": status payload does not match kind"));
  }
  return absl::OkStatus();
}

}  // namespace vcsim
