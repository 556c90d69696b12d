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

#ifndef VCSIM_CORE_TENANT_H_
#define VCSIM_CORE_TENANT_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vcsim/core/types.h"

namespace vcsim {

class ObjectStore;

// SHA-256 digest of a tenant's access credential.
using Fingerprint = std::array<uint8_t, 32>;

Fingerprint FingerprintOf(std::string_view credential);
std::string FingerprintHex(const Fingerprint& fp);

// 32-bit FNV-1a.
uint32_t Fnv1a32(std::string_view data);

// First six hex digits of Fnv1a32(uid.ToString()).
std::string ShortUidHash(const Uid& uid);

// Lowercase alphanumerics and '-', starting and ending alphanumeric, at most
// 63 characters.
bool IsDnsLabel(std::string_view name);

struct TenantRecord {
  std::string tenant_id;
  Uid vc_uid;
  int weight = 1;
  std::string prefix;  // "<tenant_id>-<h6>-"; filled by MakeTenantRecord
  Fingerprint credential_fingerprint{};
  std::shared_ptr<ObjectStore> store;
};

// Derives the prefix and fingerprint for a tenant.
absl::StatusOr<TenantRecord> MakeTenantRecord(
    std::string tenant_id, Uid vc_uid, std::string_view credential, int weight,
    std::shared_ptr<ObjectStore> store);

// `<tenant_id>-<h6>-<tenant_ns>`.
absl::StatusOr<std::string> MangleNamespace(const TenantRecord& tenant,
                                            std::string_view tenant_ns);

// Registered tenants. Readers may run concurrently; registration is
// serialized. Prefixes are kept prefix-free so that demangling is
// unambiguous.
class TenantRegistry {
 public:
  TenantRegistry() = default;
  TenantRegistry(const TenantRegistry&) = delete;
  TenantRegistry& operator=(const TenantRegistry&) = delete;

  // Fails with AlreadyExists on a duplicate id, a colliding prefix or a
  // reused fingerprint.
  absl::Status Register(const TenantRecord& record);
  absl::Status Unregister(std::string_view tenant_id);

  absl::StatusOr<TenantRecord> Get(std::string_view tenant_id) const;
  std::vector<TenantRecord> List() const;  // ordered by registration
  size_t size() const;

  absl::StatusOr<std::string> Mangle(std::string_view tenant_id,
                                     std::string_view tenant_ns) const;

  // Exact inverse of MangleNamespace. NotFound for a namespace that carries
  // no registered prefix.
  absl::StatusOr<std::pair<std::string, std::string>> Demangle(
      std::string_view super_ns) const;

  // Unauthenticated when no tenant holds the fingerprint.
  absl::StatusOr<TenantRecord> ResolveByCredential(const Fingerprint& fp) const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<std::string> order_;
  std::map<std::string, TenantRecord, std::less<>> by_id_;
  absl::flat_hash_map<std::string, std::string> id_by_prefix_;
  std::map<Fingerprint, std::string> id_by_fingerprint_;
};

}  // namespace vcsim

#endif  // VCSIM_CORE_TENANT_H_
