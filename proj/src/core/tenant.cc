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

#include "vcsim/core/tenant.h"

#include <openssl/evp.h>

#include <algorithm>
#include <mutex>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace vcsim {

Fingerprint FingerprintOf(std::string_view credential) {
  Fingerprint out{};
  unsigned int len = 0;
  EVP_Digest(credential.data(), credential.size(), out.data(), &len,
             EVP_sha256(), nullptr);
  return out;
}

std::string FingerprintHex(const Fingerprint& fp) {
  std::string out;
  out.reserve(64);
  for (uint8_t b : fp) absl::StrAppendFormat(&out, "%02x", b);
  return out;
}

uint32_t Fnv1a32(std::string_view data) {
  uint32_t h = 0x811c9dc5u;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x01000193u;
  }
  return h;
}

std::string ShortUidHash(const Uid& uid) {
  return absl::StrFormat("%08x", Fnv1a32(uid.ToString())).substr(0, 6);
}

bool IsDnsLabel(std::string_view name) {
  if (name.empty() || name.size() > 63) return false;
  auto alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  };
  if (!alnum(name.front()) || !alnum(name.back())) return false;
  return std::all_of(name.begin(), name.end(),
                     [&](char c) { return alnum(c) || c == '-'; });
}

absl::StatusOr<TenantRecord> MakeTenantRecord(
    std::string tenant_id, Uid vc_uid, std::string_view credential, int weight,
    std::shared_ptr<ObjectStore> store) {
  if (!IsDnsLabel(tenant_id)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid tenant id '", std::string(tenant_id), "'"));
  }
  if (weight < 1) {
    return absl::InvalidArgumentError("tenant weight must be >= 1");
  }
  TenantRecord r;
  r.prefix =
      absl::StrCat(std::string(tenant_id), "-", ShortUidHash(vc_uid), "-");
  r.tenant_id = std::move(tenant_id);
  r.vc_uid = vc_uid;
  r.weight = weight;
  r.credential_fingerprint = FingerprintOf(credential);
  r.store = std::move(store);
  return r;
}

absl::StatusOr<std::string> MangleNamespace(const TenantRecord& tenant,
                                            std::string_view tenant_ns) {
  if (!IsDnsLabel(tenant_ns)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid namespace name '", std::string(tenant_ns), "'"));
  }
  return absl::StrCat(tenant.prefix, std::string(tenant_ns));
}

absl::Status TenantRegistry::Register(const TenantRecord& record) {
  std::unique_lock lock(mu_);
  if (record.prefix.empty()) {
    return absl::InvalidArgumentError("tenant record has no prefix");
  }
  if (by_id_.count(record.tenant_id)) {
    return absl::AlreadyExistsError(
        absl::StrCat("tenant ", record.tenant_id, " already registered"));
  }
  for (const auto& [prefix, id] : id_by_prefix_) {
    if (absl::StartsWith(prefix, record.prefix) ||
        absl::StartsWith(record.prefix, prefix)) {
      return absl::AlreadyExistsError(absl::StrCat(
          "prefix ", record.prefix, " collides with tenant ", id));
    }
  }
  if (id_by_fingerprint_.count(record.credential_fingerprint)) {
    return absl::AlreadyExistsError("credential fingerprint already in use");
  }
  order_.push_back(record.tenant_id);
  id_by_prefix_[record.prefix] = record.tenant_id;
  id_by_fingerprint_[record.credential_fingerprint] = record.tenant_id;
  by_id_[record.tenant_id] = record;
  return absl::OkStatus();
}

absl::Status TenantRegistry::Unregister(std::string_view tenant_id) {
  std::unique_lock lock(mu_);
  auto it = by_id_.find(tenant_id);
  if (it == by_id_.end()) {
    return absl::NotFoundError(
        absl::StrCat("unknown tenant ", std::string(tenant_id)));
  }
  id_by_prefix_.erase(it->second.prefix);
  id_by_fingerprint_.erase(it->second.credential_fingerprint);
  order_.erase(std::find(order_.begin(), order_.end(), it->first));
  by_id_.erase(it);
  return absl::OkStatus();
}

absl::StatusOr<TenantRecord> TenantRegistry::Get(
    std::string_view tenant_id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(tenant_id);
  if (it == by_id_.end()) {
    return absl::NotFoundError(
        absl::StrCat("unknown tenant ", std::string(tenant_id)));
  }
  return it->second;
}

std::vector<TenantRecord> TenantRegistry::List() const {
  std::shared_lock lock(mu_);
  std::vector<TenantRecord> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(by_id_.find(id)->second);
  return out;
}

size_t TenantRegistry::size() const {
  std::shared_lock lock(mu_);
  return by_id_.size();
}

absl::StatusOr<std::string> TenantRegistry::Mangle(
    std::string_view tenant_id, std::string_view tenant_ns) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(tenant_id);
  if (it == by_id_.end()) {
    return absl::NotFoundError(
        absl::StrCat("unknown tenant ", std::string(tenant_id)));
  }
  return MangleNamespace(it->second, tenant_ns);
}

absl::StatusOr<std::pair<std::string, std::string>> TenantRegistry::Demangle(
    std::string_view super_ns) const {
  std::shared_lock lock(mu_);
  // A prefix ends with "-xxxxxx-"; try every such boundary. The registry is
  // prefix-free, so at most one candidate can match.
  for (size_t i = 0; i + 8 <= super_ns.size(); ++i) {
    if (super_ns[i] != '-' || super_ns[i + 7] != '-') continue;
    bool hex = true;
    for (size_t j = i + 1; j < i + 7; ++j) {
      char c = super_ns[j];
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
        hex = false;
        break;
      }
    }
    if (!hex) continue;
    auto it = id_by_prefix_.find(std::string(super_ns.substr(0, i + 8)));
    if (it == id_by_prefix_.end()) continue;
    std::string_view rest = super_ns.substr(i + 8);
    if (rest.empty()) break;
    return std::make_pair(it->second, std::string(rest));
  }
  return absl::NotFoundError(
      absl::StrCat("no registered tenant prefix matches ",
                   std::string(super_ns)));
}

absl::StatusOr<TenantRecord> TenantRegistry::ResolveByCredential(
    const Fingerprint& fp) const {
  std::shared_lock lock(mu_);
  auto it = id_by_fingerprint_.find(fp);
  if (it == id_by_fingerprint_.end()) {
    return absl::UnauthenticatedError("credential does not match any tenant");
  }
  return by_id_.find(it->second)->second;
}

}  // namespace vcsim
