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

#include "vcsim/syncer/provenance.h"

#include <utility>

#include "absl/strings/str_cat.h"

namespace vcsim {

ProvenanceAudit::ProvenanceAudit(size_t log_capacity)
    : capacity_(log_capacity) {}

void ProvenanceAudit::Record(Duration at, const std::string& source_tenant,
                             const std::string& store, const ObjectKey& key,
                             const std::string& owner) {
  std::string verdict = "ok";
  {
    std::lock_guard lock(mu_);
    ++counts_.writes;
    if (owner.empty()) {
      ++counts_.unprefixed;
      verdict = "unprefixed";
    } else if (owner != source_tenant) {
      ++counts_.cross_tenant;
      verdict = "cross-tenant";
    }
  }
  Log(absl::StrCat("t=", at.count(), " write source=", source_tenant,
                   " store=", store, " key=", key.ToString(),
                   " verdict=", verdict));
}

void ProvenanceAudit::Log(std::string line) {
  std::lock_guard lock(mu_);
  if (capacity_ == 0) return;
  if (log_.size() == capacity_) log_.pop_front();
  log_.push_back(std::move(line));
}

ProvenanceCounts ProvenanceAudit::counts() const {
  std::lock_guard lock(mu_);
  return counts_;
}

bool ProvenanceAudit::clean() const {
  std::lock_guard lock(mu_);
  return counts_.cross_tenant == 0 && counts_.unprefixed == 0;
}

std::vector<std::string> ProvenanceAudit::log() const {
  std::lock_guard lock(mu_);
  return {log_.begin(), log_.end()};
}

void ProvenanceAudit::WriteLog(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& line : log_) out << line << '\n';
}

}  // namespace vcsim
