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

#ifndef VCSIM_SYNCER_PROVENANCE_H_
#define VCSIM_SYNCER_PROVENANCE_H_

#include <cstdint>
#include <deque>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "vcsim/core/types.h"

namespace vcsim {

struct ProvenanceCounts {
  int64_t writes = 0;
  int64_t cross_tenant = 0;   // into a store or namespace of another tenant
  int64_t unprefixed = 0;     // into a super namespace with no tenant prefix
};

// Every syncer write is tagged with the tenant it derives from and checked
// against where it lands. Also keeps a line-delimited audit log.
class ProvenanceAudit {
 public:
  explicit ProvenanceAudit(size_t log_capacity = 100000);

  // `owner` is the tenant the destination belongs to, empty if none.
  void Record(Duration at, const std::string& source_tenant,
              const std::string& store, const ObjectKey& key,
              const std::string& owner);
  void Log(std::string line);

  ProvenanceCounts counts() const;
  bool clean() const;
  std::vector<std::string> log() const;
  void WriteLog(std::ostream& out) const;

 private:
  const size_t capacity_;
  mutable std::mutex mu_;
  ProvenanceCounts counts_;
  std::deque<std::string> log_;
};

}  // namespace vcsim

#endif  // VCSIM_SYNCER_PROVENANCE_H_
