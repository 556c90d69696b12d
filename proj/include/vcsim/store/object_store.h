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

#ifndef VCSIM_STORE_OBJECT_STORE_H_
#define VCSIM_STORE_OBJECT_STORE_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"

namespace vcsim {

enum class EventType { kAdded, kUpdated, kDeleted };
std::string_view EventTypeName(EventType type);

struct WatchEvent {
  EventType type = EventType::kAdded;
  VersionedObject object;
  int64_t store_version = 0;
  Duration commit_time{0};
};

struct RateLimitPolicy {
  double sustained_rate = 100;  // requests per second
  int burst = 200;

  absl::Status Validate() const;
};

// Token bucket driven by an external clock.
class TokenBucket {
 public:
  TokenBucket(RateLimitPolicy policy, Duration now);

  bool TryTake(Duration now);
  // Time until the next token is available.
  Duration RetryAfter(Duration now);

 private:
  void Refill(Duration now);

  RateLimitPolicy policy_;
  double tokens_;
  Duration last_;
};

namespace internal {
struct WatchState;
}  // namespace internal

// Consumer end of a watch. Events arrive in commit order; the store never
// blocks on a consumer. A consumer that lets more than the buffer limit pile
// up is cancelled and must relist.
class WatchStream {
 public:
  ~WatchStream();
  WatchStream(const WatchStream&) = delete;
  WatchStream& operator=(const WatchStream&) = delete;

  std::optional<WatchEvent> Next();
  bool cancelled() const;
  size_t buffered() const;
  void Stop();

 private:
  friend class ObjectStore;
  explicit WatchStream(std::shared_ptr<internal::WatchState> state);
  std::shared_ptr<internal::WatchState> state_;
};

struct StoreOptions {
  std::string name = "store";
  std::optional<RateLimitPolicy> rate_limit;  // nullopt: unlimited
  size_t history_per_kind = 10000;
  size_t watch_buffer = 1 << 20;
  uint64_t uid_seed = 1;
};

struct ListResult {
  std::vector<VersionedObject> objects;
  int64_t store_version = 0;
};

// Versioned, watchable in-memory object store: the apiserver stand-in.
// Every committed write gets the next store version; writes are serialized
// through one commit point.
class ObjectStore {
 public:
  // Runs under the commit lock for each create, before it is committed.
  using AdmissionHook = std::function<void(VersionedObject&)>;
  // Runs under the commit lock whenever a watch receives an event. Must not
  // call back into the store.
  using Notify = std::function<void()>;

  ObjectStore(const Clock& clock, StoreOptions options);
  ~ObjectStore();
  ObjectStore(const ObjectStore&) = delete;
  ObjectStore& operator=(const ObjectStore&) = delete;

  const std::string& name() const { return options_.name; }

  // uid, version and creation time of `obj` are assigned by the store.
  absl::StatusOr<int64_t> Create(VersionedObject obj);
  // Replaces spec, labels and annotations. For Pods the bound node name is
  // preserved.
  absl::StatusOr<int64_t> UpdateSpec(
      const ObjectKey& key, ObjectSpec spec, Labels labels, Labels annotations,
      std::optional<int64_t> expected_version = std::nullopt);
  absl::StatusOr<int64_t> UpdateStatus(
      const ObjectKey& key, ObjectStatus status,
      std::optional<int64_t> expected_version = std::nullopt);
  // Sets a Pod's node name. FailedPrecondition if already bound elsewhere.
  absl::StatusOr<int64_t> Bind(const ObjectKey& key,
                               const std::string& node_name);
  absl::Status Delete(const ObjectKey& key,
                      std::optional<int64_t> expected_version = std::nullopt);

  absl::StatusOr<VersionedObject> Get(const ObjectKey& key) const;
  // `ns` of nullopt lists all namespaces.
  ListResult List(Kind kind,
                  const std::optional<std::string>& ns = std::nullopt) const;

  // Replays retained events of `kind` after `from_version`, then streams
  // live ones. OutOfRange when the history needed has been compacted.
  absl::StatusOr<std::unique_ptr<WatchStream>> Watch(Kind kind,
                                                     int64_t from_version,
                                                     Notify notify);

  void SetAdmissionHook(AdmissionHook hook);

  int64_t version() const;
  size_t size() const;
  // Number of List calls served for `kind`.
  int64_t list_calls(Kind kind) const;
  int64_t rate_limited_requests() const;
  // Estimated wait until a limited request would be admitted.
  Duration RetryAfter();

  // Writes the retained history as "version event Kind/ns/name" lines.
  void DumpCommitLog(std::ostream& out) const;

 private:
  struct KindState {
    std::deque<WatchEvent> history;
    int64_t compacted_through = 0;
    std::vector<std::shared_ptr<internal::WatchState>> watchers;
    int64_t list_calls = 0;
  };

  absl::Status AdmitLocked();
  Uid NextUidLocked();
  int64_t CommitLocked(EventType type, const VersionedObject& snapshot);
  absl::StatusOr<std::map<ObjectKey, VersionedObject>::iterator>
  FindForWriteLocked(const ObjectKey& key,
                     std::optional<int64_t> expected_version);

  const Clock& clock_;
  const StoreOptions options_;
  mutable std::mutex mu_;
  int64_t version_ = 0;
  std::map<ObjectKey, VersionedObject> objects_;
  mutable std::map<Kind, KindState> kinds_;
  std::optional<TokenBucket> limiter_;
  int64_t rate_limited_ = 0;
  std::mt19937_64 uid_rng_;
  AdmissionHook admission_;
};

}  // namespace vcsim

#endif  // VCSIM_STORE_OBJECT_STORE_H_
