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

#ifndef VCSIM_INFORMER_INFORMER_H_
#define VCSIM_INFORMER_INFORMER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vcsim/core/types.h"
#include "vcsim/runtime/runtime.h"
#include "vcsim/store/object_store.h"

namespace vcsim {

// Delay between a commit and the handler seeing it.
struct LagPolicy {
  enum class Distribution { kFixed, kUniform };
  Distribution distribution = Distribution::kUniform;
  Duration min = Millis(1);
  Duration max = Millis(5);

  static LagPolicy Fixed(Duration d) {
    return {Distribution::kFixed, d, d};
  }
  static LagPolicy Uniform(Duration lo, Duration hi) {
    return {Distribution::kUniform, lo, hi};
  }
  static LagPolicy None() { return Fixed(Duration::zero()); }
};

// Fault injection on the notification path. The cache itself is always
// updated; only the handler call is dropped.
struct InformerFaults {
  double drop_handler_probability = 0;
  Duration extra_delay_max{0};  // uniform extra lag added on top of LagPolicy
};

// Reflector plus read-only cache for a set of kinds of one store. Handlers
// receive keys only and run sequentially on the runtime; per key they follow
// commit order.
class Informer {
 public:
  using Handler = std::function<void(const ObjectKey&, EventType)>;

  Informer(Runtime& runtime, ObjectStore& store, std::vector<Kind> kinds,
           Handler handler, LagPolicy lag, uint64_t seed);
  ~Informer();
  Informer(const Informer&) = delete;
  Informer& operator=(const Informer&) = delete;

  // Lists every kind, populates the cache (one Added handler call per
  // object) and starts watching.
  void Start();
  void Stop();
  bool running() const;

  absl::StatusOr<VersionedObject> Get(const ObjectKey& key) const;
  std::vector<VersionedObject> List(
      Kind kind, const std::optional<std::string>& ns = std::nullopt) const;
  int64_t last_seen_version(Kind kind) const;
  int64_t relists() const;
  int64_t dropped_notifications() const;

  void SetFaults(InformerFaults faults);
  // Drops the watch and resumes from the last seen version, relisting if
  // that version has been compacted.
  void DropWatch(Kind kind);
  // Discards the watch and rebuilds the cache from a fresh list.
  void Relist(Kind kind);

  ObjectStore& store() { return store_; }

 private:
  struct Reflector {
    Kind kind;
    uint64_t generation = 0;
    std::unique_ptr<WatchStream> stream;
    int64_t last_seen = 0;
  };

  void ListAndWatchLocked(Reflector& r);
  bool WatchFromLocked(Reflector& r, int64_t from_version);
  void OnNotify(Kind kind, uint64_t generation);
  void Deliver(Kind kind, uint64_t generation);
  Duration SampleDelayLocked();
  void Notify(const ObjectKey& key, EventType type);

  Runtime& runtime_;
  ObjectStore& store_;
  const std::vector<Kind> kinds_;
  const Handler handler_;
  const LagPolicy lag_;

  // Lock order: mu_ -> store -> notify_mu_ -> runtime. The store calls
  // OnNotify under its commit lock, so OnNotify touches only notify_mu_.
  mutable std::mutex mu_;
  std::map<Kind, Reflector> reflectors_;
  bool running_ = false;
  int64_t relists_ = 0;

  mutable std::mutex notify_mu_;
  std::mt19937_64 rng_;
  InformerFaults faults_;
  std::map<Kind, Duration> next_due_;
  int64_t dropped_ = 0;

  mutable std::shared_mutex cache_mu_;
  std::map<ObjectKey, VersionedObject> cache_;

  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace vcsim

#endif  // VCSIM_INFORMER_INFORMER_H_
