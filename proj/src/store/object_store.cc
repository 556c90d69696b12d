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

#include "vcsim/store/object_store.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace vcsim {

std::string_view EventTypeName(EventType type) {
  switch (type) {
    case EventType::kAdded:
      return "ADDED";
    case EventType::kUpdated:
      return "MODIFIED";
    case EventType::kDeleted:
      return "DELETED";
  }
  return "UNKNOWN";
}

absl::Status RateLimitPolicy::Validate() const {
  if (!(sustained_rate > 0)) {
    return absl::InvalidArgumentError("sustained_rate must be > 0");
  }
  if (burst < 1) return absl::InvalidArgumentError("burst must be >= 1");
  return absl::OkStatus();
}

TokenBucket::TokenBucket(RateLimitPolicy policy, Duration now)
    : policy_(policy), tokens_(policy.burst), last_(now) {}

void TokenBucket::Refill(Duration now) {
  if (now <= last_) return;
  tokens_ = std::min<double>(policy_.burst,
                             tokens_ + ToSeconds(now - last_) *
                                           policy_.sustained_rate);
  last_ = now;
}

bool TokenBucket::TryTake(Duration now) {
  Refill(now);
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

Duration TokenBucket::RetryAfter(Duration now) {
  Refill(now);
  if (tokens_ >= 1.0) return Duration::zero();
  double secs = (1.0 - tokens_) / policy_.sustained_rate;
  return Duration(static_cast<int64_t>(std::ceil(secs * 1e9)));
}

namespace internal {

struct WatchState {
  std::mutex mu;
  std::deque<WatchEvent> buffer;
  size_t capacity = 0;
  bool cancelled = false;
  bool stopped = false;
  ObjectStore::Notify notify;

  // Returns false once the watch is finished and should be dropped.
  bool Push(const WatchEvent& ev) {
    {
      std::lock_guard lock(mu);
      if (stopped || cancelled) return false;
      if (buffer.size() >= capacity) {
        cancelled = true;
        buffer.clear();
      } else {
        buffer.push_back(ev);
      }
    }
    if (notify) notify();
    std::lock_guard lock(mu);
    return !cancelled;
  }
};

}  // namespace internal

WatchStream::WatchStream(std::shared_ptr<internal::WatchState> state)
    : state_(std::move(state)) {}

WatchStream::~WatchStream() { Stop(); }

std::optional<WatchEvent> WatchStream::Next() {
  std::lock_guard lock(state_->mu);
  if (state_->buffer.empty()) return std::nullopt;
  WatchEvent ev = std::move(state_->buffer.front());
  state_->buffer.pop_front();
  return ev;
}

bool WatchStream::cancelled() const {
  std::lock_guard lock(state_->mu);
  return state_->cancelled;
}

size_t WatchStream::buffered() const {
  std::lock_guard lock(state_->mu);
  return state_->buffer.size();
}

void WatchStream::Stop() {
  std::lock_guard lock(state_->mu);
  state_->stopped = true;
  state_->buffer.clear();
}

ObjectStore::ObjectStore(const Clock& clock, StoreOptions options)
    : clock_(clock), options_(std::move(options)), uid_rng_(options_.uid_seed) {
  if (options_.rate_limit) limiter_.emplace(*options_.rate_limit, clock_.Now());
}

ObjectStore::~ObjectStore() = default;

absl::Status ObjectStore::AdmitLocked() {
  if (limiter_ && !limiter_->TryTake(clock_.Now())) {
    ++rate_limited_;
    return absl::ResourceExhaustedError(
        absl::StrCat(options_.name, ": rate limited"));
  }
  return absl::OkStatus();
}

Uid ObjectStore::NextUidLocked() {
  Uid uid;
  do {
    uint64_t hi = uid_rng_();
    uint64_t lo = uid_rng_();
    // RFC 4122 version 4 layout.
    hi = (hi & ~0xf000ULL) | 0x4000ULL;
    lo = (lo & ~(0xc000ULL << 48)) | (0x8000ULL << 48);
    uid = Uid(hi, lo);
  } while (uid.IsZero());
  return uid;
}

int64_t ObjectStore::CommitLocked(EventType type,
                                  const VersionedObject& snapshot) {
  WatchEvent ev{type, snapshot, version_, clock_.Now()};
  KindState& ks = kinds_[snapshot.key.kind];
  ks.history.push_back(ev);
  while (ks.history.size() > options_.history_per_kind) {
    ks.compacted_through = ks.history.front().store_version;
    ks.history.pop_front();
  }
  auto& watchers = ks.watchers;
  watchers.erase(std::remove_if(watchers.begin(), watchers.end(),
                                [&](const auto& w) { return !w->Push(ev); }),
                 watchers.end());
  return version_;
}

absl::StatusOr<std::map<ObjectKey, VersionedObject>::iterator>
ObjectStore::FindForWriteLocked(const ObjectKey& key,
                                std::optional<int64_t> expected_version) {
  auto it = objects_.find(key);
  if (it == objects_.end()) {
    return absl::NotFoundError(absl::StrCat(key.ToString(), " not found"));
  }
  if (expected_version && *expected_version != it->second.resource_version) {
    return absl::AbortedError(absl::StrCat(
        "conflict on ", key.ToString(), ": expected version ",
        *expected_version, ", have ", it->second.resource_version));
  }
  return it;
}

absl::StatusOr<int64_t> ObjectStore::Create(VersionedObject obj) {
  if (obj.spec.index() == 0) obj.spec = DefaultSpec(obj.key.kind);
  if (obj.status.index() == 0) obj.status = DefaultStatus(obj.key.kind);
  if (auto s = ValidateObject(obj); !s.ok()) return s;
  std::lock_guard lock(mu_);
  if (objects_.count(obj.key)) {
    return absl::AlreadyExistsError(
        absl::StrCat(obj.key.ToString(), " already exists"));
  }
  if (auto s = AdmitLocked(); !s.ok()) return s;
  if (admission_) admission_(obj);
  obj.uid = NextUidLocked();
  obj.resource_version = ++version_;
  obj.creation_timestamp = clock_.Now();
  auto [it, _] = objects_.emplace(obj.key, std::move(obj));
  return CommitLocked(EventType::kAdded, it->second);
}

absl::StatusOr<int64_t> ObjectStore::UpdateSpec(
    const ObjectKey& key, ObjectSpec spec, Labels labels, Labels annotations,
    std::optional<int64_t> expected_version) {
  std::lock_guard lock(mu_);
  auto found = FindForWriteLocked(key, expected_version);
  if (!found.ok()) return found.status();
  VersionedObject& obj = (*found)->second;
  if (spec.index() != obj.spec.index()) {
    return absl::InvalidArgumentError(
        absl::StrCat(key.ToString(), ": spec payload does not match kind"));
  }
  if (auto s = AdmitLocked(); !s.ok()) return s;
  if (auto* pod = std::get_if<PodSpec>(&spec)) {
    const PodSpec* current = obj.pod_spec();
    pod->node_name = current->node_name;
    pod->service_epoch_at_admission = current->service_epoch_at_admission;
  }
  obj.spec = std::move(spec);
  obj.labels = std::move(labels);
  obj.annotations = std::move(annotations);
  obj.resource_version = ++version_;
  return CommitLocked(EventType::kUpdated, obj);
}

absl::StatusOr<int64_t> ObjectStore::UpdateStatus(
    const ObjectKey& key, ObjectStatus status,
    std::optional<int64_t> expected_version) {
  std::lock_guard lock(mu_);
  auto found = FindForWriteLocked(key, expected_version);
  if (!found.ok()) return found.status();
  VersionedObject& obj = (*found)->second;
  if (status.index() != obj.status.index()) {
    return absl::InvalidArgumentError(
        absl::StrCat(key.ToString(), ": status payload does not match kind"));
  }
  if (auto s = AdmitLocked(); !s.ok()) return s;
  obj.status = std::move(status);
  obj.resource_version = ++version_;
  return CommitLocked(EventType::kUpdated, obj);
}

absl::StatusOr<int64_t> ObjectStore::Bind(const ObjectKey& key,
                                          const std::string& node_name) {
  if (key.kind != Kind::kPod) {
    return absl::InvalidArgumentError("only Pods can be bound");
  }
  if (node_name.empty()) {
    return absl::InvalidArgumentError("node name must not be empty");
  }
  std::lock_guard lock(mu_);
  auto found = FindForWriteLocked(key, std::nullopt);
  if (!found.ok()) return found.status();
  VersionedObject& obj = (*found)->second;
  PodSpec* pod = obj.mutable_pod_spec();
  if (!pod->node_name.empty()) {
    if (pod->node_name == node_name) return obj.resource_version;
    return absl::FailedPreconditionError(absl::StrCat(
        key.ToString(), " already bound to ", pod->node_name));
  }
  if (auto s = AdmitLocked(); !s.ok()) return s;
  pod->node_name = node_name;
  obj.resource_version = ++version_;
  return CommitLocked(EventType::kUpdated, obj);
}

absl::Status ObjectStore::Delete(const ObjectKey& key,
                                 std::optional<int64_t> expected_version) {
  std::lock_guard lock(mu_);
  auto found = FindForWriteLocked(key, expected_version);
  if (!found.ok()) return found.status();
  if (auto s = AdmitLocked(); !s.ok()) return s;
  VersionedObject obj = std::move((*found)->second);
  objects_.erase(*found);
  ++version_;
  CommitLocked(EventType::kDeleted, obj);
  return absl::OkStatus();
}

absl::StatusOr<VersionedObject> ObjectStore::Get(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = objects_.find(key);
  if (it == objects_.end()) {
    return absl::NotFoundError(absl::StrCat(key.ToString(), " not found"));
  }
  return it->second;
}

ListResult ObjectStore::List(Kind kind,
                             const std::optional<std::string>& ns) const {
  std::lock_guard lock(mu_);
  ++kinds_[kind].list_calls;
  ListResult out;
  out.store_version = version_;
  auto it = objects_.lower_bound(ObjectKey{kind, ns.value_or(""), ""});
  for (; it != objects_.end() && it->first.kind == kind; ++it) {
    if (ns && it->first.ns != *ns) break;
    out.objects.push_back(it->second);
  }
  return out;
}

absl::StatusOr<std::unique_ptr<WatchStream>> ObjectStore::Watch(
    Kind kind, int64_t from_version, Notify notify) {
  std::lock_guard lock(mu_);
  if (from_version < 0 || from_version > version_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "watch version ", from_version, " outside [0, ", version_, "]"));
  }
  KindState& ks = kinds_[kind];
  if (from_version < ks.compacted_through) {
    return absl::OutOfRangeError(absl::StrCat(
        "version ", from_version, " too old; history compacted through ",
        ks.compacted_through));
  }
  auto state = std::make_shared<internal::WatchState>();
  state->capacity = options_.watch_buffer;
  state->notify = std::move(notify);
  auto stream = std::unique_ptr<WatchStream>(new WatchStream(state));
  bool live = true;
  for (const WatchEvent& ev : ks.history) {
    if (ev.store_version <= from_version) continue;
    if (!state->Push(ev)) {
      live = false;
      break;
    }
  }
  if (live) ks.watchers.push_back(std::move(state));
  return stream;
}

void ObjectStore::SetAdmissionHook(AdmissionHook hook) {
  std::lock_guard lock(mu_);
  admission_ = std::move(hook);
}

int64_t ObjectStore::version() const {
  std::lock_guard lock(mu_);
  return version_;
}

size_t ObjectStore::size() const {
  std::lock_guard lock(mu_);
  return objects_.size();
}

int64_t ObjectStore::list_calls(Kind kind) const {
  std::lock_guard lock(mu_);
  auto it = kinds_.find(kind);
  return it == kinds_.end() ? 0 : it->second.list_calls;
}

int64_t ObjectStore::rate_limited_requests() const {
  std::lock_guard lock(mu_);
  return rate_limited_;
}

Duration ObjectStore::RetryAfter() {
  std::lock_guard lock(mu_);
  if (!limiter_) return Duration::zero();
  return limiter_->RetryAfter(clock_.Now());
}

void ObjectStore::DumpCommitLog(std::ostream& out) const {
  std::lock_guard lock(mu_);
  std::vector<const WatchEvent*> events;
  for (const auto& [kind, ks] : kinds_) {
    for (const auto& ev : ks.history) events.push_back(&ev);
  }
  std::sort(events.begin(), events.end(), [](auto* a, auto* b) {
    return a->store_version < b->store_version;
  });
  for (const WatchEvent* ev : events) {
    out << ev->store_version << ' ' << EventTypeName(ev->type) << ' '
        << ev->object.key.ToString() << '\n';
  }
}

}  // namespace vcsim
