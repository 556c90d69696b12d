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

#include "vcsim/informer/informer.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"

namespace vcsim {

namespace {

using Notification = std::pair<ObjectKey, EventType>;

}  // namespace

Informer::Informer(Runtime& runtime, ObjectStore& store,
                   std::vector<Kind> kinds, Handler handler, LagPolicy lag,
                   uint64_t seed)
    : runtime_(runtime),
      store_(store),
      kinds_(std::move(kinds)),
      handler_(std::move(handler)),
      lag_(lag),
      rng_(seed) {
  for (Kind k : kinds_) reflectors_[k].kind = k;
}

Informer::~Informer() {
  Stop();
  *alive_ = false;
}

void Informer::Start() {
  std::vector<Notification> notes;
  {
    std::lock_guard lock(mu_);
    if (running_) return;
    running_ = true;
    {
      std::unique_lock cache_lock(cache_mu_);
      cache_.clear();
    }
    for (Kind k : kinds_) {
      Reflector& r = reflectors_[k];
      ++r.generation;
      ListResult list = store_.List(k);
      {
        std::unique_lock cache_lock(cache_mu_);
        for (auto& obj : list.objects) {
          notes.emplace_back(obj.key, EventType::kAdded);
          cache_.emplace(obj.key, std::move(obj));
        }
      }
      r.last_seen = list.store_version;
      if (!WatchFromLocked(r, r.last_seen)) ListAndWatchLocked(r);
    }
  }
  for (const auto& [key, type] : notes) Notify(key, type);
}

void Informer::Stop() {
  std::lock_guard lock(mu_);
  running_ = false;
  for (auto& [kind, r] : reflectors_) {
    ++r.generation;
    if (r.stream) r.stream->Stop();
    r.stream.reset();
  }
}

bool Informer::running() const {
  std::lock_guard lock(mu_);
  return running_;
}

bool Informer::WatchFromLocked(Reflector& r, int64_t from_version) {
  if (r.stream) r.stream->Stop();
  r.stream.reset();
  std::weak_ptr<bool> alive = alive_;
  Kind kind = r.kind;
  uint64_t gen = r.generation;
  auto stream = store_.Watch(kind, from_version, [this, alive, kind, gen] {
    if (alive.lock()) OnNotify(kind, gen);
  });
  if (!stream.ok()) return false;
  r.stream = std::move(*stream);
  return true;
}

// Replaces the kind's cache with a fresh list and watches from there.
void Informer::ListAndWatchLocked(Reflector& r) {
  ++r.generation;
  if (r.stream) r.stream->Stop();
  r.stream.reset();
  for (;;) {
    ListResult list = store_.List(r.kind);
    {
      std::unique_lock cache_lock(cache_mu_);
      auto lo = cache_.lower_bound(ObjectKey{r.kind, "", ""});
      auto hi = lo;
      while (hi != cache_.end() && hi->first.kind == r.kind) ++hi;
      cache_.erase(lo, hi);
      for (auto& obj : list.objects) cache_.emplace(obj.key, std::move(obj));
    }
    r.last_seen = list.store_version;
    if (WatchFromLocked(r, r.last_seen)) return;
  }
}

void Informer::Relist(Kind kind) {
  std::vector<Notification> notes;
  {
    std::lock_guard lock(mu_);
    auto it = reflectors_.find(kind);
    if (it == reflectors_.end() || !running_) return;
    Reflector& r = it->second;
    std::map<ObjectKey, int64_t> before;
    {
      std::shared_lock cache_lock(cache_mu_);
      for (auto c = cache_.lower_bound(ObjectKey{kind, "", ""});
           c != cache_.end() && c->first.kind == kind; ++c) {
        before.emplace(c->first, c->second.resource_version);
      }
    }
    ListAndWatchLocked(r);
    ++relists_;
    std::shared_lock cache_lock(cache_mu_);
    for (auto c = cache_.lower_bound(ObjectKey{kind, "", ""});
         c != cache_.end() && c->first.kind == kind; ++c) {
      auto b = before.find(c->first);
      if (b == before.end()) {
        notes.emplace_back(c->first, EventType::kAdded);
      } else {
        if (b->second != c->second.resource_version) {
          notes.emplace_back(c->first, EventType::kUpdated);
        }
        before.erase(b);
      }
    }
    for (const auto& [key, version] : before) {
      notes.emplace_back(key, EventType::kDeleted);
    }
  }
  std::sort(notes.begin(), notes.end());
  for (const auto& [key, type] : notes) Notify(key, type);
}

void Informer::DropWatch(Kind kind) {
  bool too_old = false;
  {
    std::lock_guard lock(mu_);
    auto it = reflectors_.find(kind);
    if (it == reflectors_.end() || !running_) return;
    Reflector& r = it->second;
    ++r.generation;
    too_old = !WatchFromLocked(r, r.last_seen);
  }
  if (too_old) Relist(kind);
}

Duration Informer::SampleDelayLocked() {
  Duration d = lag_.min;
  if (lag_.distribution == LagPolicy::Distribution::kUniform &&
      lag_.max > lag_.min) {
    std::uniform_int_distribution<int64_t> dist(lag_.min.count(),
                                                lag_.max.count());
    d = Duration(dist(rng_));
  }
  if (faults_.extra_delay_max > Duration::zero()) {
    std::uniform_int_distribution<int64_t> dist(
        0, faults_.extra_delay_max.count());
    d += Duration(dist(rng_));
  }
  return d;
}

void Informer::OnNotify(Kind kind, uint64_t generation) {
  // Called under the store's commit lock. Deliveries for one kind are
  // scheduled at non-decreasing times so they stay in commit order.
  Duration delay;
  {
    std::lock_guard lock(notify_mu_);
    Duration now = runtime_.Now();
    Duration due = now + SampleDelayLocked();
    Duration& next = next_due_[kind];
    if (due < next) due = next;
    next = due;
    delay = due - now;
  }
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(delay, [this, alive, kind, generation] {
    if (alive.lock()) Deliver(kind, generation);
  });
}

void Informer::Deliver(Kind kind, uint64_t generation) {
  std::optional<WatchEvent> ev;
  bool cancelled = false;
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    Reflector& r = reflectors_[kind];
    if (r.generation != generation || !r.stream) return;
    if (r.stream->cancelled()) {
      cancelled = true;
    } else {
      ev = r.stream->Next();
      if (!ev) return;
      {
        std::unique_lock cache_lock(cache_mu_);
        if (ev->type == EventType::kDeleted) {
          cache_.erase(ev->object.key);
        } else {
          cache_.insert_or_assign(ev->object.key, ev->object);
        }
      }
      r.last_seen = ev->store_version;
    }
  }
  if (cancelled) {
    Relist(kind);
    return;
  }
  Notify(ev->object.key, ev->type);
}

void Informer::Notify(const ObjectKey& key, EventType type) {
  {
    std::lock_guard lock(notify_mu_);
    if (faults_.drop_handler_probability > 0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng_) < faults_.drop_handler_probability) {
        ++dropped_;
        return;
      }
    }
  }
  if (handler_) handler_(key, type);
}

absl::StatusOr<VersionedObject> Informer::Get(const ObjectKey& key) const {
  std::shared_lock lock(cache_mu_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    return absl::NotFoundError(absl::StrCat(key.ToString(), " not in cache"));
  }
  return it->second;
}

std::vector<VersionedObject> Informer::List(
    Kind kind, const std::optional<std::string>& ns) const {
  std::shared_lock lock(cache_mu_);
  std::vector<VersionedObject> out;
  for (auto it = cache_.lower_bound(ObjectKey{kind, ns.value_or(""), ""});
       it != cache_.end() && it->first.kind == kind; ++it) {
    if (ns && it->first.ns != *ns) break;
    out.push_back(it->second);
  }
  return out;
}

int64_t Informer::last_seen_version(Kind kind) const {
  std::lock_guard lock(mu_);
  auto it = reflectors_.find(kind);
  return it == reflectors_.end() ? 0 : it->second.last_seen;
}

int64_t Informer::relists() const {
  std::lock_guard lock(mu_);
  return relists_;
}

int64_t Informer::dropped_notifications() const {
  std::lock_guard lock(notify_mu_);
  return dropped_;
}

void Informer::SetFaults(InformerFaults faults) {
  std::lock_guard lock(notify_mu_);
  faults_ = faults;
}

}  // namespace vcsim
