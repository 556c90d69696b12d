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

#include "vcsim/runtime/runtime.h"

#include <utility>

namespace vcsim {

void SimRuntime::Post(Duration delay, Task task) {
  if (delay < Duration::zero()) delay = Duration::zero();
  queue_.push(Event{now_ + delay, next_seq_++, std::move(task)});
}

bool SimRuntime::Step() {
  if (queue_.empty()) return false;
  // priority_queue::top is const; the task is moved out through a copy of
  // the node.
  Event ev = std::move(const_cast<Event&>(queue_.top()));
  queue_.pop();
  if (ev.due > now_) now_ = ev.due;
  ++executed_;
  ev.task();
  return true;
}

void SimRuntime::RunUntil(Duration until) {
  while (!queue_.empty() && queue_.top().due <= until) Step();
  if (until > now_) now_ = until;
}

bool SimRuntime::RunUntil(const std::function<bool()>& done,
                          Duration deadline) {
  if (done()) return true;
  while (!queue_.empty() && queue_.top().due <= deadline) {
    Step();
    if (done()) return true;
  }
  if (deadline > now_) now_ = deadline;
  return done();
}

RealRuntime::RealRuntime()
    : start_(std::chrono::steady_clock::now()), thread_([this] { Loop(); }) {}

RealRuntime::~RealRuntime() { Shutdown(); }

Duration RealRuntime::Now() const {
  return std::chrono::duration_cast<Duration>(
      std::chrono::steady_clock::now() - start_);
}

void RealRuntime::Post(Duration delay, Task task) {
  if (delay < Duration::zero()) delay = Duration::zero();
  Duration due = Now() + delay;
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    queue_.push(Event{due, next_seq_++, std::move(task)});
  }
  cv_.notify_one();
}

void RealRuntime::Shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && !thread_.joinable()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) {
    thread_.join();
  }
  std::lock_guard lock(mu_);
  while (!queue_.empty()) queue_.pop();
}

void RealRuntime::Loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (queue_.empty()) {
      cv_.wait(lock);
      continue;
    }
    Duration due = queue_.top().due;
    Duration now = Now();
    if (due > now) {
      cv_.wait_until(lock, start_ + due);
      continue;
    }
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    lock.unlock();
    ev.task();
    lock.lock();
  }
}

}  // namespace vcsim
