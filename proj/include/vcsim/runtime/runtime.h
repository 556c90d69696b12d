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

#ifndef VCSIM_RUNTIME_RUNTIME_H_
#define VCSIM_RUNTIME_RUNTIME_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "vcsim/core/types.h"

namespace vcsim {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Duration Now() const = 0;
};

// A clock plus a timer queue. Callbacks posted with equal due times run in
// posting order, and never concurrently with each other.
class Runtime : public Clock {
 public:
  using Task = std::function<void()>;

  virtual void Post(Duration delay, Task task) = 0;
  virtual bool simulated() const = 0;
};

// Discrete-event runtime. Time advances only when the next event is popped;
// everything runs on the calling thread.
class SimRuntime final : public Runtime {
 public:
  SimRuntime() = default;

  Duration Now() const override { return now_; }
  void Post(Duration delay, Task task) override;
  bool simulated() const override { return true; }

  // Runs one event. Returns false when the queue is empty.
  bool Step();
  // Runs events due at or before `until`, then sets the clock to `until`.
  void RunUntil(Duration until);
  void RunFor(Duration d) { RunUntil(now_ + d); }
  // Runs until `done()` holds (checked after each event) or the clock passes
  // `deadline`. Returns whether `done()` held.
  bool RunUntil(const std::function<bool()>& done, Duration deadline);

  size_t pending() const { return queue_.size(); }
  uint64_t executed() const { return executed_; }

 private:
  struct Event {
    Duration due;
    uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.due != b.due) return a.due > b.due;
      return a.seq > b.seq;
    }
  };

  Duration now_{0};
  uint64_t next_seq_ = 0;
  uint64_t executed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

// Wall-clock runtime: a single dispatcher thread runs posted callbacks when
// they come due. Post is thread-safe.
class RealRuntime final : public Runtime {
 public:
  RealRuntime();
  ~RealRuntime() override;

  Duration Now() const override;
  void Post(Duration delay, Task task) override;
  bool simulated() const override { return false; }

  // Stops the dispatcher and drops pending callbacks. Later posts are
  // ignored.
  void Shutdown();

 private:
  struct Event {
    Duration due;
    uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.due != b.due) return a.due > b.due;
      return a.seq > b.seq;
    }
  };

  void Loop();

  const std::chrono::steady_clock::time_point start_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::thread thread_;
};

}  // namespace vcsim

#endif  // VCSIM_RUNTIME_RUNTIME_H_
