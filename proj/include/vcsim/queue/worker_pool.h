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

#ifndef VCSIM_QUEUE_WORKER_POOL_H_
#define VCSIM_QUEUE_WORKER_POOL_H_

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "vcsim/core/types.h"
#include "vcsim/queue/fair_queue.h"
#include "vcsim/runtime/runtime.h"

namespace vcsim {

// Bounds how many objects may be outstanding downstream. Workers stop
// dispatching while the window is full and resume as entries are released.
// A limit of zero disables the window.
class AdmissionWindow {
 public:
  explicit AdmissionWindow(size_t limit);

  bool IsOpen() const;
  // Blocks until the window is open or Close() is called.
  void WaitOpen();
  void Close();

  // Idempotent per key.
  void Add(const ObjectKey& key);
  void Release(const ObjectKey& key);
  size_t outstanding() const;
  size_t limit() const { return limit_; }

  // Called (outside the lock) when a Release opens the window.
  void SetOpenedCallback(std::function<void()> callback);

 private:
  const size_t limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::set<ObjectKey> outstanding_;
  bool closed_ = false;
  std::function<void()> opened_;
};

// Two-phase work: Begin runs at dispatch time and returns the commit step,
// which runs when the worker finishes. The pool calls FairQueue::Done after
// the commit step.
using BeginWork = std::function<std::function<void()>(const QueueItem&)>;

class WorkerPool {
 public:
  virtual ~WorkerPool() = default;
  virtual void Start() = 0;
  virtual void Stop() = 0;
  virtual int busy() const = 0;
};

// Workers as virtual slots on a simulated runtime. Each dispatched item
// occupies its slot for `service_time`; the commit step runs at the end.
class SimWorkerPool final : public WorkerPool {
 public:
  SimWorkerPool(Runtime& runtime, FairQueue& queue, int workers,
                Duration service_time, BeginWork begin,
                AdmissionWindow* window = nullptr);
  ~SimWorkerPool() override;

  void Start() override;
  void Stop() override;
  int busy() const override { return busy_; }

 private:
  void SchedulePump();
  void Pump();

  Runtime& runtime_;
  FairQueue& queue_;
  const int workers_;
  const Duration service_time_;
  BeginWork begin_;
  AdmissionWindow* window_;
  int busy_ = 0;
  bool running_ = false;
  bool pump_scheduled_ = false;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

// Workers as OS threads blocking on the queue.
class ThreadWorkerPool final : public WorkerPool {
 public:
  ThreadWorkerPool(FairQueue& queue, int workers, BeginWork begin,
                   AdmissionWindow* window = nullptr);
  ~ThreadWorkerPool() override;

  // Stop() shuts the queue down so blocked workers return.
  void Start() override;
  void Stop() override;
  int busy() const override { return busy_.load(); }

 private:
  void Run();

  FairQueue& queue_;
  const int workers_;
  BeginWork begin_;
  AdmissionWindow* window_;
  std::atomic<int> busy_{0};
  std::atomic<bool> stopping_{false};
  std::vector<std::thread> threads_;
};

}  // namespace vcsim

#endif  // VCSIM_QUEUE_WORKER_POOL_H_
