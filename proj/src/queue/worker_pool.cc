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

#include "vcsim/queue/worker_pool.h"

#include <utility>

namespace vcsim {

AdmissionWindow::AdmissionWindow(size_t limit) : limit_(limit) {}

bool AdmissionWindow::IsOpen() const {
  std::lock_guard lock(mu_);
  return limit_ == 0 || outstanding_.size() < limit_;
}

void AdmissionWindow::WaitOpen() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    return closed_ || limit_ == 0 || outstanding_.size() < limit_;
  });
}

void AdmissionWindow::Close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

void AdmissionWindow::Add(const ObjectKey& key) {
  std::lock_guard lock(mu_);
  outstanding_.insert(key);
}

void AdmissionWindow::Release(const ObjectKey& key) {
  std::function<void()> callback;
  {
    std::lock_guard lock(mu_);
    if (outstanding_.erase(key) == 0) return;
    if (limit_ != 0 && outstanding_.size() + 1 == limit_) callback = opened_;
  }
  cv_.notify_all();
  if (callback) callback();
}

size_t AdmissionWindow::outstanding() const {
  std::lock_guard lock(mu_);
  return outstanding_.size();
}

void AdmissionWindow::SetOpenedCallback(std::function<void()> callback) {
  std::lock_guard lock(mu_);
  opened_ = std::move(callback);
}

SimWorkerPool::SimWorkerPool(Runtime& runtime, FairQueue& queue, int workers,
                             Duration service_time, BeginWork begin,
                             AdmissionWindow* window)
    : runtime_(runtime),
      queue_(queue),
      workers_(workers),
      service_time_(service_time),
      begin_(std::move(begin)),
      window_(window) {}

SimWorkerPool::~SimWorkerPool() {
  Stop();
  *alive_ = false;
}

void SimWorkerPool::Start() {
  running_ = true;
  std::weak_ptr<bool> alive = alive_;
  queue_.SetReadyCallback([this, alive] {
    if (alive.lock()) SchedulePump();
  });
  if (window_) {
    window_->SetOpenedCallback([this, alive] {
      if (alive.lock()) SchedulePump();
    });
  }
  SchedulePump();
}

void SimWorkerPool::Stop() {
  if (!running_) return;
  running_ = false;
  queue_.SetReadyCallback(nullptr);
  if (window_) window_->SetOpenedCallback(nullptr);
}

void SimWorkerPool::SchedulePump() {
  if (pump_scheduled_ || !running_) return;
  pump_scheduled_ = true;
  std::weak_ptr<bool> alive = alive_;
  runtime_.Post(Duration::zero(), [this, alive] {
    if (!alive.lock()) return;
    pump_scheduled_ = false;
    Pump();
  });
}

void SimWorkerPool::Pump() {
  while (running_ && busy_ < workers_) {
    if (window_ && !window_->IsOpen()) return;
    auto item = queue_.Dequeue();
    if (!item) return;
    ++busy_;
    std::function<void()> commit = begin_(*item);
    std::weak_ptr<bool> alive = alive_;
    runtime_.Post(service_time_, [this, alive, item = std::move(*item),
                                  commit = std::move(commit)] {
      if (!alive.lock()) return;
      if (commit) commit();
      (void)queue_.Done(item.tenant, item.key);
      --busy_;
      Pump();
    });
  }
}

ThreadWorkerPool::ThreadWorkerPool(FairQueue& queue, int workers,
                                   BeginWork begin, AdmissionWindow* window)
    : queue_(queue),
      workers_(workers),
      begin_(std::move(begin)),
      window_(window) {}

ThreadWorkerPool::~ThreadWorkerPool() { Stop(); }

void ThreadWorkerPool::Start() {
  stopping_ = false;
  for (int i = 0; i < workers_; ++i) threads_.emplace_back([this] { Run(); });
}

void ThreadWorkerPool::Stop() {
  stopping_ = true;
  queue_.ShutDown();
  if (window_) window_->Close();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void ThreadWorkerPool::Run() {
  while (!stopping_) {
    if (window_) window_->WaitOpen();
    auto item = queue_.WaitDequeue();
    if (!item) return;
    ++busy_;
    std::function<void()> commit = begin_(*item);
    if (commit) commit();
    (void)queue_.Done(item->tenant, item->key);
    --busy_;
  }
}

}  // namespace vcsim
