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

#ifndef VCSIM_TESTS_REFERENCE_QUEUE_H_
#define VCSIM_TESTS_REFERENCE_QUEUE_H_

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vcsim/core/types.h"

namespace vcsim::testing {

// Reference for the interleaved weighted round-robin dispatch order: a
// cycle is the explicit list of turns, round r holding one turn for each
// tenant (in registration order) whose weight is at least r.
class ReferenceQueue {
 public:
  void Register(const std::string& t, int w) {
    order_.push_back(t);
    weight_[t] = w;
  }
  void SetWeight(const std::string& t, int w) { weight_[t] = w; }

  bool Enqueue(const std::string& t, const ObjectKey& k) {
    auto id = std::make_pair(t, k);
    if (dirty_.count(id)) return false;
    dirty_.insert(id);
    if (!processing_.count(id)) fifo_[t].push_back(k);
    return true;
  }

  std::optional<std::pair<std::string, ObjectKey>> Dequeue() {
    size_t total = 0;
    for (const auto& [t, q] : fifo_) total += q.size();
    if (total == 0) return std::nullopt;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (pos_ >= turns_.size()) NewCycle();
      while (pos_ < turns_.size()) {
        const std::string& t = turns_[pos_++];
        if (!fifo_[t].empty()) {
          ObjectKey k = fifo_[t].front();
          fifo_[t].pop_front();
          dirty_.erase({t, k});
          processing_.insert({t, k});
          return std::make_pair(t, k);
        }
      }
    }
    return std::nullopt;
  }

  bool Done(const std::string& t, const ObjectKey& k) {
    auto id = std::make_pair(t, k);
    if (!processing_.erase(id)) return false;
    if (dirty_.count(id)) fifo_[t].push_back(k);
    return true;
  }

  size_t pending() const {
    size_t n = 0;
    for (const auto& [t, q] : fifo_) n += q.size();
    return n;
  }
  const std::set<std::pair<std::string, ObjectKey>>& processing() const {
    return processing_;
  }
  const std::map<std::string, std::deque<ObjectKey>>& fifo() const {
    return fifo_;
  }

 private:
  void NewCycle() {
    turns_.clear();
    pos_ = 0;
    int max_w = 0;
    for (const auto& t : order_) max_w = std::max(max_w, weight_[t]);
    for (int r = 1; r <= max_w; ++r) {
      for (const auto& t : order_) {
        if (weight_[t] >= r) turns_.push_back(t);
      }
    }
  }

  std::vector<std::string> order_;
  std::map<std::string, int> weight_;
  std::map<std::string, std::deque<ObjectKey>> fifo_;
  std::set<std::pair<std::string, ObjectKey>> dirty_;
  std::set<std::pair<std::string, ObjectKey>> processing_;
  std::vector<std::string> turns_;
  size_t pos_ = 0;
};

}  // namespace vcsim::testing

#endif  // VCSIM_TESTS_REFERENCE_QUEUE_H_
