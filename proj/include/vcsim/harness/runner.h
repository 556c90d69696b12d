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

#ifndef VCSIM_HARNESS_RUNNER_H_
#define VCSIM_HARNESS_RUNNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vcsim/harness/report.h"
#include "vcsim/harness/scenario.h"

namespace vcsim {

// Runs the scenario end to end and collects one PhaseTrace per pod.
// Fails with InvalidArgument for an invalid scenario and DeadlineExceeded
// when pods are still not ready at the deadline.
absl::StatusOr<Report> RunScenario(const Scenario& scenario);

// Ten greedy tenants bursting 900 pods each and forty regular tenants
// creating ten pods one after another, equal weights.
Scenario FairnessScenario(uint64_t seed);

struct FairnessResult {
  Report fq_on;
  Report fq_off;
};
// Runs `base` with fair queuing on and off; everything else is identical.
absl::StatusOr<FairnessResult> RunFairnessExperiment(const Scenario& base);

// `tenants` tenants bursting `pods_per_tenant` pods each.
Scenario BurstScenario(uint64_t seed, int tenants, int pods_per_tenant);
// 100 tenants x 100 pods.
Scenario BreakdownScenario(uint64_t seed);

struct SweepRow {
  int pods = 0;
  int tenants = 0;
  bool baseline = false;
  double throughput = 0;
  LatencyStats latency;
};
// One burst run per (pods, tenants) cell, in grid order; with
// `include_baseline` each cell is followed by its baseline-mode run. Pods
// are split evenly, so `pods` must be a multiple of every tenant count.
absl::StatusOr<std::vector<SweepRow>> RunThroughputSweep(
    const std::vector<int>& pods, const std::vector<int>& tenants,
    const Scenario& base, bool include_baseline);

std::string SweepToCsv(const std::vector<SweepRow>& rows);
std::string SweepToJson(const std::vector<SweepRow>& rows);

}  // namespace vcsim

#endif  // VCSIM_HARNESS_RUNNER_H_
