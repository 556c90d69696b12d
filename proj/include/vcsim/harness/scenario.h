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

#ifndef VCSIM_HARNESS_SCENARIO_H_
#define VCSIM_HARNESS_SCENARIO_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace vcsim {

enum class LoadPattern {
  kBurst,       // all pods at once
  kSequential,  // next pod once the previous one is ready
};

enum class ClockMode { kSimulated, kRealtime };

struct TenantGroup {
  std::string name;
  int tenants = 1;
  int pods = 1;  // per tenant
  LoadPattern load = LoadPattern::kBurst;
  int weight = 1;
};

// One experiment. Text form is flat `key = value` lines; `#` starts a
// comment. Tenant groups use `group.<name>.{tenants,pods,load,weight}`.
struct Scenario {
  uint64_t seed = 1;
  ClockMode clock = ClockMode::kSimulated;
  // Pods go straight to the super store, one generator per tenant, with no
  // tenant stores or syncer.
  bool baseline_mode = false;
  std::vector<TenantGroup> groups;

  int downward_workers = 20;
  int upward_workers = 100;
  bool fair_queuing = true;
  int admission_window = 200;  // 0 disables
  double dws_process_ms = 2;
  double uws_process_ms = 2;
  double informer_lag_min_ms = 1;
  double informer_lag_max_ms = 5;

  int nodes = 100;
  int node_capacity = 110;
  double scheduler_service_time_ms = 2.5;
  double kubelet_ready_delay_ms = 0;
  double rule_latency_ms = 10;
  double proxy_scan_cost_ms = 10;
  int services_per_tenant = 0;

  double tenant_qps = 100;  // 0: tenant stores are not rate limited
  int tenant_burst = 200;

  double deadline_s = 3600;
  double sample_interval_ms = 100;

  int tenants_total() const;
  int pods_total() const;
  absl::Status Validate() const;
};

// `validate` false accepts incomplete scenarios, as stored in reports.
absl::StatusOr<Scenario> ParseScenario(std::string_view text,
                                       bool validate = true);
absl::StatusOr<Scenario> LoadScenarioFile(const std::string& path);
// Every setting as (key, value) text, in a fixed order; ParseScenario of the
// joined lines gives the scenario back.
std::vector<std::pair<std::string, std::string>> ScenarioFields(
    const Scenario& s);
std::string FormatScenario(const Scenario& s);

std::string_view LoadPatternName(LoadPattern p);
std::string_view ClockModeName(ClockMode c);

// Shortest text that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace vcsim

#endif  // VCSIM_HARNESS_SCENARIO_H_
