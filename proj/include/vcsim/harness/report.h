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

#ifndef VCSIM_HARNESS_REPORT_H_
#define VCSIM_HARNESS_REPORT_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "vcsim/harness/scenario.h"

namespace vcsim {

enum Phase { kDwsQueue, kDwsProcess, kSuperSched, kUwsQueue, kUwsProcess };
inline constexpr int kNumPhases = 5;
std::string_view PhaseName(int phase);

// Per-pod timestamps in nanoseconds of harness time, monotone in field
// order. Phases telescope: their sum is t_ready - t_create.
struct PhaseTrace {
  std::string tenant;
  std::string pod;
  int64_t t_create = 0;
  int64_t t_dws_enq = 0;
  int64_t t_dws_deq = 0;
  int64_t t_dws_done = 0;
  int64_t t_super_ready = 0;
  int64_t t_uws_enq = 0;
  int64_t t_uws_deq = 0;
  int64_t t_ready = 0;

  std::array<int64_t, kNumPhases> Phases() const;
  int64_t Total() const { return t_ready - t_create; }
  bool operator==(const PhaseTrace&) const = default;
};

struct LatencyStats {
  double mean_s = 0;
  double p50_s = 0;
  double p90_s = 0;
  double p99_s = 0;
  double max_s = 0;
  bool operator==(const LatencyStats&) const = default;
};

// Nearest-rank percentiles over nanosecond samples.
LatencyStats ComputeStats(std::vector<int64_t> samples_ns);

// Buckets of 2 s: [0,2) [2,4) [4,6) [6,8) [8,10) and [10,inf).
inline constexpr int kHistogramBuckets = 6;
inline constexpr double kBucketWidthS = 2.0;
using Histogram = std::array<int64_t, kHistogramBuckets>;
Histogram BuildHistogram(const std::vector<int64_t>& samples_ns);
std::string BucketLabel(int bucket);

struct TenantSummary {
  std::string tenant;
  std::string group;
  int64_t pods = 0;
  int64_t ready = 0;
  double mean_s = 0;
  bool operator==(const TenantSummary&) const = default;
};

struct QueueSample {
  int64_t t = 0;
  int64_t dws_pending = 0;
  int64_t uws_pending = 0;
  int64_t sched_queue = 0;
  int64_t window = 0;
  int64_t ready = 0;
  bool operator==(const QueueSample&) const = default;
};

struct Report {
  Scenario scenario;
  int64_t pods_created = 0;
  int64_t pods_ready = 0;
  double makespan_s = 0;
  double throughput = 0;  // ready pods per second over the makespan
  double scheduler_throughput = 0;  // over saturated stretches
  LatencyStats total;
  std::array<LatencyStats, kNumPhases> phases{};
  Histogram total_hist{};
  std::array<Histogram, kNumPhases> phase_hist{};
  std::vector<TenantSummary> tenants;
  std::vector<QueueSample> queue_depth;
  int64_t provenance_writes = 0;
  int64_t cross_tenant_writes = 0;
  int64_t unprefixed_writes = 0;
  int64_t gate_violations = 0;
  int64_t retries = 0;
  double injection_mean_s = 0;  // first rule sync per sandbox
  std::vector<PhaseTrace> traces;

  // Fills stats, histograms and tenant averages from `traces`.
  void Summarize(const std::vector<std::pair<std::string, std::string>>&
                     tenant_groups);
};

std::string ReportToJson(const Report& r);
absl::StatusOr<Report> ReportFromJson(std::string_view json);

// CSV files in `dir`: summary.csv (scalar fields and scenario.* keys),
// traces.csv, histogram.csv, tenants.csv and queue_depth.csv.
absl::Status WriteReportCsv(const Report& r, const std::string& dir);
absl::StatusOr<Report> ReadReportCsv(const std::string& dir);
absl::Status WriteReportJson(const Report& r, const std::string& path);

// Table-style text rendering of the phase histogram.
std::string RenderHistogramTable(const Report& r);

}  // namespace vcsim

#endif  // VCSIM_HARNESS_REPORT_H_
