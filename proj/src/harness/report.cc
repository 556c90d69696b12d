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

#include "vcsim/harness/report.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

namespace vcsim {
namespace {

using nlohmann::json;

constexpr std::array<const char*, kNumPhases> kPhaseNames = {
    "DWS-Queue", "DWS-Process", "Super-Sched", "UWS-Queue", "UWS-Process"};

constexpr std::array<const char*, 5> kStatNames = {"mean_s", "p50_s", "p90_s",
                                                   "p99_s", "max_s"};

std::array<double*, 5> StatFields(LatencyStats& s) {
  return {&s.mean_s, &s.p50_s, &s.p90_s, &s.p99_s, &s.max_s};
}

std::array<double, 5> StatValues(const LatencyStats& s) {
  return {s.mean_s, s.p50_s, s.p90_s, s.p99_s, s.max_s};
}

json StatsToJson(const LatencyStats& s) {
  json j = json::object();
  auto v = StatValues(s);
  for (size_t i = 0; i < kStatNames.size(); ++i) j[kStatNames[i]] = v[i];
  return j;
}

LatencyStats StatsFromJson(const json& j) {
  LatencyStats s;
  auto f = StatFields(s);
  for (size_t i = 0; i < kStatNames.size(); ++i) {
    *f[i] = j.at(kStatNames[i]).get<double>();
  }
  return s;
}

// Scalar fields shared by the JSON and CSV forms.
struct Scalar {
  const char* key;
  int64_t Report::*i = nullptr;
  double Report::*d = nullptr;
};

const std::vector<Scalar>& Scalars() {
  static const auto* scalars = new std::vector<Scalar>{
      {"pods_created", &Report::pods_created},
      {"pods_ready", &Report::pods_ready},
      {"makespan_s", nullptr, &Report::makespan_s},
      {"throughput", nullptr, &Report::throughput},
      {"scheduler_throughput", nullptr, &Report::scheduler_throughput},
      {"provenance_writes", &Report::provenance_writes},
      {"cross_tenant_writes", &Report::cross_tenant_writes},
      {"unprefixed_writes", &Report::unprefixed_writes},
      {"gate_violations", &Report::gate_violations},
      {"retries", &Report::retries},
      {"injection_mean_s", nullptr, &Report::injection_mean_s},
  };
  return *scalars;
}

using TraceField = int64_t PhaseTrace::*;
constexpr std::array<std::pair<const char*, TraceField>, 8> kTraceFields = {{
    {"t_create", &PhaseTrace::t_create},
    {"t_dws_enq", &PhaseTrace::t_dws_enq},
    {"t_dws_deq", &PhaseTrace::t_dws_deq},
    {"t_dws_done", &PhaseTrace::t_dws_done},
    {"t_super_ready", &PhaseTrace::t_super_ready},
    {"t_uws_enq", &PhaseTrace::t_uws_enq},
    {"t_uws_deq", &PhaseTrace::t_uws_deq},
    {"t_ready", &PhaseTrace::t_ready},
}};

using SampleField = int64_t QueueSample::*;
constexpr std::array<std::pair<const char*, SampleField>, 6> kSampleFields = {{
    {"t", &QueueSample::t},
    {"dws_pending", &QueueSample::dws_pending},
    {"uws_pending", &QueueSample::uws_pending},
    {"sched_queue", &QueueSample::sched_queue},
    {"window", &QueueSample::window},
    {"ready", &QueueSample::ready},
}};

std::string ScenarioText(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string text;
  for (const auto& [k, v] : kv) absl::StrAppend(&text, k, " = ", v, "\n");
  return text;
}

absl::Status ParseError(const std::string& what) {
  return absl::InvalidArgumentError(absl::StrCat("malformed report: ", what));
}

bool ParseI64(absl::string_view s, int64_t* out) {
  return absl::SimpleAtoi(s, out);
}

bool ParseF64(absl::string_view s, double* out) {
  return absl::SimpleAtod(s, out);
}

// Rows of a CSV file without its header line. The files are written by
// WriteReportCsv and never contain quoted fields.
absl::StatusOr<std::vector<std::vector<std::string>>> ReadRows(
    const std::string& path, size_t columns) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells = absl::StrSplit(line, ',');
    if (cells.size() != columns) {
      return ParseError(absl::StrCat(path, ": expected ", columns,
                                     " columns in '", line, "'"));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string_view PhaseName(int phase) { return kPhaseNames.at(phase); }

std::array<int64_t, kNumPhases> PhaseTrace::Phases() const {
  return {t_dws_deq - t_create, t_dws_done - t_dws_deq,
          t_super_ready - t_dws_done, t_uws_deq - t_super_ready,
          t_ready - t_uws_deq};
}

LatencyStats ComputeStats(std::vector<int64_t> samples) {
  LatencyStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  long double sum = 0;
  for (int64_t v : samples) sum += v;
  const size_t n = samples.size();
  auto rank = [&](double p) {
    size_t k = static_cast<size_t>(std::ceil(p / 100.0 * n));
    return samples[std::clamp<size_t>(k, 1, n) - 1] / 1e9;
  };
  s.mean_s = static_cast<double>(sum / n) / 1e9;
  s.p50_s = rank(50);
  s.p90_s = rank(90);
  s.p99_s = rank(99);
  s.max_s = samples.back() / 1e9;
  return s;
}

Histogram BuildHistogram(const std::vector<int64_t>& samples) {
  Histogram h{};
  constexpr int64_t kWidth = 2'000'000'000;
  for (int64_t v : samples) {
    int64_t b = std::max<int64_t>(v, 0) / kWidth;
    ++h[std::min<int64_t>(b, kHistogramBuckets - 1)];
  }
  return h;
}

std::string BucketLabel(int bucket) {
  int lo = static_cast<int>(bucket * kBucketWidthS);
  if (bucket == kHistogramBuckets - 1) return absl::StrCat("[", lo, ",inf)");
  return absl::StrCat("[", lo, ",", lo + static_cast<int>(kBucketWidthS), ")");
}

void Report::Summarize(
    const std::vector<std::pair<std::string, std::string>>& tenant_groups) {
  std::vector<int64_t> totals;
  std::array<std::vector<int64_t>, kNumPhases> per_phase;
  std::map<std::string, std::pair<int64_t, long double>> by_tenant;
  for (const auto& t : traces) {
    totals.push_back(t.Total());
    auto p = t.Phases();
    for (int i = 0; i < kNumPhases; ++i) per_phase[i].push_back(p[i]);
    auto& [n, sum] = by_tenant[t.tenant];
    ++n;
    sum += t.Total();
  }
  total = ComputeStats(totals);
  total_hist = BuildHistogram(totals);
  for (int i = 0; i < kNumPhases; ++i) {
    phase_hist[i] = BuildHistogram(per_phase[i]);
    phases[i] = ComputeStats(std::move(per_phase[i]));
  }
  tenants.clear();
  for (const auto& [tenant, group] : tenant_groups) {
    TenantSummary s{tenant, group};
    auto it = by_tenant.find(tenant);
    if (it != by_tenant.end()) {
      s.ready = it->second.first;
      s.mean_s = static_cast<double>(it->second.second / s.ready) / 1e9;
    }
    tenants.push_back(s);
  }
}

std::string ReportToJson(const Report& r) {
  json j = json::object();
  json scenario = json::array();
  for (const auto& [k, v] : ScenarioFields(r.scenario)) {
    scenario.push_back({k, v});
  }
  j["scenario"] = scenario;
  for (const auto& s : Scalars()) {
    if (s.i) {
      j[s.key] = r.*(s.i);
    } else {
      j[s.key] = r.*(s.d);
    }
  }
  j["total"] = StatsToJson(r.total);
  j["total"]["histogram"] = r.total_hist;
  json phases = json::array();
  for (int i = 0; i < kNumPhases; ++i) {
    json p = StatsToJson(r.phases[i]);
    p["name"] = kPhaseNames[i];
    p["histogram"] = r.phase_hist[i];
    phases.push_back(p);
  }
  j["phases"] = phases;
  json tenants = json::array();
  for (const auto& t : r.tenants) {
    tenants.push_back({{"tenant", t.tenant},
                       {"group", t.group},
                       {"pods", t.pods},
                       {"ready", t.ready},
                       {"mean_s", t.mean_s}});
  }
  j["tenants"] = tenants;
  json samples = json::array();
  for (const auto& q : r.queue_depth) {
    json row = json::object();
    for (const auto& [name, f] : kSampleFields) row[name] = q.*f;
    samples.push_back(row);
  }
  j["queue_depth"] = samples;
  json traces = json::array();
  for (const auto& t : r.traces) {
    json row = {{"tenant", t.tenant}, {"pod", t.pod}};
    for (const auto& [name, f] : kTraceFields) row[name] = t.*f;
    traces.push_back(row);
  }
  j["traces"] = traces;
  return j.dump(1);
}

absl::StatusOr<Report> ReportFromJson(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return ParseError("not JSON");
  try {
    Report r;
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& e : j.at("scenario")) {
      kv.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    }
    auto scenario = ParseScenario(ScenarioText(kv), /*validate=*/false);
    if (!scenario.ok()) return scenario.status();
    r.scenario = *scenario;
    for (const auto& s : Scalars()) {
      if (s.i) {
        r.*(s.i) = j.at(s.key).get<int64_t>();
      } else {
        r.*(s.d) = j.at(s.key).get<double>();
      }
    }
    r.total = StatsFromJson(j.at("total"));
    r.total_hist = j.at("total").at("histogram").get<Histogram>();
    const json& phases = j.at("phases");
    if (phases.size() != kNumPhases) return ParseError("phase count");
    for (int i = 0; i < kNumPhases; ++i) {
      r.phases[i] = StatsFromJson(phases[i]);
      r.phase_hist[i] = phases[i].at("histogram").get<Histogram>();
    }
    for (const auto& t : j.at("tenants")) {
      r.tenants.push_back({t.at("tenant").get<std::string>(),
                           t.at("group").get<std::string>(),
                           t.at("pods").get<int64_t>(),
                           t.at("ready").get<int64_t>(),
                           t.at("mean_s").get<double>()});
    }
    for (const auto& row : j.at("queue_depth")) {
      QueueSample q;
      for (const auto& [name, f] : kSampleFields) {
        q.*f = row.at(name).get<int64_t>();
      }
      r.queue_depth.push_back(q);
    }
    for (const auto& row : j.at("traces")) {
      PhaseTrace t;
      t.tenant = row.at("tenant").get<std::string>();
      t.pod = row.at("pod").get<std::string>();
      for (const auto& [name, f] : kTraceFields) {
        t.*f = row.at(name).get<int64_t>();
      }
      r.traces.push_back(std::move(t));
    }
    return r;
  } catch (const json::exception& e) {
    return ParseError(e.what());
  }
}

absl::Status WriteReportJson(const Report& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << ReportToJson(r) << '\n';
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::Status WriteReportCsv(const Report& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  auto open = [&](const char* name, std::ofstream& out) -> absl::Status {
    std::string path = absl::StrCat(dir, "/", name);
    out.open(path);
    if (!out) {
      return absl::UnavailableError(absl::StrCat("cannot write ", path));
    }
    return absl::OkStatus();
  };

  std::ofstream summary;
  if (auto s = open("summary.csv", summary); !s.ok()) return s;
  summary << "key,value\n";
  for (const auto& s : Scalars()) {
    summary << s.key << ','
            << (s.i ? absl::StrCat(r.*(s.i)) : FormatDouble(r.*(s.d)))
            << '\n';
  }
  auto stat_rows = [&](const std::string& prefix, const LatencyStats& st) {
    auto v = StatValues(st);
    for (size_t i = 0; i < kStatNames.size(); ++i) {
      summary << prefix << '.' << kStatNames[i] << ',' << FormatDouble(v[i])
              << '\n';
    }
  };
  stat_rows("total", r.total);
  for (int i = 0; i < kNumPhases; ++i) stat_rows(kPhaseNames[i], r.phases[i]);
  for (const auto& [k, v] : ScenarioFields(r.scenario)) {
    summary << "scenario." << k << ',' << v << '\n';
  }

  std::ofstream hist;
  if (auto s = open("histogram.csv", hist); !s.ok()) return s;
  hist << "phase";
  for (int b = 0; b < kHistogramBuckets; ++b) hist << ',' << BucketLabel(b);
  hist << '\n';
  auto hist_row = [&](const char* name, const Histogram& h) {
    hist << name << ',' << absl::StrJoin(h, ",") << '\n';
  };
  for (int i = 0; i < kNumPhases; ++i) {
    hist_row(kPhaseNames[i], r.phase_hist[i]);
  }
  hist_row("Total", r.total_hist);

  std::ofstream tenants;
  if (auto s = open("tenants.csv", tenants); !s.ok()) return s;
  tenants << "tenant,group,pods,ready,mean_s\n";
  for (const auto& t : r.tenants) {
    tenants << t.tenant << ',' << t.group << ',' << t.pods << ',' << t.ready
            << ',' << FormatDouble(t.mean_s) << '\n';
  }

  std::ofstream queue;
  if (auto s = open("queue_depth.csv", queue); !s.ok()) return s;
  std::vector<std::string> names;
  for (const auto& [name, f] : kSampleFields) names.push_back(name);
  queue << absl::StrJoin(names, ",") << '\n';
  for (const auto& q : r.queue_depth) {
    std::vector<int64_t> row;
    for (const auto& [name, f] : kSampleFields) row.push_back(q.*f);
    queue << absl::StrJoin(row, ",") << '\n';
  }

  std::ofstream traces;
  if (auto s = open("traces.csv", traces); !s.ok()) return s;
  traces << "tenant,pod";
  for (const auto& [name, f] : kTraceFields) traces << ',' << name;
  traces << '\n';
  for (const auto& t : r.traces) {
    traces << t.tenant << ',' << t.pod;
    for (const auto& [name, f] : kTraceFields) traces << ',' << t.*f;
    traces << '\n';
  }

  for (std::ofstream* f : {&summary, &hist, &tenants, &queue, &traces}) {
    f->flush();
    if (!*f) return absl::DataLossError(absl::StrCat("write failed in ", dir));
  }
  return absl::OkStatus();
}

absl::StatusOr<Report> ReadReportCsv(const std::string& dir) {
  Report r;
  auto summary = ReadRows(dir + "/summary.csv", 2);
  if (!summary.ok()) return summary.status();
  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, std::string>> scenario_kv;
  for (const auto& row : *summary) {
    if (absl::StartsWith(row[0], "scenario.")) {
      scenario_kv.emplace_back(row[0].substr(9), row[1]);
    } else {
      kv[row[0]] = row[1];
    }
  }
  auto scenario = ParseScenario(ScenarioText(scenario_kv), false);
  if (!scenario.ok()) return scenario.status();
  r.scenario = *scenario;
  auto lookup = [&](const std::string& key) -> absl::StatusOr<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return ParseError(absl::StrCat("missing ", key));
    return it->second;
  };
  for (const auto& s : Scalars()) {
    auto v = lookup(s.key);
    if (!v.ok()) return v.status();
    bool ok = s.i ? ParseI64(*v, &(r.*(s.i))) : ParseF64(*v, &(r.*(s.d)));
    if (!ok) return ParseError(s.key);
  }
  auto read_stats = [&](const std::string& prefix,
                        LatencyStats& st) -> absl::Status {
    auto f = StatFields(st);
    for (size_t i = 0; i < kStatNames.size(); ++i) {
      auto v = lookup(absl::StrCat(prefix, ".", kStatNames[i]));
      if (!v.ok()) return v.status();
      if (!ParseF64(*v, f[i])) return ParseError(prefix);
    }
    return absl::OkStatus();
  };
  if (auto s = read_stats("total", r.total); !s.ok()) return s;
  for (int i = 0; i < kNumPhases; ++i) {
    if (auto s = read_stats(kPhaseNames[i], r.phases[i]); !s.ok()) return s;
  }

  auto hist = ReadRows(dir + "/histogram.csv", 1 + kHistogramBuckets);
  if (!hist.ok()) return hist.status();
  if (hist->size() != kNumPhases + 1) return ParseError("histogram rows");
  for (size_t row = 0; row < hist->size(); ++row) {
    Histogram& h = row < kNumPhases ? r.phase_hist[row] : r.total_hist;
    for (int b = 0; b < kHistogramBuckets; ++b) {
      if (!ParseI64((*hist)[row][b + 1], &h[b])) return ParseError("bucket");
    }
  }

  auto tenants = ReadRows(dir + "/tenants.csv", 5);
  if (!tenants.ok()) return tenants.status();
  for (const auto& row : *tenants) {
    TenantSummary t{row[0], row[1]};
    if (!ParseI64(row[2], &t.pods) || !ParseI64(row[3], &t.ready) ||
        !ParseF64(row[4], &t.mean_s)) {
      return ParseError("tenant row");
    }
    r.tenants.push_back(std::move(t));
  }

  auto queue = ReadRows(dir + "/queue_depth.csv", kSampleFields.size());
  if (!queue.ok()) return queue.status();
  for (const auto& row : *queue) {
    QueueSample q;
    for (size_t i = 0; i < kSampleFields.size(); ++i) {
      if (!ParseI64(row[i], &(q.*(kSampleFields[i].second)))) {
        return ParseError("queue sample");
      }
    }
    r.queue_depth.push_back(q);
  }

  auto traces = ReadRows(dir + "/traces.csv", 2 + kTraceFields.size());
  if (!traces.ok()) return traces.status();
  for (const auto& row : *traces) {
    PhaseTrace t;
    t.tenant = row[0];
    t.pod = row[1];
    for (size_t i = 0; i < kTraceFields.size(); ++i) {
      if (!ParseI64(row[2 + i], &(t.*(kTraceFields[i].second)))) {
        return ParseError("trace");
      }
    }
    r.traces.push_back(std::move(t));
  }
  return r;
}

std::string RenderHistogramTable(const Report& r) {
  std::string out = absl::StrFormat("%-12s", "phase");
  for (int b = 0; b < kHistogramBuckets; ++b) {
    absl::StrAppend(&out, absl::StrFormat("%10s", BucketLabel(b)));
  }
  absl::StrAppend(&out, "\n");
  auto row = [&](const char* name, const Histogram& h) {
    absl::StrAppend(&out, absl::StrFormat("%-12s", name));
    for (int64_t c : h) absl::StrAppend(&out, absl::StrFormat("%10d", c));
    absl::StrAppend(&out, "\n");
  };
  for (int i = 0; i < kNumPhases; ++i) row(kPhaseNames[i], r.phase_hist[i]);
  row("Total", r.total_hist);
  return out;
}

}  // namespace vcsim
