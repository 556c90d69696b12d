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

#include "vcsim/harness/scenario.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "vcsim/core/tenant.h"

namespace vcsim {
namespace {

using Setter = std::function<absl::Status(Scenario&, const std::string&)>;
using Getter = std::function<std::string(const Scenario&)>;

struct Field {
  const char* key;
  Getter get;
  Setter set;
};

absl::Status Bad(const std::string& key, const std::string& value) {
  return absl::InvalidArgumentError(
      absl::StrCat("bad value '", value, "' for ", key));
}

template <typename T>
Field IntField(const char* key, T Scenario::*member) {
  return {key,
          [member](const Scenario& s) { return absl::StrCat(s.*member); },
          [key, member](Scenario& s, const std::string& v) {
            int64_t x;
            if (!absl::SimpleAtoi(v, &x)) return Bad(key, v);
            s.*member = static_cast<T>(x);
            return absl::OkStatus();
          }};
}

Field DoubleField(const char* key, double Scenario::*member) {
  return {key,
          [member](const Scenario& s) { return FormatDouble(s.*member); },
          [key, member](Scenario& s, const std::string& v) {
            double x;
            if (!absl::SimpleAtod(v, &x) || !std::isfinite(x)) {
              return Bad(key, v);
            }
            s.*member = x;
            return absl::OkStatus();
          }};
}

Field BoolField(const char* key, bool Scenario::*member) {
  return {key,
          [member](const Scenario& s) {
            return std::string(s.*member ? "on" : "off");
          },
          [key, member](Scenario& s, const std::string& v) {
            if (v == "on" || v == "true" || v == "1") {
              s.*member = true;
            } else if (v == "off" || v == "false" || v == "0") {
              s.*member = false;
            } else {
              return Bad(key, v);
            }
            return absl::OkStatus();
          }};
}

const std::vector<Field>& Fields() {
  static const auto* fields = new std::vector<Field>{
      IntField("seed", &Scenario::seed),
      {"clock",
       [](const Scenario& s) { return std::string(ClockModeName(s.clock)); },
       [](Scenario& s, const std::string& v) {
         if (v == "simulated") {
           s.clock = ClockMode::kSimulated;
         } else if (v == "realtime") {
           s.clock = ClockMode::kRealtime;
         } else {
           return Bad("clock", v);
         }
         return absl::OkStatus();
       }},
      {"mode",
       [](const Scenario& s) {
         return std::string(s.baseline_mode ? "baseline" : "syncer");
       },
       [](Scenario& s, const std::string& v) {
         if (v == "baseline") {
           s.baseline_mode = true;
         } else if (v == "syncer") {
           s.baseline_mode = false;
         } else {
           return Bad("mode", v);
         }
         return absl::OkStatus();
       }},
      IntField("downward_workers", &Scenario::downward_workers),
      IntField("upward_workers", &Scenario::upward_workers),
      BoolField("fair_queuing", &Scenario::fair_queuing),
      IntField("admission_window", &Scenario::admission_window),
      DoubleField("dws_process_ms", &Scenario::dws_process_ms),
      DoubleField("uws_process_ms", &Scenario::uws_process_ms),
      DoubleField("informer_lag_min_ms", &Scenario::informer_lag_min_ms),
      DoubleField("informer_lag_max_ms", &Scenario::informer_lag_max_ms),
      IntField("nodes", &Scenario::nodes),
      IntField("node_capacity", &Scenario::node_capacity),
      DoubleField("scheduler_service_time_ms",
                  &Scenario::scheduler_service_time_ms),
      DoubleField("kubelet_ready_delay_ms", &Scenario::kubelet_ready_delay_ms),
      DoubleField("rule_latency_ms", &Scenario::rule_latency_ms),
      DoubleField("proxy_scan_cost_ms", &Scenario::proxy_scan_cost_ms),
      IntField("services_per_tenant", &Scenario::services_per_tenant),
      DoubleField("tenant_qps", &Scenario::tenant_qps),
      IntField("tenant_burst", &Scenario::tenant_burst),
      DoubleField("deadline_s", &Scenario::deadline_s),
      DoubleField("sample_interval_ms", &Scenario::sample_interval_ms),
  };
  return *fields;
}

TenantGroup& GroupNamed(Scenario& s, const std::string& name) {
  for (auto& g : s.groups) {
    if (g.name == name) return g;
  }
  s.groups.push_back(TenantGroup{name});
  return s.groups.back();
}

absl::Status SetGroupField(Scenario& s, const std::string& key,
                           const std::string& value) {
  // group.<name>.<field>
  std::vector<std::string> parts = absl::StrSplit(key, '.');
  if (parts.size() != 3 || parts[1].empty()) {
    return absl::InvalidArgumentError(absl::StrCat("bad group key ", key));
  }
  TenantGroup& g = GroupNamed(s, parts[1]);
  const std::string& field = parts[2];
  int64_t x = 0;
  if (field == "load") {
    if (value == "burst") {
      g.load = LoadPattern::kBurst;
    } else if (value == "sequential") {
      g.load = LoadPattern::kSequential;
    } else {
      return Bad(key, value);
    }
    return absl::OkStatus();
  }
  if (!absl::SimpleAtoi(value, &x)) return Bad(key, value);
  if (field == "tenants") {
    g.tenants = static_cast<int>(x);
  } else if (field == "pods") {
    g.pods = static_cast<int>(x);
  } else if (field == "weight") {
    g.weight = static_cast<int>(x);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown key ", key));
  }
  return absl::OkStatus();
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string_view LoadPatternName(LoadPattern p) {
  return p == LoadPattern::kBurst ? "burst" : "sequential";
}

std::string_view ClockModeName(ClockMode c) {
  return c == ClockMode::kSimulated ? "simulated" : "realtime";
}

int Scenario::tenants_total() const {
  int n = 0;
  for (const auto& g : groups) n += g.tenants;
  return n;
}

int Scenario::pods_total() const {
  int n = 0;
  for (const auto& g : groups) n += g.tenants * g.pods;
  return n;
}

absl::Status Scenario::Validate() const {
  if (groups.empty()) {
    return absl::InvalidArgumentError("scenario has no tenant groups");
  }
  for (const auto& g : groups) {
    if (!IsDnsLabel(g.name) || g.name.size() > 20) {
      return absl::InvalidArgumentError(
          absl::StrCat("group name '", g.name, "' must be a short DNS label"));
    }
    if (g.tenants < 1 || g.pods < 0 || g.weight < 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "group ", g.name, " needs tenants >= 1, pods >= 0, weight >= 1"));
    }
  }
  if (downward_workers < 1 || upward_workers < 1) {
    return absl::InvalidArgumentError("worker counts must be >= 1");
  }
  if (nodes < 1 || node_capacity < 1) {
    return absl::InvalidArgumentError("nodes and node_capacity must be >= 1");
  }
  if (admission_window < 0 || services_per_tenant < 0 || tenant_burst < 0 ||
      tenant_qps < 0) {
    return absl::InvalidArgumentError("negative setting");
  }
  if (scheduler_service_time_ms <= 0) {
    return absl::InvalidArgumentError("scheduler_service_time_ms must be > 0");
  }
  if (informer_lag_min_ms < 0 || informer_lag_max_ms < informer_lag_min_ms) {
    return absl::InvalidArgumentError("informer lag range is empty");
  }
  if (dws_process_ms < 0 || uws_process_ms < 0 || rule_latency_ms < 0 ||
      proxy_scan_cost_ms < 0 || kubelet_ready_delay_ms < 0) {
    return absl::InvalidArgumentError("durations must be >= 0");
  }
  if (deadline_s <= 0 || sample_interval_ms <= 0) {
    return absl::InvalidArgumentError(
        "deadline_s and sample_interval_ms must be > 0");
  }
  if (tenant_qps > 0 && tenant_burst < 1) {
    return absl::InvalidArgumentError("tenant_burst must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<Scenario> ParseScenario(std::string_view text, bool validate) {
  Scenario s;
  int line_no = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    absl::string_view line = raw;
    if (auto hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected key = value"));
    }
    std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    std::string value(absl::StripAsciiWhitespace(line.substr(eq + 1)));
    absl::Status st;
    if (absl::StartsWith(key, "group.")) {
      st = SetGroupField(s, key, value);
    } else {
      st = absl::InvalidArgumentError(absl::StrCat("unknown key ", key));
      for (const auto& f : Fields()) {
        if (key == f.key) {
          st = f.set(s, value);
          break;
        }
      }
    }
    if (!st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", st.message()));
    }
  }
  if (validate) {
    if (absl::Status v = s.Validate(); !v.ok()) return v;
  }
  return s;
}

absl::StatusOr<Scenario> LoadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseScenario(buf.str());
}

std::vector<std::pair<std::string, std::string>> ScenarioFields(
    const Scenario& s) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : Fields()) out.emplace_back(f.key, f.get(s));
  for (const auto& g : s.groups) {
    std::string p = absl::StrCat("group.", g.name, ".");
    out.emplace_back(p + "tenants", absl::StrCat(g.tenants));
    out.emplace_back(p + "pods", absl::StrCat(g.pods));
    out.emplace_back(p + "load", std::string(LoadPatternName(g.load)));
    out.emplace_back(p + "weight", absl::StrCat(g.weight));
  }
  return out;
}

std::string FormatScenario(const Scenario& s) {
  std::string out;
  for (const auto& [k, v] : ScenarioFields(s)) {
    absl::StrAppend(&out, k, " = ", v, "\n");
  }
  return out;
}

}  // namespace vcsim
