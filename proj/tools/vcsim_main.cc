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

// vcsim: runs syncer experiments and writes reports.
//
//   vcsim run --scenario scenarios/breakdown.conf --out out/
//   vcsim fairness --format csv --out out/
//   vcsim sweep --pods 1250,2500 --tenants 25,50,100 --baseline

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "vcsim/harness/report.h"
#include "vcsim/harness/runner.h"
#include "vcsim/harness/scenario.h"

namespace {

struct Overrides {
  std::optional<uint64_t> seed;
  std::string clock;
  std::string fair_queuing;
  std::optional<int> downward_workers;
  std::optional<int> upward_workers;
  std::string format = "json";
  std::string out = "vcsim-out";
};

void AddCommon(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "seed for every random choice");
  cmd->add_option("--clock", o.clock, "simulated or realtime")
      ->check(CLI::IsMember({"simulated", "realtime"}));
  cmd->add_option("--fair-queuing", o.fair_queuing, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--downward-workers", o.downward_workers)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--upward-workers", o.upward_workers)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "output directory");
}

void Apply(const Overrides& o, vcsim::Scenario& s) {
  if (o.seed) s.seed = *o.seed;
  if (!o.clock.empty()) {
    s.clock = o.clock == "realtime" ? vcsim::ClockMode::kRealtime
                                    : vcsim::ClockMode::kSimulated;
  }
  if (!o.fair_queuing.empty()) s.fair_queuing = o.fair_queuing == "on";
  if (o.downward_workers) s.downward_workers = *o.downward_workers;
  if (o.upward_workers) s.upward_workers = *o.upward_workers;
}

absl::Status Emit(const vcsim::Report& r, const Overrides& o,
                  const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", o.out, ": ", ec.message()));
  }
  absl::Status st =
      o.format == "json"
          ? vcsim::WriteReportJson(r, absl::StrCat(o.out, "/", name, ".json"))
          : vcsim::WriteReportCsv(r, absl::StrCat(o.out, "/", name));
  if (!st.ok()) return st;
  std::cout << name << ": " << r.pods_ready << "/" << r.pods_created
            << " pods ready, throughput " << r.throughput
            << " pods/s, mean " << r.total.mean_s << " s, p99 "
            << r.total.p99_s << " s\n"
            << vcsim::RenderHistogramTable(r);
  return absl::OkStatus();
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

int Fail(const absl::Status& st) {
  std::cerr << "vcsim: " << st << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tenant syncer simulator"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string scenario_path;
  CLI::App* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("--scenario", scenario_path, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  AddCommon(run, run_o);

  Overrides fair_o;
  CLI::App* fairness = app.add_subcommand(
      "fairness", "greedy vs regular tenants, fair queuing on and off");
  AddCommon(fairness, fair_o);

  Overrides sweep_o;
  std::vector<int> pods = {1250, 2500, 5000, 10000};
  std::vector<int> tenants = {25, 50, 100};
  bool baseline = false;
  CLI::App* sweep =
      app.add_subcommand("sweep", "throughput over pod and tenant counts");
  sweep->add_option("--pods", pods, "pod totals")->delimiter(',');
  sweep->add_option("--tenants", tenants, "tenant counts")->delimiter(',');
  sweep->add_flag("--baseline", baseline, "also run baseline mode");
  AddCommon(sweep, sweep_o);

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    auto s = vcsim::LoadScenarioFile(scenario_path);
    if (!s.ok()) return Fail(s.status());
    Apply(run_o, *s);
    auto r = vcsim::RunScenario(*s);
    if (!r.ok()) return Fail(r.status());
    std::string name = std::filesystem::path(scenario_path).stem().string();
    if (absl::Status st = Emit(*r, run_o, name); !st.ok()) return Fail(st);
  } else if (*fairness) {
    vcsim::Scenario s = vcsim::FairnessScenario(1);
    Apply(fair_o, s);
    auto r = vcsim::RunFairnessExperiment(s);
    if (!r.ok()) return Fail(r.status());
    for (auto [report, name] : {std::pair{&r->fq_on, "fq_on"},
                                std::pair{&r->fq_off, "fq_off"}}) {
      if (absl::Status st = Emit(*report, fair_o, name); !st.ok()) {
        return Fail(st);
      }
    }
  } else if (*sweep) {
    vcsim::Scenario s;
    Apply(sweep_o, s);
    auto rows = vcsim::RunThroughputSweep(pods, tenants, s, baseline);
    if (!rows.ok()) return Fail(rows.status());
    std::error_code ec;
    std::filesystem::create_directories(sweep_o.out, ec);
    bool json = sweep_o.format == "json";
    std::string text =
        json ? vcsim::SweepToJson(*rows) + "\n" : vcsim::SweepToCsv(*rows);
    absl::Status st = WriteText(
        absl::StrCat(sweep_o.out, "/sweep.", json ? "json" : "csv"), text);
    if (!st.ok()) return Fail(st);
    std::cout << vcsim::SweepToCsv(*rows);
  }
  return 0;
}
