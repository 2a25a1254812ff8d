#pragma once

#include <nlohmann/json.hpp>

#include "dmacap/metrics.hpp"
#include "dmacap/scenario.hpp"
#include "dmacap/simulation.hpp"

namespace dmacap
{

  nlohmann::json to_json(const ExposureRow& row);
  nlohmann::json to_json(const CounterReport& counters);
  nlohmann::json to_json(const FaultEvent& fault);
  nlohmann::json to_json(const DeliveredNotification& n);

  /// Notes on the region schema of the active mode.
  std::string mode_notes(KernelMode mode);

  /// Full report of a finished run.
  nlohmann::json run_report(const Simulation& sim);

  /// 0 when no fault was observed, 3 otherwise.
  int run_exit_code(const Simulation& sim);

  /// Standard and worst-case exposure of every unprivileged task.
  nlohmann::json metrics_report(Simulation& sim);

  struct LintOutcome
  {
    nlohmann::json report;
    bool failed = false;
  };

  /// Creation rules and descriptor legality for every task, no simulation.
  LintOutcome lint_scenario(const Scenario& scenario);

}
