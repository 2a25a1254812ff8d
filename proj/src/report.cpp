#include "dmacap/report.hpp"

#include <cmath>

#include "dmacap/errors.hpp"

namespace dmacap
{

  using nlohmann::json;

  namespace
  {
    double rounded(double v) { return std::round(v * 10000.0) / 10000.0; }

    json regionsJson(const std::vector<UserRegion>& regions)
    {
      json out = json::array();
      for (const auto& r : regions)
        out.push_back(json{{"base", hex(r.range.base)},
                           {"size", hex(r.range.size)},
                           {"priv", to_string(r.permission.privileged)},
                           {"unpriv", to_string(r.permission.unprivileged)},
                           {"xn", r.permission.executeNever}});
      return out;
    }

    json tasksJson(const Kernel& kernel)
    {
      json out = json::array();
      for (const auto& t : kernel.tasks())
        out.push_back(json{{"id", t.id},
                           {"name", t.name},
                           {"privileged", t.privileged},
                           {"state", to_string(t.state)},
                           {"cycles_completed", t.cyclesCompleted},
                           {"deadline_misses", t.deadlineMisses},
                           {"pending_notifications", t.notificationBox.size()}});
      return out;
    }
  }

  json to_json(const ExposureRow& row)
  {
    json areas = json::object();
    for (auto a : kAllAreas)
      {
        const auto& e = row.at(a);
        areas[std::string(to_string(a))] =
          json{{"exposed_bytes", e.exposed}, {"total_bytes", e.total}, {"ratio", rounded(e.ratio())}};
      }
    return json{{"task", row.task},
                {"name", row.name},
                {"variant", row.variant},
                {"areas", areas},
                {"dma_controller_exposed", row.dmaControllerExposed},
                {"exposed_executable_flash_bytes", row.executableFlashExposed},
                {"user_regions", regionsJson(row.userRegions)}};
  }

  json to_json(const CounterReport& c)
  {
    json creation = json::array();
    for (const auto& x : c.creationChecks)
      creation.push_back(json{{"task", x.task},
                              {"name", x.name},
                              {"existing_tasks", x.existingTasks},
                              {"checks", x.checks},
                              {"voided", x.voided}});
    json validation = json::array();
    for (const auto& x : c.validationChecks)
      validation.push_back(json{{"request", x.requestSeq},
                                {"task", x.task},
                                {"peripheral", x.peripheralId},
                                {"operation", to_string(x.operation)},
                                {"checks", x.checks}});
    return json{{"context_switches", c.contextSwitches},
                {"dynamic_regions_written", c.dynamicRegionsWritten},
                {"svc_events", c.svcEvents},
                {"creation_intersection_checks", creation},
                {"validation_checks", validation}};
  }

  json to_json(const FaultEvent& f)
  {
    return json{{"tick", f.tick}, {"task", f.task}, {"kind", to_string(f.kind)}, {"detail", f.detail}};
  }

  json to_json(const DeliveredNotification& d)
  {
    const auto& n = d.notification;
    json out{{"tick", d.tick},
             {"task", d.task},
             {"request", n.requestSeq},
             {"channel", n.channel},
             {"status", to_string(n.status)},
             {"peripheral", n.peripheralId},
             {"operation", to_string(n.operation)}};
    if (n.status == NotificationStatus::Rejected)
      out["reason"] = to_string(n.reason);
    if (not n.label.empty())
      out["label"] = n.label;
    return out;
  }

  std::string mode_notes(KernelMode mode)
  {
    if (mode == KernelMode::DBox)
      return "DBOX: 0 syscalls RO/RO X, 1 task code RO/RO X, 2 stack RW/RW XN, 3-5 user regions, "
             "6 kernel code priv RO X, 7 kernel data priv RW XN; 5 slots rewritten per switch";
    return "FMPU_COMPAT (approximation of the F-MPU slot layout): 0 flash RO/RO X, "
           "1 kernel code priv-only, 2 kernel data priv-only, 3 peripheral partition RW/RW XN, "
           "4 stack, 5-7 user regions; 4 slots rewritten per switch; creation rules skipped";
  }

  json run_report(const Simulation& sim)
  {
    const auto& kernel = sim.kernel();
    json faults = json::array();
    for (const auto& f : kernel.faults())
      faults.push_back(to_json(f));
    json notes = json::array();
    for (const auto& n : sim.service().delivered())
      notes.push_back(to_json(n));

    json exposureRows = json::array();
    if (sim.booted())
      for (const auto& t : kernel.tasks())
        if (not t.privileged and t.state != TaskState::Voided)
          exposureRows.push_back(
            to_json(exposure(t, kernel.build_mpu_configuration(t), kernel.profile(), kernel.layout())));

    json canary = nullptr;
    if (const auto& c = sim.scenario().canary)
      {
        auto now = *sim.canary_value();
        canary = json{{"addr", hex(c->addr)}, {"expected", c->value}, {"actual", now},
                      {"intact", now == c->value}};
      }

    json toggles = json::object();
    for (const auto& [k, v] : sim.scenario().attackToggles)
      toggles[k] = v;

    return json{{"scenario", sim.scenario().name},
                {"mode", to_string(kernel.layout().mode)},
                {"mode_notes", mode_notes(kernel.layout().mode)},
                {"attack_toggles", toggles},
                {"termination", to_string(sim.termination())},
                {"ticks_executed", sim.ticks_executed()},
                {"faults", faults},
                {"notifications", notes},
                {"exposure", exposureRows},
                {"counters", to_json(kernel.counters())},
                {"tasks", tasksJson(kernel)},
                {"kernel_canary", canary}};
  }

  int run_exit_code(const Simulation& sim)
  {
    return sim.kernel().faults().empty() ? 0 : 3;
  }

  json metrics_report(Simulation& sim)
  {
    sim.boot();
    const auto& kernel = sim.kernel();
    json rows = json::array();
    for (const auto& t : kernel.tasks())
      {
        if (t.privileged or t.state == TaskState::Voided)
          continue;
        auto [standard, worst] = exposure_pair(t, kernel);
        rows.push_back(to_json(standard));
        rows.push_back(to_json(worst));
      }
    return json{{"scenario", sim.scenario().name},
                {"mode", to_string(kernel.layout().mode)},
                {"mode_notes", mode_notes(kernel.layout().mode)},
                {"assumptions", sim.scenario().description},
                {"exposure", rows},
                {"exposed_executable_flash_bytes_note",
                 "proxy for code-reuse surface, not a gadget count"}};
  }

  LintOutcome lint_scenario(const Scenario& scenario)
  {
    LintOutcome out;
    Kernel kernel(scenario.profile, scenario.layout);
    KernelLayout strict = scenario.layout;
    strict.mode = KernelMode::DBox;

    json tasks = json::array();
    for (const auto& spec : scenario.tasks)
      {
        json entry{{"name", spec.name}};
        json problems = json::array();
        json warnings = json::array();

        auto illegal = [&](const AddressRange& r, const std::string& what) {
          if (not is_legal_region(r))
            problems.push_back(json{{"rule", "descriptor_legality"},
                                    {"detail", what + " " + to_string(r) + " is not a legal MPU region"}});
        };
        illegal(spec.codeRegion, "code");
        illegal(spec.stackRegion, "stack");
        for (std::size_t i = 0; i < spec.userRegions.size(); ++i)
          {
            illegal(spec.userRegions[i].range, "user[" + std::to_string(i) + "]");
            if (not spec.userRegions[i].permission.valid())
              problems.push_back(json{{"rule", "descriptor_legality"},
                                      {"detail", "user[" + std::to_string(i) +
                                                   "] grants unprivileged more than privileged"}});
          }
        if (spec.userRegions.size() > kMaxUserRegions)
          problems.push_back(json{{"rule", "descriptor_legality"}, {"detail", "more than 3 user regions"}});

        if (not problems.empty())
          {
            entry["status"] = "ILLEGAL";
            entry["violations"] = problems;
            out.failed = true;
            tasks.push_back(entry);
            continue;
          }

        if (scenario.layout.mode == KernelMode::FmpuCompat)
          {
            std::vector<const TaskRecord*> others;
            for (const auto& t : kernel.tasks())
              if (not t.dmaService and t.state != TaskState::Voided)
                others.push_back(&t);
            std::uint64_t ignored = 0;
            for (const auto& v : check_hardening_rules(spec.stackRegion, spec.userRegions, others,
                                                       scenario.profile, strict, ignored))
              warnings.push_back(json{{"rule", to_string(v.rule)}, {"detail", describe(v)}});
          }

        auto result = kernel.create_task(spec, 0);
        for (const auto& v : result.violations)
          problems.push_back(json{{"rule", to_string(v.rule)}, {"detail", describe(v)}});
        try
          {
            validate_configuration(kernel.build_mpu_configuration(kernel.task(result.id)));
          }
        catch (const Error& e)
          {
            problems.push_back(json{{"rule", "descriptor_legality"}, {"detail", e.what()}});
          }

        entry["status"] = result.voided ? "VOIDED" : (problems.empty() ? "OK" : "ILLEGAL");
        entry["creation_checks"] = result.checks;
        entry["violations"] = problems;
        if (not warnings.empty())
          entry["warnings"] = warnings;
        out.failed = out.failed or not problems.empty();
        tasks.push_back(entry);
      }

    out.report = json{{"scenario", scenario.name},
                      {"mode", to_string(scenario.layout.mode)},
                      {"mode_notes", mode_notes(scenario.layout.mode)},
                      {"tasks", tasks},
                      {"result", out.failed ? "FAIL" : "PASS"}};
    return out;
  }

}
