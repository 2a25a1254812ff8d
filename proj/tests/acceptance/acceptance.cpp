// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <algorithm>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmacap/report.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "policy_grid.hpp"
#include "trace_audit.hpp"

using namespace dmacap;
using nlohmann::json;

namespace
{
  std::string scenarioPath(const std::string& name)
  { return std::string(DMACAP_SCENARIO_DIR) + "/" + name; }

  const std::vector<std::string> kShipped{"exposure_map.json", "microbench_creation.json",
                                          "plc.json", "dma_bypass.json"};

  struct Outcome
  {
    bool pass = false;
    std::string detail;
  };

  using Clock = std::chrono::steady_clock;

  const TaskRecord* byName(const Kernel& k, const std::string& name)
  {
    for (const auto& t : k.tasks())
      if (t.name == name)
        return &t;
    return nullptr;
  }

  Outcome tableStructure()
  {
    static const std::vector<std::string> areas{"flash-kernel", "flash-syscalls", "flash-user", "ram-kernel",
                                                "ram-user",     "periph-system",  "periph-standard"};
    std::ostringstream why;
    bool ok = true;
    json reports[2];
    int i = 0;
    for (auto mode : {KernelMode::DBox, KernelMode::FmpuCompat})
      {
        ScenarioOverrides o;
        o.mode = mode;
        Simulation sim(load_scenario_file(scenarioPath("exposure_map.json"), o));
        reports[i] = metrics_report(sim);
        std::size_t tasks = 0;
        for (const auto& t : sim.kernel().tasks())
          tasks += not t.privileged and t.state != TaskState::Voided;
        const auto& rows = reports[i]["exposure"];
        if (rows.size() != 2 * tasks or tasks == 0)
          {
            ok = false;
            why << to_string(mode) << ": " << rows.size() << " rows for " << tasks << " tasks; ";
          }
        for (const auto& row : rows)
          {
            for (const auto& a : areas)
              {
                const auto& cell = row["areas"][a];
                if (not cell.contains("exposed_bytes") or not cell.contains("total_bytes") or
                    not cell.contains("ratio"))
                  {
                    ok = false;
                    why << "missing " << a << "; ";
                  }
              }
            if (not row["dma_controller_exposed"].is_boolean() or
                not row["exposed_executable_flash_bytes"].is_number())
              ok = false;
          }
        ++i;
      }

    // DBOX keeps kernel memory and the controllers out of reach in both
    // variants; the permissive layout does not in its worst case.
    double compatKernel = 0;
    bool compatDma = false;
    for (const auto& row : reports[0]["exposure"])
      if (row["areas"]["ram-kernel"]["exposed_bytes"] != 0 or row["areas"]["flash-kernel"]["exposed_bytes"] != 0 or
          row["dma_controller_exposed"] == true)
        {
          ok = false;
          why << "DBOX row " << row["name"] << "/" << row["variant"] << " exposes kernel or DMA; ";
        }
    for (const auto& row : reports[1]["exposure"])
      if (row["variant"] == "worst_case")
        {
          compatKernel = std::max(compatKernel, row["areas"]["ram-kernel"]["ratio"].get<double>());
          compatDma = compatDma or row["dma_controller_exposed"].get<bool>();
        }
    if (compatKernel <= 0 or not compatDma)
      {
        ok = false;
        why << "FMPU_COMPAT worst case does not expose kernel RAM and DMA; ";
      }
    if (ok)
      why << "2 rows per task, 7 areas, DBOX kernel/DMA exposure 0, FMPU_COMPAT worst ram-kernel "
          << compatKernel << "%";
    return {ok, why.str()};
  }

  Outcome creationLinearity()
  {
    std::ostringstream why;
    bool ok = true;
    for (auto mode : {KernelMode::DBox, KernelMode::FmpuCompat})
      {
        ScenarioOverrides o;
        o.mode = mode;
        Simulation sim(load_scenario_file(scenarioPath("microbench_creation.json"), o));
        sim.boot();
        const auto& k = sim.kernel();
        std::vector<std::pair<std::int64_t, std::int64_t>> points;
        std::vector<std::size_t> existing;
        for (const auto& c : k.counters().creationChecks)
          {
            const auto& t = k.task(c.task);
            auto want = mode == KernelMode::DBox
                          ? oracle::expected_creation_checks(t.userRegions.size(), existing,
                                                             k.profile().dmaControllers().size(),
                                                             k.profile().descriptorHome == DescriptorHome::KernelRam)
                          : 0;
            if (c.checks != want or c.voided)
              {
                ok = false;
                why << to_string(mode) << " task " << c.name << ": " << c.checks << " checks, expected " << want
                    << "; ";
              }
            points.push_back({std::int64_t(c.existingTasks), std::int64_t(c.checks)});
            existing.push_back(t.userRegions.size());
          }
        if (points.size() != 9 or points.front().first != 0 or points.back().first != 8)
          {
            ok = false;
            why << "expected n = 0..8, got " << points.size() << " points; ";
            continue;
          }
        auto fit = fit_linear(points);
        if (not fit.exact or (mode == KernelMode::DBox ? fit.b <= 0 : fit.b != 0))
          {
            ok = false;
            why << to_string(mode) << " fit not exact (a=" << fit.a << " b=" << fit.b << "); ";
          }
        else
          why << to_string(mode) << " checks = " << fit.a << " + " << fit.b << "n; ";
      }
    return {ok, why.str()};
  }

  Outcome policyOracle()
  {
    grid::Setup s;
    auto all = grid::requests(s.tasks);
    std::set<std::string> peripherals;
    std::size_t mismatches = 0, accepted = 0;
    for (const auto& r : all)
      {
        const auto& t = s.kernel.task(r.requester);
        auto got = validate_request(r, t, s.profile);
        mismatches += not(got == oracle::brute_force_validate(r, t, s.profile));
        accepted += got.accepted();
        for (const auto& c : t.capabilities)
          peripherals.insert(c.peripheralId);
      }
    std::ostringstream why;
    why << all.size() << " requests, " << s.tasks.size() << " tasks, " << peripherals.size()
        << " peripherals, " << accepted << " accepted, " << mismatches << " mismatches";
    bool ok = mismatches == 0 and all.size() >= 5000 and s.tasks.size() == 2 and peripherals.size() == 3 and
              accepted > 0;
    return {ok, why.str()};
  }

  Outcome mpuOracle()
  {
    auto profile = fixtures::toy_profile();
    gen::Random r(0xACCE97);
    const int pairs = 10000;
    int mismatches = 0, allows = 0;
    for (int i = 0; i < pairs; ++i)
      {
        auto cfg = gen::configuration(r, profile);
        auto q = gen::query(r, cfg, profile);
        auto got = check_access(cfg, q, profile);
        mismatches += got != oracle::brute_force_check(cfg, q, profile);
        allows += got == AccessResult::Allow;
      }
    std::ostringstream why;
    why << pairs << " pairs, " << allows << " allowed, " << mismatches << " mismatches";
    return {mismatches == 0 and allows > 0, why.str()};
  }

  Outcome bypass()
  {
    std::ostringstream why;
    Simulation compat(load_scenario_file(scenarioPath("dma_bypass.json")));
    compat.run();
    bool corrupted = compat.canary_value() and *compat.canary_value() != compat.scenario().canary->value;
    why << to_string(compat.kernel().layout().mode) << " canary "
        << (corrupted ? "corrupted" : "intact") << "; ";

    ScenarioOverrides o;
    o.mode = KernelMode::DBox;
    Simulation dbox(load_scenario_file(scenarioPath("dma_bypass.json"), o));
    dbox.run();
    bool intact = dbox.canary_value() and *dbox.canary_value() == dbox.scenario().canary->value;
    const auto* attacker = byName(dbox.kernel(), "attacker");
    bool stopped = attacker and attacker->state == TaskState::Stopped;
    bool rejected = false;
    for (const auto& e : dbox.trace().events())
      rejected = rejected or (e.subsystem == Subsystem::Policy and e.event == "REJECT" and attacker and
                              e.task == attacker->id);
    why << "DBOX canary " << (intact ? "intact" : "corrupted") << ", attacker "
        << (stopped ? "STOPPED" : "running") << (rejected ? ", request REJECTED" : "");
    return {compat.kernel().layout().mode == KernelMode::FmpuCompat and corrupted and intact and
              (stopped or rejected),
            why.str()};
  }

  int cliExit(const std::string& args)
  {
    std::string cmd = std::string("\"") + DMACAP_CLI + "\" " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  Outcome plcContainment()
  {
    std::ostringstream why;
    Simulation clean(load_scenario_file(scenarioPath("plc.json")));
    clean.run();
    ScenarioOverrides o;
    o.toggles["modbus_compromised"] = true;
    Simulation attacked(load_scenario_file(scenarioPath("plc.json"), o));
    attacked.run();

    const auto* attacker = byName(attacked.kernel(), "modbus");
    const auto* plcClean = byName(clean.kernel(), "plc");
    const auto* plcAttacked = byName(attacked.kernel(), "plc");
    if (not attacker or not plcClean or not plcAttacked)
      return {false, "plc/modbus tasks missing"};

    // Requests the attacker issues that its capabilities do not cover.
    std::set<std::string> outOfCapability;
    for (const auto& a : attacker->behavior)
      if (a.kind == ActionKind::DmaRequest)
        {
          auto req = a.request;
          req.requester = attacker->id;
          if (not oracle::brute_force_validate(req, *attacker, attacked.kernel().profile()).accepted())
            outOfCapability.insert(a.label);
        }
    std::set<std::string> rejected, accepted;
    for (const auto& e : attacked.trace().events())
      if (e.subsystem == Subsystem::Policy and e.task == attacker->id)
        {
          auto pos = e.detail.find("label=");
          std::string label = pos == std::string::npos ? "" : e.detail.substr(pos + 6, e.detail.find(' ', pos) - pos - 6);
          (e.event == "REJECT" ? rejected : accepted).insert(label);
        }
    bool allRejected = not outOfCapability.empty();
    for (const auto& l : outOfCapability)
      allRejected = allRejected and rejected.count(l) and not accepted.count(l);

    int code = cliExit(scenarioPath("plc.json").insert(0, "run ") + " --toggle modbus_compromised=on");
    bool cycles = plcAttacked->cyclesCompleted == plcClean->cyclesCompleted and plcClean->cyclesCompleted > 0;
    why << outOfCapability.size() << " out-of-capability requests, " << rejected.size() << " rejected; plc cycles "
        << plcAttacked->cyclesCompleted << " vs " << plcClean->cyclesCompleted << " attack-free; exit " << code;
    return {allRejected and cycles and code == 3, why.str()};
  }

  Outcome exactlyOnce()
  {
    std::ostringstream why;
    bool ok = true;
    std::size_t runs = 0, accepted = 0, notified = 0;
    for (const auto& name : kShipped)
      for (bool attack : {false, true})
        for (auto mode : {KernelMode::DBox, KernelMode::FmpuCompat})
          {
            auto base = load_scenario_file(scenarioPath(name));
            ScenarioOverrides o;
            o.mode = mode;
            for (const auto& [t, v] : base.attackToggles)
              o.toggles[t] = attack;
            Simulation sim(load_scenario_file(scenarioPath(name), o));
            sim.run();
            auto r = audit::exactly_once(sim);
            ++runs;
            accepted += r.accepted;
            notified += r.completedNotified;
            if (not r.ok())
              {
                ok = false;
                why << name << ": " << r.problems.front() << "; ";
              }
          }
    why << runs << " runs, " << accepted << " accepted requests, " << notified << " completion notifications";
    return {ok and accepted > 0, why.str()};
  }

  Outcome dynamicRegions()
  {
    std::ostringstream why;
    bool ok = true;
    for (const auto& name : {"plc.json", "dma_bypass.json"})
      for (auto [mode, slots] : {std::pair{KernelMode::DBox, 5ull}, std::pair{KernelMode::FmpuCompat, 4ull}})
        {
          ScenarioOverrides o;
          o.mode = mode;
          Simulation sim(load_scenario_file(scenarioPath(name), o));
          sim.run();
          const auto& c = sim.kernel().counters();
          bool good = c.contextSwitches > 0 and c.dynamicRegionsWritten == slots * c.contextSwitches;
          ok = ok and good;
          why << name << " " << to_string(mode) << ": " << c.dynamicRegionsWritten << "/" << c.contextSwitches
              << "; ";
        }
    return {ok, why.str()};
  }

  struct Criterion
  {
    int number;
    std::string name;
    std::function<Outcome()> run;
    double limitSeconds;
  };
}

int main()
{
  const std::vector<Criterion> criteria{
    {1, "exposure table structure", tableStructure, 0},
    {2, "creation checks exactly linear for n = 0..8", creationLinearity, 0},
    {3, "policy agrees with the oracle", policyOracle, 30},
    {4, "MPU agrees with the oracle", mpuOracle, 30},
    {5, "DMA bypass demonstration", bypass, 0},
    {6, "PLC containment", plcContainment, 0},
    {7, "notifications exactly once", exactlyOnce, 0},
    {8, "dynamic regions per context switch", dynamicRegions, 0},
  };

  int failures = 0;
  for (const auto& c : criteria)
    {
      auto start = Clock::now();
      Outcome o;
      try
        {
          o = c.run();
        }
      catch (const std::exception& e)
        {
          o = {false, std::string("exception: ") + e.what()};
        }
      double secs = std::chrono::duration<double>(Clock::now() - start).count();
      if (c.limitSeconds > 0 and secs > c.limitSeconds)
        {
          o.pass = false;
          o.detail += " (over the " + std::to_string(int(c.limitSeconds)) + " s budget)";
        }
      std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.number << "] " << c.name << ": " << o.detail << " ("
                << std::fixed << std::setprecision(2) << secs << " s)\n";
      failures += not o.pass;
    }
  return failures == 0 ? 0 : 1;
}
