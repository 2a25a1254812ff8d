// dmacap: run, lint or measure a scenario of the DMA capability simulator.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmacap/errors.hpp"
#include "dmacap/report.hpp"

namespace
{
  constexpr int kExitInput = 1;
  constexpr int kExitLint = 2;

  struct Flags
  {
    std::string scenario;
    std::optional<std::uint64_t> ticks;
    bool trace = false;
    std::string out;
    std::string mode;
    std::vector<std::string> toggles;
  };

  dmacap::ScenarioOverrides overrides(const Flags& f)
  {
    dmacap::ScenarioOverrides o;
    if (not f.mode.empty())
      o.mode = dmacap::parse_mode(f.mode);
    for (const auto& t : f.toggles)
      {
        auto eq = t.find('=');
        if (eq == std::string::npos)
          throw dmacap::SchemaError("--toggle expects name=on|off, got '" + t + "'");
        auto value = t.substr(eq + 1);
        if (value != "on" and value != "off")
          throw dmacap::SchemaError("--toggle value must be on or off");
        o.toggles[t.substr(0, eq)] = value == "on";
      }
    return o;
  }

  void emit(const nlohmann::json& doc, const std::string& path)
  {
    auto text = doc.dump(2) + "\n";
    if (path.empty())
      {
        std::cout << text;
        return;
      }
    std::ofstream out(path);
    if (not out)
      throw dmacap::SchemaError("cannot write " + path);
    out << text;
  }

  void addCommon(CLI::App* sub, Flags& f)
  {
    sub->add_option("scenario", f.scenario, "Scenario file")->required();
    sub->add_option("--out", f.out, "Write the report here instead of stdout");
    sub->add_option("--mode", f.mode, "Override the kernel mode")
      ->check(CLI::IsMember({"DBOX", "FMPU_COMPAT"}));
    sub->add_option("--toggle", f.toggles, "Set an attack toggle, name=on|off");
  }
}

int main(int argc, char** argv)
{
  CLI::App app{"DMA capability simulator"};
  app.require_subcommand(1);
  Flags flags;

  auto* run = app.add_subcommand("run", "Simulate the scenario and report");
  addCommon(run, flags);
  run->add_option("--ticks", flags.ticks, "Tick limit");
  run->add_flag("--trace", flags.trace, "Print the event trace to stderr");

  auto* check = app.add_subcommand("check", "Apply creation rules without simulating");
  addCommon(check, flags);

  auto* metrics = app.add_subcommand("metrics", "Standard and worst-case exposure per task");
  addCommon(metrics, flags);

  try
    {
      app.parse(argc, argv);
    }
  catch (const CLI::ParseError& e)
    {
      int rc = app.exit(e);
      return rc == 0 ? 0 : kExitInput;
    }

  try
    {
      auto scenario = dmacap::load_scenario_file(flags.scenario, overrides(flags));

      if (check->parsed())
        {
          auto outcome = dmacap::lint_scenario(scenario);
          emit(outcome.report, flags.out);
          return outcome.failed ? kExitLint : 0;
        }

      dmacap::Simulation sim(std::move(scenario));
      if (metrics->parsed())
        {
          emit(dmacap::metrics_report(sim), flags.out);
          return 0;
        }

      dmacap::RunOptions options;
      options.ticks = flags.ticks;
      sim.run(options);
      if (flags.trace)
        sim.trace().write(std::cerr);
      emit(dmacap::run_report(sim), flags.out);
      return dmacap::run_exit_code(sim);
    }
  catch (const dmacap::Error& e)
    {
      std::cerr << "dmacap: " << e.what() << "\n";
      return kExitInput;
    }
  catch (const nlohmann::json::exception& e)
    {
      std::cerr << "dmacap: " << e.what() << "\n";
      return kExitInput;
    }
}
