#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dmacap/kernel.hpp"
#include "dmacap/task.hpp"

namespace dmacap
{

  /// A byte of kernel RAM seeded at boot so corruption can be observed.
  struct KernelCanary
  {
    Addr addr = 0;
    std::uint8_t value = 0;
  };

  struct Scenario
  {
    std::string name;
    std::string description;
    std::uint64_t ticks = 0;
    MemoryProfile profile;
    KernelLayout layout;
    std::optional<KernelCanary> canary;
    std::optional<std::size_t> requestQueueCapacity;
    std::vector<TaskSpec> tasks;
    std::map<std::string, bool> attackToggles;
  };

  struct ScenarioOverrides
  {
    std::optional<KernelMode> mode;
    std::map<std::string, bool> toggles;
  };

  /// Parse a scenario document. Actions gated on a toggle ("when") or its
  /// negation ("unless") are kept or dropped here. Throws SchemaError and
  /// the memmap/kernel errors on malformed input.
  Scenario load_scenario(const nlohmann::json& document, const ScenarioOverrides& overrides = {});

  Scenario load_scenario_file(const std::filesystem::path& path,
                              const ScenarioOverrides& overrides = {});

}
