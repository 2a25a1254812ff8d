#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmacap/dma_types.hpp"

namespace dmacap
{

  struct CreationCost
  {
    TaskId task = -1;
    std::string name;
    std::size_t existingTasks = 0;
    std::uint64_t checks = 0;
    bool voided = false;

    bool operator==(const CreationCost&) const = default;
  };

  struct ValidationCost
  {
    std::uint64_t requestSeq = 0;
    TaskId task = -1;
    std::string peripheralId;
    DmaOperation operation = DmaOperation::Read;
    std::uint64_t checks = 0;

    bool operator==(const ValidationCost&) const = default;
  };

  /// Abstract cost counters; monotone over a run.
  struct CounterReport
  {
    std::uint64_t contextSwitches = 0;
    std::uint64_t dynamicRegionsWritten = 0;
    std::uint64_t svcEvents = 0;
    std::vector<CreationCost> creationChecks;
    std::vector<ValidationCost> validationChecks;

    bool operator==(const CounterReport&) const = default;
  };

}
