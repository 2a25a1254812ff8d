#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dmacap/dma_types.hpp"

namespace dmacap
{

  enum class Subsystem
  { Kernel, Mpu, Dma, Policy, Isr };

  std::string_view to_string(Subsystem subsystem);

  struct TraceEvent
  {
    std::uint64_t tick = 0;
    Subsystem subsystem = Subsystem::Kernel;
    std::string event;
    TaskId task = -1;
    std::string detail;
  };

  /// Tab-separated line: tick, subsystem, event, task id, detail.
  std::string format_trace_line(const TraceEvent& e);

  /// Event log of one run. Always recorded; printing is the caller's choice.
  class Trace
  {
  public:
    void emit(std::uint64_t tick, Subsystem subsystem, std::string event, TaskId task,
              std::string detail = {});

    const std::vector<TraceEvent>& events() const { return events_; }

    void write(std::ostream& out) const;

  private:
    std::vector<TraceEvent> events_;
  };

}
