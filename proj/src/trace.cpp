#include "dmacap/trace.hpp"

namespace dmacap
{

  std::string_view to_string(Subsystem subsystem)
  {
    switch (subsystem)
      {
      case Subsystem::Kernel: return "KRN";
      case Subsystem::Mpu: return "MPU";
      case Subsystem::Dma: return "DMA";
      case Subsystem::Policy: return "POL";
      case Subsystem::Isr: return "ISR";
      }
    return "?";
  }

  std::string format_trace_line(const TraceEvent& e)
  {
    std::string line = std::to_string(e.tick);
    line += '\t';
    line += to_string(e.subsystem);
    line += '\t';
    line += e.event;
    line += '\t';
    line += std::to_string(e.task);
    line += '\t';
    line += e.detail;
    return line;
  }

  void Trace::emit(std::uint64_t tick, Subsystem subsystem, std::string event, TaskId task,
                   std::string detail)
  {
    events_.push_back(TraceEvent{tick, subsystem, std::move(event), task, std::move(detail)});
  }

  void Trace::write(std::ostream& out) const
  {
    for (const auto& e : events_)
      out << format_trace_line(e) << '\n';
  }

}
