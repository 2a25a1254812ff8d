#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string_view>

#include "dmacap/byte_store.hpp"
#include "dmacap/dma.hpp"
#include "dmacap/dmatask.hpp"
#include "dmacap/kernel.hpp"
#include "dmacap/scenario.hpp"
#include "dmacap/trace.hpp"

namespace dmacap
{

  enum class Termination
  { Completed, Idle, TickLimit };

  std::string_view to_string(Termination t);

  struct RunOptions
  {
    /// Overrides the scenario horizon; stopping there is TICK_LIMIT.
    std::optional<std::uint64_t> ticks;
  };

  /// One scenario run: kernel, DMA service, engine and memory advanced in
  /// lock-step ticks. Holds self-references, so it is neither copied nor
  /// moved.
  class Simulation
  {
  public:
    explicit Simulation(Scenario scenario);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Create every task (tick 0) without running anything.
    void boot();

    Termination run(const RunOptions& options = {});

    const Scenario& scenario() const { return scenario_; }
    Kernel& kernel() { return kernel_; }
    const Kernel& kernel() const { return kernel_; }
    const DmaService& service() const { return service_; }
    const DmaEngine& engine() const { return engine_; }
    const ByteStore& memory() const { return memory_; }
    const Trace& trace() const { return trace_; }
    bool booted() const { return booted_; }
    std::uint64_t ticks_executed() const { return ticksExecuted_; }
    Termination termination() const { return termination_; }

    /// Current byte at the scenario's kernel canary, if one is declared.
    std::optional<std::uint8_t> canary_value() const;

  private:
    void release(std::uint64_t tick);
    void execute(TaskRecord& task, std::uint64_t tick);
    bool passGate(TaskRecord& task, const Action& action, std::uint64_t tick);
    void endOfScript(TaskRecord& task, std::uint64_t tick);
    std::optional<Termination> settled() const;

    Scenario scenario_;
    Trace trace_;
    Kernel kernel_;
    DmaEngine engine_;
    DmaService service_;
    ByteStore memory_;
    MpuConfiguration active_;
    std::optional<TaskId> running_;
    std::optional<TaskId> lastUser_;
    std::set<TaskId> waiting_;
    bool booted_ = false;
    std::uint64_t ticksExecuted_ = 0;
    Termination termination_ = Termination::TickLimit;
  };

}
