#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmacap/counters.hpp"
#include "dmacap/memmap.hpp"
#include "dmacap/mpu.hpp"
#include "dmacap/task.hpp"
#include "dmacap/trace.hpp"

namespace dmacap
{

  enum class KernelMode
  {
    DBox,         // hardened region schema with kernel slots on top
    FmpuCompat,   // permissive baseline, kernel slots at the bottom
  };

  struct KernelLayout
  {
    AddressRange syscallsRegion;
    AddressRange kernelCodeRegion;
    AddressRange kernelDataRegion;
    KernelMode mode = KernelMode::DBox;
    /// Transfer descriptor storage when the profile keeps descriptors in RAM.
    std::optional<AddressRange> descriptorArena;
    AddressRange dmaTaskCode;
    AddressRange dmaTaskStack;
  };

  /// Throws ConfigError / PartitionError when the layout does not fit the
  /// profile.
  void validate_layout(const KernelLayout& layout, const MemoryProfile& profile);

  enum class FaultKind
  {
    MpuViolation,
    DmaRequestRejected,
    RegionRedefinitionRejected,
    TaskCreationVoided,
  };

  struct FaultEvent
  {
    std::uint64_t tick = 0;
    TaskId task = -1;
    FaultKind kind = FaultKind::MpuViolation;
    std::string detail;
  };

  enum class HardeningRule
  {
    DmaControllerMmio,     // (a) region over a DMA controller slave interface
    KernelRegion,          // (b) region over kernel code or data
    OtherTaskStack,        // (c) region over another task's stack
    DescriptorArena,       // (d) region over the descriptor arena
    StackUnderUserRegion,  // new stack already reachable by another task's user region
  };

  struct RuleViolation
  {
    HardeningRule rule = HardeningRule::DmaControllerMmio;
    std::string region;     // "stack" or "user[i]"
    std::string conflict;   // what it collided with
  };

  std::string describe(const RuleViolation& v);

  /// Creation-time placement rules. Every range-intersection test performed
  /// is added to `checks`; no test is skipped after the first violation.
  /// `others` are the live tasks the candidate must stay clear of (the DMA
  /// service stack is always checked separately).
  std::vector<RuleViolation> check_hardening_rules(const AddressRange& stack,
                                                   std::span<const UserRegion> userRegions,
                                                   std::span<const TaskRecord* const> others,
                                                   const MemoryProfile& profile,
                                                   const KernelLayout& layout,
                                                   std::uint64_t& checks);

  /// Region schema for a task under the layout's mode. Throws ConfigError
  /// if a produced descriptor is illegal.
  MpuConfiguration build_mpu_configuration(const TaskRecord& task, const KernelLayout& layout,
                                           const MemoryProfile& profile);

  /// Slots rewritten per context switch: 5 in DBox, 4 in FmpuCompat.
  unsigned dynamic_region_count(KernelMode mode);

  /// Round-robin: the next Ready task after `current` in id order.
  std::optional<TaskId> schedule_tick(std::span<const TaskRecord> tasks,
                                      std::optional<TaskId> current);

  struct CreationResult
  {
    TaskId id = -1;
    bool voided = false;
    std::vector<RuleViolation> violations;
    std::uint64_t checks = 0;
  };

  struct RedefineResult
  {
    bool accepted = false;
    std::vector<RuleViolation> violations;
  };

  /// Microkernel state: task table, fault log and cost counters.
  class Kernel
  {
  public:
    Kernel(MemoryProfile profile, KernelLayout layout, Trace* trace = nullptr);

    /// Validate and admit a task. In DBox mode a rule violation voids the
    /// task (it stays in the table as Voided and never runs).
    CreationResult create_task(const TaskSpec& spec, std::uint64_t tick = 0);

    MpuConfiguration build_mpu_configuration(const TaskRecord& task) const
    { return dmacap::build_mpu_configuration(task, layout_, profile_); }

    /// Reprogram the MPU for `to`. Counts the switch and the dynamic slots.
    MpuConfiguration context_switch(const TaskRecord* from, TaskRecord& to, std::uint64_t tick);

    /// Stop the task and drop it from scheduling; others are untouched.
    void handle_mpu_violation(TaskRecord& task, std::uint64_t tick, std::string detail);

    /// Replace the task's user regions (effective at the next switch) or
    /// reject the request and let the task continue.
    RedefineResult redefine_user_regions(TaskRecord& task, const std::vector<UserRegion>& regions,
                                         std::uint64_t tick);

    void record_fault(std::uint64_t tick, TaskId task, FaultKind kind, std::string detail);

    TaskRecord& task(TaskId id);
    const TaskRecord& task(TaskId id) const;
    std::vector<TaskRecord>& tasks() { return tasks_; }
    const std::vector<TaskRecord>& tasks() const { return tasks_; }

    const TaskRecord& dma_service_task() const { return tasks_.front(); }

    const MemoryProfile& profile() const { return profile_; }
    const KernelLayout& layout() const { return layout_; }
    const std::vector<FaultEvent>& faults() const { return faults_; }
    CounterReport& counters() { return counters_; }
    const CounterReport& counters() const { return counters_; }
    Trace* trace() const { return trace_; }

  private:
    void emit(std::uint64_t tick, Subsystem s, std::string event, TaskId task,
              std::string detail = {});

    MemoryProfile profile_;
    KernelLayout layout_;
    Trace* trace_ = nullptr;
    std::vector<TaskRecord> tasks_;
    std::vector<FaultEvent> faults_;
    CounterReport counters_;
  };

  std::string_view to_string(KernelMode mode);
  KernelMode parse_mode(std::string_view text);
  std::string_view to_string(FaultKind kind);
  std::string_view to_string(HardeningRule rule);

}
