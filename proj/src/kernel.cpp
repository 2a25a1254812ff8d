#include "dmacap/kernel.hpp"

#include <algorithm>

#include "dmacap/dma.hpp"
#include "dmacap/errors.hpp"

namespace dmacap
{

  namespace
  {
    constexpr Permission kReadExec{AccessLevel::ReadOnly, AccessLevel::ReadOnly, false};
    constexpr Permission kReadWriteData{AccessLevel::ReadWrite, AccessLevel::ReadWrite, true};
    constexpr Permission kPrivReadExec{AccessLevel::ReadOnly, AccessLevel::None, false};
    constexpr Permission kPrivReadWriteData{AccessLevel::ReadWrite, AccessLevel::None, true};

    RegionDescriptor slot(int number, const AddressRange& range, const Permission& perm)
    { return RegionDescriptor{number, range, perm, true}; }

    void requireLegal(const AddressRange& range, const std::string& what)
    {
      if (not is_legal_region(range))
        throw ConfigError(what + " " + to_string(range) +
                          " is not a naturally aligned power-of-two region >= 32 bytes");
    }
  }

  void validate_layout(const KernelLayout& layout, const MemoryProfile& profile)
  {
    requireLegal(layout.syscallsRegion, "syscalls region");
    requireLegal(layout.kernelCodeRegion, "kernel code region");
    requireLegal(layout.kernelDataRegion, "kernel data region");
    requireLegal(layout.dmaTaskCode, "DMA task code region");
    requireLegal(layout.dmaTaskStack, "DMA task stack region");

    if (not contains(profile.flash, layout.syscallsRegion))
      throw PartitionError("syscalls region outside flash");
    if (not contains(profile.flash, layout.kernelCodeRegion))
      throw PartitionError("kernel code region outside flash");
    if (not contains(profile.ram, layout.kernelDataRegion))
      throw PartitionError("kernel data region outside ram");
    if (not contains(profile.ram, layout.dmaTaskStack))
      throw PartitionError("DMA task stack outside ram");
    if (layout.dmaTaskStack.intersects(layout.kernelDataRegion))
      throw ConfigError("DMA task stack overlaps kernel data");
    if (layout.syscallsRegion.intersects(layout.kernelCodeRegion))
      throw ConfigError("syscalls region overlaps kernel code");

    if (profile.descriptorHome == DescriptorHome::KernelRam)
      {
        if (not layout.descriptorArena)
          throw ConfigError("descriptor home KERNEL_RAM needs kernel.descriptor_arena");
        if (not contains(layout.kernelDataRegion, *layout.descriptorArena))
          throw ConfigError("descriptor arena must lie inside kernel data");
        if (layout.descriptorArena->size < kDescriptorBytes * profile.dmaChannels)
          throw ConfigError("descriptor arena too small for " +
                            std::to_string(profile.dmaChannels) + " channels");
      }

    if (layout.mode == KernelMode::FmpuCompat)
      requireLegal(profile.flash, "compat mode flash region");
  }

  std::string describe(const RuleViolation& v)
  {
    return std::string(to_string(v.rule)) + ": " + v.region + " intersects " + v.conflict;
  }

  std::vector<RuleViolation> check_hardening_rules(const AddressRange& stack,
                                                   std::span<const UserRegion> userRegions,
                                                   std::span<const TaskRecord* const> others,
                                                   const MemoryProfile& profile,
                                                   const KernelLayout& layout,
                                                   std::uint64_t& checks)
  {
    std::vector<RuleViolation> out;
    if (layout.mode == KernelMode::FmpuCompat)
      return out;

    std::vector<std::pair<std::string, AddressRange>> candidates;
    candidates.emplace_back("stack", stack);
    for (std::size_t i = 0; i < userRegions.size(); ++i)
      candidates.emplace_back("user[" + std::to_string(i) + "]", userRegions[i].range);

    auto test = [&](const std::string& name, const AddressRange& region, HardeningRule rule,
                    const AddressRange& reserved, const std::string& what) {
      ++checks;
      if (region.intersects(reserved))
        out.push_back(RuleViolation{rule, name, what});
    };

    const auto controllers = profile.dmaControllers();
    for (const auto& [name, region] : candidates)
      {
        for (const auto* c : controllers)
          test(name, region, HardeningRule::DmaControllerMmio, c->range, c->id);
        test(name, region, HardeningRule::KernelRegion, layout.kernelCodeRegion, "kernel_code");
        test(name, region, HardeningRule::KernelRegion, layout.kernelDataRegion, "kernel_data");
        test(name, region, HardeningRule::OtherTaskStack, layout.dmaTaskStack, "dma_service stack");
        if (profile.descriptorHome == DescriptorHome::KernelRam and layout.descriptorArena)
          test(name, region, HardeningRule::DescriptorArena, *layout.descriptorArena,
               "descriptor_arena");
        for (const auto* other : others)
          test(name, region, HardeningRule::OtherTaskStack, other->stackRegion,
               other->name + " stack");
      }

    for (const auto* other : others)
      for (std::size_t i = 0; i < other->userRegions.size(); ++i)
        test("stack", stack, HardeningRule::StackUnderUserRegion, other->userRegions[i].range,
             other->name + " user[" + std::to_string(i) + "]");

    return out;
  }

  MpuConfiguration build_mpu_configuration(const TaskRecord& task, const KernelLayout& layout,
                                           const MemoryProfile& profile)
  {
    MpuConfiguration cfg;
    cfg.backgroundEnabled = true;

    if (layout.mode == KernelMode::DBox)
      {
        cfg.regions[0] = slot(0, layout.syscallsRegion, kReadExec);
        cfg.regions[1] = slot(1, task.codeRegion, kReadExec);
        cfg.regions[2] = slot(2, task.stackRegion, kReadWriteData);
        for (std::size_t i = 0; i < task.userRegions.size() and i < kMaxUserRegions; ++i)
          cfg.regions[3 + i] = slot(int(3 + i), task.userRegions[i].range,
                                    task.userRegions[i].permission);
        cfg.regions[6] = slot(6, layout.kernelCodeRegion, kPrivReadExec);
        cfg.regions[7] = slot(7, layout.kernelDataRegion, kPrivReadWriteData);
      }
    else
      {
        // Unprivileged flash (syscalls and all task code) at the bottom,
        // kernel regions above it, general peripherals, stack, then the
        // user regions in the top slots.
        cfg.regions[0] = slot(0, profile.flash, kReadExec);
        cfg.regions[1] = slot(1, layout.kernelCodeRegion, kPrivReadExec);
        cfg.regions[2] = slot(2, layout.kernelDataRegion, kPrivReadWriteData);
        cfg.regions[3] = slot(3, profile.peripheralPartition, kReadWriteData);
        cfg.regions[4] = slot(4, task.stackRegion, kReadWriteData);
        for (std::size_t i = 0; i < task.userRegions.size() and i < kMaxUserRegions; ++i)
          cfg.regions[5 + i] = slot(int(5 + i), task.userRegions[i].range,
                                    task.userRegions[i].permission);
      }

    validate_configuration(cfg);
    return cfg;
  }

  unsigned dynamic_region_count(KernelMode mode)
  {
    return mode == KernelMode::DBox ? 2 + kMaxUserRegions : 1 + kMaxUserRegions;
  }

  std::optional<TaskId> schedule_tick(std::span<const TaskRecord> tasks,
                                      std::optional<TaskId> current)
  {
    std::optional<TaskId> first;
    std::optional<TaskId> after;
    for (const auto& t : tasks)
      {
        if (t.state != TaskState::Ready)
          continue;
        if (not first or t.id < *first)
          first = t.id;
        if (current and t.id > *current and (not after or t.id < *after))
          after = t.id;
      }
    return after ? after : first;
  }

  Kernel::Kernel(MemoryProfile profile, KernelLayout layout, Trace* trace)
    : profile_(std::move(profile)), layout_(std::move(layout)), trace_(trace)
  {
    validate_layout(layout_, profile_);

    TaskRecord service;
    service.id = 0;
    service.name = "dma_service";
    service.privileged = true;
    service.dmaService = true;
    service.codeRegion = layout_.dmaTaskCode;
    service.stackRegion = layout_.dmaTaskStack;
    service.state = TaskState::BlockedOnNotify;
    tasks_.push_back(std::move(service));
  }

  void Kernel::emit(std::uint64_t tick, Subsystem s, std::string event, TaskId task,
                    std::string detail)
  {
    if (trace_)
      trace_->emit(tick, s, std::move(event), task, std::move(detail));
  }

  void Kernel::record_fault(std::uint64_t tick, TaskId task, FaultKind kind, std::string detail)
  {
    faults_.push_back(FaultEvent{tick, task, kind, std::move(detail)});
  }

  CreationResult Kernel::create_task(const TaskSpec& spec, std::uint64_t tick)
  {
    if (spec.userRegions.size() > kMaxUserRegions)
      throw ConfigError("task " + spec.name + " declares more than 3 user regions");
    requireLegal(spec.codeRegion, "task " + spec.name + " code region");
    requireLegal(spec.stackRegion, "task " + spec.name + " stack region");
    for (const auto& r : spec.userRegions)
      {
        requireLegal(r.range, "task " + spec.name + " user region");
        if (not r.permission.valid())
          throw ConfigError("task " + spec.name +
                            " user region grants unprivileged more than privileged access");
      }
    for (const auto& cap : spec.capabilities)
      {
        const auto* p = profile_.findPeripheral(cap.peripheralId);
        if (not p)
          throw SchemaError("task " + spec.name + " capability names unknown peripheral " +
                            cap.peripheralId);
        if (cap.rights.empty())
          throw SchemaError("task " + spec.name + " capability on " + p->id + " grants nothing");
        if (ear_kind_of(cap.ear) != p->earKind)
          throw SchemaError("task " + spec.name + " capability on " + p->id + " needs EAR " +
                            std::string(to_string(p->earKind)));
        if (cap.rights.has(Rights::kFullDuplex) and p->kind != PeripheralKind::Spi and
            p->kind != PeripheralKind::I2c)
          throw SchemaError("task " + spec.name + ": " + p->id + " has no full-duplex mode");
      }

    std::vector<const TaskRecord*> others;
    for (const auto& t : tasks_)
      if (not t.dmaService and t.state != TaskState::Voided)
        others.push_back(&t);

    CreationResult result;
    result.id = TaskId(tasks_.size());
    result.violations = check_hardening_rules(spec.stackRegion, spec.userRegions, others,
                                              profile_, layout_, result.checks);
    result.voided = not result.violations.empty();

    TaskRecord rec;
    rec.id = result.id;
    rec.name = spec.name;
    rec.privileged = spec.privileged;
    rec.codeRegion = spec.codeRegion;
    rec.stackRegion = spec.stackRegion;
    rec.userRegions = spec.userRegions;
    rec.capabilities = CapabilityList(spec.capabilities);
    rec.behavior = spec.behavior;
    rec.period = spec.period;
    rec.state = result.voided ? TaskState::Voided : TaskState::Ready;

    counters_.creationChecks.push_back(
      CreationCost{rec.id, rec.name, others.size(), result.checks, result.voided});

    if (result.voided)
      {
        std::string detail;
        for (const auto& v : result.violations)
          detail += (detail.empty() ? "" : "; ") + describe(v);
        record_fault(tick, rec.id, FaultKind::TaskCreationVoided, detail);
        emit(tick, Subsystem::Kernel, "TASK_VOIDED", rec.id, detail);
      }
    else
      emit(tick, Subsystem::Kernel, "TASK_CREATED", rec.id,
           rec.name + " checks=" + std::to_string(result.checks));

    tasks_.push_back(std::move(rec));
    return result;
  }

  MpuConfiguration Kernel::context_switch(const TaskRecord* from, TaskRecord& to,
                                          std::uint64_t tick)
  {
    auto cfg = build_mpu_configuration(to);
    ++counters_.contextSwitches;
    counters_.dynamicRegionsWritten += dynamic_region_count(layout_.mode);
    if (not from or from->id != to.id)
      emit(tick, Subsystem::Kernel, "SWITCH", to.id,
           "from=" + std::to_string(from ? from->id : -1));
    return cfg;
  }

  void Kernel::handle_mpu_violation(TaskRecord& task, std::uint64_t tick, std::string detail)
  {
    task.state = TaskState::Stopped;
    emit(tick, Subsystem::Mpu, "FAULT", task.id, detail);
    emit(tick, Subsystem::Kernel, "TASK_STOPPED", task.id, task.name);
    record_fault(tick, task.id, FaultKind::MpuViolation, std::move(detail));
  }

  RedefineResult Kernel::redefine_user_regions(TaskRecord& task,
                                               const std::vector<UserRegion>& regions,
                                               std::uint64_t tick)
  {
    RedefineResult result;
    std::string detail;

    bool legal = regions.size() <= kMaxUserRegions;
    for (const auto& r : regions)
      legal = legal and is_legal_region(r.range) and r.permission.valid();

    if (not legal)
      detail = "illegal region descriptor";
    else
      {
        std::vector<const TaskRecord*> others;
        for (const auto& t : tasks_)
          if (not t.dmaService and t.state != TaskState::Voided and t.id != task.id)
            others.push_back(&t);
        std::uint64_t checks = 0;
        // Only the new regions are re-checked; the stack is unchanged.
        auto found = check_hardening_rules(task.stackRegion, regions, others, profile_, layout_,
                                           checks);
        for (auto& v : found)
          if (v.region != "stack")
            result.violations.push_back(std::move(v));
        for (const auto& v : result.violations)
          detail += (detail.empty() ? "" : "; ") + describe(v);
      }

    if (not legal or not result.violations.empty())
      {
        record_fault(tick, task.id, FaultKind::RegionRedefinitionRejected, detail);
        emit(tick, Subsystem::Kernel, "REDEFINE_REJECTED", task.id, detail);
        return result;
      }

    task.userRegions = regions;
    result.accepted = true;
    emit(tick, Subsystem::Kernel, "REDEFINE_OK", task.id,
         std::to_string(regions.size()) + " regions");
    return result;
  }

  TaskRecord& Kernel::task(TaskId id)
  {
    return tasks_.at(std::size_t(id));
  }

  const TaskRecord& Kernel::task(TaskId id) const
  {
    return tasks_.at(std::size_t(id));
  }

  std::string_view to_string(KernelMode mode)
  { return mode == KernelMode::DBox ? "DBOX" : "FMPU_COMPAT"; }

  KernelMode parse_mode(std::string_view text)
  {
    if (text == "DBOX")
      return KernelMode::DBox;
    if (text == "FMPU_COMPAT")
      return KernelMode::FmpuCompat;
    throw SchemaError("unknown mode '" + std::string(text) + "'");
  }

  std::string_view to_string(FaultKind kind)
  {
    switch (kind)
      {
      case FaultKind::MpuViolation: return "MPU_VIOLATION";
      case FaultKind::DmaRequestRejected: return "DMA_REQUEST_REJECTED";
      case FaultKind::RegionRedefinitionRejected: return "REGION_REDEFINITION_REJECTED";
      case FaultKind::TaskCreationVoided: return "TASK_CREATION_VOIDED";
      }
    return "?";
  }

  std::string_view to_string(HardeningRule rule)
  {
    switch (rule)
      {
      case HardeningRule::DmaControllerMmio: return "dma_controller_mmio";
      case HardeningRule::KernelRegion: return "kernel_region";
      case HardeningRule::OtherTaskStack: return "other_task_stack";
      case HardeningRule::DescriptorArena: return "descriptor_arena";
      case HardeningRule::StackUnderUserRegion: return "stack_under_user_region";
      }
    return "?";
  }

  std::string_view to_string(TaskState state)
  {
    switch (state)
      {
      case TaskState::Ready: return "READY";
      case TaskState::Running: return "RUNNING";
      case TaskState::BlockedOnNotify: return "BLOCKED_ON_NOTIFY";
      case TaskState::BlockedOnDelay: return "BLOCKED_ON_DELAY";
      case TaskState::Finished: return "FINISHED";
      case TaskState::Stopped: return "STOPPED";
      case TaskState::Voided: return "VOIDED";
      }
    return "?";
  }

  namespace
  {
    constexpr std::pair<ActionKind, const char*> kActionNames[] = {
      {ActionKind::MemRead, "MEM_READ"},
      {ActionKind::MemWrite, "MEM_WRITE"},
      {ActionKind::Exec, "EXEC"},
      {ActionKind::Syscall, "SYSCALL"},
      {ActionKind::DmaRequest, "DMA_REQUEST"},
      {ActionKind::RawDmaConfig, "RAW_DMA_CONFIG"},
      {ActionKind::RedefineRegions, "REDEFINE_REGIONS"},
      {ActionKind::WaitNotify, "WAIT_NOTIFY"},
      {ActionKind::Nop, "NOP"},
    };
  }

  std::string_view to_string(ActionKind kind)
  {
    for (const auto& [k, name] : kActionNames)
      if (k == kind)
        return name;
    return "?";
  }

  ActionKind parse_action_kind(std::string_view text)
  {
    for (const auto& [k, name] : kActionNames)
      if (text == name)
        return k;
    throw SchemaError("unknown action '" + std::string(text) + "'");
  }

}
