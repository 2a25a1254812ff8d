#include "dmacap/simulation.hpp"

#include "dmacap/errors.hpp"

namespace dmacap
{

  namespace
  {
    bool terminal(TaskState s)
    {
      return s == TaskState::Finished or s == TaskState::Stopped or s == TaskState::Voided;
    }

    std::string accessDetail(const Action& a)
    {
      return std::string(to_string(a.kind)) + " " + hex(a.addr) + "+" + std::to_string(a.length) +
             (a.label.empty() ? "" : " label=" + a.label);
    }
  }

  std::string_view to_string(Termination t)
  {
    switch (t)
      {
      case Termination::Completed: return "COMPLETED";
      case Termination::Idle: return "IDLE";
      case Termination::TickLimit: return "TICK_LIMIT";
      }
    return "?";
  }

  Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      kernel_(scenario_.profile, scenario_.layout, &trace_),
      engine_(scenario_.profile.dmaChannels, scenario_.profile.transferRate, &kernel_.profile()),
      service_(kernel_.profile(), kernel_.layout(),
               scenario_.requestQueueCapacity.value_or(scenario_.profile.dmaChannels))
  { }

  void Simulation::boot()
  {
    if (booted_)
      return;
    booted_ = true;
    if (scenario_.canary)
      memory_.write(scenario_.canary->addr, scenario_.canary->value);
    for (const auto& spec : scenario_.tasks)
      kernel_.create_task(spec, 0);
  }

  std::optional<std::uint8_t> Simulation::canary_value() const
  {
    if (not scenario_.canary)
      return std::nullopt;
    return memory_.read(scenario_.canary->addr);
  }

  void Simulation::release(std::uint64_t tick)
  {
    for (auto& t : kernel_.tasks())
      {
        if (t.dmaService or t.period == 0 or tick % t.period != 0)
          continue;
        if (t.state == TaskState::BlockedOnDelay)
          {
            t.state = TaskState::Ready;
            t.pc = 0;
            trace_.emit(tick, Subsystem::Kernel, "RELEASE", t.id, t.name);
          }
        else if (not terminal(t.state))
          {
            ++t.deadlineMisses;
            trace_.emit(tick, Subsystem::Kernel, "DEADLINE_MISS", t.id, t.name);
          }
      }
  }

  bool Simulation::passGate(TaskRecord& task, const Action& action, std::uint64_t tick)
  {
    if (task.privileged)
      return true;
    const auto& gate = scenario_.layout.syscallsRegion;
    Addr at = action.at.value_or(gate.base);
    if (not gate.containsAddr(at))
      {
        kernel_.handle_mpu_violation(task, tick,
                                     std::string(to_string(action.kind)) + " from " + hex(at) +
                                       " outside the syscall entry points");
        return false;
      }
    if (check_access(active_, AccessQuery{at, 2, AccessKind::Execute, false}, kernel_.profile()) ==
        AccessResult::Fault)
      {
        kernel_.handle_mpu_violation(task, tick, "syscall entry " + hex(at) + " not executable");
        return false;
      }
    return true;
  }

  void Simulation::execute(TaskRecord& task, std::uint64_t tick)
  {
    if (task.pc >= task.behavior.size())
      return;
    const Action& a = task.behavior[task.pc];
    const auto& profile = kernel_.profile();

    switch (a.kind)
      {
      case ActionKind::MemRead:
      case ActionKind::MemWrite:
      case ActionKind::Exec:
        {
          auto kind = a.kind == ActionKind::MemRead    ? AccessKind::Read
                      : a.kind == ActionKind::MemWrite ? AccessKind::Write
                                                       : AccessKind::Execute;
          AccessQuery q{a.addr, a.length, kind, task.privileged};
          if (check_access(active_, q, profile) == AccessResult::Fault)
            {
              kernel_.handle_mpu_violation(task, tick, accessDetail(a));
              return;
            }
          if (a.kind == ActionKind::MemWrite)
            memory_.fill(AddressRange{a.addr, a.length}, a.value);
          trace_.emit(tick, Subsystem::Mpu, "ALLOW", task.id, accessDetail(a));
          break;
        }
      case ActionKind::Syscall:
        if (not passGate(task, a, tick))
          return;
        ++kernel_.counters().svcEvents;
        trace_.emit(tick, Subsystem::Kernel, "SVC", task.id, a.label);
        break;
      case ActionKind::DmaRequest:
        {
          if (not passGate(task, a, tick))
            return;
          ++kernel_.counters().svcEvents;
          DmaRequest req = a.request;
          req.requester = task.id;
          service_.submit_request(std::move(req), kernel_, tick);
          break;
        }
      case ActionKind::RawDmaConfig:
        {
          auto res = raw_dma_config_via_mmio(task, a.raw, active_, profile, kernel_.layout(), engine_);
          std::string detail = "ch=" + std::to_string(a.raw.channel) + " src=" +
                               to_string(a.raw.source) + " dst=" + to_string(a.raw.destination) +
                               " len=" + std::to_string(a.raw.length);
          if (res == RawConfigResult::Fault)
            {
              auto where = descriptor_location(profile, kernel_.layout(), a.raw.channel);
              kernel_.handle_mpu_violation(task, tick,
                                           "raw descriptor write at " + to_string(where) + " " + detail);
              return;
            }
          trace_.emit(tick, Subsystem::Dma,
                      res == RawConfigResult::Installed ? "RAW_INSTALLED" : "RAW_BUSY", task.id,
                      detail);
          break;
        }
      case ActionKind::RedefineRegions:
        if (not passGate(task, a, tick))
          return;
        ++kernel_.counters().svcEvents;
        kernel_.redefine_user_regions(task, a.regions, tick);
        break;
      case ActionKind::WaitNotify:
        // A wait resumed after a wake-up has already passed the gate.
        if (not waiting_.contains(task.id))
          {
            if (not passGate(task, a, tick))
              return;
            ++kernel_.counters().svcEvents;
          }
        if (task.notificationBox.empty())
          {
            waiting_.insert(task.id);
            task.state = TaskState::BlockedOnNotify;
            trace_.emit(tick, Subsystem::Kernel, "WAIT", task.id);
            return;
          }
        waiting_.erase(task.id);
        trace_.emit(tick, Subsystem::Kernel, "TAKE", task.id,
                    notification_detail(task.notificationBox.front()));
        task.notificationBox.pop_front();
        break;
      case ActionKind::Nop:
        break;
      }
    ++task.pc;
  }

  void Simulation::endOfScript(TaskRecord& task, std::uint64_t tick)
  {
    ++task.cyclesCompleted;
    trace_.emit(tick, Subsystem::Kernel, "CYCLE_DONE", task.id,
                "cycle=" + std::to_string(task.cyclesCompleted));
    if (task.period > 0)
      {
        task.pc = 0;
        task.state = TaskState::BlockedOnDelay;
      }
    else
      task.state = TaskState::Finished;
  }

  std::optional<Termination> Simulation::settled() const
  {
    bool inFlight = service_.has_pending() or engine_.active_channels() > 0;
    bool allDone = true;
    bool canRun = inFlight;
    for (const auto& t : kernel_.tasks())
      {
        if (t.dmaService)
          continue;
        allDone = allDone and terminal(t.state);
        canRun = canRun or t.state == TaskState::Ready or t.state == TaskState::BlockedOnDelay;
      }
    if (allDone and not inFlight)
      return Termination::Completed;
    if (not canRun)
      return Termination::Idle;
    return std::nullopt;
  }

  Termination Simulation::run(const RunOptions& options)
  {
    const std::uint64_t horizon = options.ticks.value_or(scenario_.ticks);
    termination_ = options.ticks ? Termination::TickLimit : Termination::Completed;
    if (horizon == 0)
      {
        termination_ = Termination::TickLimit;
        return termination_;
      }

    boot();
    auto& dma = kernel_.task(0);
    for (std::uint64_t tick = 0; tick < horizon; ++tick)
      {
        ticksExecuted_ = tick + 1;
        if (tick > 0)
          release(tick);

        // The service runs whenever work is queued, ahead of the rotation.
        dma.state = service_.has_pending() ? TaskState::Ready : TaskState::BlockedOnNotify;
        TaskRecord* next = nullptr;
        if (dma.state == TaskState::Ready)
          next = &dma;
        else if (auto id = schedule_tick(kernel_.tasks(), lastUser_))
          next = &kernel_.task(*id);

        if (next)
          {
            const TaskRecord* from = running_ ? &kernel_.task(*running_) : nullptr;
            active_ = kernel_.context_switch(from, *next, tick);
            next->state = TaskState::Running;
            running_ = next->id;
            if (next->dmaService)
              service_.service_step(kernel_, engine_, tick);
            else
              {
                lastUser_ = next->id;
                execute(*next, tick);
              }
          }
        else
          running_.reset();

        auto completions = engine_.engine_tick(memory_);
        service_.isr_deliver(kernel_, completions, tick);

        if (next and next->state == TaskState::Running)
          {
            if (next->dmaService)
              next->state = TaskState::BlockedOnNotify;
            else if (next->pc >= next->behavior.size())
              endOfScript(*next, tick);
            else
              next->state = TaskState::Ready;
          }

        if (auto done = settled())
          {
            termination_ = *done;
            trace_.emit(tick, Subsystem::Kernel, "END", -1, std::string(to_string(*done)));
            return termination_;
          }
      }
    trace_.emit(ticksExecuted_ - 1, Subsystem::Kernel, "END", -1,
                std::string(to_string(termination_)));
    return termination_;
  }

}
