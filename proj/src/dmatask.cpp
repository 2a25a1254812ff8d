#include "dmacap/dmatask.hpp"

#include "dmacap/errors.hpp"

namespace dmacap
{

  namespace
  {
    DmaNotification makeNotification(const DmaRequest& req, NotificationStatus status,
                                      RejectReason reason, int channel)
    {
      DmaNotification n;
      n.channel = channel;
      n.status = status;
      n.reason = reason;
      n.requestSeq = req.seq;
      n.peripheralId = req.peripheralId;
      n.operation = req.operation;
      n.label = req.label;
      return n;
    }

    std::string requestDetail(const DmaRequest& req)
    {
      std::string d = "req=" + std::to_string(req.seq) + " periph=" + req.peripheralId +
                      " op=" + std::string(to_string(req.operation)) +
                      " buf=" + to_string(req.buffer);
      if (req.rxBuffer)
        d += " rx=" + to_string(*req.rxBuffer);
      if (not req.label.empty())
        d += " label=" + req.label;
      return d;
    }
  }

  std::string notification_detail(const DmaNotification& n)
  {
    std::string d = "req=" + std::to_string(n.requestSeq) +
                    " status=" + std::string(to_string(n.status));
    if (n.status == NotificationStatus::Rejected)
      d += " reason=" + std::string(to_string(n.reason));
    d += " ch=" + std::to_string(n.channel);
    return d;
  }

  DmaService::DmaService(const MemoryProfile& profile, const KernelLayout& layout,
                         std::size_t queueCapacity)
    : profile_(&profile), layout_(&layout), capacity_(queueCapacity),
      registry_(profile.dmaChannels)
  {
    if (capacity_ == 0)
      throw ConfigError("DMA request queue capacity must be at least 1");
  }

  unsigned DmaService::registered_channels() const
  {
    unsigned n = 0;
    for (const auto& r : registry_)
      n += r.has_value();
    return n;
  }

  void DmaService::deliver(Kernel& kernel, TaskId task, DmaNotification n, Subsystem via,
                           std::uint64_t tick)
  {
    auto& rec = kernel.task(task);
    if (auto* trace = kernel.trace())
      trace->emit(tick, via, "NOTIFY", task, notification_detail(n));
    delivered_.push_back(DeliveredNotification{tick, task, n});
    rec.notificationBox.push_back(std::move(n));
    if (rec.state == TaskState::BlockedOnNotify)
      rec.state = TaskState::Ready;
  }

  SubmitResult DmaService::submit_request(DmaRequest req, Kernel& kernel, std::uint64_t tick)
  {
    const auto& requester = kernel.task(req.requester);
    if (requester.state == TaskState::Stopped or requester.state == TaskState::Voided)
      return SubmitResult::Dropped;

    req.seq = nextSeq_++;
    auto* trace = kernel.trace();
    if (queue_.size() >= capacity_)
      {
        if (trace)
          trace->emit(tick, Subsystem::Dma, "QUEUE_FULL", req.requester, requestDetail(req));
        deliver(kernel, req.requester,
                makeNotification(req, NotificationStatus::Rejected, RejectReason::QueueFull, -1),
                Subsystem::Dma, tick);
        return SubmitResult::QueueFull;
      }

    if (trace)
      trace->emit(tick, Subsystem::Dma, "SUBMIT", req.requester, requestDetail(req));
    queue_.push_back(std::move(req));
    return SubmitResult::Queued;
  }

  void DmaService::apply_ear(const PeripheralRecord& periph, const Ear& ear)
  {
    auto& sel = select_[periph.id];
    if (const auto* a = std::get_if<I2cAddress>(&ear))
      sel.i2cSlaveAddress = a->value;
    else if (const auto* s = std::get_if<SpiSelect>(&ear))
      sel.spiSlaveSelect = s->line;
    else if (const auto* m = std::get_if<AdcChannels>(&ear))
      sel.adcSequence = m->mask;
  }

  void DmaService::service_step(Kernel& kernel, DmaEngine& engine, std::uint64_t tick)
  {
    if (queue_.empty())
      return;
    DmaRequest req = std::move(queue_.front());
    queue_.pop_front();
    auto* trace = kernel.trace();

    auto& requester = kernel.task(req.requester);
    if (requester.state == TaskState::Stopped or requester.state == TaskState::Voided)
      {
        if (trace)
          trace->emit(tick, Subsystem::Dma, "DROPPED", req.requester, requestDetail(req));
        retries_ = 0;
        return;
      }

    std::uint64_t checks = 0;
    auto verdict = validate_request(req, requester, *profile_, checks);
    kernel.counters().validationChecks.push_back(
      ValidationCost{req.seq, req.requester, req.peripheralId, req.operation, checks});

    if (not verdict.accepted())
      {
        retries_ = 0;
        std::string detail = requestDetail(req) + " reason=" + std::string(to_string(verdict.reason));
        if (trace)
          trace->emit(tick, Subsystem::Policy, "REJECT", req.requester, detail);
        kernel.record_fault(tick, req.requester, FaultKind::DmaRequestRejected, detail);
        deliver(kernel, req.requester,
                makeNotification(req, NotificationStatus::Rejected, verdict.reason, -1),
                Subsystem::Policy, tick);
        return;
      }

    auto channel = engine.lowest_free_channel();
    if (not channel)
      {
        if (++retries_ >= profile_->dmaChannels)
          {
            retries_ = 0;
            if (trace)
              trace->emit(tick, Subsystem::Dma, "NO_FREE_CHANNEL", req.requester,
                          requestDetail(req) + " giving up");
            deliver(kernel, req.requester,
                    makeNotification(req, NotificationStatus::Rejected, RejectReason::QueueFull, -1),
                    Subsystem::Dma, tick);
          }
        else
          {
            if (trace)
              trace->emit(tick, Subsystem::Dma, "NO_FREE_CHANNEL", req.requester,
                          requestDetail(req) + " retry=" + std::to_string(retries_));
            queue_.push_front(std::move(req));
          }
        return;
      }
    retries_ = 0;

    const auto& periph = *profile_->findPeripheral(req.peripheralId);
    TransferDescriptor d;
    d.channel = *channel;
    d.ownerTask = req.requester;
    d.length = req.buffer.size;
    AcceptedTransfer audit{req.seq, req.requester, *channel, {}};
    switch (req.operation)
      {
      case DmaOperation::Write:
        d.direction = TransferDirection::MemToPeriph;
        d.source = req.buffer;
        d.destination = periph.dataWindow();
        audit.memoryRanges = {req.buffer};
        break;
      case DmaOperation::Read:
        d.direction = TransferDirection::PeriphToMem;
        d.source = periph.dataWindow();
        d.destination = req.buffer;
        audit.memoryRanges = {req.buffer};
        break;
      case DmaOperation::FullDuplex:
        d.direction = TransferDirection::FullDuplex;
        d.source = req.buffer;
        d.destination = *req.rxBuffer;
        d.peripheral = periph.dataWindow();
        d.length = std::min(req.buffer.size, req.rxBuffer->size);
        audit.memoryRanges = {req.buffer, *req.rxBuffer};
        break;
      }

    apply_ear(periph, req.ear);

    // The service programs the controller as privileged code through the
    // same path task code would use.
    const auto& self = kernel.dma_service_task();
    auto where = descriptor_location(*profile_, *layout_, *channel);
    auto mpu = kernel.build_mpu_configuration(self);
    if (check_access(mpu, AccessQuery{where.base, where.size, AccessKind::Write, true},
                     *profile_) == AccessResult::Fault)
      throw ConfigError("DMA service cannot reach descriptor registers at " + to_string(where));
    engine.configure_channel(d);

    registry_[*channel] = Registration{req.requester, req};
    accepted_.push_back(std::move(audit));
    if (trace)
      trace->emit(tick, Subsystem::Policy, "ACCEPT", req.requester,
                  requestDetail(req) + " ch=" + std::to_string(*channel) +
                  " checks=" + std::to_string(checks));
  }

  void DmaService::isr_deliver(Kernel& kernel, std::span<const Completion> completions,
                               std::uint64_t tick)
  {
    auto* trace = kernel.trace();
    for (const auto& c : completions)
      {
        auto& reg = registry_.at(c.channel);
        if (not reg)
          {
            // Programmed behind the service's back (raw register write).
            if (trace)
              trace->emit(tick, Subsystem::Isr, "UNREGISTERED_COMPLETE", c.ownerTask,
                          "ch=" + std::to_string(c.channel));
            continue;
          }
        Registration r = std::move(*reg);
        reg.reset();

        const auto& owner = kernel.task(r.task);
        if (owner.state == TaskState::Stopped or owner.state == TaskState::Voided)
          {
            if (trace)
              trace->emit(tick, Subsystem::Isr, "ORPHAN", r.task,
                          "req=" + std::to_string(r.request.seq) +
                            " ch=" + std::to_string(c.channel));
            continue;
          }

        auto status = c.status == CompletionStatus::Ok ? NotificationStatus::Ok
                                                       : NotificationStatus::Error;
        deliver(kernel, r.task, makeNotification(r.request, status, RejectReason::Ok, int(c.channel)),
                Subsystem::Isr, tick);
      }
  }

}
