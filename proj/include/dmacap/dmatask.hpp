#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmacap/dma.hpp"
#include "dmacap/kernel.hpp"
#include "dmacap/policy.hpp"

namespace dmacap
{

  /// Off-chip selection fields of a peripheral, as programmed by the
  /// service before a transfer.
  struct PeripheralSelect
  {
    std::optional<std::uint8_t> i2cSlaveAddress;
    std::optional<std::string> spiSlaveSelect;
    std::optional<std::uint32_t> adcSequence;
  };

  struct Registration
  {
    TaskId task = -1;
    DmaRequest request;
  };

  /// Memory side of an accepted transfer, kept for post-hoc audits.
  struct AcceptedTransfer
  {
    std::uint64_t requestSeq = 0;
    TaskId owner = -1;
    unsigned channel = 0;
    std::vector<AddressRange> memoryRanges;
  };

  struct DeliveredNotification
  {
    std::uint64_t tick = 0;
    TaskId task = -1;
    DmaNotification notification;
  };

  enum class SubmitResult
  { Queued, QueueFull, Dropped };

  /// The trusted, privileged DMA service: request queue, policy
  /// enforcement, channel programming and completion delivery.
  class DmaService
  {
  public:
    DmaService(const MemoryProfile& profile, const KernelLayout& layout,
               std::size_t queueCapacity);

    /// Enqueue a request. A full queue answers at once with
    /// REJECTED(QUEUE_FULL); requests from stopped tasks are dropped.
    SubmitResult submit_request(DmaRequest req, Kernel& kernel, std::uint64_t tick);

    /// Handle one queued request: validate, then either notify the
    /// rejection or program the lowest free channel.
    void service_step(Kernel& kernel, DmaEngine& engine, std::uint64_t tick);

    /// Turn engine completions into notifications for the registered owners.
    void isr_deliver(Kernel& kernel, std::span<const Completion> completions, std::uint64_t tick);

    bool has_pending() const { return not queue_.empty(); }
    std::size_t queue_capacity() const { return capacity_; }
    const std::deque<DmaRequest>& queue() const { return queue_; }
    const std::vector<std::optional<Registration>>& registry() const { return registry_; }
    unsigned registered_channels() const;
    const std::vector<AcceptedTransfer>& accepted() const { return accepted_; }
    const std::vector<DeliveredNotification>& delivered() const { return delivered_; }
    const std::map<std::string, PeripheralSelect>& peripheral_state() const { return select_; }

  private:
    void deliver(Kernel& kernel, TaskId task, DmaNotification n, Subsystem via,
                 std::uint64_t tick);
    void apply_ear(const PeripheralRecord& periph, const Ear& ear);

    const MemoryProfile* profile_;
    const KernelLayout* layout_;
    std::size_t capacity_;
    std::deque<DmaRequest> queue_;
    std::vector<std::optional<Registration>> registry_;
    unsigned retries_ = 0;
    std::uint64_t nextSeq_ = 1;
    std::vector<AcceptedTransfer> accepted_;
    std::vector<DeliveredNotification> delivered_;
    std::map<std::string, PeripheralSelect> select_;
  };

  /// Detail field of a NOTIFY trace line.
  std::string notification_detail(const DmaNotification& n);

}
