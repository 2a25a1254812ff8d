#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dmacap/memmap.hpp"

namespace dmacap
{

  using TaskId = int;

  /// Granted-rights bit field of a capability.
  class Rights
  {
  public:
    static constexpr std::uint8_t kRead = 1;
    static constexpr std::uint8_t kWrite = 2;
    static constexpr std::uint8_t kFullDuplex = 4;

    constexpr Rights() = default;
    constexpr explicit Rights(std::uint8_t bits) : bits_(bits & 7) {}

    constexpr bool has(std::uint8_t flag) const { return (bits_ & flag) == flag; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    bool operator==(const Rights&) const = default;

  private:
    std::uint8_t bits_ = 0;
  };

  // Extensible access right parameters, one alternative per EarKind.
  struct I2cAddress
  {
    std::uint8_t value = 0;   // 7-bit
    bool operator==(const I2cAddress&) const = default;
  };

  struct SpiSelect
  {
    std::string line;
    bool operator==(const SpiSelect&) const = default;
  };

  struct AdcChannels
  {
    std::uint32_t mask = 0;
    bool operator==(const AdcChannels&) const = default;
  };

  using Ear = std::variant<std::monostate, I2cAddress, SpiSelect, AdcChannels>;

  EarKind ear_kind_of(const Ear& ear);
  std::string to_string(const Ear& ear);

  struct DmaCapability
  {
    std::string peripheralId;
    Rights rights;
    Ear ear;

    bool operator==(const DmaCapability&) const = default;
  };

  /// Capabilities are fixed at task creation: the list is shared and only
  /// ever exposed through const access.
  class CapabilityList
  {
  public:
    CapabilityList() : items_(std::make_shared<const std::vector<DmaCapability>>()) {}
    explicit CapabilityList(std::vector<DmaCapability> items)
      : items_(std::make_shared<const std::vector<DmaCapability>>(std::move(items)))
    { }

    const std::vector<DmaCapability>& items() const { return *items_; }
    auto begin() const { return items_->begin(); }
    auto end() const { return items_->end(); }
    std::size_t size() const { return items_->size(); }
    bool empty() const { return items_->empty(); }

    /// Identity of the underlying storage, for immutability checks.
    const void* identity() const { return items_.get(); }

  private:
    std::shared_ptr<const std::vector<DmaCapability>> items_;
  };

  enum class DmaOperation
  { Read, Write, FullDuplex };

  struct DmaRequest
  {
    TaskId requester = -1;
    std::string peripheralId;
    DmaOperation operation = DmaOperation::Read;
    AddressRange buffer;                     // tx buffer for full duplex
    std::optional<AddressRange> rxBuffer;    // full duplex only
    Ear ear;
    std::uint64_t seq = 0;                   // assigned at submission
    std::string label;
  };

  enum class TransferDirection
  { PeriphToMem, MemToPeriph, FullDuplex };

  enum class RejectReason
  {
    Ok,
    NoCapability,
    RightMissing,
    BufferNotOwned,
    EarDenied,
    PeripheralUnknown,
    NotDmaCapable,
    QueueFull,
  };

  enum class NotificationStatus
  { Ok, Rejected, Error };

  struct DmaNotification
  {
    int channel = -1;                        // -1 when no channel was bound
    NotificationStatus status = NotificationStatus::Ok;
    RejectReason reason = RejectReason::Ok;
    std::uint64_t requestSeq = 0;
    std::string peripheralId;
    DmaOperation operation = DmaOperation::Read;
    std::string label;
  };

  std::uint8_t required_right(DmaOperation op);

  std::string_view to_string(DmaOperation op);
  std::string_view to_string(TransferDirection direction);
  std::string_view to_string(RejectReason reason);
  std::string_view to_string(NotificationStatus status);
  std::string rights_to_string(Rights rights);

  DmaOperation parse_operation(std::string_view text);
  TransferDirection parse_direction(std::string_view text);
  std::uint8_t parse_right(std::string_view text);

}
