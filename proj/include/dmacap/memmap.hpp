#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace dmacap
{

  using Addr = std::uint32_t;

  /// Half-open byte range [base, base + size). The end may equal 2^32 so the
  /// system partition is representable.
  struct AddressRange
  {
    Addr base = 0;
    std::uint32_t size = 0;

    /// Throws PartitionError when size is zero or the range wraps past 2^32.
    static AddressRange make(std::uint64_t base, std::uint64_t size);

    std::uint64_t end() const
    { return std::uint64_t(base) + size; }

    bool containsAddr(std::uint64_t addr) const
    { return addr >= base and addr < end(); }

    bool intersects(const AddressRange& other) const
    { return base < other.end() and other.base < end(); }

    bool operator==(const AddressRange&) const = default;
  };

  /// True iff inner lies wholly inside outer.
  bool contains(const AddressRange& outer, const AddressRange& inner);

  std::string to_string(const AddressRange& range);

  // ARMv7-M primary partitions used by the model.
  inline constexpr AddressRange kCodePartition{0x00000000u, 0x20000000u};
  inline constexpr AddressRange kSramPartition{0x20000000u, 0x20000000u};
  inline constexpr AddressRange kPeripheralPartition{0x40000000u, 0x20000000u};
  inline constexpr AddressRange kSystemPartition{0xE0000000u, 0x20000000u};

  enum class PeripheralKind
  { Usart, Spi, I2c, Adc, Gpio, Timer, DmaController, System, Other };

  /// Off-chip addressing schema carried by a peripheral class.
  enum class EarKind
  { None, I2cSlaveAddress, SpiSlaveSelect, AdcChannelMask };

  enum class DescriptorHome
  { Mmio, KernelRam };

  struct PeripheralRecord
  {
    std::string id;
    AddressRange range;
    PeripheralKind kind = PeripheralKind::Other;
    bool dmaCapable = false;
    EarKind earKind = EarKind::None;
    /// Offset of the data register that DMA streams through.
    std::uint32_t dataOffset = 0;

    /// Four-byte data register window used as the peripheral side of a
    /// transfer.
    AddressRange dataWindow() const;

    bool operator==(const PeripheralRecord&) const = default;
  };

  struct MemoryProfile
  {
    AddressRange flash;
    AddressRange ram;
    AddressRange peripheralPartition = kPeripheralPartition;
    AddressRange systemPartition = kSystemPartition;
    std::vector<PeripheralRecord> peripherals;   // sorted by base address
    unsigned dmaChannels = 1;
    DescriptorHome descriptorHome = DescriptorHome::Mmio;
    std::uint32_t transferRate = 4;              // bytes per tick

    const PeripheralRecord* findPeripheral(std::string_view id) const;

    /// DMA_CONTROLLER peripherals in address order.
    std::vector<const PeripheralRecord*> dmaControllers() const;

    bool operator==(const MemoryProfile&) const = default;
  };

  /// Build a validated profile from the "mcu" object of a scenario document.
  MemoryProfile load_profile(const nlohmann::json& document);

  /// Emit a document whose "mcu" object reloads to the same profile.
  nlohmann::json emit_profile(const MemoryProfile& profile);

  /// Check every profile invariant; throws the matching error on failure.
  void validate_profile(const MemoryProfile& profile);

  /// The unique peripheral whose range contains addr.
  std::optional<PeripheralRecord> peripheral_at(const MemoryProfile& profile, Addr addr);

  std::string_view to_string(PeripheralKind kind);
  std::string_view to_string(EarKind kind);
  std::string_view to_string(DescriptorHome home);
  PeripheralKind parse_peripheral_kind(std::string_view text);
  EarKind parse_ear_kind(std::string_view text);
  DescriptorHome parse_descriptor_home(std::string_view text);

  /// Parse an integer written either as a JSON number or a decimal/hex string.
  std::uint64_t parse_integer(const nlohmann::json& value, std::string_view what);

  /// Parse {"base": ..., "size": ...}.
  AddressRange parse_range(const nlohmann::json& value, std::string_view what);

  nlohmann::json emit_range(const AddressRange& range);
  std::string hex(std::uint64_t value);

}
