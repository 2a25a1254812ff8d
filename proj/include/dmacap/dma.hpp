#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dmacap/byte_store.hpp"
#include "dmacap/dma_types.hpp"
#include "dmacap/memmap.hpp"
#include "dmacap/mpu.hpp"
#include "dmacap/task.hpp"

namespace dmacap
{

  struct KernelLayout;

  /// Bytes of one channel's descriptor registers (CCR, CNDTR, CPAR, CMAR).
  inline constexpr std::uint32_t kDescriptorBytes = 16;

  /// Where the descriptor of `channel` lives: controller MMIO or the kernel
  /// RAM arena, depending on the profile.
  AddressRange descriptor_location(const MemoryProfile& profile, const KernelLayout& layout,
                                   unsigned channel);

  /// Channel descriptor. Bytes flow from source[i mod source.size] to
  /// destination[i mod destination.size]; a peripheral side is its 4-byte
  /// data register window. Full duplex also streams through `peripheral`:
  /// source (tx buffer) -> peripheral and peripheral -> destination (rx).
  struct TransferDescriptor
  {
    unsigned channel = 0;
    AddressRange source;
    AddressRange destination;
    std::uint32_t length = 0;
    TransferDirection direction = TransferDirection::PeriphToMem;
    TaskId ownerTask = -1;
    std::optional<AddressRange> peripheral;
    std::uint32_t ticksRemaining = 0;
    std::uint32_t transferred = 0;
  };

  enum class ConfigureResult
  { Ok, Busy };

  enum class CompletionStatus
  { Ok, Error };

  struct Completion
  {
    unsigned channel = 0;
    TaskId ownerTask = -1;
    CompletionStatus status = CompletionStatus::Ok;
  };

  /// Bus-master controller. It never consults the MPU.
  class DmaEngine
  {
  public:
    DmaEngine(unsigned channels, std::uint32_t transferRate, const MemoryProfile* profile);

    /// Throws std::out_of_range for a channel the controller does not have
    /// and std::invalid_argument for a zero-length descriptor.
    ConfigureResult configure_channel(TransferDescriptor d);

    /// Move up to transferRate bytes on every active channel. Completions
    /// come back in channel order.
    std::vector<Completion> engine_tick(ByteStore& memory);

    bool is_free(unsigned channel) const { return not channels_.at(channel).has_value(); }
    std::optional<unsigned> lowest_free_channel() const;
    unsigned active_channels() const;
    unsigned channel_count() const { return unsigned(channels_.size()); }
    std::uint32_t transfer_rate() const { return rate_; }
    const std::optional<TransferDescriptor>& channel(unsigned c) const { return channels_.at(c); }

  private:
    bool mapped(Addr addr) const;

    std::vector<std::optional<TransferDescriptor>> channels_;
    std::uint32_t rate_;
    const MemoryProfile* profile_;
  };

  enum class RawConfigResult
  { Installed, Busy, Fault };

  /// A task writes descriptor fields through the controller's registers (or
  /// the RAM arena). The write is an ordinary core access and therefore
  /// subject to the task's MPU configuration; if it is allowed the
  /// descriptor is installed exactly as configure_channel would.
  RawConfigResult raw_dma_config_via_mmio(const TaskRecord& task, const RawDescriptorWrite& write,
                                          const MpuConfiguration& mpu, const MemoryProfile& profile,
                                          const KernelLayout& layout, DmaEngine& engine);

  std::string_view to_string(ConfigureResult r);
  std::string_view to_string(RawConfigResult r);

}
