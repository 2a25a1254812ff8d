#include "dmacap/dma.hpp"

#include <stdexcept>

#include "dmacap/errors.hpp"
#include "dmacap/kernel.hpp"

namespace dmacap
{

  AddressRange descriptor_location(const MemoryProfile& profile, const KernelLayout& layout,
                                   unsigned channel)
  {
    if (profile.descriptorHome == DescriptorHome::KernelRam)
      {
        if (not layout.descriptorArena)
          throw ConfigError("no descriptor arena configured");
        return AddressRange{layout.descriptorArena->base + channel * kDescriptorBytes,
                            kDescriptorBytes};
      }

    auto controllers = profile.dmaControllers();
    if (controllers.empty())
      throw ConfigError("profile has no DMA controller");
    const auto& ctrl = *controllers.front();
    // Channel register blocks start at 0x08 with a 0x14 stride.
    std::uint64_t offset = 0x08 + 0x14ull * channel;
    if (offset + kDescriptorBytes > ctrl.range.size)
      throw ConfigError("channel " + std::to_string(channel) + " registers exceed " + ctrl.id);
    return AddressRange{Addr(ctrl.range.base + offset), kDescriptorBytes};
  }

  DmaEngine::DmaEngine(unsigned channels, std::uint32_t transferRate,
                       const MemoryProfile* profile)
    : channels_(channels), rate_(transferRate), profile_(profile)
  {
    if (channels == 0 or transferRate == 0)
      throw std::invalid_argument("DMA engine needs channels and a non-zero rate");
  }

  ConfigureResult DmaEngine::configure_channel(TransferDescriptor d)
  {
    if (d.channel >= channels_.size())
      throw std::out_of_range("DMA channel " + std::to_string(d.channel) + " >= " +
                              std::to_string(channels_.size()));
    if (d.length == 0)
      throw std::invalid_argument("zero-length transfer descriptor");
    auto& slot = channels_[d.channel];
    if (slot)
      return ConfigureResult::Busy;
    d.transferred = 0;
    d.ticksRemaining = (d.length + rate_ - 1) / rate_;
    slot = std::move(d);
    return ConfigureResult::Ok;
  }

  bool DmaEngine::mapped(Addr addr) const
  {
    if (not profile_)
      return true;
    if (profile_->flash.containsAddr(addr) or profile_->ram.containsAddr(addr))
      return true;
    return peripheral_at(*profile_, addr).has_value();
  }

  std::vector<Completion> DmaEngine::engine_tick(ByteStore& memory)
  {
    std::vector<Completion> done;
    for (unsigned c = 0; c < channels_.size(); ++c)
      {
        auto& slot = channels_[c];
        if (not slot)
          continue;
        auto& d = *slot;

        bool busError = false;
        std::uint32_t budget = std::min(rate_, d.length - d.transferred);
        for (std::uint32_t k = 0; k < budget and not busError; ++k)
          {
            std::uint32_t i = d.transferred;
            Addr src = d.source.base + i % d.source.size;
            Addr dst = d.destination.base + i % d.destination.size;
            if (d.direction == TransferDirection::FullDuplex and d.peripheral)
              {
                Addr reg = d.peripheral->base + i % d.peripheral->size;
                if (not mapped(src) or not mapped(dst) or not mapped(reg))
                  {
                    busError = true;
                    break;
                  }
                memory.write(dst, memory.read(reg));
                memory.write(reg, memory.read(src));
              }
            else
              {
                if (not mapped(src) or not mapped(dst))
                  {
                    busError = true;
                    break;
                  }
                memory.write(dst, memory.read(src));
              }
            ++d.transferred;
          }
        if (d.ticksRemaining)
          --d.ticksRemaining;

        if (busError or d.transferred == d.length)
          {
            done.push_back(Completion{c, d.ownerTask,
                                      busError ? CompletionStatus::Error : CompletionStatus::Ok});
            slot.reset();
          }
      }
    return done;
  }

  std::optional<unsigned> DmaEngine::lowest_free_channel() const
  {
    for (unsigned c = 0; c < channels_.size(); ++c)
      if (not channels_[c])
        return c;
    return std::nullopt;
  }

  unsigned DmaEngine::active_channels() const
  {
    unsigned n = 0;
    for (const auto& c : channels_)
      n += c.has_value();
    return n;
  }

  RawConfigResult raw_dma_config_via_mmio(const TaskRecord& task, const RawDescriptorWrite& write,
                                          const MpuConfiguration& mpu, const MemoryProfile& profile,
                                          const KernelLayout& layout, DmaEngine& engine)
  {
    auto where = descriptor_location(profile, layout, write.channel);
    AccessQuery q{where.base, where.size, AccessKind::Write, task.privileged};
    if (check_access(mpu, q, profile) == AccessResult::Fault)
      return RawConfigResult::Fault;

    TransferDescriptor d;
    d.channel = write.channel;
    d.source = write.source;
    d.destination = write.destination;
    d.length = write.length;
    d.direction = write.direction;
    d.ownerTask = task.id;
    return engine.configure_channel(d) == ConfigureResult::Ok ? RawConfigResult::Installed
                                                              : RawConfigResult::Busy;
  }

  std::string_view to_string(ConfigureResult r)
  { return r == ConfigureResult::Ok ? "OK" : "BUSY"; }

  std::string_view to_string(RawConfigResult r)
  {
    switch (r)
      {
      case RawConfigResult::Installed: return "INSTALLED";
      case RawConfigResult::Busy: return "BUSY";
      case RawConfigResult::Fault: return "FAULT";
      }
    return "?";
  }

}
