#include "dmacap/memmap.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "dmacap/errors.hpp"

namespace dmacap
{

  namespace
  {
    constexpr std::array kKindNames{
      std::pair{PeripheralKind::Usart, "USART"},
      std::pair{PeripheralKind::Spi, "SPI"},
      std::pair{PeripheralKind::I2c, "I2C"},
      std::pair{PeripheralKind::Adc, "ADC"},
      std::pair{PeripheralKind::Gpio, "GPIO"},
      std::pair{PeripheralKind::Timer, "TIMER"},
      std::pair{PeripheralKind::DmaController, "DMA_CONTROLLER"},
      std::pair{PeripheralKind::System, "SYSTEM"},
      std::pair{PeripheralKind::Other, "OTHER"},
    };

    constexpr std::array kEarNames{
      std::pair{EarKind::None, "NONE"},
      std::pair{EarKind::I2cSlaveAddress, "I2C_SLAVE_ADDRESS"},
      std::pair{EarKind::SpiSlaveSelect, "SPI_SLAVE_SELECT"},
      std::pair{EarKind::AdcChannelMask, "ADC_CHANNEL_MASK"},
    };

    constexpr std::array kHomeNames{
      std::pair{DescriptorHome::Mmio, "MMIO"},
      std::pair{DescriptorHome::KernelRam, "KERNEL_RAM"},
    };

    template <typename Table, typename Enum>
    std::string_view nameOf(const Table& table, Enum value)
    {
      for (const auto& [e, name] : table)
        if (e == value)
          return name;
      return "?";
    }

    template <typename Enum, typename Table>
    Enum parseName(const Table& table, std::string_view text, std::string_view what)
    {
      for (const auto& [e, name] : table)
        if (text == name)
          return e;
      throw SchemaError("unknown " + std::string(what) + " '" + std::string(text) + "'");
    }

    const nlohmann::json& member(const nlohmann::json& object, const char* key,
                                 std::string_view context)
    {
      if (not object.is_object() or not object.contains(key))
        throw SchemaError(std::string(context) + ": missing '" + key + "'");
      return object.at(key);
    }
  }

  AddressRange AddressRange::make(std::uint64_t base, std::uint64_t size)
  {
    if (size == 0)
      throw PartitionError("address range of size zero at " + hex(base));
    if (base > 0xFFFFFFFFull or size > 0xFFFFFFFFull or base + size > (1ull << 32))
      throw PartitionError("address range " + hex(base) + "+" + hex(size) +
                           " overflows the 32-bit address space");
    return AddressRange{Addr(base), std::uint32_t(size)};
  }

  bool contains(const AddressRange& outer, const AddressRange& inner)
  {
    return inner.base >= outer.base and inner.end() <= outer.end();
  }

  std::string to_string(const AddressRange& range)
  {
    return "[" + hex(range.base) + "," + hex(range.end()) + ")";
  }

  std::string hex(std::uint64_t value)
  {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%08llx", static_cast<unsigned long long>(value));
    return buf;
  }

  AddressRange PeripheralRecord::dataWindow() const
  {
    std::uint32_t offset = std::min<std::uint32_t>(dataOffset, range.size - 1);
    std::uint32_t size = std::min<std::uint32_t>(4, range.size - offset);
    return AddressRange{range.base + offset, size};
  }

  const PeripheralRecord* MemoryProfile::findPeripheral(std::string_view id) const
  {
    for (const auto& p : peripherals)
      if (p.id == id)
        return &p;
    return nullptr;
  }

  std::vector<const PeripheralRecord*> MemoryProfile::dmaControllers() const
  {
    std::vector<const PeripheralRecord*> out;
    for (const auto& p : peripherals)
      if (p.kind == PeripheralKind::DmaController)
        out.push_back(&p);
    return out;
  }

  std::string_view to_string(PeripheralKind kind) { return nameOf(kKindNames, kind); }
  std::string_view to_string(EarKind kind) { return nameOf(kEarNames, kind); }
  std::string_view to_string(DescriptorHome home) { return nameOf(kHomeNames, home); }

  PeripheralKind parse_peripheral_kind(std::string_view text)
  { return parseName<PeripheralKind>(kKindNames, text, "peripheral kind"); }

  EarKind parse_ear_kind(std::string_view text)
  { return parseName<EarKind>(kEarNames, text, "EAR kind"); }

  DescriptorHome parse_descriptor_home(std::string_view text)
  { return parseName<DescriptorHome>(kHomeNames, text, "descriptor home"); }

  std::uint64_t parse_integer(const nlohmann::json& value, std::string_view what)
  {
    if (value.is_number_unsigned())
      return value.get<std::uint64_t>();
    if (value.is_number_integer())
      {
        auto v = value.get<std::int64_t>();
        if (v < 0)
          throw SchemaError(std::string(what) + ": negative value");
        return std::uint64_t(v);
      }
    if (value.is_string())
      {
        const auto& text = value.get_ref<const std::string&>();
        if (text.empty())
          throw SchemaError(std::string(what) + ": empty integer string");
        std::size_t used = 0;
        std::uint64_t v = 0;
        try
          {
            v = std::stoull(text, &used, 0);
          }
        catch (const std::exception&)
          {
            throw SchemaError(std::string(what) + ": bad integer '" + text + "'");
          }
        if (used != text.size() or text.front() == '-')
          throw SchemaError(std::string(what) + ": bad integer '" + text + "'");
        return v;
      }
    throw SchemaError(std::string(what) + ": expected integer");
  }

  AddressRange parse_range(const nlohmann::json& value, std::string_view what)
  {
    auto base = parse_integer(member(value, "base", what), what);
    auto size = parse_integer(member(value, "size", what), what);
    try
      {
        return AddressRange::make(base, size);
      }
    catch (const PartitionError& e)
      {
        throw SchemaError(std::string(what) + ": " + e.what());
      }
  }

  nlohmann::json emit_range(const AddressRange& range)
  {
    return nlohmann::json{{"base", hex(range.base)}, {"size", hex(range.size)}};
  }

  void validate_profile(const MemoryProfile& profile)
  {
    if (not contains(kCodePartition, profile.flash))
      throw PartitionError("flash " + to_string(profile.flash) + " outside the code partition");
    if (not contains(kSramPartition, profile.ram))
      throw PartitionError("ram " + to_string(profile.ram) + " outside the SRAM partition");
    if (profile.peripheralPartition != kPeripheralPartition or
        profile.systemPartition != kSystemPartition)
      throw PartitionError("partition bases are fixed by the architecture");
    if (profile.dmaChannels < 1)
      throw SchemaError("dma_channels must be at least 1");
    if (profile.transferRate < 1)
      throw SchemaError("dma_transfer_rate must be at least 1");

    for (const auto& p : profile.peripherals)
      {
        bool inSystem = contains(profile.systemPartition, p.range);
        bool inPeriph = contains(profile.peripheralPartition, p.range);
        if (p.kind == PeripheralKind::System and not inSystem)
          throw PartitionError("system peripheral " + p.id + " outside the system partition");
        if (p.kind != PeripheralKind::System and not inPeriph)
          throw PartitionError("peripheral " + p.id + " " + to_string(p.range) +
                               " outside the peripheral partition");
        if (p.dataOffset >= p.range.size)
          throw SchemaError("peripheral " + p.id + ": data_offset beyond its range");
      }

    for (std::size_t i = 0; i < profile.peripherals.size(); ++i)
      for (std::size_t j = i + 1; j < profile.peripherals.size(); ++j)
        {
          const auto& a = profile.peripherals[i];
          const auto& b = profile.peripherals[j];
          if (a.id == b.id)
            throw SchemaError("duplicate peripheral id " + a.id);
          if (a.range.intersects(b.range))
            throw OverlapError("peripherals " + a.id + " and " + b.id + " overlap");
        }
  }

  MemoryProfile load_profile(const nlohmann::json& document)
  {
    const auto& mcu = member(document, "mcu", "scenario");
    if (not mcu.is_object())
      throw SchemaError("mcu: expected object");

    MemoryProfile profile;
    profile.flash = parse_range(member(mcu, "flash", "mcu"), "mcu.flash");
    profile.ram = parse_range(member(mcu, "ram", "mcu"), "mcu.ram");
    if (mcu.contains("dma_channels"))
      profile.dmaChannels = unsigned(parse_integer(mcu["dma_channels"], "mcu.dma_channels"));
    if (mcu.contains("dma_descriptor_home"))
      profile.descriptorHome = parse_descriptor_home(
        mcu["dma_descriptor_home"].get<std::string>());
    if (mcu.contains("dma_transfer_rate"))
      profile.transferRate = std::uint32_t(
        parse_integer(mcu["dma_transfer_rate"], "mcu.dma_transfer_rate"));

    const auto& list = member(mcu, "peripherals", "mcu");
    if (not list.is_array())
      throw SchemaError("mcu.peripherals: expected array");
    for (const auto& entry : list)
      {
        PeripheralRecord p;
        if (not member(entry, "id", "peripheral").is_string())
          throw SchemaError("peripheral id must be a string");
        p.id = entry["id"].get<std::string>();
        std::string context = "peripheral " + p.id;
        p.range = parse_range(entry, context);
        p.kind = parse_peripheral_kind(member(entry, "kind", context).get<std::string>());
        if (entry.contains("dma_capable"))
          p.dmaCapable = entry["dma_capable"].get<bool>();
        if (entry.contains("ear"))
          p.earKind = parse_ear_kind(entry["ear"].get<std::string>());
        if (entry.contains("data_offset"))
          p.dataOffset = std::uint32_t(parse_integer(entry["data_offset"], context));
        profile.peripherals.push_back(std::move(p));
      }

    std::sort(profile.peripherals.begin(), profile.peripherals.end(),
              [](const auto& a, const auto& b) { return a.range.base < b.range.base; });

    validate_profile(profile);
    return profile;
  }

  nlohmann::json emit_profile(const MemoryProfile& profile)
  {
    nlohmann::json peripherals = nlohmann::json::array();
    for (const auto& p : profile.peripherals)
      {
        nlohmann::json entry = emit_range(p.range);
        entry["id"] = p.id;
        entry["kind"] = std::string(to_string(p.kind));
        entry["dma_capable"] = p.dmaCapable;
        entry["ear"] = std::string(to_string(p.earKind));
        entry["data_offset"] = hex(p.dataOffset);
        peripherals.push_back(std::move(entry));
      }

    nlohmann::json mcu{
      {"flash", emit_range(profile.flash)},
      {"ram", emit_range(profile.ram)},
      {"dma_channels", profile.dmaChannels},
      {"dma_descriptor_home", std::string(to_string(profile.descriptorHome))},
      {"dma_transfer_rate", profile.transferRate},
      {"peripherals", std::move(peripherals)},
    };
    return nlohmann::json{{"mcu", std::move(mcu)}};
  }

  std::optional<PeripheralRecord> peripheral_at(const MemoryProfile& profile, Addr addr)
  {
    // Peripherals are sorted and disjoint: the candidate is the last one
    // starting at or below addr.
    auto it = std::upper_bound(profile.peripherals.begin(), profile.peripherals.end(), addr,
                               [](Addr a, const PeripheralRecord& p) { return a < p.range.base; });
    if (it == profile.peripherals.begin())
      return std::nullopt;
    --it;
    if (it->range.containsAddr(addr))
      return *it;
    return std::nullopt;
  }

}
