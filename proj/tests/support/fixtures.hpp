#pragma once

// Small hand-built profiles and scenario documents shared by the tests.

#include <string>

#include <nlohmann/json.hpp>

#include "dmacap/kernel.hpp"
#include "dmacap/memmap.hpp"

namespace fixtures
{
  using namespace dmacap;

  inline PeripheralRecord periph(std::string id, Addr base, std::uint32_t size, PeripheralKind kind,
                                 bool dma = false, EarKind ear = EarKind::None,
                                 std::uint32_t dataOffset = 0)
  {
    PeripheralRecord p;
    p.id = std::move(id);
    p.range = AddressRange{base, size};
    p.kind = kind;
    p.dmaCapable = dma;
    p.earKind = ear;
    p.dataOffset = dataOffset;
    return p;
  }

  /// 16 KiB flash, 16 KiB RAM and 7 KiB of peripherals.
  inline MemoryProfile toy_profile(DescriptorHome home = DescriptorHome::Mmio, unsigned channels = 2)
  {
    MemoryProfile p;
    p.flash = AddressRange{0x08000000, 0x4000};
    p.ram = AddressRange{0x20000000, 0x4000};
    p.dmaChannels = channels;
    p.descriptorHome = home;
    p.peripherals = {
      periph("USART1", 0x40000000, 0x400, PeripheralKind::Usart, true, EarKind::None, 0x04),
      periph("SPI1", 0x40000400, 0x400, PeripheralKind::Spi, true, EarKind::SpiSlaveSelect, 0x0C),
      periph("ADC1", 0x40000800, 0x400, PeripheralKind::Adc, true, EarKind::AdcChannelMask, 0x4C),
      periph("I2C1", 0x40000C00, 0x400, PeripheralKind::I2c, true, EarKind::I2cSlaveAddress, 0x10),
      periph("GPIOA", 0x40001000, 0x400, PeripheralKind::Gpio),
      periph("DMA1", 0x40002000, 0x400, PeripheralKind::DmaController),
      periph("SCS", 0xE000E000, 0x400, PeripheralKind::System),
    };
    return p;
  }

  inline KernelLayout toy_layout(KernelMode mode = KernelMode::DBox)
  {
    KernelLayout l;
    l.mode = mode;
    l.kernelCodeRegion = AddressRange{0x08000000, 0x1000};
    l.syscallsRegion = AddressRange{0x08001000, 0x400};
    l.dmaTaskCode = AddressRange{0x08001400, 0x400};
    l.kernelDataRegion = AddressRange{0x20000000, 0x1000};
    l.dmaTaskStack = AddressRange{0x20001000, 0x400};
    l.descriptorArena = AddressRange{0x20000F00, 0x100};
    return l;
  }

  inline Permission rw() { return {AccessLevel::ReadWrite, AccessLevel::ReadWrite, true}; }
  inline Permission ro() { return {AccessLevel::ReadOnly, AccessLevel::ReadOnly, true}; }

  /// Task i: code at 0x08002000 + i KiB, 1 KiB stack at 0x20002000 + i KiB.
  inline TaskSpec toy_task(int i, std::vector<UserRegion> regions = {},
                           std::vector<DmaCapability> caps = {})
  {
    TaskSpec t;
    t.name = "t" + std::to_string(i);
    t.codeRegion = AddressRange{Addr(0x08002000 + 0x400 * i), 0x400};
    t.stackRegion = AddressRange{Addr(0x20002000 + 0x400 * i), 0x400};
    t.userRegions = std::move(regions);
    t.capabilities = std::move(caps);
    return t;
  }

  inline nlohmann::json range_json(Addr base, std::uint32_t size)
  {
    return {{"base", hex(base)}, {"size", hex(size)}};
  }

  /// Scenario document over the toy profile; callers add "tasks".
  inline nlohmann::json toy_document(const std::string& mode = "DBOX", std::uint64_t ticks = 50)
  {
    nlohmann::json doc = emit_profile(toy_profile());
    doc["name"] = "toy";
    doc["mode"] = mode;
    doc["ticks"] = ticks;
    doc["kernel"] = {
      {"code", range_json(0x08000000, 0x1000)},
      {"syscalls", range_json(0x08001000, 0x400)},
      {"data", range_json(0x20000000, 0x1000)},
      {"dma_task", {{"code", range_json(0x08001400, 0x400)}, {"stack", range_json(0x20001000, 0x400)}}},
      {"canary", {{"addr", "0x20000800"}, {"value", 0x5A}}},
    };
    doc["tasks"] = nlohmann::json::array();
    return doc;
  }

  inline nlohmann::json task_json(int i)
  {
    return {{"name", "t" + std::to_string(i)},
            {"code", range_json(Addr(0x08002000 + 0x400 * i), 0x400)},
            {"stack", range_json(Addr(0x20002000 + 0x400 * i), 0x400)}};
  }
}
