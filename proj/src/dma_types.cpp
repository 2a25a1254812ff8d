#include "dmacap/dma_types.hpp"

#include <cstdio>

#include "dmacap/errors.hpp"

namespace dmacap
{

  EarKind ear_kind_of(const Ear& ear)
  {
    switch (ear.index())
      {
      case 1: return EarKind::I2cSlaveAddress;
      case 2: return EarKind::SpiSlaveSelect;
      case 3: return EarKind::AdcChannelMask;
      default: return EarKind::None;
      }
  }

  std::string to_string(const Ear& ear)
  {
    if (const auto* a = std::get_if<I2cAddress>(&ear))
      {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "0x%02x", unsigned(a->value));
        return std::string("i2c:") + buf;
      }
    if (const auto* s = std::get_if<SpiSelect>(&ear))
      return "ss:" + s->line;
    if (const auto* m = std::get_if<AdcChannels>(&ear))
      return "adc:" + hex(m->mask);
    return "none";
  }

  std::uint8_t required_right(DmaOperation op)
  {
    switch (op)
      {
      case DmaOperation::Read: return Rights::kRead;
      case DmaOperation::Write: return Rights::kWrite;
      case DmaOperation::FullDuplex: return Rights::kFullDuplex;
      }
    return 0;
  }

  std::string_view to_string(DmaOperation op)
  {
    switch (op)
      {
      case DmaOperation::Read: return "READ";
      case DmaOperation::Write: return "WRITE";
      case DmaOperation::FullDuplex: return "FULL_DUPLEX";
      }
    return "?";
  }

  std::string_view to_string(TransferDirection direction)
  {
    switch (direction)
      {
      case TransferDirection::PeriphToMem: return "PERIPH_TO_MEM";
      case TransferDirection::MemToPeriph: return "MEM_TO_PERIPH";
      case TransferDirection::FullDuplex: return "FULL_DUPLEX";
      }
    return "?";
  }

  std::string_view to_string(RejectReason reason)
  {
    switch (reason)
      {
      case RejectReason::Ok: return "OK";
      case RejectReason::NoCapability: return "NO_CAPABILITY";
      case RejectReason::RightMissing: return "RIGHT_MISSING";
      case RejectReason::BufferNotOwned: return "BUFFER_NOT_OWNED";
      case RejectReason::EarDenied: return "EAR_DENIED";
      case RejectReason::PeripheralUnknown: return "PERIPHERAL_UNKNOWN";
      case RejectReason::NotDmaCapable: return "NOT_DMA_CAPABLE";
      case RejectReason::QueueFull: return "QUEUE_FULL";
      }
    return "?";
  }

  std::string_view to_string(NotificationStatus status)
  {
    switch (status)
      {
      case NotificationStatus::Ok: return "OK";
      case NotificationStatus::Rejected: return "REJECTED";
      case NotificationStatus::Error: return "ERROR";
      }
    return "?";
  }

  std::string rights_to_string(Rights rights)
  {
    std::string out;
    auto add = [&](std::uint8_t flag, const char* name) {
      if (rights.has(flag))
        out += (out.empty() ? "" : "|") + std::string(name);
    };
    add(Rights::kRead, "READ");
    add(Rights::kWrite, "WRITE");
    add(Rights::kFullDuplex, "FULL_DUPLEX");
    return out.empty() ? "NONE" : out;
  }

  DmaOperation parse_operation(std::string_view text)
  {
    if (text == "READ")
      return DmaOperation::Read;
    if (text == "WRITE")
      return DmaOperation::Write;
    if (text == "FULL_DUPLEX")
      return DmaOperation::FullDuplex;
    throw SchemaError("unknown DMA operation '" + std::string(text) + "'");
  }

  TransferDirection parse_direction(std::string_view text)
  {
    if (text == "PERIPH_TO_MEM")
      return TransferDirection::PeriphToMem;
    if (text == "MEM_TO_PERIPH")
      return TransferDirection::MemToPeriph;
    if (text == "FULL_DUPLEX")
      return TransferDirection::FullDuplex;
    throw SchemaError("unknown transfer direction '" + std::string(text) + "'");
  }

  std::uint8_t parse_right(std::string_view text)
  {
    // Accept both the plain names and the eRead/eWrite/eFullDuplex spelling.
    if (text == "READ" or text == "eRead")
      return Rights::kRead;
    if (text == "WRITE" or text == "eWrite")
      return Rights::kWrite;
    if (text == "FULL_DUPLEX" or text == "eFullDuplex")
      return Rights::kFullDuplex;
    throw SchemaError("unknown capability right '" + std::string(text) + "'");
  }

}
