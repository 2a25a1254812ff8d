#include "dmacap/policy.hpp"

#include <bit>

namespace dmacap
{

  namespace
  {
    bool earPermitsCounted(const Ear& granted, const Ear& requested, std::uint64_t& checks)
    {
      ++checks;
      if (granted.index() != requested.index())
        return false;
      if (const auto* g = std::get_if<AdcChannels>(&granted))
        {
          auto want = std::get<AdcChannels>(requested).mask;
          checks += std::uint64_t(std::popcount(want));
          return (want & ~g->mask) == 0;
        }
      if (const auto* g = std::get_if<I2cAddress>(&granted))
        return g->value == std::get<I2cAddress>(requested).value;
      if (const auto* g = std::get_if<SpiSelect>(&granted))
        return g->line == std::get<SpiSelect>(requested).line;
      return true;
    }

    bool owns(const TaskRecord& task, const AddressRange& buffer, AccessKind memorySide,
              std::uint64_t& checks)
    {
      ++checks;
      if (contains(task.stackRegion, buffer))
        return true;
      for (const auto& region : task.userRegions)
        {
          ++checks;
          if (not contains(region.range, buffer))
            continue;
          auto level = region.permission.levelFor(task.privileged);
          bool ok = memorySide == AccessKind::Write ? level == AccessLevel::ReadWrite
                                                    : level != AccessLevel::None;
          if (ok)
            return true;
        }
      return false;
    }
  }

  bool ear_permits(const Ear& granted, const Ear& requested)
  {
    std::uint64_t ignored = 0;
    return earPermitsCounted(granted, requested, ignored);
  }

  Verdict validate_request(const DmaRequest& req, const TaskRecord& task,
                           const MemoryProfile& profile)
  {
    std::uint64_t ignored = 0;
    return validate_request(req, task, profile, ignored);
  }

  Verdict validate_request(const DmaRequest& req, const TaskRecord& task,
                           const MemoryProfile& profile, std::uint64_t& checks)
  {
    ++checks;
    const auto* periph = profile.findPeripheral(req.peripheralId);
    if (not periph)
      return Verdict::reject(RejectReason::PeripheralUnknown);
    ++checks;
    if (not periph->dmaCapable)
      return Verdict::reject(RejectReason::NotDmaCapable);

    const auto right = required_right(req.operation);
    bool named = false;
    bool hasRight = false;
    bool granted = false;
    for (const auto& cap : task.capabilities)
      {
        ++checks;
        if (cap.peripheralId != req.peripheralId)
          continue;
        named = true;
        ++checks;
        if (not cap.rights.has(right))
          continue;
        hasRight = true;
        if (earPermitsCounted(cap.ear, req.ear, checks))
          {
            granted = true;
            break;
          }
      }
    if (not named)
      return Verdict::reject(RejectReason::NoCapability);
    if (not hasRight)
      return Verdict::reject(RejectReason::RightMissing);
    if (not granted)
      return Verdict::reject(RejectReason::EarDenied);

    bool owned = false;
    switch (req.operation)
      {
      case DmaOperation::Write:
        owned = owns(task, req.buffer, AccessKind::Read, checks);
        break;
      case DmaOperation::Read:
        owned = owns(task, req.buffer, AccessKind::Write, checks);
        break;
      case DmaOperation::FullDuplex:
        owned = req.rxBuffer and owns(task, req.buffer, AccessKind::Read, checks) and
                owns(task, *req.rxBuffer, AccessKind::Write, checks);
        break;
      }
    if (not owned)
      return Verdict::reject(RejectReason::BufferNotOwned);

    return Verdict::accept();
  }

  std::string_view to_string(Decision d)
  { return d == Decision::Accept ? "ACCEPT" : "REJECT"; }

}
