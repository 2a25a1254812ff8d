#include "dmacap/mpu.hpp"

#include <algorithm>
#include <bit>
#include <vector>

#include "dmacap/errors.hpp"

namespace dmacap
{

  void validate_descriptor(const RegionDescriptor& d)
  {
    if (d.range.size < kMinRegionSize or not std::has_single_bit(d.range.size))
      throw SizeError("region " + std::to_string(d.number) + " size " + hex(d.range.size) +
                      " is not a power of two >= 32");
    if (d.range.base % d.range.size != 0)
      throw AlignmentError("region " + std::to_string(d.number) + " base " + hex(d.range.base) +
                           " is not aligned to its size " + hex(d.range.size));
  }

  bool is_legal_region(const AddressRange& range)
  {
    return range.size >= kMinRegionSize and std::has_single_bit(range.size) and
           range.base % range.size == 0;
  }

  void validate_configuration(const MpuConfiguration& cfg)
  {
    for (int i = 0; i < kMpuRegions; ++i)
      {
        const auto& slot = cfg.regions[i];
        if (not slot)
          continue;
        if (slot->number != i)
          throw ConfigError("slot " + std::to_string(i) + " holds region numbered " +
                            std::to_string(slot->number));
        if (not slot->permission.valid())
          throw ConfigError("region " + std::to_string(i) +
                            " grants unprivileged code more than privileged code");
        try
          {
            validate_descriptor(*slot);
          }
        catch (const Error& e)
          {
            throw ConfigError(e.what());
          }
      }
  }

  const RegionDescriptor* effective_region(const MpuConfiguration& cfg, Addr addr)
  {
    for (int i = kMpuRegions - 1; i >= 0; --i)
      {
        const auto& slot = cfg.regions[i];
        if (slot and slot->enabled and slot->range.containsAddr(addr))
          return &*slot;
      }
    return nullptr;
  }

  bool level_permits(AccessLevel level, AccessKind kind, bool executeNever)
  {
    switch (kind)
      {
      case AccessKind::Read:
        return level != AccessLevel::None;
      case AccessKind::Write:
        return level == AccessLevel::ReadWrite;
      case AccessKind::Execute:
        return level != AccessLevel::None and not executeNever;
      }
    return false;
  }

  namespace
  {
    bool byteAllowed(const MpuConfiguration& cfg, const AccessQuery& q,
                     const MemoryProfile& profile, Addr addr)
    {
      if (profile.systemPartition.containsAddr(addr) and not q.privileged)
        return false;

      if (const auto* region = effective_region(cfg, addr))
        return level_permits(region->permission.levelFor(q.privileged), q.kind,
                             region->permission.executeNever);

      // Background map: privileged only, execute only from code.
      if (not q.privileged or not cfg.backgroundEnabled)
        return false;
      if (q.kind == AccessKind::Execute)
        return kCodePartition.containsAddr(addr);
      return true;
    }
  }

  AccessResult check_access(const MpuConfiguration& cfg, const AccessQuery& q,
                            const MemoryProfile& profile)
  {
    std::uint64_t begin = q.addr;
    std::uint64_t end = begin + q.width;
    if (q.width == 0)
      return AccessResult::Allow;
    if (end > (1ull << 32))
      return AccessResult::Fault;

    // The outcome is constant between consecutive region/partition edges, so
    // one representative byte per segment decides the segment.
    std::vector<std::uint64_t> cuts{begin, end};
    auto addCut = [&](std::uint64_t c) {
      if (c > begin and c < end)
        cuts.push_back(c);
    };
    for (const auto& slot : cfg.regions)
      if (slot and slot->enabled)
        {
          addCut(slot->range.base);
          addCut(slot->range.end());
        }
    addCut(profile.systemPartition.base);
    addCut(profile.systemPartition.end());
    addCut(kCodePartition.end());

    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (not byteAllowed(cfg, q, profile, Addr(cuts[i])))
        return AccessResult::Fault;
    return AccessResult::Allow;
  }

  std::string_view to_string(AccessLevel level)
  {
    switch (level)
      {
      case AccessLevel::None: return "NONE";
      case AccessLevel::ReadOnly: return "RO";
      case AccessLevel::ReadWrite: return "RW";
      }
    return "?";
  }

  std::string_view to_string(AccessKind kind)
  {
    switch (kind)
      {
      case AccessKind::Read: return "READ";
      case AccessKind::Write: return "WRITE";
      case AccessKind::Execute: return "EXECUTE";
      }
    return "?";
  }

  std::string_view to_string(AccessResult result)
  { return result == AccessResult::Allow ? "ALLOW" : "FAULT"; }

  AccessLevel parse_access_level(std::string_view text)
  {
    if (text == "NONE")
      return AccessLevel::None;
    if (text == "RO")
      return AccessLevel::ReadOnly;
    if (text == "RW")
      return AccessLevel::ReadWrite;
    throw SchemaError("unknown access level '" + std::string(text) + "'");
  }

}
