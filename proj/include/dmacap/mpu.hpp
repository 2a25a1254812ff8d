#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dmacap/memmap.hpp"

namespace dmacap
{

  enum class AccessLevel : std::uint8_t
  { None = 0, ReadOnly = 1, ReadWrite = 2 };

  struct Permission
  {
    AccessLevel privileged = AccessLevel::None;
    AccessLevel unprivileged = AccessLevel::None;
    bool executeNever = true;

    /// Unprivileged access never exceeds privileged access.
    bool valid() const
    { return unprivileged <= privileged; }

    AccessLevel levelFor(bool isPrivileged) const
    { return isPrivileged ? privileged : unprivileged; }

    bool operator==(const Permission&) const = default;
  };

  struct RegionDescriptor
  {
    int number = 0;
    AddressRange range;
    Permission permission;
    bool enabled = true;

    bool operator==(const RegionDescriptor&) const = default;
  };

  inline constexpr int kMpuRegions = 8;
  inline constexpr std::uint32_t kMinRegionSize = 32;

  struct MpuConfiguration
  {
    std::array<std::optional<RegionDescriptor>, kMpuRegions> regions;
    bool backgroundEnabled = true;

    bool operator==(const MpuConfiguration&) const = default;
  };

  enum class AccessKind
  { Read, Write, Execute };

  struct AccessQuery
  {
    Addr addr = 0;
    std::uint32_t width = 1;
    AccessKind kind = AccessKind::Read;
    bool privileged = false;
  };

  enum class AccessResult
  { Allow, Fault };

  /// Throws SizeError or AlignmentError.
  void validate_descriptor(const RegionDescriptor& d);

  /// Non-throwing form of validate_descriptor over a bare range.
  bool is_legal_region(const AddressRange& range);

  /// Throws ConfigError when a slot is mislabelled, a descriptor is illegal
  /// or a permission breaks the privilege ordering.
  void validate_configuration(const MpuConfiguration& cfg);

  /// Highest-numbered enabled region containing addr, if any.
  const RegionDescriptor* effective_region(const MpuConfiguration& cfg, Addr addr);

  /// Core-processor access check. Every byte of the query must be allowed.
  AccessResult check_access(const MpuConfiguration& cfg, const AccessQuery& q,
                            const MemoryProfile& profile);

  /// True when level permits the access kind (execute also needs XN clear).
  bool level_permits(AccessLevel level, AccessKind kind, bool executeNever);

  std::string_view to_string(AccessLevel level);
  std::string_view to_string(AccessKind kind);
  std::string_view to_string(AccessResult result);
  AccessLevel parse_access_level(std::string_view text);

}
