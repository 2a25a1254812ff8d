#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmacap/kernel.hpp"

namespace dmacap
{

  enum class Area
  {
    FlashKernel,
    FlashSyscalls,
    FlashUser,
    RamKernel,
    RamUser,
    PeriphSystem,
    PeriphStandard,
  };

  inline constexpr std::array kAllAreas{
    Area::FlashKernel, Area::FlashSyscalls, Area::FlashUser, Area::RamKernel,
    Area::RamUser,     Area::PeriphSystem,  Area::PeriphStandard,
  };

  struct AreaExposure
  {
    std::uint64_t exposed = 0;
    std::uint64_t total = 0;

    /// Percentage; 0 when the area is empty.
    double ratio() const
    { return total == 0 ? 0.0 : 100.0 * double(exposed) / double(total); }

    bool operator==(const AreaExposure&) const = default;
  };

  struct ExposureRow
  {
    TaskId task = -1;
    std::string name;
    std::string variant;                     // "standard" or "worst_case"
    std::array<AreaExposure, kAllAreas.size()> areas{};
    bool dmaControllerExposed = false;
    /// Unprivileged-executable flash bytes. A stand-in for gadget counts.
    std::uint64_t executableFlashExposed = 0;
    std::vector<UserRegion> userRegions;     // regions the row was computed with

    const AreaExposure& at(Area a) const { return areas[std::size_t(a)]; }
    AreaExposure& at(Area a) { return areas[std::size_t(a)]; }
  };

  /// Half-open 64-bit interval; lets a span end at 2^32.
  struct Interval
  {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    std::uint64_t length() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
  };

  /// Disjoint, sorted byte intervals making up an area.
  std::vector<Interval> area_intervals(Area area, const MemoryProfile& profile,
                                       const KernelLayout& layout);

  /// Bytes that an unprivileged access of some kind (read or write) may
  /// reach under cfg. System-partition bytes are never included.
  std::vector<Interval> unprivileged_reach(const MpuConfiguration& cfg);

  /// Same, restricted to bytes an unprivileged task may execute.
  std::vector<Interval> unprivileged_executable(const MpuConfiguration& cfg);

  std::uint64_t overlap_bytes(std::span<const Interval> a, std::span<const Interval> b);

  /// Exposure of every area for one task under cfg.
  ExposureRow exposure(const TaskRecord& task, const MpuConfiguration& cfg,
                       const MemoryProfile& profile, const KernelLayout& layout);

  /// Three user regions maximising the summed area ratios that the mode's
  /// creation rules would still admit for this task. Candidates are the
  /// largest admissible naturally aligned power-of-two blocks; picks are
  /// greedy, ties to the lower address.
  std::vector<UserRegion> worst_case_regions(const TaskRecord& task, const Kernel& kernel);

  /// The task's declared configuration and the worst-case variant.
  std::pair<ExposureRow, ExposureRow> exposure_pair(const TaskRecord& task, const Kernel& kernel);

  struct LinearFit
  {
    double a = 0;      // intercept
    double b = 0;      // slope
    bool exact = false;
  };

  /// Fit count = a + b n. Exact when every point lies on one line (checked in
  /// integer arithmetic), otherwise least squares. Throws
  /// std::invalid_argument for fewer than 3 points and DegenerateInput when
  /// all n are equal.
  LinearFit fit_linear(std::span<const std::pair<std::int64_t, std::int64_t>> points);

  std::string_view to_string(Area area);

}
