#include "dmacap/metrics.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "dmacap/errors.hpp"

namespace dmacap
{

  namespace
  {
    Interval toInterval(const AddressRange& r) { return Interval{r.base, r.end()}; }

    // Subtract `cut` from a sorted disjoint list.
    std::vector<Interval> subtract(const std::vector<Interval>& from, const Interval& cut)
    {
      std::vector<Interval> out;
      for (const auto& iv : from)
        {
          if (cut.hi <= iv.lo or cut.lo >= iv.hi)
            {
              out.push_back(iv);
              continue;
            }
          if (iv.lo < cut.lo)
            out.push_back(Interval{iv.lo, cut.lo});
          if (cut.hi < iv.hi)
            out.push_back(Interval{cut.hi, iv.hi});
        }
      return out;
    }

    std::vector<Interval> reach(const MpuConfiguration& cfg,
                                const std::function<bool(const Permission&)>& grants)
    {
      std::vector<std::uint64_t> cuts{0, std::uint64_t(1) << 32, kSystemPartition.base};
      for (const auto& r : cfg.regions)
        if (r and r->enabled)
          {
            cuts.push_back(r->range.base);
            cuts.push_back(r->range.end());
          }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

      std::vector<Interval> out;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        {
          Interval seg{cuts[i], cuts[i + 1]};
          if (kSystemPartition.containsAddr(seg.lo))
            continue;
          const auto* eff = effective_region(cfg, Addr(seg.lo));
          if (not eff or not grants(eff->permission))
            continue;
          if (not out.empty() and out.back().hi == seg.lo)
            out.back().hi = seg.hi;
          else
            out.push_back(seg);
        }
      return out;
    }

    std::uint64_t overlap(std::span<const Interval> a, const Interval& b)
    {
      std::uint64_t n = 0;
      for (const auto& x : a)
        {
          auto lo = std::max(x.lo, b.lo);
          auto hi = std::min(x.hi, b.hi);
          if (lo < hi)
            n += hi - lo;
        }
      return n;
    }

    double score(const ExposureRow& row)
    {
      double s = 0;
      for (const auto& a : row.areas)
        s += a.ratio();
      return s;
    }

    bool intersectsAnyArea(const AddressRange& block, const MemoryProfile& profile)
    {
      if (block.intersects(profile.flash) or block.intersects(profile.ram))
        return true;
      for (const auto& p : profile.peripherals)
        if (block.intersects(p.range))
          return true;
      return false;
    }
  }

  std::vector<Interval> area_intervals(Area area, const MemoryProfile& profile,
                                       const KernelLayout& layout)
  {
    std::vector<Interval> out;
    switch (area)
      {
      case Area::FlashKernel:
        out.push_back(toInterval(layout.kernelCodeRegion));
        break;
      case Area::FlashSyscalls:
        out.push_back(toInterval(layout.syscallsRegion));
        break;
      case Area::FlashUser:
        out = subtract({toInterval(profile.flash)}, toInterval(layout.kernelCodeRegion));
        out = subtract(out, toInterval(layout.syscallsRegion));
        break;
      case Area::RamKernel:
        out.push_back(toInterval(layout.kernelDataRegion));
        break;
      case Area::RamUser:
        out = subtract({toInterval(profile.ram)}, toInterval(layout.kernelDataRegion));
        break;
      case Area::PeriphSystem:
      case Area::PeriphStandard:
        for (const auto& p : profile.peripherals)
          if ((p.kind == PeripheralKind::System) == (area == Area::PeriphSystem))
            out.push_back(toInterval(p.range));
        break;
      }
    return out;
  }

  std::vector<Interval> unprivileged_reach(const MpuConfiguration& cfg)
  {
    return reach(cfg, [](const Permission& p) { return p.unprivileged != AccessLevel::None; });
  }

  std::vector<Interval> unprivileged_executable(const MpuConfiguration& cfg)
  {
    return reach(cfg, [](const Permission& p) {
      return level_permits(p.unprivileged, AccessKind::Execute, p.executeNever);
    });
  }

  std::uint64_t overlap_bytes(std::span<const Interval> a, std::span<const Interval> b)
  {
    std::uint64_t n = 0;
    for (const auto& x : b)
      n += overlap(a, x);
    return n;
  }

  ExposureRow exposure(const TaskRecord& task, const MpuConfiguration& cfg,
                       const MemoryProfile& profile, const KernelLayout& layout)
  {
    ExposureRow row;
    row.task = task.id;
    row.name = task.name;
    row.variant = "standard";
    row.userRegions = task.userRegions;

    auto exposed = unprivileged_reach(cfg);
    for (auto area : kAllAreas)
      {
        auto iv = area_intervals(area, profile, layout);
        auto& slot = row.at(area);
        for (const auto& x : iv)
          slot.total += x.length();
        slot.exposed = overlap_bytes(exposed, iv);
      }

    for (const auto* c : profile.dmaControllers())
      if (overlap(exposed, toInterval(c->range)) > 0)
        row.dmaControllerExposed = true;

    auto exec = unprivileged_executable(cfg);
    row.executableFlashExposed = overlap(exec, toInterval(profile.flash));
    return row;
  }

  std::vector<UserRegion> worst_case_regions(const TaskRecord& task, const Kernel& kernel)
  {
    const auto& profile = kernel.profile();
    const auto& layout = kernel.layout();
    const Permission widest{AccessLevel::ReadWrite, AccessLevel::ReadWrite, false};

    std::vector<const TaskRecord*> others;
    for (const auto& t : kernel.tasks())
      if (not t.dmaService and t.state != TaskState::Voided and t.id != task.id)
        others.push_back(&t);

    auto admissible = [&](const AddressRange& block) {
      UserRegion r{block, widest};
      std::uint64_t ignored = 0;
      auto found = check_hardening_rules(task.stackRegion, std::span(&r, 1), others, profile,
                                         layout, ignored);
      return std::none_of(found.begin(), found.end(),
                          [](const RuleViolation& v) { return v.region != "stack"; });
    };

    std::vector<AddressRange> candidates;
    std::function<void(const AddressRange&)> descend = [&](const AddressRange& block) {
      if (not intersectsAnyArea(block, profile))
        return;
      if (admissible(block))
        {
          candidates.push_back(block);
          return;
        }
      if (block.size <= kMinRegionSize)
        return;
      std::uint32_t half = block.size / 2;
      descend(AddressRange{block.base, half});
      descend(AddressRange{Addr(block.base + half), half});
    };
    for (const auto& partition : {kCodePartition, kSramPartition, kPeripheralPartition})
      descend(partition);

    std::vector<UserRegion> chosen;
    TaskRecord probe = task;
    probe.userRegions.clear();
    double best = score(exposure(probe, kernel.build_mpu_configuration(probe), profile, layout));
    for (std::size_t pick = 0; pick < kMaxUserRegions; ++pick)
      {
        std::optional<AddressRange> bestBlock;
        for (const auto& block : candidates)
          {
            TaskRecord trial = probe;
            trial.userRegions.push_back(UserRegion{block, widest});
            double s = score(exposure(trial, kernel.build_mpu_configuration(trial), profile, layout));
            // Candidates are in address order, so strict improvement keeps
            // the lower address on ties.
            if (s > best)
              {
                best = s;
                bestBlock = block;
              }
          }
        if (not bestBlock)
          break;
        probe.userRegions.push_back(UserRegion{*bestBlock, widest});
        chosen.push_back(UserRegion{*bestBlock, widest});
      }
    return chosen;
  }

  std::pair<ExposureRow, ExposureRow> exposure_pair(const TaskRecord& task, const Kernel& kernel)
  {
    auto standard = exposure(task, kernel.build_mpu_configuration(task), kernel.profile(),
                             kernel.layout());

    TaskRecord worst = task;
    worst.userRegions = worst_case_regions(task, kernel);
    auto wc = exposure(worst, kernel.build_mpu_configuration(worst), kernel.profile(),
                       kernel.layout());
    wc.variant = "worst_case";
    return {std::move(standard), std::move(wc)};
  }

  LinearFit fit_linear(std::span<const std::pair<std::int64_t, std::int64_t>> points)
  {
    if (points.size() < 3)
      throw std::invalid_argument("fit_linear needs at least 3 points");

    const auto& p0 = points.front();
    const auto other = std::find_if(points.begin(), points.end(),
                                     [&](const auto& p) { return p.first != p0.first; });
    if (other == points.end())
      throw DegenerateInput("all points share n = " + std::to_string(p0.first));

    const std::int64_t dn = other->first - p0.first;
    const std::int64_t dy = other->second - p0.second;
    bool exact = std::all_of(points.begin(), points.end(), [&](const auto& p) {
      return (p.second - p0.second) * dn == dy * (p.first - p0.first);
    });

    LinearFit fit;
    fit.exact = exact;
    if (exact)
      {
        fit.b = double(dy) / double(dn);
        fit.a = double(p0.second) - fit.b * double(p0.first);
        return fit;
      }

    double n = double(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points)
      {
        sx += double(x);
        sy += double(y);
        sxx += double(x) * double(x);
        sxy += double(x) * double(y);
      }
    fit.b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.a = (sy - fit.b * sx) / n;
    return fit;
  }

  std::string_view to_string(Area area)
  {
    switch (area)
      {
      case Area::FlashKernel: return "flash-kernel";
      case Area::FlashSyscalls: return "flash-syscalls";
      case Area::FlashUser: return "flash-user";
      case Area::RamKernel: return "ram-kernel";
      case Area::RamUser: return "ram-user";
      case Area::PeriphSystem: return "periph-system";
      case Area::PeriphStandard: return "periph-standard";
      }
    return "?";
  }

}
