#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "dmacap/memmap.hpp"

namespace dmacap
{

  /// Sparse backing store for the whole 32-bit address space. Untouched
  /// bytes read as zero.
  class ByteStore
  {
  public:
    std::uint8_t read(Addr addr) const
    {
      auto it = pages_.find(addr >> kPageShift);
      return it == pages_.end() ? 0 : it->second[addr & kPageMask];
    }

    void write(Addr addr, std::uint8_t value)
    { pages_[addr >> kPageShift][addr & kPageMask] = value; }

    void fill(const AddressRange& range, std::uint8_t value)
    {
      for (std::uint64_t a = range.base; a < range.end(); ++a)
        write(Addr(a), value);
    }

    bool operator==(const ByteStore& other) const;

  private:
    static constexpr unsigned kPageShift = 12;
    static constexpr Addr kPageMask = (Addr(1) << kPageShift) - 1;
    using Page = std::array<std::uint8_t, std::size_t(1) << kPageShift>;

    std::map<Addr, Page> pages_;
  };

  inline bool ByteStore::operator==(const ByteStore& other) const
  {
    // Pages present on one side only must be all-zero.
    auto isZero = [](const Page& p) {
      for (auto b : p)
        if (b)
          return false;
      return true;
    };
    for (const auto& [idx, page] : pages_)
      {
        auto it = other.pages_.find(idx);
        if (it == other.pages_.end() ? not isZero(page) : it->second != page)
          return false;
      }
    for (const auto& [idx, page] : other.pages_)
      if (not pages_.count(idx) and not isZero(page))
        return false;
    return true;
  }

}
