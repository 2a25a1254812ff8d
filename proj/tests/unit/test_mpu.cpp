#include <doctest.h>

#include "dmacap/errors.hpp"
#include "dmacap/mpu.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace dmacap;

namespace
{
  RegionDescriptor region(int n, Addr base, std::uint32_t size, AccessLevel priv, AccessLevel unpriv,
                          bool xn = true)
  {
    return RegionDescriptor{n, AddressRange{base, size}, Permission{priv, unpriv, xn}, true};
  }

  AccessQuery q(Addr addr, std::uint32_t width, AccessKind kind, bool priv)
  { return AccessQuery{addr, width, kind, priv}; }

  const auto RO = AccessLevel::ReadOnly;
  const auto RW = AccessLevel::ReadWrite;
}

TEST_CASE("validate_descriptor")
{
  CHECK_NOTHROW(validate_descriptor(region(0, 0x20000040, 64, RW, RW)));
  CHECK_THROWS_AS(validate_descriptor(region(0, 0x20000020, 64, RW, RW)), AlignmentError);
  CHECK_THROWS_AS(validate_descriptor(region(0, 0x20000000, 48, RW, RW)), SizeError);
  CHECK_THROWS_AS(validate_descriptor(region(0, 0x20000000, 16, RW, RW)), SizeError);
  CHECK(is_legal_region(AddressRange{0xE0000000, 0x20000000}));
}

TEST_CASE("validate_configuration")
{
  MpuConfiguration cfg;
  cfg.regions[2] = region(3, 0x20000000, 64, RW, RW);
  CHECK_THROWS_AS(validate_configuration(cfg), ConfigError);
  cfg.regions[2] = region(2, 0x20000000, 64, RO, RW);
  CHECK_THROWS_AS(validate_configuration(cfg), ConfigError);
  cfg.regions[2] = region(2, 0x20000000, 64, RW, RO);
  CHECK_NOTHROW(validate_configuration(cfg));
}

TEST_CASE("check_access examples")
{
  auto profile = fixtures::toy_profile();
  MpuConfiguration cfg;

  SUBCASE("unprivileged read of RO region")
  {
    cfg.regions[1] = region(1, 0x20000000, 1024, RO, RO);
    CHECK(check_access(cfg, q(0x20000010, 4, AccessKind::Read, false), profile) == AccessResult::Allow);
  }
  SUBCASE("highest slot wins")
  {
    cfg.regions[2] = region(2, 0x20000000, 1024, RW, RW);
    cfg.regions[3] = region(3, 0x20000000, 256, RW, RO);
    CHECK(check_access(cfg, q(0x20000010, 1, AccessKind::Write, false), profile) == AccessResult::Fault);
    CHECK(check_access(cfg, q(0x20000110, 1, AccessKind::Write, false), profile) == AccessResult::Allow);
  }
  SUBCASE("background region is privileged only")
  {
    CHECK(check_access(cfg, q(0x20000100, 4, AccessKind::Read, true), profile) == AccessResult::Allow);
    CHECK(check_access(cfg, q(0x20000100, 4, AccessKind::Read, false), profile) == AccessResult::Fault);
    cfg.backgroundEnabled = false;
    CHECK(check_access(cfg, q(0x20000100, 4, AccessKind::Read, true), profile) == AccessResult::Fault);
  }
  SUBCASE("system partition needs privilege")
  {
    cfg.regions[7] = region(7, 0xE0000000, 0x20000000, RW, RW);
    CHECK(check_access(cfg, q(0xE000E010, 4, AccessKind::Write, false), profile) == AccessResult::Fault);
    CHECK(check_access(cfg, q(0xE000E010, 4, AccessKind::Write, true), profile) == AccessResult::Allow);
  }
  SUBCASE("execute needs read and XN clear")
  {
    cfg.regions[0] = region(0, 0x08000000, 0x4000, RO, RO, false);
    cfg.regions[1] = region(1, 0x08001000, 0x400, RO, RO, true);
    CHECK(check_access(cfg, q(0x08000000, 2, AccessKind::Execute, false), profile) == AccessResult::Allow);
    CHECK(check_access(cfg, q(0x08001000, 2, AccessKind::Execute, false), profile) == AccessResult::Fault);
  }
  SUBCASE("privileged background execute only from code")
  {
    CHECK(check_access(cfg, q(0x08000000, 2, AccessKind::Execute, true), profile) == AccessResult::Allow);
    CHECK(check_access(cfg, q(0x20000000, 2, AccessKind::Execute, true), profile) == AccessResult::Fault);
  }
  SUBCASE("multi-byte access is a per-byte conjunction")
  {
    cfg.regions[2] = region(2, 0x20000000, 64, RW, RW);
    CHECK(check_access(cfg, q(0x2000003C, 4, AccessKind::Write, false), profile) == AccessResult::Allow);
    CHECK(check_access(cfg, q(0x2000003E, 4, AccessKind::Write, false), profile) == AccessResult::Fault);
  }
  SUBCASE("disabled regions are ignored")
  {
    auto d = region(4, 0x20000000, 64, RW, RW);
    d.enabled = false;
    cfg.regions[4] = d;
    CHECK(check_access(cfg, q(0x20000000, 1, AccessKind::Read, false), profile) == AccessResult::Fault);
  }
  SUBCASE("span past 2^32 faults")
  {
    cfg.regions[7] = region(7, 0xE0000000, 0x20000000, RW, RW);
    CHECK(check_access(cfg, q(0xFFFFFFFE, 4, AccessKind::Read, true), profile) == AccessResult::Fault);
  }
}

TEST_CASE("check_access matches the per-byte oracle on random inputs")
{
  auto profile = fixtures::toy_profile();
  gen::Random r(0xC0FFEE);
  for (int i = 0; i < 3000; ++i)
    {
      auto cfg = gen::configuration(r, profile);
      auto query = gen::query(r, cfg, profile);
      INFO("iteration " << i);
      CHECK(check_access(cfg, query, profile) == oracle::brute_force_check(cfg, query, profile));
    }
}

TEST_CASE("privilege is monotone")
{
  auto profile = fixtures::toy_profile();
  gen::Random r(7);
  for (int i = 0; i < 2000; ++i)
    {
      auto cfg = gen::configuration(r, profile);
      cfg.backgroundEnabled = true;
      auto query = gen::query(r, cfg, profile);
      query.privileged = false;
      if (check_access(cfg, query, profile) == AccessResult::Allow)
        {
          query.privileged = true;
          CHECK(check_access(cfg, query, profile) == AccessResult::Allow);
        }
    }
}

TEST_CASE("overlap precedence: the higher slot alone decides the overlap")
{
  auto profile = fixtures::toy_profile();
  gen::Random r(11);
  for (int i = 0; i < 2000; ++i)
    {
      auto cfg = gen::configuration(r, profile);
      for (int hi = kMpuRegions - 1; hi >= 0; --hi)
        {
          const auto& top = cfg.regions[std::size_t(hi)];
          if (not top or not top->enabled)
            continue;
          MpuConfiguration alone;
          alone.backgroundEnabled = cfg.backgroundEnabled;
          alone.regions[std::size_t(hi)] = top;
          Addr probe = Addr(top->range.base + r.uniform(0, top->range.size - 1));
          for (int kind = 0; kind < 3; ++kind)
            for (bool priv : {false, true})
              {
                AccessQuery query{probe, 1, AccessKind(kind), priv};
                CHECK(check_access(cfg, query, profile) == check_access(alone, query, profile));
              }
          break;
        }
    }
}

TEST_CASE("check_access is deterministic")
{
  auto profile = fixtures::toy_profile();
  gen::Random r(3);
  for (int i = 0; i < 200; ++i)
    {
      auto cfg = gen::configuration(r, profile);
      auto query = gen::query(r, cfg, profile);
      CHECK(check_access(cfg, query, profile) == check_access(cfg, query, profile));
    }
}
