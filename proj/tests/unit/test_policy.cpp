#include <doctest.h>

#include "dmacap/policy.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "policy_grid.hpp"

using namespace dmacap;

namespace
{
  DmaRequest request(TaskId t, std::string periph, DmaOperation op, AddressRange buf, Ear ear = {})
  {
    DmaRequest r;
    r.requester = t;
    r.peripheralId = std::move(periph);
    r.operation = op;
    r.buffer = buf;
    r.ear = std::move(ear);
    return r;
  }

  RejectReason reasonOf(const Verdict& v) { return v.accepted() ? RejectReason::Ok : v.reason; }
}

TEST_CASE("capability examples")
{
  grid::Setup s;
  const auto& a = s.kernel.task(s.tasks[0]);
  const auto& b = s.kernel.task(s.tasks[1]);
  const auto& p = s.profile;

  CHECK(validate_request(request(a.id, "SPI1", DmaOperation::Read, {0x20002000, 0x40}, SpiSelect{"SS_FRAM"}),
                         a, p)
          .accepted());
  CHECK(reasonOf(validate_request(
          request(a.id, "SPI1", DmaOperation::Read, {0x20002000, 0x40}, SpiSelect{"SS_THERMO"}), a, p)) ==
        RejectReason::EarDenied);
  CHECK(reasonOf(validate_request(
          request(a.id, "ADC1", DmaOperation::Read, {0x20002000, 0x40}, AdcChannels{0b10001}), a, p)) ==
        RejectReason::Ok);
  CHECK(reasonOf(validate_request(
          request(a.id, "ADC1", DmaOperation::Read, {0x20002000, 0x40}, AdcChannels{0b100}), a, p)) ==
        RejectReason::EarDenied);
  CHECK(reasonOf(validate_request(
          request(a.id, "ADC1", DmaOperation::Write, {0x20002000, 0x40}, AdcChannels{0b1}), a, p)) ==
        RejectReason::RightMissing);
  CHECK(reasonOf(validate_request(
          request(a.id, "SPI1", DmaOperation::Read, {0x20002400, 0x40}, SpiSelect{"SS_FRAM"}), a, p)) ==
        RejectReason::BufferNotOwned);
  CHECK(reasonOf(validate_request(request(a.id, "GPIOA", DmaOperation::Read, {0x20002000, 4}), a, p)) ==
        RejectReason::NotDmaCapable);
  CHECK(reasonOf(validate_request(request(a.id, "USART1", DmaOperation::Read, {0x20002000, 4}), a, p)) ==
        RejectReason::NoCapability);
  CHECK(reasonOf(validate_request(request(a.id, "UART9", DmaOperation::Read, {0x20002000, 4}), a, p)) ==
        RejectReason::PeripheralUnknown);

  // Two entries on the same peripheral: the second one admits the address.
  CHECK(validate_request(request(b.id, "I2C1", DmaOperation::Read, {0x20002400, 4}, I2cAddress{0x21}), b, p)
          .accepted());
}

TEST_CASE("read-only regions may feed a WRITE but not receive a READ")
{
  grid::Setup s;
  const auto& a = s.kernel.task(s.tasks[0]);
  auto buf = AddressRange{0x20003100, 0x10};
  CHECK(validate_request(request(a.id, "SPI1", DmaOperation::Write, buf, SpiSelect{"SS_FRAM"}), a, s.profile)
          .accepted());
  CHECK(reasonOf(validate_request(request(a.id, "SPI1", DmaOperation::Read, buf, SpiSelect{"SS_FRAM"}), a,
                                  s.profile)) == RejectReason::BufferNotOwned);
}

TEST_CASE("buffer equal to the stack is owned; a span across two containers is not")
{
  grid::Setup s;
  const auto& a = s.kernel.task(s.tasks[0]);
  auto ear = SpiSelect{"SS_FRAM"};
  CHECK(validate_request(request(a.id, "SPI1", DmaOperation::Read, a.stackRegion, ear), a, s.profile)
          .accepted());
  CHECK(reasonOf(validate_request(request(a.id, "SPI1", DmaOperation::Write, {0x200030F0, 0x20}, ear), a,
                                  s.profile)) == RejectReason::BufferNotOwned);
}

TEST_CASE("full duplex needs both buffers")
{
  grid::Setup s;
  const auto& a = s.kernel.task(s.tasks[0]);
  auto r = request(a.id, "I2C1", DmaOperation::FullDuplex, {0x20003100, 0x10}, I2cAddress{0x50});
  CHECK(reasonOf(validate_request(r, a, s.profile)) == RejectReason::BufferNotOwned);
  r.rxBuffer = AddressRange{0x20003000, 0x10};
  CHECK(validate_request(r, a, s.profile).accepted());
  r.rxBuffer = AddressRange{0x20003100, 0x10};
  CHECK(reasonOf(validate_request(r, a, s.profile)) == RejectReason::BufferNotOwned);
}

TEST_CASE("a task without capabilities is refused everything")
{
  Kernel k(fixtures::toy_profile(), fixtures::toy_layout());
  auto id = k.create_task(fixtures::toy_task(0)).id;
  const auto& t = k.task(id);
  for (const auto* p : {"USART1", "SPI1", "ADC1", "I2C1"})
    CHECK(reasonOf(validate_request(request(id, p, DmaOperation::Read, t.stackRegion), t, k.profile())) ==
          RejectReason::NoCapability);
}

TEST_CASE("validate_request agrees with the enumerating oracle on the full grid")
{
  grid::Setup s;
  auto all = grid::requests(s.tasks);
  CHECK(all.size() >= 5000);
  std::size_t accepted = 0;
  for (const auto& r : all)
    {
      const auto& t = s.kernel.task(r.requester);
      auto got = validate_request(r, t, s.profile);
      auto want = oracle::brute_force_validate(r, t, s.profile);
      accepted += got.accepted();
      CHECK(got == want);
    }
  CHECK(accepted > 0);
}

TEST_CASE("role separation: a task is never granted another task's memory")
{
  grid::Setup s;
  for (const auto& r : grid::requests(s.tasks))
    {
      const auto& t = s.kernel.task(r.requester);
      if (not validate_request(r, t, s.profile).accepted())
        continue;
      for (TaskId other : s.tasks)
        {
          if (other == t.id)
            continue;
          const auto& o = s.kernel.task(other);
          CHECK_FALSE(r.buffer.intersects(o.stackRegion));
          if (r.rxBuffer)
            CHECK_FALSE(r.rxBuffer->intersects(o.stackRegion));
        }
      CHECK_FALSE(r.buffer.intersects(s.kernel.layout().kernelDataRegion));
    }
}

TEST_CASE("dropping a capability never turns a reject into an accept")
{
  grid::Setup s;
  const auto& full = s.kernel.task(s.tasks[1]);
  for (std::size_t drop = 0; drop < full.capabilities.size(); ++drop)
    {
      TaskRecord reduced = full;
      std::vector<DmaCapability> kept;
      for (std::size_t i = 0; i < full.capabilities.size(); ++i)
        if (i != drop)
          kept.push_back(full.capabilities.items()[i]);
      reduced.capabilities = CapabilityList(kept);
      for (const auto& r : grid::requests({full.id}))
        if (validate_request(r, reduced, s.profile).accepted())
          CHECK(validate_request(r, full, s.profile).accepted());
    }
}

TEST_CASE("validation leaves the capability list untouched")
{
  grid::Setup s;
  const auto& t = s.kernel.task(s.tasks[0]);
  auto identity = t.capabilities.identity();
  auto before = t.capabilities.items();
  for (const auto& r : grid::requests({t.id}))
    validate_request(r, t, s.profile);
  CHECK(t.capabilities.identity() == identity);
  CHECK(t.capabilities.items() == before);
}

TEST_CASE("ear_permits")
{
  CHECK(ear_permits(AdcChannels{0b10001}, AdcChannels{0b00001}));
  CHECK(ear_permits(AdcChannels{0b10001}, AdcChannels{0}));
  CHECK_FALSE(ear_permits(AdcChannels{0b10001}, AdcChannels{0b00100}));
  CHECK(ear_permits(I2cAddress{0x50}, I2cAddress{0x50}));
  CHECK_FALSE(ear_permits(I2cAddress{0x50}, I2cAddress{0x51}));
  CHECK_FALSE(ear_permits(SpiSelect{"A"}, I2cAddress{0x50}));
  CHECK(ear_permits(std::monostate{}, std::monostate{}));
}
