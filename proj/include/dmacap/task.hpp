#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmacap/dma_types.hpp"
#include "dmacap/memmap.hpp"
#include "dmacap/mpu.hpp"

namespace dmacap
{

  inline constexpr std::size_t kMaxUserRegions = 3;

  struct UserRegion
  {
    AddressRange range;
    Permission permission;

    bool operator==(const UserRegion&) const = default;
  };

  enum class TaskState
  {
    Ready,
    Running,
    BlockedOnNotify,
    BlockedOnDelay,   // periodic task waiting for its next release
    Finished,         // script ran to its end
    Stopped,
    Voided,
  };

  enum class ActionKind
  {
    MemRead,
    MemWrite,
    Exec,
    Syscall,
    DmaRequest,
    RawDmaConfig,
    RedefineRegions,
    WaitNotify,
    Nop,
  };

  /// Descriptor fields written straight into the controller by task code.
  struct RawDescriptorWrite
  {
    unsigned channel = 0;
    AddressRange source;
    AddressRange destination;
    std::uint32_t length = 0;
    TransferDirection direction = TransferDirection::PeriphToMem;
  };

  /// One scripted step of a task. Only the fields relevant to `kind` are
  /// meaningful.
  struct Action
  {
    ActionKind kind = ActionKind::Nop;
    Addr addr = 0;
    std::uint32_t length = 1;
    std::uint8_t value = 0;
    std::optional<Addr> at;             // instruction address for the syscall gate
    DmaRequest request;                 // DmaRequest
    RawDescriptorWrite raw;             // RawDmaConfig
    std::vector<UserRegion> regions;    // RedefineRegions
    std::string label;
  };

  /// Task as declared by a scenario, before kernel validation.
  struct TaskSpec
  {
    std::string name;
    bool privileged = false;
    AddressRange codeRegion;
    AddressRange stackRegion;
    std::vector<UserRegion> userRegions;
    std::vector<DmaCapability> capabilities;
    std::vector<Action> behavior;
    std::uint32_t period = 0;           // ticks; 0 runs the script once
  };

  /// Kernel task control block.
  struct TaskRecord
  {
    TaskId id = -1;
    std::string name;
    bool privileged = false;
    bool dmaService = false;
    AddressRange codeRegion;
    AddressRange stackRegion;
    std::vector<UserRegion> userRegions;
    CapabilityList capabilities;
    std::vector<Action> behavior;
    std::uint32_t period = 0;
    TaskState state = TaskState::Ready;
    std::deque<DmaNotification> notificationBox;

    std::size_t pc = 0;
    std::uint64_t cyclesCompleted = 0;
    std::uint64_t deadlineMisses = 0;

    bool alive() const
    {
      return state != TaskState::Stopped and state != TaskState::Voided and
             state != TaskState::Finished;
    }
  };

  std::string_view to_string(TaskState state);
  std::string_view to_string(ActionKind kind);
  ActionKind parse_action_kind(std::string_view text);

}
