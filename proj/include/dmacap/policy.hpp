#pragma once

#include <cstdint>

#include "dmacap/dma_types.hpp"
#include "dmacap/memmap.hpp"
#include "dmacap/task.hpp"

namespace dmacap
{

  enum class Decision
  { Accept, Reject };

  struct Verdict
  {
    Decision decision = Decision::Reject;
    RejectReason reason = RejectReason::NoCapability;

    static Verdict accept() { return Verdict{Decision::Accept, RejectReason::Ok}; }
    static Verdict reject(RejectReason r) { return Verdict{Decision::Reject, r}; }

    bool accepted() const { return decision == Decision::Accept; }
    bool operator==(const Verdict&) const = default;
  };

  /// Validate a DMA request against the requester's capabilities and its
  /// stack/user regions. Only the requester's record is consulted.
  ///
  /// Reasons are reported in this order: PERIPHERAL_UNKNOWN, NOT_DMA_CAPABLE,
  /// NO_CAPABILITY (no entry names the peripheral), RIGHT_MISSING (no entry
  /// on it carries the operation's right), EAR_DENIED (no such entry admits
  /// the EAR parameters), BUFFER_NOT_OWNED.
  ///
  /// A buffer is owned when it lies inside the stack, or inside one user
  /// region whose permission at the task's privilege allows the memory side
  /// of the transfer: write for READ (rx), read for WRITE (tx).
  Verdict validate_request(const DmaRequest& req, const TaskRecord& task,
                           const MemoryProfile& profile);

  /// Same, adding the number of elementary checks performed to `checks`.
  Verdict validate_request(const DmaRequest& req, const TaskRecord& task,
                           const MemoryProfile& profile, std::uint64_t& checks);

  /// EAR admission: masks by subset, scalar selectors by equality. The
  /// variants must match.
  bool ear_permits(const Ear& granted, const Ear& requested);

  std::string_view to_string(Decision d);

}
