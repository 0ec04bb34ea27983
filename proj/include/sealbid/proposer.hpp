#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sealbid/bytes.hpp"

namespace sealbid::auction {

inline constexpr std::uint64_t kDefaultProposalWindow = 10;

enum class ProposalStatus { open, finalized, timed_out };
std::string_view to_string(ProposalStatus s);

struct Leader {
  std::size_t index = 0;  // registration index
  Address escrow;
  Amount amount = 0;                // cutoff balance
  std::uint64_t reached_height = 0; // first height the escrow held `amount`; filled lazily on ties
  bool reached_known = false;
  bool operator==(const Leader&) const = default;
};

struct ProposalPhase {
  std::string auction;
  std::optional<Leader> leader;
  std::size_t proposal_count = 0;
  std::uint64_t window_end_height = 0;
  ProposalStatus status = ProposalStatus::open;
  /// Cutoff-balance checks, one per proposal that named a registered escrow.
  std::size_t verification_queries = 0;
  /// Extra balance lookups spent resolving equal-amount proposals.
  std::size_t tie_break_queries = 0;
  bool operator==(const ProposalPhase&) const = default;
};

enum class ProposalRejection { unknown_escrow, not_higher };
std::string_view to_string(ProposalRejection r);

struct ProposalOutcome {
  std::optional<ProposalRejection> rejection;
  bool accepted() const { return !rejection; }
};

}  // namespace sealbid::auction
