#include "sealbid/proposer.hpp"

#include <tuple>

#include "sealbid/auction.hpp"

namespace sealbid::auction {

std::string_view to_string(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::open: return "open";
    case ProposalStatus::finalized: return "finalized";
    case ProposalStatus::timed_out: return "timed_out";
  }
  return "unknown";
}

std::string_view to_string(ProposalRejection r) {
  return r == ProposalRejection::unknown_escrow ? "unknown_escrow" : "not_higher";
}

const ProposalPhase& Auction::open_proposals(quorum::QuorumClient& quorum) {
  require(State::closed, "open_proposals");
  if (config_.resolution_mode != ResolutionMode::proposer_based) {
    throw StateError("open_proposals requires proposer-based resolution");
  }
  if (proposals_) throw StateError("proposal phase already opened");
  const std::uint64_t head = quorum.query_height().value;
  ProposalPhase phase;
  phase.auction = id_;
  phase.window_end_height = head + config_.proposal_window;
  proposals_ = phase;
  transition(State::closed);
  emit("ProposalsOpened", {{"window_end_height", phase.window_end_height}});
  return *proposals_;
}

ProposalOutcome Auction::submit_proposal(const Address& candidate, quorum::QuorumClient& quorum) {
  require(State::closed, "submit_proposal");
  if (!proposals_ || proposals_->status != ProposalStatus::open) throw StateError("no open proposal phase");
  const std::uint64_t head = quorum.query_height().value;
  if (head >= proposals_->window_end_height) {
    throw WindowError("proposal window ended at height " + std::to_string(proposals_->window_end_height));
  }

  // Work on a copy so a quorum failure midway leaves the phase untouched.
  ProposalPhase phase = *proposals_;
  ++phase.proposal_count;
  ProposalOutcome outcome;
  const auto registry = read_registry();
  const auto index = find_escrow(registry, candidate);
  if (!index) {
    outcome.rejection = ProposalRejection::unknown_escrow;
  } else {
    ++phase.verification_queries;
    const Amount amount = quorum.query_balance(candidate, config_.deadline_height).value;
    Leader contender{*index, candidate, amount, 0, false};
    bool better = false;
    if (!phase.leader) {
      better = amount > 0;
    } else if (amount > phase.leader->amount) {
      better = true;
    } else if (amount == phase.leader->amount && amount > 0) {
      Leader& cur = *phase.leader;
      if (!cur.reached_known) {
        cur.reached_height = reached_height(quorum, cur.escrow, cur.amount, &phase.tie_break_queries);
        cur.reached_known = true;
      }
      contender.reached_height = reached_height(quorum, candidate, amount, &phase.tie_break_queries);
      contender.reached_known = true;
      better = std::tie(contender.reached_height, contender.escrow) < std::tie(cur.reached_height, cur.escrow);
    }
    if (better) {
      phase.leader = contender;
    } else {
      outcome.rejection = ProposalRejection::not_higher;
    }
  }

  proposals_ = phase;
  transition(State::closed);
  if (outcome.accepted()) {
    emit("ProposalAccepted", {{"address", candidate.hex()}, {"amount", phase.leader->amount}});
  } else {
    emit("ProposalRejected", {{"reason", to_string(*outcome.rejection)}});
  }
  if (gas_ != nullptr) gas_->charge("proposer", gas::Layer::execution, gas::Op::register_winner);
  return outcome;
}

const ResolutionResult& Auction::finalize_proposals(quorum::QuorumClient& quorum) {
  require(State::closed, "finalize_proposals");
  if (!proposals_ || proposals_->status != ProposalStatus::open) throw StateError("no open proposal phase");
  const std::uint64_t head = quorum.query_height().value;
  if (head < proposals_->window_end_height) {
    throw WindowError("proposal window open until height " + std::to_string(proposals_->window_end_height));
  }
  const auto registry = read_registry();
  ResolutionResult result;
  ProposalStatus status;
  if (proposals_->leader) {
    const Leader& leader = *proposals_->leader;
    std::vector<std::optional<Amount>> cutoffs(registry.size());
    cutoffs[leader.index] = leader.amount;
    result = settle(quorum, registry, leader.index, leader.amount, std::move(cutoffs));
    status = ProposalStatus::finalized;
  } else {
    result = exhaustive(quorum, registry);
    status = ProposalStatus::timed_out;
  }
  proposals_->status = status;
  emit("ProposalFinalized", {{"status", to_string(status)}, {"proposals", proposals_->proposal_count}});
  return publish(std::move(result));
}

}  // namespace sealbid::auction
