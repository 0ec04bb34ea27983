#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sealbid/bytes.hpp"
#include "sealbid/chain.hpp"
#include "sealbid/enclave.hpp"
#include "sealbid/events.hpp"
#include "sealbid/gas.hpp"
#include "sealbid/proposer.hpp"
#include "sealbid/quorum.hpp"
#include "sealbid/transaction.hpp"

namespace sealbid::auction {

enum class State { init, deployed, open, closed, resolved, claimed };
std::string_view to_string(State s);

/// Lifecycle edges, self-loops for the fallback paths included.
const std::vector<std::pair<State, State>>& lifecycle_edges();
bool is_edge(State from, State to);

/// Operation not permitted in the current state (or mode). Nothing was changed.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
/// Registration refused: deadline reached or malformed request.
class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Proposal submitted after the window, or finalize called before it ended.
class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AuctionConfig {
  std::uint64_t deadline_height = 0;
  Address auctioneer;
  std::uint64_t token_id = 0;
  std::uint64_t gas_price = 1;
  std::uint64_t kappa = 6;
  ResolutionMode resolution_mode = ResolutionMode::exhaustive;
  std::uint64_t proposal_window = kDefaultProposalWindow;
  // settlement chain parameters the signed payloads must match
  std::uint64_t chain_id = 1;
  std::uint64_t fee_gas = 21'000;

  Amount fee() const { return fee_gas * gas_price; }
};

/// Plaintext of a registration request: bidder X25519 key ‖ claim address.
inline constexpr std::size_t kRegistrationPayloadSize = 32 + 20;
Bytes registration_payload(const enclave::EncryptionPublicKey& bidder_key, const Address& claim_address);

enum class SettlementKind { asset, payment, excess, refund };
std::string_view to_string(SettlementKind k);

struct Settlement {
  SettlementKind kind;
  std::size_t bidder = 0;  // registration index; unused for the asset transfer
  Address from;
  Address to;
  Amount value = 0;
  Amount fee = 0;
  SignedTransaction tx;
};

struct BidOutcome {
  std::size_t index = 0;
  Address escrow;
  std::optional<Amount> cutoff_balance;  // unknown for unproposed bidders in proposer mode
  Amount current_balance = 0;
  std::optional<Address> refund_to;
};

struct ResolutionResult {
  std::optional<Address> winner_escrow;
  std::optional<std::size_t> winner_index;
  Amount winning_amount = 0;
  std::uint64_t cutoff_height = 0;
  /// Confirmed height the current balances were read at.
  std::uint64_t snapshot_height = 0;
  std::vector<Settlement> settlements;
  std::vector<Address> bidder_set;
  std::vector<BidOutcome> bids;

  // conservation ledger over bidder escrows; the asset transfer is excluded
  Amount deposits = 0;  // sum of current escrow balances
  Amount paid = 0;      // value delivered to the auctioneer
  Amount refunded = 0;  // loser refunds
  Amount excess = 0;    // winner's post-cutoff funds
  Amount fees = 0;
  Amount dust = 0;      // balances too small to cover a transfer fee, left in escrow

  bool conserved() const { return deposits == paid + refunded + excess + fees + dust; }
  std::vector<SignedTransaction> settlement_txs() const;
};

/// Cheap digest of everything an operation may mutate; used to show refused calls had no effect.
struct Fingerprint {
  State state;
  bool setup_done;
  std::size_t bidders;
  bool resolved;
  std::optional<ProposalPhase> proposals;
  std::size_t events;
  bool operator==(const Fingerprint&) const = default;
};

/// One auction instance. All operations run inside the enclave and are serialized by the caller.
class Auction {
 public:
  /// Throws ConfigError when the deadline is not above the agreed head, kappa disagrees with
  /// the quorum client, or the window is zero in proposer mode.
  static Auction deploy(enclave::Enclave& enclave, quorum::QuorumClient& quorum, AuctionConfig config,
                        EventLog& events, gas::GasLedger* gas = nullptr);

  const std::string& id() const { return id_; }
  const AuctionConfig& config() const { return config_; }
  State state() const { return state_; }
  std::size_t bidder_count() const { return bidders_; }
  Fingerprint fingerprint() const;

  /// Idempotent; the asset escrow address is public.
  Address setup();
  std::optional<Address> asset_escrow() const;

  /// Opens once the asset is owned by the escrow at the confirmed height.
  State verify_asset_escrow(quorum::QuorumClient& quorum);

  /// `request` is encrypted to the enclave input key and carries registration_payload().
  /// Returns the escrow address encrypted to the bidder key.
  enclave::Envelope register_bidder(const enclave::Envelope& request, quorum::QuorumClient& quorum);
  std::size_t register_calls() const { return register_calls_; }

  /// Permissionless; Closed once the deadline has kappa confirmations.
  State close(quorum::QuorumClient& quorum);

  /// Exhaustive resolution. Quorum errors propagate and leave the auction Closed.
  const ResolutionResult& resolve(quorum::QuorumClient& quorum);

  const std::optional<ResolutionResult>& resolution() const { return resolution_; }
  std::vector<std::string> settlement_payloads() const;

  /// Claimed once every settlement transaction is at least kappa blocks deep.
  State finalize(const chain::SimChain& chain);

  // proposer-based resolution
  const ProposalPhase& open_proposals(quorum::QuorumClient& quorum);
  ProposalOutcome submit_proposal(const Address& candidate, quorum::QuorumClient& quorum);
  const ResolutionResult& finalize_proposals(quorum::QuorumClient& quorum);
  const std::optional<ProposalPhase>& proposals() const { return proposals_; }

 private:
  struct RegistryEntry {
    enclave::KeyHandle handle;
    Address escrow;
    enclave::EncryptionPublicKey bidder_key{};
    Address claim;
    std::uint64_t registered_at = 0;
  };

  Auction(enclave::Enclave& enclave, AuctionConfig config, EventLog& events, gas::GasLedger* gas, std::string id);

  void require(State s, std::string_view op) const;
  void transition(State to);
  void emit(std::string kind, json data);
  std::string label(std::string_view suffix) const;
  std::vector<RegistryEntry> read_registry() const;
  std::optional<std::size_t> find_escrow(const std::vector<RegistryEntry>& registry, const Address& escrow) const;
  std::uint64_t snapshot_height(quorum::QuorumClient& quorum) const;
  std::uint64_t reached_height(quorum::QuorumClient& quorum, const Address& escrow, Amount amount,
                               std::size_t* queries) const;
  ResolutionResult exhaustive(quorum::QuorumClient& quorum, const std::vector<RegistryEntry>& registry);
  ResolutionResult settle(quorum::QuorumClient& quorum, const std::vector<RegistryEntry>& registry,
                          std::optional<std::size_t> winner, Amount amount,
                          std::vector<std::optional<Amount>> cutoffs);
  const ResolutionResult& publish(ResolutionResult result);

  enclave::Enclave* enclave_;
  AuctionConfig config_;
  EventLog* events_;
  gas::GasLedger* gas_;
  std::string id_;
  State state_ = State::init;
  std::optional<std::pair<enclave::KeyHandle, Address>> asset_escrow_;
  std::size_t bidders_ = 0;
  std::size_t register_calls_ = 0;
  std::size_t events_emitted_ = 0;
  std::optional<ResolutionResult> resolution_;
  std::optional<ProposalPhase> proposals_;
};

}  // namespace sealbid::auction
