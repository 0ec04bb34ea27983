#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sealbid/auction.hpp"
#include "sealbid/bytes.hpp"
#include "sealbid/chain.hpp"
#include "sealbid/gas.hpp"
#include "sealbid/quorum.hpp"

namespace sealbid::harness {

/// Malformed or inconsistent scenario. `line` is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string source, std::size_t line, std::string field, const std::string& message);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
  std::string field_;
};

struct TopUp {
  Amount amount = 0;
  std::uint64_t height = 0;
};

struct BidderScript {
  Amount deposit = 0;
  std::uint64_t funding_height = 0;   // block that includes the funding transfer
  std::uint64_t register_height = 0;  // head at which the registration call is made
  std::optional<TopUp> top_up;
};

struct EndpointSpec {
  std::string id;
  quorum::Behavior behavior = quorum::Honest{};
};

struct QuorumSpec {
  std::size_t sample_size = 3;
  std::size_t agreement = 2;
  /// Adds a trusted, honest "fallback" endpoint consulted when the sample disagrees.
  bool fallback = false;
};

struct ReorgFault {
  std::uint64_t at_height = 0;
  std::size_t depth = 0;
};

struct Faults {
  std::optional<ReorgFault> reorg;
  bool compromise_enclave = false;
  bool tamper_registry = false;
};

struct Expectations {
  std::optional<auction::State> final_state;
  bool oracle_divergence = false;
  std::optional<bool> reorg_refused;
};

/// Marker in `proposals` for a candidate that is not a registered escrow.
inline constexpr std::int64_t kUnknownCandidate = -1;

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  chain::ChainParams chain;

  std::uint64_t deadline = 0;
  std::uint64_t gas_price = 1;
  std::uint64_t kappa = 6;
  ResolutionMode mode = ResolutionMode::exhaustive;
  std::uint64_t proposal_window = auction::kDefaultProposalWindow;
  std::uint64_t token_id = 1;
  bool escrow_asset = true;
  std::string pricing = "default";

  std::vector<BidderScript> bidders;
  QuorumSpec quorum;
  std::vector<EndpointSpec> endpoints;
  /// Bidder indices (scenario order) proposed in sequence; empty means every bidder in order.
  std::vector<std::int64_t> proposals;
  Faults faults;
  Expectations expect;

  Amount fee() const { return chain.fee_gas * gas_price; }
  /// First head at which the escrowed asset has kappa confirmations.
  std::uint64_t open_height() const { return 1 + kappa; }
};

/// Throws ScenarioError naming the offending field.
void validate(const Scenario& s, std::string_view source = "<scenario>");

Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Three honest endpoints named rpc-0..rpc-2.
std::vector<EndpointSpec> default_endpoints();

struct OracleResult {
  std::optional<std::size_t> winner;  // scenario bidder index
  Amount amount = 0;
  std::vector<Amount> cutoff_balances;
  /// Bidders sharing the top amount and the earliest completion height.
  std::vector<std::size_t> tied;
};

/// Recomputes the outcome from the funding plan alone. Ties on amount go to the
/// earliest completion height; remaining ties go to the lowest escrow address
/// when `escrows` (scenario order) is given, else `winner` stays empty and
/// `tied` lists the candidates. In proposer mode only proposed bidders compete,
/// unless none of them holds a positive cutoff balance (the exhaustive fallback).
OracleResult oracle_resolve(const Scenario& s, const std::vector<Address>* escrows = nullptr);

}  // namespace sealbid::harness
