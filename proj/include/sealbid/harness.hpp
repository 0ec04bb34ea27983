#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sealbid/auction.hpp"
#include "sealbid/events.hpp"
#include "sealbid/gas.hpp"
#include "sealbid/scenario.hpp"

namespace sealbid::harness {

/// Code identity the harness enclave attests to.
const Hash32& engine_code_hash();

struct InvariantResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct TraceEntry {
  std::string actor;
  std::string action;
  auction::State before;
  auction::State after;
  bool ok = true;           // false when the call threw
  bool unchanged = true;    // fingerprint preserved; only meaningful for refused calls
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  auction::State final_state = auction::State::init;

  std::optional<std::size_t> winner;  // scenario bidder index
  std::optional<Address> winner_escrow;
  Amount amount = 0;
  OracleResult oracle;
  bool oracle_divergence = false;

  bool compromised = false;
  Amount stolen = 0;
  bool tamper_detected = false;
  std::optional<bool> reorg_refused;
  bool asset_unclaimed = false;

  std::size_t queries = 0;
  std::size_t balance_queries = 0;
  std::size_t discrepancies = 0;
  std::vector<std::string> notes;

  /// Escrow address per scenario bidder; nullopt if registration never succeeded.
  std::vector<std::optional<Address>> escrows;
  std::vector<std::size_t> enclave_calls;      // per scenario bidder
  std::vector<std::size_t> funding_transfers;  // per scenario bidder, top-ups excluded
  std::vector<std::size_t> top_up_transfers;
  std::optional<auction::ResolutionResult> resolution;
  std::optional<auction::ProposalPhase> proposals;
  std::vector<TraceEntry> trace;

  std::vector<gas::ReportRow> gas_table;
  std::vector<gas::Charge> gas_charges;

  std::vector<InvariantResult> invariants;

  EventLog events;
  std::string audit_log;
  std::optional<std::filesystem::path> event_log_path;
  std::optional<std::filesystem::path> audit_log_path;
  std::optional<std::filesystem::path> report_path;

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 1; }
  const InvariantResult* invariant(std::string_view name) const;
  json to_json() const;
  std::string summary() const;
};

/// Deterministic in (scenario, seed). Throws ScenarioError for invalid scenarios.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});
RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options = {});

struct LogVerification {
  bool ok = true;
  std::size_t events = 0;
  std::size_t attested = 0;
  std::size_t unattested = 0;
  std::size_t payloads_checked = 0;
  std::vector<std::string> errors;
};

/// Offline replay: sequence numbers, every attestation, and the signer of each
/// settlement payload in Resolved events.
LogVerification verify_log(const EventLog& log, const Hash32& code_hash = engine_code_hash());
LogVerification verify_log_file(const std::filesystem::path& path, const Hash32& code_hash = engine_code_hash());

void emit_plot_data(std::span<const ResolutionMode> modes, std::span<const std::string> pricing,
                    std::span<const std::size_t> bidder_counts, const std::filesystem::path& out);

/// True if the address occurs in `text` as hex (any case, with or without 0x) or as raw bytes.
bool contains_address(std::string_view text, const Address& address);
/// True if the secret occurs in `text` as hex or raw bytes.
bool contains_secret(std::string_view text, const Hash32& secret);

}  // namespace sealbid::harness
