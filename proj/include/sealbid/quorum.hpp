#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sealbid/bytes.hpp"
#include "sealbid/chain.hpp"
#include "sealbid/enclave.hpp"

namespace sealbid::quorum {

using json = nlohmann::json;

class QuorumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// No value reached the agreement threshold and no fallback could settle it.
class QuorumFailure : public QuorumError {
 public:
  using QuorumError::QuorumError;
};
/// Every sampled endpoint withheld and there was no fallback answer.
class QuorumTimeout : public QuorumError {
 public:
  using QuorumError::QuorumError;
};
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Honest {};
/// Either shifts every balance answer by `offset` (saturating at zero) or reports `fixed`.
struct MisreportBalance {
  std::int64_t offset = 0;
  std::optional<Amount> fixed;
};
struct MisreportHeight {
  std::int64_t offset = 0;
};
struct Withhold {
  double probability = 1.0;
};
using Behavior = std::variant<Honest, MisreportBalance, MisreportHeight, Withhold>;

std::string describe(const Behavior& b);

/// Simulated timeout, in abstract clock ticks, charged for a withheld answer.
inline constexpr std::uint64_t kTimeoutTicks = 100;

/// A public settlement-layer interface. Honest endpoints answer from chain ground truth.
class Endpoint {
 public:
  template <class T>
  struct Response {
    std::optional<T> value;  // nullopt: withheld or unavailable
    std::uint64_t latency = 0;
  };

  Endpoint(std::string id, Behavior behavior, const chain::SimChain& chain, std::uint64_t seed = 0);

  const std::string& id() const { return id_; }
  const Behavior& behavior() const { return behavior_; }
  bool honest() const { return std::holds_alternative<Honest>(behavior_); }

  Response<Amount> balance(const Address& addr, std::uint64_t height);
  Response<std::uint64_t> height();
  Response<Address> asset_owner(std::uint64_t token_id, std::uint64_t height);
  /// Zero address when the account was never funded.
  Response<Address> first_funder(const Address& addr, std::uint64_t height);

 private:
  bool withholds();
  std::uint64_t latency() const;

  std::string id_;
  Behavior behavior_;
  const chain::SimChain* chain_;
  std::mt19937_64 rng_;
};

enum class DecisionKind { agreed, fallback, failure, timeout };
std::string_view to_string(DecisionKind k);

struct Sample {
  std::string endpoint;
  json response;  // null when withheld
  std::uint64_t latency = 0;
};

struct AuditRecord {
  std::string query;
  json params;
  std::vector<Sample> samples;
  std::optional<Sample> fallback;
  DecisionKind decision = DecisionKind::failure;
  json value;  // decided value, null on failure
  /// Some sampled answer was missing or disagreed with the decided value.
  bool discrepancy = false;

  json to_json() const;
};

/// Line-delimited audit trail; one record per query, failures included.
class AuditLog {
 public:
  void append(AuditRecord r) { records_.push_back(std::move(r)); }
  const std::vector<AuditRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::size_t discrepancies() const;
  std::string text() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<AuditRecord> records_;
};

struct QuorumParams {
  std::size_t sample_size = 3;  // n
  std::size_t agreement = 2;    // q
  std::uint64_t kappa = 6;      // confirmations required past a deadline
};

template <class T>
struct Answer {
  T value;
  AuditRecord record;
};

enum class DeadlineStatus { confirmed, not_yet };

/// The enclave's sampled, audited view of the settlement layer.
class QuorumClient {
 public:
  /// Throws ConfigError unless 1 <= q <= n <= m.
  QuorumClient(std::vector<Endpoint> endpoints, QuorumParams params, enclave::Enclave& rng, AuditLog& audit,
               std::optional<Endpoint> fallback = std::nullopt);

  const QuorumParams& params() const { return params_; }
  std::uint64_t kappa() const { return params_.kappa; }
  const std::vector<Endpoint>& endpoints() const { return endpoints_; }

  /// n distinct endpoint indices, uniform without replacement, from enclave randomness.
  std::vector<std::size_t> sample_endpoints();

  Answer<Amount> query_balance(const Address& addr, std::uint64_t height);
  Answer<std::uint64_t> query_height();
  Answer<Address> query_asset_owner(std::uint64_t token_id, std::uint64_t height);
  Answer<std::optional<Address>> query_first_funder(const Address& addr, std::uint64_t height);

  /// confirmed iff the agreed head is at least deadline + kappa.
  DeadlineStatus confirm_deadline(std::uint64_t deadline_height);

  std::size_t queries_issued() const { return queries_; }
  std::size_t balance_queries_issued() const { return balance_queries_; }
  std::uint64_t clock() const { return clock_; }

 private:
  template <class T, class Ask>
  Answer<T> run_query(std::string kind, json params, Ask ask);

  std::vector<Endpoint> endpoints_;
  std::optional<Endpoint> fallback_;
  QuorumParams params_;
  enclave::Enclave* rng_;
  AuditLog* audit_;
  std::size_t queries_ = 0;
  std::size_t balance_queries_ = 0;
  std::uint64_t clock_ = 0;
};

}  // namespace sealbid::quorum
