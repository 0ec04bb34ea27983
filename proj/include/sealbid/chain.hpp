#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "sealbid/bytes.hpp"
#include "sealbid/transaction.hpp"

namespace sealbid::chain {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class QueryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct ChainParams {
  std::uint64_t chain_id = 1;
  /// Reorgs of up to this many blocks are permitted; anything deeper is final.
  std::uint64_t finality_depth = 6;
  /// Flat per-transaction fee is fee_gas * tx.gas_price.
  std::uint64_t fee_gas = 21'000;
};

struct Genesis {
  std::vector<std::pair<Address, Amount>> balances;
  std::vector<std::pair<std::uint64_t, Address>> assets;
};

struct Account {
  Amount balance = 0;
  std::uint64_t nonce = 0;
  bool operator==(const Account&) const = default;
};

struct Block {
  std::uint64_t height = 0;
  Hash32 parent_hash{};
  std::vector<SignedTransaction> txs;
  Hash32 state_root{};

  /// keccak256(rlp([height, parent_hash, keccak(rlp(raw txs)), state_root])).
  Hash32 hash() const;
};

enum class RejectReason {
  replay_protection,  // chain id mismatch
  bad_signature,
  nonce_gap,          // nonce ahead of the account's next nonce
  nonce_reused,       // nonce already consumed
  insufficient_funds,
  asset_not_owned,
};

std::string_view to_string(RejectReason r);

struct SubmitResult {
  std::optional<RejectReason> rejection;
  bool accepted() const { return !rejection.has_value(); }
  explicit operator bool() const { return accepted(); }
};

struct ReorgResult {
  bool applied = false;
  /// Transactions from replaced blocks, in original order. They are not
  /// returned to the pool automatically.
  std::vector<SignedTransaction> orphaned;
};

/// Simulated settlement chain. Submissions are thread-safe; mine_block and
/// reorg take exclusive access; queries may run concurrently with submissions.
class SimChain {
 public:
  /// Throws ConfigError on finality_depth == 0 or duplicate genesis entries.
  SimChain(ChainParams params, const Genesis& genesis);

  SimChain(const SimChain&) = delete;
  SimChain& operator=(const SimChain&) = delete;

  SubmitResult submit_tx(const SignedTransaction& stx);

  /// Applies the pool in order, dropping transactions that no longer validate.
  Block mine_block();

  /// Depth 0 is a no-op. Depth beyond finality_depth (or the genesis block) is refused.
  /// The replaced range becomes `depth` fresh blocks: the first carries
  /// `replacement`, the rest are empty, so the head height is unchanged.
  ReorgResult reorg(std::size_t depth, const std::vector<SignedTransaction>& replacement);

  std::uint64_t head_height() const;
  const ChainParams& params() const { return params_; }
  Amount fee_for(const UnsignedTx& tx) const { return params_.fee_gas * tx.gas_price; }

  /// Balance as of the end of block `height`. Throws QueryError beyond head.
  Amount balance_at(const Address& addr, std::uint64_t height) const;
  std::uint64_t nonce_at(const Address& addr, std::uint64_t height) const;

  /// Throws QueryError if the token does not exist at that height.
  Address asset_owner_at(std::uint64_t token_id, std::uint64_t height) const;

  Block block_at(std::uint64_t height) const;
  Hash32 state_root_at(std::uint64_t height) const;

  /// Sum of all balances plus fees collected so far.
  Amount total_supply_at(std::uint64_t height) const;
  Amount fees_collected_at(std::uint64_t height) const;
  std::vector<std::pair<Address, Account>> accounts_at(std::uint64_t height) const;

  /// Height of the canonical block containing the transaction, if any.
  std::optional<std::uint64_t> inclusion_height(const Hash32& tx_hash) const;

  /// Sender of the earliest value-carrying transaction to `addr` included at or below `height`.
  std::optional<Address> first_funder(const Address& addr, std::uint64_t height) const;

  std::size_t pending_count() const;

 private:
  struct State {
    std::map<Address, Account> accounts;
    std::map<std::uint64_t, Address> assets;
    Amount fees = 0;
  };
  struct PoolEntry {
    SignedTransaction stx;
    Address sender;
  };

  /// Applies one transaction to `state`; returns false (state untouched) if invalid.
  bool apply(State& state, const SignedTransaction& stx, const Address& sender) const;
  Block seal_block(std::vector<PoolEntry> entries);
  Hash32 state_root(const State& s) const;
  const State& state_at(std::uint64_t height) const;

  ChainParams params_;
  std::vector<Block> blocks_;
  std::vector<std::vector<Address>> senders_;
  std::vector<State> states_;
  std::map<Hash32, std::uint64_t> inclusion_;
  std::vector<PoolEntry> pool_;

  mutable std::shared_mutex chain_mutex_;
  mutable std::mutex pool_mutex_;
};

}  // namespace sealbid::chain
