#include "sealbid/chain.hpp"

#include <set>

#include "sealbid/keccak.hpp"
#include "sealbid/rlp.hpp"

namespace sealbid::chain {

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::replay_protection: return "replay_protection";
    case RejectReason::bad_signature: return "bad_signature";
    case RejectReason::nonce_gap: return "nonce_gap";
    case RejectReason::nonce_reused: return "nonce_reused";
    case RejectReason::insufficient_funds: return "insufficient_funds";
    case RejectReason::asset_not_owned: return "asset_not_owned";
  }
  return "unknown";
}

Hash32 Block::hash() const {
  rlp::Item::List raw_txs;
  for (const auto& tx : txs) raw_txs.emplace_back(encode_raw(tx));
  Hash32 tx_root = keccak256(rlp::encode(rlp::Item(std::move(raw_txs))));
  rlp::Item header(rlp::Item::List{rlp::Item::uint(height), rlp::Item::bytes(parent_hash), rlp::Item::bytes(tx_root),
                                   rlp::Item::bytes(state_root)});
  return keccak256(rlp::encode(header));
}

SimChain::SimChain(ChainParams params, const Genesis& genesis) : params_(params) {
  if (params_.finality_depth < 1) throw ConfigError("finality_depth must be at least 1");
  State s;
  for (const auto& [addr, balance] : genesis.balances) {
    if (!s.accounts.emplace(addr, Account{balance, 0}).second) {
      throw ConfigError("duplicate genesis address " + addr.hex());
    }
  }
  for (const auto& [token, owner] : genesis.assets) {
    if (!s.assets.emplace(token, owner).second) {
      throw ConfigError("duplicate genesis token " + std::to_string(token));
    }
  }
  Block g;
  g.state_root = state_root(s);
  blocks_.push_back(std::move(g));
  senders_.emplace_back();
  states_.push_back(std::move(s));
}

bool SimChain::apply(State& state, const SignedTransaction& stx, const Address& sender) const {
  const UnsignedTx& tx = stx.tx;
  if (tx.chain_id != params_.chain_id) return false;
  Account& from = state.accounts[sender];
  if (tx.nonce != from.nonce) return false;
  const Amount fee = fee_for(tx);
  if (tx.value > from.balance || fee > from.balance - tx.value) return false;

  auto token = parse_asset_transfer(tx.data);
  if (token) {
    auto it = state.assets.find(*token);
    if (it == state.assets.end() || it->second != sender) return false;
    it->second = tx.to;
  }
  from.balance -= tx.value + fee;
  from.nonce += 1;
  state.accounts[tx.to].balance += tx.value;
  state.fees += fee;
  return true;
}

Hash32 SimChain::state_root(const State& s) const {
  rlp::Item::List accounts;
  for (const auto& [addr, acct] : s.accounts) {
    if (acct.balance == 0 && acct.nonce == 0) continue;
    accounts.emplace_back(
        rlp::Item::List{rlp::Item::bytes(addr.view()), rlp::Item::uint(acct.balance), rlp::Item::uint(acct.nonce)});
  }
  rlp::Item::List assets;
  for (const auto& [token, owner] : s.assets) {
    assets.emplace_back(rlp::Item::List{rlp::Item::uint(token), rlp::Item::bytes(owner.view())});
  }
  rlp::Item root(rlp::Item::List{rlp::Item(std::move(accounts)), rlp::Item(std::move(assets)), rlp::Item::uint(s.fees)});
  return keccak256(rlp::encode(root));
}

SubmitResult SimChain::submit_tx(const SignedTransaction& stx) {
  if (stx.tx.chain_id != params_.chain_id) return {RejectReason::replay_protection};
  Address sender;
  try {
    sender = recover_signer(stx);
  } catch (const std::exception&) {
    return {RejectReason::bad_signature};
  }

  std::shared_lock chain_lock(chain_mutex_);
  std::lock_guard pool_lock(pool_mutex_);
  const State& head = states_.back();
  Account acct;
  if (auto it = head.accounts.find(sender); it != head.accounts.end()) acct = it->second;

  std::uint64_t expected_nonce = acct.nonce;
  Amount committed = 0;
  std::set<std::uint64_t> pending_assets;
  for (const auto& e : pool_) {
    if (e.sender != sender) continue;
    ++expected_nonce;
    committed += e.stx.tx.value + fee_for(e.stx.tx);
    if (auto t = parse_asset_transfer(e.stx.tx.data)) pending_assets.insert(*t);
  }
  if (stx.tx.nonce < expected_nonce) return {RejectReason::nonce_reused};
  if (stx.tx.nonce > expected_nonce) return {RejectReason::nonce_gap};

  const Amount available = acct.balance > committed ? acct.balance - committed : 0;
  const Amount fee = fee_for(stx.tx);
  if (stx.tx.value > available || fee > available - stx.tx.value) return {RejectReason::insufficient_funds};

  if (auto token = parse_asset_transfer(stx.tx.data)) {
    auto it = head.assets.find(*token);
    if (it == head.assets.end() || it->second != sender || pending_assets.count(*token) != 0) {
      return {RejectReason::asset_not_owned};
    }
  }
  pool_.push_back({stx, sender});
  return {};
}

Block SimChain::seal_block(std::vector<PoolEntry> entries) {
  State next = states_.back();
  Block b;
  b.height = blocks_.back().height + 1;
  b.parent_hash = blocks_.back().hash();
  std::vector<Address> senders;
  for (auto& e : entries) {
    if (!apply(next, e.stx, e.sender)) continue;
    inclusion_[tx_hash(e.stx)] = b.height;
    b.txs.push_back(std::move(e.stx));
    senders.push_back(e.sender);
  }
  b.state_root = state_root(next);
  blocks_.push_back(b);
  senders_.push_back(std::move(senders));
  states_.push_back(std::move(next));
  return b;
}

Block SimChain::mine_block() {
  std::unique_lock chain_lock(chain_mutex_);
  std::vector<PoolEntry> entries;
  {
    std::lock_guard pool_lock(pool_mutex_);
    entries.swap(pool_);
  }
  return seal_block(std::move(entries));
}

ReorgResult SimChain::reorg(std::size_t depth, const std::vector<SignedTransaction>& replacement) {
  std::unique_lock chain_lock(chain_mutex_);
  ReorgResult result;
  if (depth == 0) {
    result.applied = true;
    return result;
  }
  const std::uint64_t head = blocks_.back().height;
  if (depth > params_.finality_depth || depth > head) return result;

  for (std::uint64_t h = head - depth + 1; h <= head; ++h) {
    for (const auto& tx : blocks_[h].txs) {
      inclusion_.erase(tx_hash(tx));
      result.orphaned.push_back(tx);
    }
  }
  blocks_.resize(head - depth + 1);
  senders_.resize(head - depth + 1);
  states_.resize(head - depth + 1);

  std::vector<PoolEntry> first;
  for (const auto& tx : replacement) {
    try {
      first.push_back({tx, recover_signer(tx)});
    } catch (const std::exception&) {
      // unsignable replacement entries are simply not included
    }
  }
  seal_block(std::move(first));
  for (std::size_t i = 1; i < depth; ++i) seal_block({});
  result.applied = true;
  return result;
}

std::uint64_t SimChain::head_height() const {
  std::shared_lock lock(chain_mutex_);
  return blocks_.back().height;
}

const SimChain::State& SimChain::state_at(std::uint64_t height) const {
  if (height >= states_.size()) throw QueryError("height " + std::to_string(height) + " beyond head");
  return states_[height];
}

Amount SimChain::balance_at(const Address& addr, std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  const State& s = state_at(height);
  auto it = s.accounts.find(addr);
  return it == s.accounts.end() ? 0 : it->second.balance;
}

std::uint64_t SimChain::nonce_at(const Address& addr, std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  const State& s = state_at(height);
  auto it = s.accounts.find(addr);
  return it == s.accounts.end() ? 0 : it->second.nonce;
}

Address SimChain::asset_owner_at(std::uint64_t token_id, std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  const State& s = state_at(height);
  auto it = s.assets.find(token_id);
  if (it == s.assets.end()) throw QueryError("unknown token " + std::to_string(token_id));
  return it->second;
}

Block SimChain::block_at(std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  if (height >= blocks_.size()) throw QueryError("height " + std::to_string(height) + " beyond head");
  return blocks_[height];
}

Hash32 SimChain::state_root_at(std::uint64_t height) const { return block_at(height).state_root; }

Amount SimChain::total_supply_at(std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  const State& s = state_at(height);
  Amount total = s.fees;
  for (const auto& [addr, acct] : s.accounts) total += acct.balance;
  return total;
}

Amount SimChain::fees_collected_at(std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  return state_at(height).fees;
}

std::vector<std::pair<Address, Account>> SimChain::accounts_at(std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  const State& s = state_at(height);
  return {s.accounts.begin(), s.accounts.end()};
}

std::optional<std::uint64_t> SimChain::inclusion_height(const Hash32& hash) const {
  std::shared_lock lock(chain_mutex_);
  auto it = inclusion_.find(hash);
  if (it == inclusion_.end()) return std::nullopt;
  return it->second;
}

std::optional<Address> SimChain::first_funder(const Address& addr, std::uint64_t height) const {
  std::shared_lock lock(chain_mutex_);
  if (height >= blocks_.size()) throw QueryError("height " + std::to_string(height) + " beyond head");
  for (std::uint64_t h = 1; h <= height; ++h) {
    const Block& b = blocks_[h];
    for (std::size_t i = 0; i < b.txs.size(); ++i) {
      if (b.txs[i].tx.to == addr && b.txs[i].tx.value > 0) return senders_[h][i];
    }
  }
  return std::nullopt;
}

std::size_t SimChain::pending_count() const {
  std::lock_guard lock(pool_mutex_);
  return pool_.size();
}

}  // namespace sealbid::chain
