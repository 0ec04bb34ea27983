#include "sealbid/auction.hpp"

#include <algorithm>
#include <tuple>

#include "sealbid/rlp.hpp"

namespace sealbid::auction {

namespace {

using quorum::QuorumClient;

rlp::Item addr_item(const Address& a) { return rlp::Item::bytes(a.view()); }

}  // namespace

std::string_view to_string(State s) {
  switch (s) {
    case State::init: return "Init";
    case State::deployed: return "Deployed";
    case State::open: return "Open";
    case State::closed: return "Closed";
    case State::resolved: return "Resolved";
    case State::claimed: return "Claimed";
  }
  return "unknown";
}

const std::vector<std::pair<State, State>>& lifecycle_edges() {
  static const std::vector<std::pair<State, State>> edges = {
      {State::init, State::deployed},
      {State::deployed, State::deployed},  // asset not yet escrowed
      {State::deployed, State::open},
      {State::open, State::open},  // registrations, early close
      {State::open, State::closed},
      {State::closed, State::closed},  // resolution retry, proposal phase
      {State::closed, State::resolved},
      {State::resolved, State::resolved},  // settlement pending
      {State::resolved, State::claimed},
      {State::claimed, State::claimed},
  };
  return edges;
}

bool is_edge(State from, State to) {
  const auto& e = lifecycle_edges();
  return std::find(e.begin(), e.end(), std::pair{from, to}) != e.end();
}

std::string_view to_string(SettlementKind k) {
  switch (k) {
    case SettlementKind::asset: return "asset";
    case SettlementKind::payment: return "payment";
    case SettlementKind::excess: return "excess";
    case SettlementKind::refund: return "refund";
  }
  return "unknown";
}

Bytes registration_payload(const enclave::EncryptionPublicKey& bidder_key, const Address& claim_address) {
  Bytes out(bidder_key.begin(), bidder_key.end());
  out.insert(out.end(), claim_address.bytes().begin(), claim_address.bytes().end());
  return out;
}

std::vector<SignedTransaction> ResolutionResult::settlement_txs() const {
  std::vector<SignedTransaction> out;
  out.reserve(settlements.size());
  for (const auto& s : settlements) out.push_back(s.tx);
  return out;
}

Auction::Auction(enclave::Enclave& enclave, AuctionConfig config, EventLog& events, gas::GasLedger* gas,
                 std::string id)
    : enclave_(&enclave), config_(std::move(config)), events_(&events), gas_(gas), id_(std::move(id)) {}

Auction Auction::deploy(enclave::Enclave& enclave, QuorumClient& quorum, AuctionConfig config, EventLog& events,
                        gas::GasLedger* gas) {
  if (config.kappa != quorum.kappa()) {
    throw ConfigError("auction kappa " + std::to_string(config.kappa) + " differs from quorum kappa " +
                      std::to_string(quorum.kappa()));
  }
  if (config.resolution_mode == ResolutionMode::proposer_based && config.proposal_window == 0) {
    throw ConfigError("proposal window must be positive");
  }
  const std::uint64_t head = quorum.query_height().value;
  if (config.deadline_height <= head) {
    throw ConfigError("deadline " + std::to_string(config.deadline_height) + " is not above head " +
                      std::to_string(head));
  }

  Auction a(enclave, std::move(config), events, gas, to_hex(enclave.random(8), false));
  const auto& c = a.config_;
  rlp::Item record = rlp::Item::List{
      rlp::Item::uint(c.deadline_height), addr_item(c.auctioneer),
      rlp::Item::uint(c.token_id),        rlp::Item::uint(c.gas_price),
      rlp::Item::uint(c.kappa),           rlp::Item::uint(static_cast<std::uint64_t>(c.resolution_mode)),
      rlp::Item::uint(c.proposal_window), rlp::Item::uint(c.chain_id),
      rlp::Item::uint(c.fee_gas),
  };
  enclave.seal_put(a.label("config"), rlp::encode(record));
  a.transition(State::deployed);
  a.emit("Deployed", {{"deadline_height", c.deadline_height},
                      {"auctioneer", c.auctioneer.hex()},
                      {"token_id", c.token_id},
                      {"kappa", c.kappa},
                      {"resolution_mode", to_string(c.resolution_mode)},
                      {"code_hash", to_hex(enclave.code_hash())}});
  if (gas != nullptr) gas->charge("auctioneer", gas::Layer::execution, gas::Op::deploy);
  return a;
}

Fingerprint Auction::fingerprint() const {
  return {state_, asset_escrow_.has_value(), bidders_, resolution_.has_value(), proposals_, events_emitted_};
}

void Auction::require(State s, std::string_view op) const {
  if (state_ != s) {
    throw StateError(std::string(op) + " requires state " + std::string(to_string(s)) + ", auction is " +
                     std::string(to_string(state_)));
  }
}

void Auction::transition(State to) {
  if (!is_edge(state_, to)) {
    throw std::logic_error("illegal lifecycle edge " + std::string(to_string(state_)) + " -> " +
                           std::string(to_string(to)));
  }
  state_ = to;
}

void Auction::emit(std::string kind, json data) {
  events_->emit(std::move(kind), id_, std::move(data), enclave_);
  ++events_emitted_;
}

std::string Auction::label(std::string_view suffix) const { return "auction/" + id_ + "/" + std::string(suffix); }

Address Auction::setup() {
  require(State::deployed, "setup");
  if (asset_escrow_) return asset_escrow_->second;
  auto [handle, address] = enclave_->generate_keypair();
  enclave_->seal_put(label("asset_escrow"), rlp::encode(rlp::Item::List{rlp::Item::uint(handle.id), addr_item(address)}));
  asset_escrow_ = {handle, address};
  transition(State::deployed);
  emit("AssetEscrowAddress", {{"address", address.hex()}, {"token_id", config_.token_id}});
  if (gas_ != nullptr) gas_->charge("auctioneer", gas::Layer::execution, gas::Op::start);
  return address;
}

std::optional<Address> Auction::asset_escrow() const {
  if (!asset_escrow_) return std::nullopt;
  return asset_escrow_->second;
}

State Auction::verify_asset_escrow(QuorumClient& quorum) {
  require(State::deployed, "verify_asset_escrow");
  if (!asset_escrow_) throw StateError("verify_asset_escrow requires setup first");
  const std::uint64_t head = quorum.query_height().value;
  const std::uint64_t confirmed = head >= config_.kappa ? head - config_.kappa : 0;
  const Address owner = quorum.query_asset_owner(config_.token_id, confirmed).value;
  if (owner != asset_escrow_->second) {
    transition(State::deployed);
    return state_;
  }
  transition(State::open);
  emit("Open", {{"confirmed_height", confirmed}});
  return state_;
}

enclave::Envelope Auction::register_bidder(const enclave::Envelope& request, QuorumClient& quorum) {
  require(State::open, "register_bidder");
  ++register_calls_;
  const std::uint64_t head = quorum.query_height().value;
  if (head >= config_.deadline_height) {
    throw RegistrationError("registration closed: head " + std::to_string(head) + " reached deadline " +
                            std::to_string(config_.deadline_height));
  }
  Bytes payload;
  try {
    payload = enclave_->decrypt_input(request);
  } catch (const enclave::EnvelopeError& e) {
    throw RegistrationError(std::string("unreadable registration request: ") + e.what());
  }
  if (payload.size() != kRegistrationPayloadSize) {
    throw RegistrationError("registration payload must be " + std::to_string(kRegistrationPayloadSize) + " bytes");
  }
  enclave::EncryptionPublicKey bidder_key{};
  std::copy(payload.begin(), payload.begin() + 32, bidder_key.begin());
  const Address claim = Address::from_bytes(ByteView(payload).subspan(32));

  auto [handle, escrow] = enclave_->generate_keypair();
  const std::size_t index = bidders_;
  rlp::Item entry = rlp::Item::List{rlp::Item::uint(handle.id), addr_item(escrow), rlp::Item::bytes(bidder_key),
                                    addr_item(claim), rlp::Item::uint(head)};
  enclave_->seal_put(label("bidder/" + std::to_string(index)), rlp::encode(entry));
  enclave_->seal_put(label("bidders"), rlp::encode(rlp::Item::uint(index + 1)));
  bidders_ = index + 1;

  enclave::Envelope reply = enclave_->encrypt_to(bidder_key, escrow.view());
  transition(State::open);
  emit("BidderEnvelope", {{"index", index}, {"envelope", reply.serialize()}});
  if (gas_ != nullptr) {
    gas_->charge("bidder/" + std::to_string(index), gas::Layer::execution, gas::Op::submit_bid);
  }
  return reply;
}

State Auction::close(QuorumClient& quorum) {
  require(State::open, "close");
  if (quorum.confirm_deadline(config_.deadline_height) != quorum::DeadlineStatus::confirmed) {
    transition(State::open);
    return state_;
  }
  transition(State::closed);
  emit("Closed", {{"deadline_height", config_.deadline_height}, {"bidders", bidders_}});
  return state_;
}

std::vector<Auction::RegistryEntry> Auction::read_registry() const {
  std::vector<RegistryEntry> out;
  if (bidders_ == 0) return out;
  const std::uint64_t count = rlp::decode(enclave_->seal_get(label("bidders"))).as_uint();
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const rlp::Item item = rlp::decode(enclave_->seal_get(label("bidder/" + std::to_string(i))));
    const auto& f = item.as_list();
    if (f.size() != 5) throw enclave::IntegrityError("malformed registry entry");
    RegistryEntry e;
    e.handle.id = f[0].as_uint();
    e.escrow = Address::from_bytes(f[1].as_bytes());
    const Bytes& key = f[2].as_bytes();
    if (key.size() != e.bidder_key.size()) throw enclave::IntegrityError("malformed registry entry");
    std::copy(key.begin(), key.end(), e.bidder_key.begin());
    e.claim = Address::from_bytes(f[3].as_bytes());
    e.registered_at = f[4].as_uint();
    out.push_back(e);
  }
  return out;
}

std::optional<std::size_t> Auction::find_escrow(const std::vector<RegistryEntry>& registry,
                                                const Address& escrow) const {
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (registry[i].escrow == escrow) return i;
  }
  return std::nullopt;
}

std::uint64_t Auction::snapshot_height(QuorumClient& quorum) const {
  const std::uint64_t head = quorum.query_height().value;
  if (head < config_.deadline_height + config_.kappa) {
    throw quorum::QuorumFailure("agreed head " + std::to_string(head) + " is below the confirmed deadline");
  }
  return head - config_.kappa;
}

std::uint64_t Auction::reached_height(QuorumClient& quorum, const Address& escrow, Amount amount,
                                      std::size_t* queries) const {
  // Escrow balances only grow before settlement, so the predicate is monotone in height.
  std::uint64_t lo = 0;
  std::uint64_t hi = config_.deadline_height;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (queries != nullptr) ++*queries;
    if (quorum.query_balance(escrow, mid).value >= amount) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

ResolutionResult Auction::exhaustive(QuorumClient& quorum, const std::vector<RegistryEntry>& registry) {
  std::vector<Amount> cutoffs;
  cutoffs.reserve(registry.size());
  for (const auto& e : registry) cutoffs.push_back(quorum.query_balance(e.escrow, config_.deadline_height).value);

  const Amount best = cutoffs.empty() ? 0 : *std::max_element(cutoffs.begin(), cutoffs.end());
  std::optional<std::size_t> winner;
  if (best > 0) {
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
      if (cutoffs[i] == best) tied.push_back(i);
    }
    if (tied.size() == 1) {
      winner = tied.front();
    } else {
      std::optional<std::tuple<std::uint64_t, Address, std::size_t>> top;
      for (std::size_t i : tied) {
        std::tuple key{reached_height(quorum, registry[i].escrow, best, nullptr), registry[i].escrow, i};
        if (!top || key < *top) top = key;
      }
      winner = std::get<2>(*top);
    }
  }
  return settle(quorum, registry, winner, best, std::vector<std::optional<Amount>>(cutoffs.begin(), cutoffs.end()));
}

ResolutionResult Auction::settle(QuorumClient& quorum, const std::vector<RegistryEntry>& registry,
                                 std::optional<std::size_t> winner, Amount amount,
                                 std::vector<std::optional<Amount>> cutoffs) {
  if (!asset_escrow_) throw StateError("no asset escrow");
  ResolutionResult r;
  r.cutoff_height = config_.deadline_height;
  r.snapshot_height = snapshot_height(quorum);
  const Amount fee = config_.fee();

  auto make_tx = [&](std::uint64_t nonce, const Address& to, Amount value, Bytes data) {
    UnsignedTx tx;
    tx.nonce = nonce;
    tx.gas_price = config_.gas_price;
    tx.gas_limit = config_.fee_gas;
    tx.to = to;
    tx.value = value;
    tx.data = std::move(data);
    tx.chain_id = config_.chain_id;
    return tx;
  };

  {
    const Address to = winner ? registry[*winner].claim : config_.auctioneer;
    Settlement s{SettlementKind::asset, 0, asset_escrow_->second, to, 0, fee, {}};
    s.tx = enclave_->sign_with(asset_escrow_->first, make_tx(0, to, 0, asset_transfer_data(config_.token_id)));
    r.settlements.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& e = registry[i];
    r.bidder_set.push_back(e.escrow);
    BidOutcome bid;
    bid.index = i;
    bid.escrow = e.escrow;
    bid.cutoff_balance = i < cutoffs.size() ? cutoffs[i] : std::nullopt;
    bid.current_balance = quorum.query_balance(e.escrow, r.snapshot_height).value;
    if (bid.current_balance == 0) {
      r.bids.push_back(bid);
      continue;
    }
    // Never-funded escrows cannot have a balance; fall back to the claim address if the quorum says otherwise.
    bid.refund_to = quorum.query_first_funder(e.escrow, r.snapshot_height).value.value_or(e.claim);
    r.deposits += bid.current_balance;

    std::uint64_t nonce = 0;
    auto send = [&](SettlementKind kind, const Address& to, Amount gross) -> Amount {
      if (gross == 0) return 0;
      if (gross <= fee) {
        r.dust += gross;
        return 0;
      }
      Settlement s{kind, i, e.escrow, to, gross - fee, fee, {}};
      s.tx = enclave_->sign_with(e.handle, make_tx(nonce++, to, gross - fee, {}));
      r.fees += fee;
      r.settlements.push_back(std::move(s));
      return gross - fee;
    };

    if (winner && *winner == i) {
      const Amount cut = std::min(amount, bid.current_balance);
      r.paid += send(SettlementKind::payment, config_.auctioneer, cut);
      r.excess += send(SettlementKind::excess, *bid.refund_to, bid.current_balance - cut);
    } else {
      r.refunded += send(SettlementKind::refund, *bid.refund_to, bid.current_balance);
    }
    r.bids.push_back(bid);
  }

  if (winner) {
    r.winner_index = winner;
    r.winner_escrow = registry[*winner].escrow;
    r.winning_amount = amount;
  }
  return r;
}

const ResolutionResult& Auction::publish(ResolutionResult result) {
  resolution_ = std::move(result);
  transition(State::resolved);
  const auto& r = *resolution_;
  json bidders = json::array();
  for (const auto& a : r.bidder_set) bidders.push_back(a.hex());
  json payloads = json::array();
  for (const auto& s : r.settlements) {
    payloads.push_back({{"kind", to_string(s.kind)}, {"from", s.from.hex()}, {"raw", raw_hex(s.tx)}});
  }
  emit("Resolved", {{"winner", r.winner_escrow ? json(r.winner_escrow->hex()) : json(nullptr)},
                    {"amount", r.winning_amount},
                    {"cutoff_height", r.cutoff_height},
                    {"snapshot_height", r.snapshot_height},
                    {"bidders", bidders},
                    {"payloads", payloads}});
  if (gas_ != nullptr) gas_->charge("resolver", gas::Layer::execution, gas::Op::end_auction, bidders_);
  return *resolution_;
}

const ResolutionResult& Auction::resolve(QuorumClient& quorum) {
  require(State::closed, "resolve");
  if (config_.resolution_mode != ResolutionMode::exhaustive) {
    throw StateError("resolve is for exhaustive mode; this auction resolves through proposals");
  }
  return publish(exhaustive(quorum, read_registry()));
}

std::vector<std::string> Auction::settlement_payloads() const {
  if (state_ != State::resolved && state_ != State::claimed) {
    throw StateError("settlement payloads exist only after resolution");
  }
  std::vector<std::string> out;
  for (const auto& s : resolution_->settlements) out.push_back(raw_hex(s.tx));
  return out;
}

State Auction::finalize(const chain::SimChain& chain) {
  if (state_ == State::claimed) return state_;
  require(State::resolved, "finalize");
  const std::uint64_t head = chain.head_height();
  json hashes = json::array();
  for (const auto& s : resolution_->settlements) {
    const Hash32 h = tx_hash(s.tx);
    auto included = chain.inclusion_height(h);
    if (!included || head - *included < config_.kappa) {
      transition(State::resolved);
      return state_;
    }
    hashes.push_back(to_hex(h));
  }
  transition(State::claimed);
  emit("Claimed", {{"head", head}, {"settlement_txs", hashes}});
  return state_;
}

}  // namespace sealbid::auction
