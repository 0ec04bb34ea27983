#pragma once

// Small hand-wired auction setup for engine-level tests. Everything is
// deterministic; heights advance only through mine_to/mine.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sealbid/auction.hpp"
#include "sealbid/keccak.hpp"
#include "sealbid/transaction.hpp"

namespace sealbid::testing {

inline Hash32 secret_for(const std::string& role) { return keccak256("sealbid-tests/" + role); }

inline Address address_for(const Hash32& secret) { return derive_address(secp256k1::derive_public_key(secret)); }

struct Wallet {
  Hash32 secret{};
  Address address;
  std::uint64_t nonce = 0;

  static Wallet make(const std::string& role) {
    Wallet w;
    w.secret = secret_for(role);
    w.address = address_for(w.secret);
    return w;
  }
};

struct WorldOptions {
  std::size_t bidders = 4;
  std::uint64_t deadline = 10;
  std::uint64_t kappa = 2;
  std::uint64_t gas_price = 1;
  std::uint64_t finality_depth = 6;
  std::uint64_t chain_id = 1;
  std::uint64_t token_id = 7;
  ResolutionMode mode = ResolutionMode::exhaustive;
  std::uint64_t proposal_window = 3;
  std::vector<quorum::Behavior> endpoints = {quorum::Honest{}, quorum::Honest{}, quorum::Honest{}};
  std::size_t sample = 3;
  std::size_t agreement = 2;
  bool fallback = false;
  std::uint64_t seed = 11;
};

inline constexpr Amount kWalletFunds = 1'000'000'000'000;

class World {
 public:
  explicit World(WorldOptions o = {})
      : opts(o),
        enclave(enclave::Enclave::create_test(o.seed, keccak256("sealbid-tests/engine"))),
        gas(gas::GasPricing::defaults(o.mode)) {
    auctioneer = Wallet::make("auctioneer");
    relayer = Wallet::make("relayer");
    chain::Genesis g;
    g.balances.emplace_back(auctioneer.address, kWalletFunds);
    g.balances.emplace_back(relayer.address, kWalletFunds);
    for (std::size_t i = 0; i < o.bidders; ++i) {
      wallets.push_back(Wallet::make("wallet/" + std::to_string(i)));
      claims.push_back(Wallet::make("claim/" + std::to_string(i)).address);
      boxes.push_back(enclave::EncryptionKeyPair::from_seed(secret_for("box/" + std::to_string(i))));
      g.balances.emplace_back(wallets.back().address, kWalletFunds);
    }
    g.assets.emplace_back(o.token_id, auctioneer.address);
    chain = std::make_unique<chain::SimChain>(chain::ChainParams{o.chain_id, o.finality_depth, 21'000}, g);

    std::vector<quorum::Endpoint> eps;
    for (std::size_t i = 0; i < o.endpoints.size(); ++i) {
      eps.emplace_back("rpc-" + std::to_string(i), o.endpoints[i], *chain, o.seed);
    }
    std::optional<quorum::Endpoint> fb;
    if (o.fallback) fb.emplace("fallback", quorum::Honest{}, *chain, o.seed);
    quorum = std::make_unique<quorum::QuorumClient>(std::move(eps), quorum::QuorumParams{o.sample, o.agreement, o.kappa},
                                                    enclave, audit, std::move(fb));
  }

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  auction::AuctionConfig config() const {
    auction::AuctionConfig c;
    c.deadline_height = opts.deadline;
    c.auctioneer = auctioneer.address;
    c.token_id = opts.token_id;
    c.gas_price = opts.gas_price;
    c.kappa = opts.kappa;
    c.resolution_mode = opts.mode;
    c.proposal_window = opts.proposal_window;
    c.chain_id = opts.chain_id;
    return c;
  }

  auction::Auction& deploy() {
    auction.emplace(auction::Auction::deploy(enclave, *quorum, config(), events, &gas));
    return *auction;
  }

  void mine_to(std::uint64_t h) {
    while (chain->head_height() < h) chain->mine_block();
  }

  UnsignedTx transfer_tx(const Wallet& from, const Address& to, Amount value) const {
    UnsignedTx tx;
    tx.nonce = from.nonce;
    tx.gas_price = opts.gas_price;
    tx.to = to;
    tx.value = value;
    tx.chain_id = opts.chain_id;
    return tx;
  }

  chain::SubmitResult send(Wallet& from, const Address& to, Amount value) {
    const auto r = chain->submit_tx(sign_tx(transfer_tx(from, to, value), from.secret, opts.chain_id));
    if (r) ++from.nonce;
    return r;
  }

  /// Deploys, escrows the asset and advances until the auction is Open.
  auction::Auction& open() {
    deploy();
    const Address escrow = auction->setup();
    UnsignedTx tx = transfer_tx(auctioneer, escrow, 0);
    tx.data = asset_transfer_data(opts.token_id);
    if (!chain->submit_tx(sign_tx(tx, auctioneer.secret, opts.chain_id))) throw std::runtime_error("asset escrow");
    ++auctioneer.nonce;
    mine_to(1 + opts.kappa);
    if (auction->verify_asset_escrow(*quorum) != auction::State::open) throw std::runtime_error("did not open");
    return *auction;
  }

  enclave::Envelope request(std::size_t i) const {
    const Bytes payload = auction::registration_payload(boxes[i].public_key, claims[i]);
    std::array<std::uint8_t, 24> nonce{};
    const Hash32 n = secret_for("nonce/" + std::to_string(i));
    std::copy(n.begin(), n.begin() + 24, nonce.begin());
    return enclave::seal_envelope(enclave.input_public_key(), payload, secret_for("eph/" + std::to_string(i)), nonce);
  }

  Address register_bidder(std::size_t i) {
    const auto reply = auction->register_bidder(request(i), *quorum);
    const Address a = Address::from_bytes(enclave::decrypt_envelope(boxes[i], reply));
    if (escrows.size() <= i) escrows.resize(i + 1);
    escrows[i] = a;
    return a;
  }

  /// Lands a transfer from bidder i's wallet to its escrow in block `height`.
  void fund_at(std::size_t i, Amount amount, std::uint64_t height) {
    mine_to(height - 1);
    if (!send(wallets[i], escrows.at(i), amount)) throw std::runtime_error("funding rejected");
    chain->mine_block();
  }

  /// Submits every public settlement payload, as an unrelated relayer would.
  std::size_t relay_payloads() {
    std::size_t accepted = 0;
    for (const auto& raw : auction->settlement_payloads()) {
      if (chain->submit_tx(decode_raw(from_hex(raw)))) ++accepted;
    }
    return accepted;
  }

  WorldOptions opts;
  enclave::Enclave enclave;
  quorum::AuditLog audit;
  EventLog events;
  gas::GasLedger gas;
  Wallet auctioneer;
  Wallet relayer;
  std::vector<Wallet> wallets;
  std::vector<Address> claims;
  std::vector<enclave::EncryptionKeyPair> boxes;
  std::vector<Address> escrows;
  std::unique_ptr<chain::SimChain> chain;
  std::unique_ptr<quorum::QuorumClient> quorum;
  std::optional<auction::Auction> auction;
};

}  // namespace sealbid::testing
