#include "sealbid/harness.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "sealbid/keccak.hpp"
#include "sealbid/rlp.hpp"
#include "sealbid/secp256k1.hpp"

namespace sealbid::harness {

using auction::State;

const Hash32& engine_code_hash() {
  static const Hash32 h = keccak256(std::string_view("sealbid/auction-engine/v1"));
  return h;
}

namespace {

constexpr Amount kRelayerFunds = 1'000'000'000'000'000ULL;

Hash32 derive_secret(std::uint64_t seed, const std::string& role) {
  const Hash32 word = be_word(seed);
  Bytes material(word.begin(), word.end());
  const Bytes tag = to_bytes("sealbid/harness/" + role);
  material.insert(material.end(), tag.begin(), tag.end());
  Hash32 secret = keccak256(material);
  // astronomically unlikely, but keep the key valid
  while (!secp256k1::is_valid_secret(secret)) secret = keccak256(secret);
  return secret;
}

Address address_of(const Hash32& secret) { return derive_address(secp256k1::derive_public_key(secret)); }

struct Wallet {
  Hash32 secret{};
  Address address;
  std::uint64_t nonce = 0;

  static Wallet make(std::uint64_t seed, const std::string& role) {
    Wallet w;
    w.secret = derive_secret(seed, role);
    w.address = address_of(w.secret);
    return w;
  }
};

std::string lower_hex(ByteView v) { return to_hex(v, false); }

class Runner {
 public:
  Runner(const Scenario& s, std::uint64_t seed)
      : s_(s),
        seed_(seed),
        enclave_(enclave::Enclave::create_test(seed, engine_code_hash())),
        gas_(gas::GasPricing::named(s.mode, s.pricing)) {
    report_.scenario = s.name;
    report_.seed = seed;
    const std::size_t n = s.bidders.size();
    report_.escrows.assign(n, std::nullopt);
    report_.enclave_calls.assign(n, 0);
    report_.funding_transfers.assign(n, 0);
    report_.top_up_transfers.assign(n, 0);
    reg_index_.assign(n, std::nullopt);

    auctioneer_ = Wallet::make(seed, "auctioneer");
    relayer_ = Wallet::make(seed, "relayer");
    attacker_ = Wallet::make(seed, "attacker");
    chain::Genesis genesis;
    genesis.balances.emplace_back(auctioneer_.address, 4 * s.fee());
    genesis.balances.emplace_back(relayer_.address, kRelayerFunds);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = s.bidders[i];
      wallets_.push_back(Wallet::make(seed, "bidder-wallet/" + std::to_string(i)));
      claims_.push_back(Wallet::make(seed, "bidder-claim/" + std::to_string(i)).address);
      boxes_.push_back(enclave::EncryptionKeyPair::from_seed(derive_secret(seed, "bidder-box/" + std::to_string(i))));
      const Amount topup = b.top_up ? b.top_up->amount : 0;
      genesis.balances.emplace_back(wallets_.back().address, b.deposit + topup + 3 * s.fee());
    }
    genesis.assets.emplace_back(s.token_id, auctioneer_.address);
    chain_.emplace(s.chain, genesis);

    std::vector<quorum::Endpoint> endpoints;
    for (const auto& e : s.endpoints) endpoints.emplace_back(e.id, e.behavior, *chain_, seed);
    std::optional<quorum::Endpoint> fallback;
    if (s.quorum.fallback) fallback.emplace("fallback", quorum::Honest{}, *chain_, seed);
    quorum_.emplace(std::move(endpoints), quorum::QuorumParams{s.quorum.sample_size, s.quorum.agreement, s.kappa},
                    enclave_, audit_, std::move(fallback));

    last_scripted_ = s.deadline;
    for (const auto& b : s.bidders) {
      last_scripted_ = std::max(last_scripted_, b.funding_height);
      if (b.top_up) last_scripted_ = std::max(last_scripted_, b.top_up->height);
    }
    settle_at_ = last_scripted_ + s.kappa;
    max_head_ = settle_at_ + s.proposal_window + 6 * s.kappa + 30;
    if (s.faults.reorg) max_head_ = std::max(max_head_, s.faults.reorg->at_height + 6 * s.kappa + 30);
  }

  RunReport run() {
    deploy();
    if (!auction_) return finish();
    for (;;) {
      if (step()) break;
      if (chain_->head_height() >= max_head_) {
        report_.notes.push_back("stopped at height " + std::to_string(chain_->head_height()) + " in state " +
                                std::string(auction::to_string(auction_->state())));
        break;
      }
      chain_->mine_block();
    }
    return finish();
  }

 private:
  // ---- engine calls with tracing ----

  template <class F>
  bool traced(const std::string& actor, const std::string& action, F&& f) {
    const State before = auction_->state();
    const auction::Fingerprint fp = auction_->fingerprint();
    TraceEntry t{actor, action, before, before, true, true};
    bool ok = true;
    try {
      f();
    } catch (const auction::StateError& e) {
      ok = false;
      t.unchanged = auction_->fingerprint() == fp;
      report_.notes.push_back(action + ": " + e.what());
    } catch (const auction::RegistrationError& e) {
      ok = false;
      t.unchanged = auction_->fingerprint() == fp;
      report_.notes.push_back(action + ": " + e.what());
    } catch (const quorum::QuorumError& e) {
      ok = false;
      t.unchanged = auction_->fingerprint() == fp;
      report_.notes.push_back(action + ": " + e.what());
    } catch (const enclave::IntegrityError& e) {
      ok = false;
      t.unchanged = auction_->fingerprint() == fp;
      report_.tamper_detected = true;
      report_.notes.push_back(action + ": " + e.what());
    } catch (const auction::WindowError& e) {
      ok = false;
      t.unchanged = auction_->fingerprint() == fp;
      report_.notes.push_back(action + ": " + e.what());
    }
    t.ok = ok;
    t.after = auction_->state();
    report_.trace.push_back(t);
    return ok;
  }

  void deploy() {
    auction::AuctionConfig cfg;
    cfg.deadline_height = s_.deadline;
    cfg.auctioneer = auctioneer_.address;
    cfg.token_id = s_.token_id;
    cfg.gas_price = s_.gas_price;
    cfg.kappa = s_.kappa;
    cfg.resolution_mode = s_.mode;
    cfg.proposal_window = s_.proposal_window;
    cfg.chain_id = s_.chain.chain_id;
    cfg.fee_gas = s_.chain.fee_gas;
    try {
      auction_.emplace(auction::Auction::deploy(enclave_, *quorum_, cfg, report_.events, &gas_));
    } catch (const auction::ConfigError& e) {
      report_.notes.push_back(std::string("deploy: ") + e.what());
      return;
    } catch (const quorum::QuorumError& e) {
      report_.notes.push_back(std::string("deploy: ") + e.what());
      return;
    }
    report_.trace.push_back({"auctioneer", "deploy", State::init, auction_->state(), true, true});
    Address escrow;
    traced("auctioneer", "setup", [&] { escrow = auction_->setup(); });
    if (s_.escrow_asset) {
      UnsignedTx tx;
      tx.nonce = auctioneer_.nonce;
      tx.gas_price = s_.gas_price;
      tx.gas_limit = s_.chain.fee_gas;
      tx.to = escrow;
      tx.data = asset_transfer_data(s_.token_id);
      tx.chain_id = s_.chain.chain_id;
      if (submit(sign_tx(tx, auctioneer_.secret, s_.chain.chain_id), "asset escrow")) {
        ++auctioneer_.nonce;
        gas_.charge("auctioneer", gas::Layer::settlement, gas::Op::asset_escrow);
      }
    }
  }

  bool submit(const SignedTransaction& stx, const std::string& what) {
    const auto r = chain_->submit_tx(stx);
    if (!r) report_.notes.push_back(what + " rejected: " + std::string(chain::to_string(*r.rejection)));
    return r.accepted();
  }

  UnsignedTx transfer(const Wallet& from, const Address& to, Amount value) const {
    UnsignedTx tx;
    tx.nonce = from.nonce;
    tx.gas_price = s_.gas_price;
    tx.gas_limit = s_.chain.fee_gas;
    tx.to = to;
    tx.value = value;
    tx.chain_id = s_.chain.chain_id;
    return tx;
  }

  std::string bidder_actor(std::size_t i) const {
    return "bidder/" + std::to_string(reg_index_[i].value_or(i));
  }

  // ---- per-height schedule ----

  /// Returns true when the run is finished.
  bool step() {
    const std::uint64_t head = chain_->head_height();
    if (s_.faults.reorg && s_.faults.reorg->at_height == head && !reorg_done_) inject_reorg();

    State st = auction_->state();
    if (st == State::deployed) {
      if (head >= s_.deadline) {
        report_.notes.push_back("asset never escrowed; auction stays non-open");
        return true;
      }
      if (head >= s_.open_height()) traced("anyone", "verify_asset_escrow", [&] { auction_->verify_asset_escrow(*quorum_); });
    }

    for (std::size_t i = 0; i < s_.bidders.size(); ++i) {
      const auto& b = s_.bidders[i];
      if (b.register_height == head) register_bidder(i);
      if (b.deposit > 0 && b.funding_height == head + 1) fund(i, b.deposit, false);
      if (b.top_up && b.top_up->height == head + 1) fund(i, b.top_up->amount, true);
    }

    if (s_.faults.compromise_enclave && !report_.compromised && head == s_.deadline + 1) compromise();

    st = auction_->state();
    if (st == State::open && head >= s_.deadline) {
      traced("anyone", "close", [&] { auction_->close(*quorum_); });
    }
    st = auction_->state();
    if (st == State::closed && head >= settle_at_) resolve(head);

    st = auction_->state();
    if (st == State::resolved) relay(head);
    st = auction_->state();
    if (st == State::resolved && payloads_submitted_) {
      traced("anyone", "finalize", [&] { auction_->finalize(*chain_); });
    }
    if (report_.tamper_detected) return true;
    return auction_->state() == State::claimed;
  }

  void register_bidder(std::size_t i) {
    const Bytes payload = auction::registration_payload(boxes_[i].public_key, claims_[i]);
    const Hash32 eph = derive_secret(seed_, "bidder-eph/" + std::to_string(i));
    std::array<std::uint8_t, 24> nonce{};
    const Hash32 nonce_src = keccak256(eph);
    std::copy(nonce_src.begin(), nonce_src.begin() + 24, nonce.begin());
    const auto request = enclave::seal_envelope(enclave_.input_public_key(), payload, eph, nonce);

    ++report_.enclave_calls[i];
    const std::size_t index = auction_->bidder_count();
    enclave::Envelope reply;
    if (!traced("bidder/" + std::to_string(i), "register_bidder",
                [&] { reply = auction_->register_bidder(request, *quorum_); })) {
      return;
    }
    const Bytes plain = enclave::decrypt_envelope(boxes_[i], reply);
    report_.escrows[i] = Address::from_bytes(plain);
    reg_index_[i] = index;
    registry_order_.push_back(i);
  }

  void fund(std::size_t i, Amount amount, bool top_up) {
    if (!report_.escrows[i]) {
      report_.notes.push_back("bidder " + std::to_string(i) + " has no escrow to fund");
      return;
    }
    Wallet& w = wallets_[i];
    if (!submit(sign_tx(transfer(w, *report_.escrows[i], amount), w.secret, s_.chain.chain_id),
                "bidder " + std::to_string(i) + (top_up ? " top-up" : " funding"))) {
      return;
    }
    ++w.nonce;
    ++(top_up ? report_.top_up_transfers[i] : report_.funding_transfers[i]);
    gas_.charge(bidder_actor(i), gas::Layer::settlement, gas::Op::bid_transfer);
  }

  void inject_reorg() {
    reorg_done_ = true;
    const auto [at, depth] = *s_.faults.reorg;
    const std::uint64_t head = chain_->head_height();
    std::vector<SignedTransaction> keep;
    if (depth <= head) keep = chain_->block_at(head - depth + 1).txs;
    const auto result = chain_->reorg(depth, keep);
    report_.reorg_refused = !result.applied;
    if (!result.applied) {
      report_.notes.push_back("reorg of depth " + std::to_string(depth) + " at height " + std::to_string(at) +
                              " refused");
      return;
    }
    bool resubmitted = false;
    for (std::size_t k = keep.size(); k < result.orphaned.size(); ++k) {
      resubmitted = submit(result.orphaned[k], "resubmitted orphan") || resubmitted;
    }
    // re-included transfers land in the next block; resolution must see them confirmed
    if (resubmitted) settle_at_ = std::max(settle_at_, head + 1 + s_.kappa);
  }

  void compromise() {
    const auto leaked = enclave_.compromise();
    report_.compromised = true;
    json keys = json::array();
    for (const auto& [addr, secret] : leaked.keys) keys.push_back({{"address", addr.hex()}, {"secret", to_hex(secret)}});
    report_.events.emit("EnclaveCompromised", auction_->id(), {{"keys", keys}});
    // the attacker sweeps every escrow it can now sign for
    const std::uint64_t head = chain_->head_height();
    for (const auto& [addr, secret] : leaked.keys) {
      const Amount bal = chain_->balance_at(addr, head);
      if (bal <= s_.fee()) continue;
      UnsignedTx tx = transfer(Wallet{secret, addr, chain_->nonce_at(addr, head)}, attacker_.address, bal - s_.fee());
      if (submit(sign_tx(tx, secret, s_.chain.chain_id), "attacker sweep")) report_.stolen += bal - s_.fee();
    }
  }

  void resolve(std::uint64_t head) {
    if (s_.faults.tamper_registry && !tampered_) {
      tampered_ = true;
      enclave_.inject_tamper("auction/" + auction_->id() + "/" + (auction_->bidder_count() > 0 ? "bidder/0" : "config"));
    }
    if (s_.mode == ResolutionMode::exhaustive) {
      traced("anyone", "resolve", [&] { auction_->resolve(*quorum_); });
      return;
    }
    if (!auction_->proposals()) {
      if (!traced("anyone", "open_proposals", [&] { auction_->open_proposals(*quorum_); })) return;
      std::vector<std::int64_t> candidates = s_.proposals;
      if (candidates.empty()) {
        for (std::size_t i = 0; i < s_.bidders.size(); ++i) candidates.push_back(static_cast<std::int64_t>(i));
      }
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        Address candidate;
        if (candidates[k] == kUnknownCandidate) {
          candidate = Wallet::make(seed_, "stranger/" + std::to_string(k)).address;
        } else if (const auto& e = report_.escrows[static_cast<std::size_t>(candidates[k])]) {
          candidate = *e;
        } else {
          continue;
        }
        proposed_.push_back(candidate);
        traced("proposer", "submit_proposal", [&] { auction_->submit_proposal(candidate, *quorum_); });
      }
    }
    if (auction_->proposals() && head >= auction_->proposals()->window_end_height) {
      traced("anyone", "finalize_proposals", [&] { auction_->finalize_proposals(*quorum_); });
    }
  }

  void relay(std::uint64_t head) {
    const auto& r = *auction_->resolution();
    if (!sponsored_) {
      sponsored_ = true;
      sponsor_height_ = head;
      const Address asset_escrow = *auction_->asset_escrow();
      const Amount have = chain_->balance_at(asset_escrow, head);
      if (have < s_.fee()) {
        if (submit(sign_tx(transfer(relayer_, asset_escrow, s_.fee() - have), relayer_.secret, s_.chain.chain_id),
                   "fee sponsorship")) {
          ++relayer_.nonce;
          gas_.charge("relayer", gas::Layer::settlement, gas::Op::sponsor);
        }
      }
      return;
    }
    if (payloads_submitted_ || head <= sponsor_height_) return;
    payloads_submitted_ = true;
    // anyone can relay: decode the public raw payloads rather than reuse engine objects
    for (const auto& raw : auction_->settlement_payloads()) submit(decode_raw(from_hex(raw)), "settlement payload");
    (void)r;
  }

  // ---- invariants ----

  void check(const std::string& name, bool passed, std::string detail = {}) {
    report_.invariants.push_back({name, passed, std::move(detail)});
  }

  RunReport finish() {
    report_.final_state = auction_ ? auction_->state() : State::init;
    report_.queries = quorum_->queries_issued();
    report_.balance_queries = quorum_->balance_queries_issued();
    report_.discrepancies = audit_.discrepancies();
    report_.audit_log = audit_.text();
    if (auction_) {
      report_.resolution = auction_->resolution();
      report_.proposals = auction_->proposals();
    }

    std::vector<Address> disclosed;
    bool all_known = true;
    for (const auto& e : report_.escrows) {
      all_known = all_known && e.has_value();
      disclosed.push_back(e.value_or(Address{}));
    }
    report_.oracle = oracle_resolve(s_, all_known ? &disclosed : nullptr);

    const auto& res = report_.resolution;
    if (res) {
      report_.winner_escrow = res->winner_escrow;
      report_.amount = res->winning_amount;
      if (res->winner_index) {
        for (std::size_t i = 0; i < reg_index_.size(); ++i) {
          if (reg_index_[i] == res->winner_index) report_.winner = i;
        }
      }
      // relayer claims for every settlement transaction that made it on chain
      for (const auto& st : res->settlements) {
        if (chain_->inclusion_height(tx_hash(st.tx))) {
          gas_.charge("relayer", gas::Layer::settlement,
                      st.kind == auction::SettlementKind::asset ? gas::Op::asset_claim : gas::Op::claim);
        } else if (st.kind == auction::SettlementKind::asset) {
          report_.asset_unclaimed = true;
        }
      }
    }
    report_.gas_table = gas::report(gas_);
    report_.gas_charges = gas_.entries();

    check_lifecycle();
    check_oracle();
    check_conservation();
    check_cutoff();
    check_confidentiality();
    check_non_interactivity();
    check_log();
    check_expectations();
    return std::move(report_);
  }

  void check_lifecycle() {
    std::string bad;
    for (const auto& t : report_.trace) {
      if (!auction::is_edge(t.before, t.after) && !(t.before == State::init && t.after == State::init)) {
        bad += t.action + " " + std::string(auction::to_string(t.before)) + "->" +
               std::string(auction::to_string(t.after)) + "; ";
      }
      if (!t.ok && !t.unchanged) bad += t.action + " refused but mutated state; ";
    }
    check("lifecycle", bad.empty(), bad);
  }

  void check_oracle() {
    const bool resolved = report_.resolution.has_value();
    bool diverged = false;
    std::string detail;
    if (resolved) {
      diverged = report_.winner != report_.oracle.winner || report_.amount != report_.oracle.amount;
      auto show = [](std::optional<std::size_t> w) { return w ? std::to_string(*w) : std::string("none"); };
      detail = "engine (" + show(report_.winner) + ", " + std::to_string(report_.amount) + ") oracle (" +
               show(report_.oracle.winner) + ", " + std::to_string(report_.oracle.amount) + ")";
    }
    report_.oracle_divergence = diverged;
    check("oracle_agreement", diverged == s_.expect.oracle_divergence, detail);
  }

  void check_conservation() {
    const auto& res = report_.resolution;
    if (!res) {
      check("conservation", true, "not resolved");
      return;
    }
    std::string bad;
    if (!res->conserved()) bad += "resolution ledger does not balance; ";
    const std::uint64_t head = chain_->head_height();
    if (chain_->total_supply_at(head) != chain_->total_supply_at(0)) bad += "total supply changed; ";
    if (report_.final_state == State::claimed) {
      for (const auto& bid : res->bids) {
        Amount out = 0;
        for (const auto& st : res->settlements) {
          if (st.kind != auction::SettlementKind::asset && st.from == bid.escrow) out += st.value + st.fee;
        }
        const Amount left = chain_->balance_at(bid.escrow, head);
        if (out + left != bid.current_balance) bad += "escrow " + bid.escrow.hex() + " not fully settled; ";
      }
      const Amount before = chain_->balance_at(auctioneer_.address, res->snapshot_height);
      const Amount after = chain_->balance_at(auctioneer_.address, head);
      if (after - before != res->paid) bad += "auctioneer received " + std::to_string(after - before) + "; ";
    }
    check("conservation", bad.empty(), bad);
  }

  void check_cutoff() {
    const auto& res = report_.resolution;
    if (!res || !res->winner_escrow) {
      check("cutoff_semantics", true, "no winner");
      return;
    }
    if (s_.expect.oracle_divergence) {
      check("cutoff_semantics", true, "not applicable: scenario expects a defeated quorum");
      return;
    }
    std::string bad;
    const Amount at_cutoff = chain_->balance_at(*res->winner_escrow, s_.deadline);
    if (res->winning_amount != at_cutoff) bad += "amount differs from cutoff balance; ";
    const Amount fee = s_.fee();
    for (const auto& bid : res->bids) {
      Amount payment = 0;
      Amount returned = 0;
      for (const auto& st : res->settlements) {
        if (st.from != bid.escrow) continue;
        if (st.kind == auction::SettlementKind::payment) payment += st.value;
        if (st.kind == auction::SettlementKind::excess || st.kind == auction::SettlementKind::refund) returned += st.value;
      }
      if (bid.index == *res->winner_index) {
        const Amount cut = std::min(res->winning_amount, bid.current_balance);
        const Amount late = bid.current_balance - cut;
        if (payment != (cut > fee ? cut - fee : 0)) bad += "winner payment is not the cutoff balance; ";
        if (returned != (late > fee ? late - fee : 0)) bad += "late funds not returned; ";
      } else if (returned != (bid.current_balance > fee ? bid.current_balance - fee : 0)) {
        bad += "loser " + std::to_string(bid.index) + " not fully refunded; ";
      }
    }
    check("cutoff_semantics", bad.empty(), bad);
  }

  void check_confidentiality() {
    const auto& evs = report_.events.events();
    const std::size_t resolved_at = report_.events.find("Resolved").value_or(evs.size());
    const std::size_t leak_at = report_.events.find("EnclaveCompromised").value_or(evs.size());
    const std::string before_resolution = report_.events.text(std::min(resolved_at, leak_at));
    std::string bad;
    for (std::size_t i = 0; i < report_.escrows.size(); ++i) {
      // a proposer naming an escrow publishes it themselves
      if (!report_.escrows[i] ||
          std::find(proposed_.begin(), proposed_.end(), *report_.escrows[i]) != proposed_.end()) {
        continue;
      }
      if (contains_address(before_resolution, *report_.escrows[i])) {
        bad += "escrow of bidder " + std::to_string(i) + " visible before resolution; ";
      }
    }
    // Audit pass: break the enclave after the fact to learn every key it ever held.
    const std::string until_leak = report_.events.text(leak_at);
    const auto keys = enclave_.compromise().keys;
    for (const auto& [addr, secret] : keys) {
      if (contains_secret(until_leak, secret)) bad += "private key of " + addr.hex() + " in public stream; ";
    }
    check("confidentiality", bad.empty(), bad);
  }

  void check_non_interactivity() {
    std::string bad;
    for (std::size_t i = 0; i < s_.bidders.size(); ++i) {
      if (report_.enclave_calls[i] != 1) bad += "bidder " + std::to_string(i) + " made " +
                                                std::to_string(report_.enclave_calls[i]) + " enclave calls; ";
      const std::size_t expected = s_.bidders[i].deposit > 0 ? 1 : 0;
      if (report_.funding_transfers[i] != expected) bad += "bidder " + std::to_string(i) + " made " +
                                                           std::to_string(report_.funding_transfers[i]) + " funding transfers; ";
    }
    check("non_interactivity", bad.empty(), bad);
  }

  void check_log() {
    const auto v = verify_log(report_.events);
    std::string bad;
    for (const auto& e : v.errors) bad += e + "; ";
    const std::size_t expected_unattested = report_.compromised ? 1 : 0;
    if (v.unattested != expected_unattested) bad += std::to_string(v.unattested) + " unattested events; ";
    check("log_verification", v.ok && v.unattested == expected_unattested, bad);

    std::string mismatch;
    if (const auto idx = report_.events.find("Resolved")) {
      const auto& w = report_.events.events()[*idx].data.at("winner");
      const std::string logged = w.is_null() ? "none" : w.get<std::string>();
      const std::string reported = report_.winner_escrow ? report_.winner_escrow->hex() : "none";
      if (logged != reported) mismatch = "log says " + logged + ", report says " + reported;
    } else if (report_.resolution) {
      mismatch = "resolution without Resolved event";
    }
    check("report_matches_log", mismatch.empty(), mismatch);
  }

  void check_expectations() {
    if (s_.expect.final_state) {
      check("expected_final_state", report_.final_state == *s_.expect.final_state,
            "final state " + std::string(auction::to_string(report_.final_state)));
    }
    if (s_.expect.reorg_refused) {
      check("expected_reorg_outcome", report_.reorg_refused == s_.expect.reorg_refused,
            report_.reorg_refused ? (*report_.reorg_refused ? "refused" : "applied") : "no reorg happened");
    }
    if (s_.faults.tamper_registry) check("tamper_detected", report_.tamper_detected);
    const bool adversarial = std::any_of(s_.endpoints.begin(), s_.endpoints.end(),
                                         [](const EndpointSpec& e) { return !std::holds_alternative<quorum::Honest>(e.behavior); });
    if (adversarial && s_.quorum.sample_size == s_.endpoints.size()) {
      check("discrepancy_logged", report_.discrepancies > 0, std::to_string(report_.discrepancies) + " discrepancies");
    }
  }

  const Scenario& s_;
  std::uint64_t seed_;
  enclave::Enclave enclave_;
  gas::GasLedger gas_;
  quorum::AuditLog audit_;
  std::optional<chain::SimChain> chain_;
  std::optional<quorum::QuorumClient> quorum_;
  std::optional<auction::Auction> auction_;
  RunReport report_;

  Wallet auctioneer_;
  Wallet relayer_;
  Wallet attacker_;
  std::vector<Wallet> wallets_;
  std::vector<Address> claims_;
  std::vector<enclave::EncryptionKeyPair> boxes_;
  std::vector<std::optional<std::size_t>> reg_index_;
  std::vector<std::size_t> registry_order_;
  std::vector<Address> proposed_;

  std::uint64_t last_scripted_ = 0;
  std::uint64_t settle_at_ = 0;
  std::uint64_t max_head_ = 0;
  bool reorg_done_ = false;
  bool tampered_ = false;
  bool sponsored_ = false;
  std::uint64_t sponsor_height_ = 0;
  bool payloads_submitted_ = false;
};

json report_row_json(const gas::ReportRow& r) {
  return {{"operation", r.operation}, {"l1", r.settlement}, {"execution", r.execution}};
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const auto& i) { return i.passed; });
}

const InvariantResult* RunReport::invariant(std::string_view name) const {
  for (const auto& i : invariants) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

json RunReport::to_json() const {
  auto opt_index = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  json inv = json::array();
  for (const auto& i : invariants) inv.push_back({{"name", i.name}, {"passed", i.passed}, {"detail", i.detail}});
  json gas_rows = json::array();
  for (const auto& r : gas_table) gas_rows.push_back(report_row_json(r));
  json escrow_list = json::array();
  for (const auto& e : escrows) escrow_list.push_back(e ? json(e->hex()) : json(nullptr));
  json j = {{"scenario", scenario},
            {"seed", seed},
            {"final_state", auction::to_string(final_state)},
            {"winner", opt_index(winner)},
            {"winner_escrow", winner_escrow ? json(winner_escrow->hex()) : json(nullptr)},
            {"amount", amount},
            {"oracle", {{"winner", opt_index(oracle.winner)}, {"amount", oracle.amount}}},
            {"oracle_divergence", oracle_divergence},
            {"compromised", compromised},
            {"stolen", stolen},
            {"tamper_detected", tamper_detected},
            {"reorg_refused", reorg_refused ? json(*reorg_refused) : json(nullptr)},
            {"asset_unclaimed", asset_unclaimed},
            {"queries", queries},
            {"balance_queries", balance_queries},
            {"discrepancies", discrepancies},
            {"escrows", escrow_list},
            {"invariants", inv},
            {"gas", gas_rows},
            {"notes", notes},
            {"passed", passed()}};
  if (resolution) {
    const auto& r = *resolution;
    j["conservation"] = {{"deposits", r.deposits}, {"paid", r.paid},   {"refunded", r.refunded},
                         {"excess", r.excess},     {"fees", r.fees},   {"dust", r.dust}};
  }
  if (event_log_path) j["event_log"] = event_log_path->string();
  if (audit_log_path) j["audit_log"] = audit_log_path->string();
  return j;
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out << "scenario " << scenario << " (seed " << seed << ")\n";
  out << "final state: " << auction::to_string(final_state) << '\n';
  out << "winner: " << (winner ? "bidder " + std::to_string(*winner) : std::string("none"));
  if (winner_escrow) out << " escrow " << winner_escrow->hex();
  out << " amount " << amount << '\n';
  out << "oracle: " << (oracle.winner ? "bidder " + std::to_string(*oracle.winner) : std::string("none")) << " amount "
      << oracle.amount << (oracle_divergence ? "  [DIVERGENCE]" : "") << '\n';
  if (compromised) out << "enclave compromised; swept " << stolen << '\n';
  if (tamper_detected) out << "sealed-state tampering detected\n";
  if (reorg_refused) out << "reorg " << (*reorg_refused ? "refused" : "applied") << '\n';
  if (asset_unclaimed) out << "asset transfer not on chain\n";
  out << "queries: " << queries << " (balance " << balance_queries << "), discrepancies: " << discrepancies << '\n';
  if (resolution) {
    const auto& r = *resolution;
    out << "conservation: deposits " << r.deposits << " = paid " << r.paid << " + refunded " << r.refunded
        << " + excess " << r.excess << " + fees " << r.fees << " + dust " << r.dust << '\n';
  }
  out << gas::format_report(gas_table);
  for (const auto& i : invariants) {
    out << (i.passed ? "PASS " : "FAIL ") << i.name;
    if (!i.passed && !i.detail.empty()) out << ": " << i.detail;
    out << '\n';
  }
  for (const auto& n : notes) out << "note: " << n << '\n';
  return out.str();
}

RunReport run_scenario(const Scenario& scenario, const RunOptions& options) {
  validate(scenario, scenario.name);
  Runner runner(scenario, options.seed.value_or(scenario.seed));
  RunReport report = runner.run();
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    report.event_log_path = *options.out_dir / "events.jsonl";
    report.audit_log_path = *options.out_dir / "audit.jsonl";
    report.report_path = *options.out_dir / "report.json";
    report.events.write(*report.event_log_path);
    std::ofstream(*report.audit_log_path, std::ios::binary) << report.audit_log;
    std::ofstream(*report.report_path, std::ios::binary) << report.to_json().dump(2) << '\n';
  }
  return report;
}

RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options) {
  return run_scenario(load_scenario(path), options);
}

LogVerification verify_log(const EventLog& log, const Hash32& code_hash) {
  LogVerification v;
  const auto& evs = log.events();
  v.events = evs.size();
  for (std::size_t i = 0; i < evs.size(); ++i) {
    const auto& e = evs[i];
    const std::string where = "event " + std::to_string(i) + " (" + e.kind + ")";
    if (e.seq != i) v.errors.push_back(where + ": sequence number " + std::to_string(e.seq));
    if (!e.attestation) {
      ++v.unattested;
    } else if (!enclave::verify_attestation(*e.attestation, code_hash, e.attested_payload())) {
      v.errors.push_back(where + ": attestation does not verify");
    } else {
      ++v.attested;
    }
    if (e.kind != "Resolved") continue;
    try {
      for (const auto& p : e.data.at("payloads")) {
        const auto stx = decode_raw(from_hex(p.at("raw").get<std::string>()));
        const Address signer = recover_signer(stx);
        if (signer != Address::from_hex(p.at("from").get<std::string>())) {
          v.errors.push_back(where + ": payload signer " + signer.hex() + " differs from declared sender");
        }
        ++v.payloads_checked;
      }
    } catch (const std::exception& ex) {
      v.errors.push_back(where + ": malformed payload: " + ex.what());
    }
  }
  v.ok = v.errors.empty();
  return v;
}

LogVerification verify_log_file(const std::filesystem::path& path, const Hash32& code_hash) {
  return verify_log(EventLog::read(path), code_hash);
}

void emit_plot_data(std::span<const ResolutionMode> modes, std::span<const std::string> pricing,
                    std::span<const std::size_t> bidder_counts, const std::filesystem::path& out) {
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out.string());
  gas::write_plot_csv(f, modes, pricing, bidder_counts);
  if (!f) throw std::runtime_error("write failed: " + out.string());
}

bool contains_address(std::string_view text, const Address& address) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
  return lowered.find(lower_hex(address.view())) != std::string::npos ||
         contains_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), address.view());
}

bool contains_secret(std::string_view text, const Hash32& secret) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
  return lowered.find(lower_hex(secret)) != std::string::npos ||
         contains_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), secret);
}

}  // namespace sealbid::harness
