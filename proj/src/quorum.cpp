#include "sealbid/quorum.hpp"

#include <algorithm>
#include <fstream>

#include "sealbid/keccak.hpp"

namespace sealbid::quorum {

namespace {

std::uint64_t stable_hash(std::string_view id) {
  Hash32 h = keccak256(id);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | h[i];
  return v;
}

json encode_value(std::uint64_t v) { return v; }
json encode_value(const Address& a) { return a.hex(); }

template <class T>
struct Tally {
  T value;
  std::size_t count;
};

/// Plurality value with at least `threshold` votes; nullopt when none qualifies
/// or when two distinct values both qualify.
template <class T>
std::optional<T> agree(const std::vector<std::optional<T>>& responses, std::size_t threshold) {
  std::vector<Tally<T>> tallies;
  for (const auto& r : responses) {
    if (!r) continue;
    auto it = std::find_if(tallies.begin(), tallies.end(), [&](const auto& t) { return t.value == *r; });
    if (it == tallies.end()) {
      tallies.push_back({*r, 1});
    } else {
      ++it->count;
    }
  }
  std::optional<T> winner;
  for (const auto& t : tallies) {
    if (t.count < threshold) continue;
    if (winner) return std::nullopt;
    winner = t.value;
  }
  return winner;
}

}  // namespace

std::string describe(const Behavior& b) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Honest>) {
          return "honest";
        } else if constexpr (std::is_same_v<V, MisreportBalance>) {
          return v.fixed ? "misreport_balance(fixed=" + std::to_string(*v.fixed) + ")"
                         : "misreport_balance(offset=" + std::to_string(v.offset) + ")";
        } else if constexpr (std::is_same_v<V, MisreportHeight>) {
          return "misreport_height(offset=" + std::to_string(v.offset) + ")";
        } else {
          return "withhold(p=" + std::to_string(v.probability) + ")";
        }
      },
      b);
}

Endpoint::Endpoint(std::string id, Behavior behavior, const chain::SimChain& chain, std::uint64_t seed)
    : id_(std::move(id)), behavior_(behavior), chain_(&chain), rng_(seed ^ stable_hash(id_)) {}

bool Endpoint::withholds() {
  const auto* w = std::get_if<Withhold>(&behavior_);
  if (w == nullptr) return false;
  // 53-bit uniform in [0, 1); avoids distribution objects whose output differs across standard libraries.
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u < w->probability;
}

std::uint64_t Endpoint::latency() const { return 1 + stable_hash(id_) % 5; }

Endpoint::Response<Amount> Endpoint::balance(const Address& addr, std::uint64_t height) {
  if (withholds()) return {std::nullopt, kTimeoutTicks};
  if (height > chain_->head_height()) return {std::nullopt, latency()};
  Amount truth = chain_->balance_at(addr, height);
  if (const auto* m = std::get_if<MisreportBalance>(&behavior_)) {
    if (m->fixed) return {*m->fixed, latency()};
    if (m->offset < 0 && static_cast<Amount>(-m->offset) > truth) return {Amount{0}, latency()};
    return {static_cast<Amount>(static_cast<std::int64_t>(truth) + m->offset), latency()};
  }
  return {truth, latency()};
}

Endpoint::Response<std::uint64_t> Endpoint::height() {
  if (withholds()) return {std::nullopt, kTimeoutTicks};
  std::uint64_t head = chain_->head_height();
  if (const auto* m = std::get_if<MisreportHeight>(&behavior_)) {
    if (m->offset < 0 && static_cast<std::uint64_t>(-m->offset) > head) return {std::uint64_t{0}, latency()};
    return {static_cast<std::uint64_t>(static_cast<std::int64_t>(head) + m->offset), latency()};
  }
  return {head, latency()};
}

Endpoint::Response<Address> Endpoint::asset_owner(std::uint64_t token_id, std::uint64_t height) {
  if (withholds()) return {std::nullopt, kTimeoutTicks};
  if (height > chain_->head_height()) return {std::nullopt, latency()};
  try {
    return {chain_->asset_owner_at(token_id, height), latency()};
  } catch (const chain::QueryError&) {
    return {Address{}, latency()};
  }
}

Endpoint::Response<Address> Endpoint::first_funder(const Address& addr, std::uint64_t height) {
  if (withholds()) return {std::nullopt, kTimeoutTicks};
  if (height > chain_->head_height()) return {std::nullopt, latency()};
  return {chain_->first_funder(addr, height).value_or(Address{}), latency()};
}

std::string_view to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::agreed: return "agreed";
    case DecisionKind::fallback: return "fallback";
    case DecisionKind::failure: return "failure";
    case DecisionKind::timeout: return "timeout";
  }
  return "unknown";
}

json AuditRecord::to_json() const {
  auto sample_json = [](const Sample& s) {
    return json{{"endpoint", s.endpoint}, {"response", s.response}, {"latency", s.latency}};
  };
  json samples_json = json::array();
  for (const auto& s : samples) samples_json.push_back(sample_json(s));
  json decision = {{"kind", to_string(this->decision)}, {"value", value}, {"discrepancy", discrepancy}};
  if (fallback) decision["fallback"] = sample_json(*fallback);
  return {{"query", query}, {"params", params}, {"samples", samples_json}, {"decision", decision}};
}

std::size_t AuditLog::discrepancies() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.discrepancy; }));
}

std::string AuditLog::text() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

void AuditLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text();
}

QuorumClient::QuorumClient(std::vector<Endpoint> endpoints, QuorumParams params, enclave::Enclave& rng,
                           AuditLog& audit, std::optional<Endpoint> fallback)
    : endpoints_(std::move(endpoints)), fallback_(std::move(fallback)), params_(params), rng_(&rng), audit_(&audit) {
  if (params_.sample_size == 0) throw ConfigError("sample size must be positive");
  if (params_.sample_size > endpoints_.size()) {
    throw ConfigError("sample size " + std::to_string(params_.sample_size) + " exceeds " +
                      std::to_string(endpoints_.size()) + " declared endpoints");
  }
  if (params_.agreement == 0 || params_.agreement > params_.sample_size) {
    throw ConfigError("agreement threshold must be in [1, sample size]");
  }
}

std::vector<std::size_t> QuorumClient::sample_endpoints() {
  std::vector<std::size_t> idx(endpoints_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < params_.sample_size; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng_->random_below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(params_.sample_size);
  return idx;
}

template <class T, class Ask>
Answer<T> QuorumClient::run_query(std::string kind, json params, Ask ask) {
  ++queries_;
  AuditRecord rec;
  rec.query = std::move(kind);
  rec.params = std::move(params);

  std::vector<std::optional<T>> responses;
  std::uint64_t slowest = 0;
  for (std::size_t i : sample_endpoints()) {
    Endpoint& ep = endpoints_[i];
    auto r = ask(ep);
    slowest = std::max(slowest, r.latency);
    rec.samples.push_back({ep.id(), r.value ? encode_value(*r.value) : json(nullptr), r.latency});
    responses.push_back(r.value);
  }
  clock_ += slowest;

  const bool all_withheld = std::none_of(responses.begin(), responses.end(), [](const auto& r) { return r.has_value(); });
  std::optional<T> decided = agree(responses, params_.agreement);
  if (decided) {
    rec.decision = DecisionKind::agreed;
    rec.discrepancy = std::any_of(responses.begin(), responses.end(), [&](const auto& r) { return !r || *r != *decided; });
  } else {
    rec.discrepancy = true;
    if (fallback_) {
      auto r = ask(*fallback_);
      clock_ += r.latency;
      rec.fallback = Sample{fallback_->id(), r.value ? encode_value(*r.value) : json(nullptr), r.latency};
      if (r.value) {
        decided = r.value;
        rec.decision = DecisionKind::fallback;
      }
    }
    if (!decided) rec.decision = all_withheld && !rec.fallback ? DecisionKind::timeout : DecisionKind::failure;
  }

  if (!decided) {
    const std::string what = rec.query + " query: " + std::string(to_string(rec.decision));
    const bool timeout = rec.decision == DecisionKind::timeout;
    audit_->append(std::move(rec));
    if (timeout) throw QuorumTimeout(what);
    throw QuorumFailure(what);
  }
  rec.value = encode_value(*decided);
  audit_->append(rec);
  return {*decided, std::move(rec)};
}

Answer<Amount> QuorumClient::query_balance(const Address& addr, std::uint64_t height) {
  ++balance_queries_;
  return run_query<Amount>("balance", {{"address", addr.hex()}, {"height", height}},
                           [&](Endpoint& ep) { return ep.balance(addr, height); });
}

Answer<std::uint64_t> QuorumClient::query_height() {
  return run_query<std::uint64_t>("height", json::object(), [](Endpoint& ep) { return ep.height(); });
}

Answer<Address> QuorumClient::query_asset_owner(std::uint64_t token_id, std::uint64_t height) {
  return run_query<Address>("asset_owner", {{"token_id", token_id}, {"height", height}},
                            [&](Endpoint& ep) { return ep.asset_owner(token_id, height); });
}

Answer<std::optional<Address>> QuorumClient::query_first_funder(const Address& addr, std::uint64_t height) {
  auto a = run_query<Address>("first_funder", {{"address", addr.hex()}, {"height", height}},
                              [&](Endpoint& ep) { return ep.first_funder(addr, height); });
  std::optional<Address> funder;
  if (!a.value.is_zero()) funder = a.value;
  return {funder, std::move(a.record)};
}

DeadlineStatus QuorumClient::confirm_deadline(std::uint64_t deadline_height) {
  auto head = query_height();
  return head.value >= deadline_height + params_.kappa ? DeadlineStatus::confirmed : DeadlineStatus::not_yet;
}

}  // namespace sealbid::quorum
