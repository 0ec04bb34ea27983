#include "sealbid/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <yaml-cpp/yaml.h>

namespace sealbid::harness {

ScenarioError::ScenarioError(std::string source, std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(source + (line != 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": field '" + field + "'") + ": " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    const auto mark = node.Mark();
    throw ScenarioError(source_, mark.is_null() ? 0 : static_cast<std::size_t>(mark.line) + 1, field, msg);
  }

  void expect_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  /// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
  void check_keys(const YAML::Node& node, const std::string& field, std::initializer_list<std::string_view> allowed) const {
    expect_map(node, field);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, "cannot convert '" + node.Scalar() + "'");
    }
  }

  std::uint64_t uint(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar() && !node.Scalar().empty() && node.Scalar()[0] == '-') fail(node, field, "must be non-negative");
    return scalar<std::uint64_t>(node, field);
  }

  template <class T>
  void opt(const YAML::Node& parent, const char* key, const std::string& prefix, T& out) const {
    const YAML::Node n = parent[key];
    if (!n) return;
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      out = uint(n, field);
    } else if constexpr (std::is_same_v<T, std::size_t>) {
      out = static_cast<std::size_t>(uint(n, field));
    } else {
      out = scalar<T>(n, field);
    }
  }

  std::uint64_t required_uint(const YAML::Node& parent, const char* key, const std::string& prefix) const {
    const YAML::Node n = parent[key];
    const std::string field = prefix + "." + key;
    if (!n) fail(parent, field, "missing");
    return uint(n, field);
  }

  quorum::Behavior behavior(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar()) {
      const auto name = node.as<std::string>();
      if (name == "honest") return quorum::Honest{};
      if (name == "withhold") return quorum::Withhold{};
      fail(node, field, "unknown behavior '" + name + "'");
    }
    check_keys(node, field, {"misreport_balance", "misreport_height", "withhold"});
    if (node.size() != 1) fail(node, field, "exactly one behavior expected");
    if (const auto m = node["misreport_balance"]) {
      const std::string f = field + ".misreport_balance";
      check_keys(m, f, {"offset", "fixed"});
      quorum::MisreportBalance b;
      opt(m, "offset", f, b.offset);
      if (m["fixed"]) b.fixed = uint(m["fixed"], f + ".fixed");
      return b;
    }
    if (const auto m = node["misreport_height"]) {
      const std::string f = field + ".misreport_height";
      check_keys(m, f, {"offset"});
      quorum::MisreportHeight b;
      opt(m, "offset", f, b.offset);
      return b;
    }
    const auto w = node["withhold"];
    const std::string f = field + ".withhold";
    check_keys(w, f, {"probability"});
    quorum::Withhold b;
    opt(w, "probability", f, b.probability);
    if (!(b.probability >= 0.0 && b.probability <= 1.0)) fail(w, f + ".probability", "must lie in [0, 1]");
    return b;
  }

  auction::State state(const YAML::Node& node, const std::string& field) const {
    const auto name = scalar<std::string>(node, field);
    for (auto s : {auction::State::init, auction::State::deployed, auction::State::open, auction::State::closed,
                   auction::State::resolved, auction::State::claimed}) {
      std::string n(auction::to_string(s));
      std::string lower = n;
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      if (name == n || name == lower) return s;
    }
    fail(node, field, "unknown state '" + name + "'");
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

Scenario parse_root(const YAML::Node& root, const Reader& r) {
  Scenario s;
  r.check_keys(root, "", {"name", "seed", "chain", "auction", "bidders", "quorum", "endpoints", "proposals", "faults",
                          "expect"});
  if (!root["name"]) r.fail(root, "name", "missing");
  s.name = r.scalar<std::string>(root["name"], "name");
  r.opt(root, "seed", "", s.seed);

  if (const auto c = root["chain"]) {
    r.check_keys(c, "chain", {"chain_id", "finality_depth", "fee_gas"});
    r.opt(c, "chain_id", "chain", s.chain.chain_id);
    r.opt(c, "finality_depth", "chain", s.chain.finality_depth);
    r.opt(c, "fee_gas", "chain", s.chain.fee_gas);
  }

  const auto a = root["auction"];
  if (!a) r.fail(root, "auction", "missing");
  r.check_keys(a, "auction", {"deadline", "gas_price", "kappa", "resolution_mode", "proposal_window", "token_id",
                              "escrow_asset", "pricing"});
  s.deadline = r.required_uint(a, "deadline", "auction");
  r.opt(a, "gas_price", "auction", s.gas_price);
  r.opt(a, "kappa", "auction", s.kappa);
  if (const auto m = a["resolution_mode"]) {
    try {
      s.mode = parse_resolution_mode(r.scalar<std::string>(m, "auction.resolution_mode"));
    } catch (const std::invalid_argument& e) {
      r.fail(m, "auction.resolution_mode", e.what());
    }
  }
  r.opt(a, "proposal_window", "auction", s.proposal_window);
  r.opt(a, "token_id", "auction", s.token_id);
  r.opt(a, "escrow_asset", "auction", s.escrow_asset);
  r.opt(a, "pricing", "auction", s.pricing);

  if (const auto bs = root["bidders"]) {
    if (!bs.IsSequence()) r.fail(bs, "bidders", "expected a list");
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const auto b = bs[i];
      const std::string f = "bidders[" + std::to_string(i) + "]";
      r.check_keys(b, f, {"deposit", "funding_height", "register_height", "top_up"});
      BidderScript script;
      script.deposit = r.required_uint(b, "deposit", f);
      script.funding_height = r.required_uint(b, "funding_height", f);
      script.register_height = r.required_uint(b, "register_height", f);
      if (const auto t = b["top_up"]) {
        r.check_keys(t, f + ".top_up", {"amount", "height"});
        script.top_up = TopUp{r.required_uint(t, "amount", f + ".top_up"), r.required_uint(t, "height", f + ".top_up")};
      }
      s.bidders.push_back(script);
    }
  }

  if (const auto q = root["quorum"]) {
    r.check_keys(q, "quorum", {"sample_size", "agreement", "fallback"});
    r.opt(q, "sample_size", "quorum", s.quorum.sample_size);
    r.opt(q, "agreement", "quorum", s.quorum.agreement);
    r.opt(q, "fallback", "quorum", s.quorum.fallback);
  }

  if (const auto es = root["endpoints"]) {
    if (!es.IsSequence()) r.fail(es, "endpoints", "expected a list");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string f = "endpoints[" + std::to_string(i) + "]";
      r.check_keys(es[i], f, {"id", "behavior"});
      EndpointSpec e;
      if (!es[i]["id"]) r.fail(es[i], f + ".id", "missing");
      e.id = r.scalar<std::string>(es[i]["id"], f + ".id");
      if (const auto b = es[i]["behavior"]) e.behavior = r.behavior(b, f + ".behavior");
      s.endpoints.push_back(e);
    }
  } else {
    s.endpoints = default_endpoints();
  }

  if (const auto ps = root["proposals"]) {
    if (!ps.IsSequence()) r.fail(ps, "proposals", "expected a list");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      s.proposals.push_back(r.scalar<std::int64_t>(ps[i], "proposals[" + std::to_string(i) + "]"));
    }
  }

  if (const auto fs = root["faults"]) {
    r.check_keys(fs, "faults", {"reorg", "compromise_enclave", "tamper_registry"});
    if (const auto g = fs["reorg"]) {
      r.check_keys(g, "faults.reorg", {"at_height", "depth"});
      s.faults.reorg = ReorgFault{r.required_uint(g, "at_height", "faults.reorg"),
                                  static_cast<std::size_t>(r.required_uint(g, "depth", "faults.reorg"))};
    }
    r.opt(fs, "compromise_enclave", "faults", s.faults.compromise_enclave);
    r.opt(fs, "tamper_registry", "faults", s.faults.tamper_registry);
  }

  if (const auto ex = root["expect"]) {
    r.check_keys(ex, "expect", {"final_state", "oracle_divergence", "reorg_refused"});
    if (ex["final_state"]) s.expect.final_state = r.state(ex["final_state"], "expect.final_state");
    r.opt(ex, "oracle_divergence", "expect", s.expect.oracle_divergence);
    if (ex["reorg_refused"]) s.expect.reorg_refused = r.scalar<bool>(ex["reorg_refused"], "expect.reorg_refused");
  }
  return s;
}

}  // namespace

std::vector<EndpointSpec> default_endpoints() {
  return {{"rpc-0", quorum::Honest{}}, {"rpc-1", quorum::Honest{}}, {"rpc-2", quorum::Honest{}}};
}

void validate(const Scenario& s, std::string_view source) {
  const std::string src(source);
  auto fail = [&](const std::string& field, const std::string& msg) { throw ScenarioError(src, 0, field, msg); };

  if (s.name.empty()) fail("name", "must not be empty");
  if (s.chain.finality_depth == 0) fail("chain.finality_depth", "must be positive");
  if (s.kappa == 0) fail("auction.kappa", "must be positive");
  if (s.deadline <= s.open_height()) {
    fail("auction.deadline", "must exceed the opening height " + std::to_string(s.open_height()));
  }
  if (s.mode == ResolutionMode::proposer_based && s.proposal_window == 0) {
    fail("auction.proposal_window", "must be positive");
  }
  try {
    (void)gas::GasPricing::named(s.mode, s.pricing);
  } catch (const std::invalid_argument& e) {
    fail("auction.pricing", e.what());
  }

  for (std::size_t i = 0; i < s.bidders.size(); ++i) {
    const auto& b = s.bidders[i];
    const std::string f = "bidders[" + std::to_string(i) + "]";
    if (b.register_height < s.open_height()) {
      fail(f + ".register_height", "auction opens at height " + std::to_string(s.open_height()));
    }
    if (b.register_height >= s.deadline) fail(f + ".register_height", "must be below the deadline");
    if (b.funding_height <= b.register_height) fail(f + ".funding_height", "must follow registration");
    if (b.top_up) {
      if (b.top_up->amount == 0) fail(f + ".top_up.amount", "must be positive");
      if (b.top_up->height <= b.funding_height) fail(f + ".top_up.height", "must follow the funding height");
    }
  }

  if (s.endpoints.empty()) fail("endpoints", "at least one endpoint required");
  std::set<std::string> ids;
  for (const auto& e : s.endpoints) {
    if (e.id.empty()) fail("endpoints", "empty endpoint id");
    if (e.id == "fallback") fail("endpoints", "id 'fallback' is reserved");
    if (!ids.insert(e.id).second) fail("endpoints", "duplicate endpoint id '" + e.id + "'");
  }
  if (s.quorum.sample_size == 0 || s.quorum.sample_size > s.endpoints.size()) {
    fail("quorum.sample_size", "must lie in [1, " + std::to_string(s.endpoints.size()) + "]");
  }
  if (s.quorum.agreement == 0 || s.quorum.agreement > s.quorum.sample_size) {
    fail("quorum.agreement", "must lie in [1, sample_size]");
  }

  for (std::size_t i = 0; i < s.proposals.size(); ++i) {
    const auto p = s.proposals[i];
    if (p != kUnknownCandidate && (p < 0 || static_cast<std::size_t>(p) >= s.bidders.size())) {
      fail("proposals[" + std::to_string(i) + "]", "not a bidder index");
    }
  }
  if (s.faults.reorg && (s.faults.reorg->depth == 0 || s.faults.reorg->at_height < s.faults.reorg->depth)) {
    fail("faults.reorg", "depth must be positive and not exceed at_height");
  }
}

Scenario parse_scenario(std::string_view text, std::string_view source) {
  Reader r{std::string(source)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string(source), static_cast<std::size_t>(e.mark.line) + 1, "", e.msg);
  }
  if (!root.IsMap()) throw ScenarioError(std::string(source), 0, "", "top level must be a mapping");
  Scenario s = parse_root(root, r);
  validate(s, source);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string(), 0, "", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

OracleResult oracle_resolve(const Scenario& s, const std::vector<Address>* escrows) {
  OracleResult out;
  const std::size_t n = s.bidders.size();
  std::vector<std::uint64_t> reached(n, 0);
  for (const auto& b : s.bidders) {
    Amount cutoff = 0;
    std::uint64_t last = 0;
    if (b.deposit > 0 && b.funding_height <= s.deadline) {
      cutoff += b.deposit;
      last = b.funding_height;
    }
    if (b.top_up && b.top_up->height <= s.deadline) {
      cutoff += b.top_up->amount;
      last = b.top_up->height;
    }
    reached[out.cutoff_balances.size()] = last;
    out.cutoff_balances.push_back(cutoff);
  }

  std::vector<std::size_t> candidates;
  if (s.mode == ResolutionMode::proposer_based) {
    if (s.proposals.empty()) {
      for (std::size_t i = 0; i < n; ++i) candidates.push_back(i);
    } else {
      for (auto p : s.proposals) {
        if (p != kUnknownCandidate) candidates.push_back(static_cast<std::size_t>(p));
      }
    }
    const bool any = std::any_of(candidates.begin(), candidates.end(),
                                 [&](std::size_t i) { return out.cutoff_balances[i] > 0; });
    if (!any) candidates.clear();
  }
  if (candidates.empty()) {
    for (std::size_t i = 0; i < n; ++i) candidates.push_back(i);
  }

  Amount best = 0;
  for (std::size_t i : candidates) best = std::max(best, out.cutoff_balances[i]);
  if (best == 0) return out;
  out.amount = best;

  std::uint64_t earliest = UINT64_MAX;
  for (std::size_t i : candidates) {
    if (out.cutoff_balances[i] == best) earliest = std::min(earliest, reached[i]);
  }
  for (std::size_t i : candidates) {
    if (out.cutoff_balances[i] == best && reached[i] == earliest &&
        std::find(out.tied.begin(), out.tied.end(), i) == out.tied.end()) {
      out.tied.push_back(i);
    }
  }
  std::sort(out.tied.begin(), out.tied.end());
  if (out.tied.size() == 1) {
    out.winner = out.tied.front();
  } else if (escrows != nullptr) {
    out.winner = *std::min_element(out.tied.begin(), out.tied.end(),
                                   [&](std::size_t x, std::size_t y) { return (*escrows)[x] < (*escrows)[y]; });
  }
  return out;
}

}  // namespace sealbid::harness
