#include "sealbid/gas.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace sealbid {

std::string_view to_string(ResolutionMode m) {
  return m == ResolutionMode::exhaustive ? "exhaustive" : "proposer_based";
}

ResolutionMode parse_resolution_mode(std::string_view text) {
  if (text == "exhaustive") return ResolutionMode::exhaustive;
  if (text == "proposer_based" || text == "proposer") return ResolutionMode::proposer_based;
  throw std::invalid_argument("unknown resolution mode '" + std::string(text) + "'");
}

}  // namespace sealbid

namespace sealbid::gas {

namespace {

constexpr std::pair<Op, std::string_view> kOpNames[] = {
    {Op::deploy, "deploy"},           {Op::start, "start"},
    {Op::submit_bid, "submit_bid"},   {Op::end_auction, "end_auction"},
    {Op::register_winner, "register_winner"}, {Op::asset_escrow, "asset_escrow"},
    {Op::bid_transfer, "bid_transfer"}, {Op::claim, "claim"},
    {Op::asset_claim, "asset_claim"}, {Op::sponsor, "sponsor"},
};

bool is_execution(Op op) {
  switch (op) {
    case Op::deploy:
    case Op::start:
    case Op::submit_bid:
    case Op::end_auction:
    case Op::register_winner:
      return true;
    default:
      return false;
  }
}

std::uint64_t rounded_avg(std::uint64_t total, std::uint64_t count) {
  return count == 0 ? 0 : (total + count / 2) / count;
}

}  // namespace

std::string_view to_string(Layer l) { return l == Layer::execution ? "execution" : "settlement"; }

std::string_view to_string(Op op) {
  for (const auto& [o, name] : kOpNames) {
    if (o == op) return name;
  }
  return "unknown";
}

Op parse_op(std::string_view name) {
  for (const auto& [o, n] : kOpNames) {
    if (n == name) return o;
  }
  throw UnknownOperation("unknown operation kind '" + std::string(name) + "'");
}

std::uint64_t GasPricing::per_bidder() const {
  return mode == ResolutionMode::exhaustive ? end_auction_bookkeeping + http_request_cost : 0;
}

std::uint64_t GasPricing::end_auction(std::size_t bidders) const {
  return end_auction_base + per_bidder() * bidders;
}

std::uint64_t GasPricing::price(Layer layer, Op op, std::size_t bidders) const {
  if ((layer == Layer::execution) != is_execution(op)) {
    throw UnknownOperation("operation '" + std::string(to_string(op)) + "' has no price on the " +
                           std::string(to_string(layer)) + " layer");
  }
  switch (op) {
    case Op::deploy: return deploy;
    case Op::start: return start;
    case Op::submit_bid: return submit_bid;
    case Op::end_auction: return end_auction(bidders);
    case Op::register_winner: return register_winner();
    case Op::asset_escrow: return asset_escrow;
    case Op::bid_transfer:
    case Op::claim:
    case Op::sponsor:
      return transfer;
    case Op::asset_claim: return asset_claim;
  }
  throw UnknownOperation("unpriced operation");
}

GasPricing GasPricing::defaults(ResolutionMode mode) {
  GasPricing p;
  p.mode = mode;
  p.name = "default";
  if (mode == ResolutionMode::exhaustive) {
    p.deploy = 3'849'426;
    p.start = 124'324;
    p.submit_bid = 271'160;
    p.end_auction_base = 400'000;
    p.end_auction_bookkeeping = 100'200;
  } else {
    p.deploy = 4'122'288;
    p.start = 55'403;
    p.submit_bid = 271'998;
    p.end_auction_base = 398'827;
    p.register_winner_base = 153'283;
  }
  return p;
}

GasPricing GasPricing::adjusted(ResolutionMode mode) {
  GasPricing p = defaults(mode);
  p.name = "adjusted";
  p.http_request_cost = kAdjustedHttpRequestCost;
  return p;
}

GasPricing GasPricing::named(ResolutionMode mode, std::string_view variant) {
  if (variant == "default") return defaults(mode);
  if (variant == "adjusted") return adjusted(mode);
  throw std::invalid_argument("unknown pricing variant '" + std::string(variant) + "'");
}

std::uint64_t GasLedger::charge(std::string actor, Layer layer, Op op, std::size_t bidders) {
  std::uint64_t gas = pricing_.price(layer, op, bidders);
  std::lock_guard lock(mutex_);
  entries_.push_back({std::move(actor), layer, op, gas});
  return gas;
}

std::vector<Charge> GasLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::uint64_t GasLedger::total() const {
  std::lock_guard lock(mutex_);
  std::uint64_t t = 0;
  for (const auto& c : entries_) t += c.gas;
  return t;
}

std::uint64_t GasLedger::total(Layer layer) const {
  std::lock_guard lock(mutex_);
  std::uint64_t t = 0;
  for (const auto& c : entries_) {
    if (c.layer == layer) t += c.gas;
  }
  return t;
}

std::uint64_t GasLedger::actor_total(std::string_view actor) const {
  std::lock_guard lock(mutex_);
  std::uint64_t t = 0;
  for (const auto& c : entries_) {
    if (c.actor == actor) t += c.gas;
  }
  return t;
}

std::vector<ReportRow> report(const GasLedger& ledger) {
  struct Sum {
    std::uint64_t total = 0;
    std::uint64_t count = 0;
  };
  std::vector<Sum> sums(std::size(kOpNames));
  for (const auto& c : ledger.entries()) {
    auto& s = sums[static_cast<std::size_t>(c.op)];
    s.total += c.gas;
    s.count += 1;
  }
  auto total = [&](Op op) { return sums[static_cast<std::size_t>(op)].total; };
  auto avg = [&](Op op) { return rounded_avg(total(op), sums[static_cast<std::size_t>(op)].count); };

  std::vector<ReportRow> rows;
  rows.push_back({"Deploy auction", 0, total(Op::deploy)});
  rows.push_back({"Start auction", total(Op::asset_escrow), total(Op::start)});
  rows.push_back({"Submit bid (avg)", avg(Op::bid_transfer), avg(Op::submit_bid)});
  rows.push_back({"End auction", 0, total(Op::end_auction)});
  if (ledger.pricing().mode == ResolutionMode::proposer_based) {
    rows.push_back({"Register winner (avg)", 0, avg(Op::register_winner)});
  }
  const auto& claim = sums[static_cast<std::size_t>(Op::claim)];
  const auto& asset_claim = sums[static_cast<std::size_t>(Op::asset_claim)];
  rows.push_back({"Claim valuable (avg)", rounded_avg(claim.total + asset_claim.total, claim.count + asset_claim.count), 0});
  if (sums[static_cast<std::size_t>(Op::sponsor)].count != 0) {
    rows.push_back({"Fee sponsorship", total(Op::sponsor), 0});
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(24) << "Operation" << std::right << std::setw(16) << "Settlement (L1)"
      << std::setw(16) << "Execution" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.operation << std::right << std::setw(16) << r.settlement << std::setw(16)
        << r.execution << '\n';
  }
  return out.str();
}

std::vector<std::pair<std::size_t, std::uint64_t>> scaling_curve(const GasPricing& pricing,
                                                                 std::span<const std::size_t> bidder_counts) {
  std::vector<std::pair<std::size_t, std::uint64_t>> out;
  out.reserve(bidder_counts.size());
  for (std::size_t n : bidder_counts) out.emplace_back(n, pricing.end_auction(n));
  return out;
}

void write_plot_csv(std::ostream& out, std::span<const ResolutionMode> modes,
                    std::span<const std::string> pricing_variants, std::span<const std::size_t> bidder_counts) {
  out << "mode,pricing,bidders,operation,layer,gas\n";
  for (ResolutionMode mode : modes) {
    for (const auto& variant : pricing_variants) {
      GasPricing pricing = GasPricing::named(mode, variant);
      for (const auto& [n, gas] : scaling_curve(pricing, bidder_counts)) {
        out << to_string(mode) << ',' << variant << ',' << n << ",end_auction,execution," << gas << '\n';
      }
    }
  }
}

}  // namespace sealbid::gas
