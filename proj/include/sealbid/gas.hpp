#pragma once

#include <cstdint>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sealbid {

enum class ResolutionMode { exhaustive, proposer_based };

std::string_view to_string(ResolutionMode m);
/// Throws std::invalid_argument for anything but "exhaustive" / "proposer_based".
ResolutionMode parse_resolution_mode(std::string_view text);

}  // namespace sealbid

namespace sealbid::gas {

enum class Layer { execution, settlement };

enum class Op {
  // execution layer
  deploy,
  start,
  submit_bid,
  end_auction,
  register_winner,
  // settlement layer
  asset_escrow,
  bid_transfer,
  claim,
  asset_claim,
  sponsor,
};

std::string_view to_string(Layer l);
std::string_view to_string(Op op);

class UnknownOperation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws UnknownOperation.
Op parse_op(std::string_view name);

inline constexpr std::uint64_t kDefaultHttpRequestCost = 1'000;
inline constexpr std::uint64_t kAdjustedHttpRequestCost = 100'000;

/// Per-operation gas constants for one resolution mode.
///
/// The exhaustive end-of-auction charge is affine in the bidder count:
///   end_auction_base + N * (end_auction_bookkeeping + http_request_cost)
/// Only the four-bidder total is measured, so the base/slope split is a
/// calibration choice: base 400,000 and bookkeeping 100,200 give
/// 400,000 + 4 * 101,200 = 804,800 at the default request price. In
/// proposer mode the end phase is a constant and each proposal costs
/// register_winner_base + http_request_cost.
struct GasPricing {
  ResolutionMode mode = ResolutionMode::exhaustive;
  std::string name = "default";

  std::uint64_t deploy = 0;
  std::uint64_t start = 0;
  std::uint64_t submit_bid = 0;
  std::uint64_t end_auction_base = 0;
  std::uint64_t end_auction_bookkeeping = 0;
  std::uint64_t register_winner_base = 0;
  std::uint64_t http_request_cost = kDefaultHttpRequestCost;

  std::uint64_t transfer = 21'000;
  std::uint64_t asset_escrow = 70'618;
  std::uint64_t asset_claim = 21'000;

  std::uint64_t per_bidder() const;
  std::uint64_t end_auction(std::size_t bidders) const;
  std::uint64_t register_winner() const { return register_winner_base + http_request_cost; }

  /// Throws UnknownOperation when `op` has no price on `layer`.
  std::uint64_t price(Layer layer, Op op, std::size_t bidders) const;

  static GasPricing defaults(ResolutionMode mode);
  /// Same constants with each off-chain request priced at 100,000.
  static GasPricing adjusted(ResolutionMode mode);
  /// "default" or "adjusted"; throws std::invalid_argument otherwise.
  static GasPricing named(ResolutionMode mode, std::string_view variant);
};

struct Charge {
  std::string actor;
  Layer layer;
  Op op;
  std::uint64_t gas;
};

/// Accumulates every charge; totals are always recomputed from the entries.
class GasLedger {
 public:
  explicit GasLedger(GasPricing pricing) : pricing_(std::move(pricing)) {}

  std::uint64_t charge(std::string actor, Layer layer, Op op, std::size_t bidders = 0);

  const GasPricing& pricing() const { return pricing_; }
  std::vector<Charge> entries() const;
  std::uint64_t total() const;
  std::uint64_t total(Layer layer) const;
  std::uint64_t actor_total(std::string_view actor) const;

 private:
  GasPricing pricing_;
  std::vector<Charge> entries_;
  mutable std::mutex mutex_;
};

struct ReportRow {
  std::string operation;
  std::uint64_t settlement = 0;  // L1 column
  std::uint64_t execution = 0;
  bool operator==(const ReportRow&) const = default;
};

/// Rows in the layout of the per-operation gas tables. "(avg)" rows average
/// over charges of that kind; the others are sums.
std::vector<ReportRow> report(const GasLedger& ledger);
std::string format_report(const std::vector<ReportRow>& rows);

/// (N, end-phase execution gas) for each N.
std::vector<std::pair<std::size_t, std::uint64_t>> scaling_curve(const GasPricing& pricing,
                                                                 std::span<const std::size_t> bidder_counts);

/// CSV with header `mode,pricing,bidders,operation,layer,gas`, one end_auction
/// row per (mode, pricing variant, N).
void write_plot_csv(std::ostream& out, std::span<const ResolutionMode> modes,
                    std::span<const std::string> pricing_variants, std::span<const std::size_t> bidder_counts);

}  // namespace sealbid::gas
