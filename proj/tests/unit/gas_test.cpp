#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "sealbid/gas.hpp"

namespace sealbid::gas {
namespace {

using L = Layer;

TEST(GasPricing, CalibratedCharges) {
  const auto p = GasPricing::defaults(ResolutionMode::exhaustive);
  EXPECT_EQ(p.price(L::settlement, Op::bid_transfer, 0), 21'000u);
  EXPECT_EQ(p.price(L::execution, Op::submit_bid, 0), 271'160u);
  EXPECT_EQ(p.price(L::execution, Op::end_auction, 4), 804'800u);
  EXPECT_EQ(p.price(L::execution, Op::deploy, 0), 3'849'426u);
  EXPECT_EQ(p.price(L::execution, Op::start, 0), 124'324u);
  EXPECT_EQ(p.price(L::settlement, Op::asset_escrow, 0), 70'618u);
}

TEST(GasPricing, ProposerCalibration) {
  const auto p = GasPricing::defaults(ResolutionMode::proposer_based);
  EXPECT_EQ(p.deploy, 4'122'288u);
  EXPECT_EQ(p.start, 55'403u);
  EXPECT_EQ(p.submit_bid, 271'998u);
  EXPECT_EQ(p.end_auction(4), 398'827u);
  EXPECT_EQ(p.end_auction(40), 398'827u);
  EXPECT_EQ(p.register_winner(), 154'283u);
}

TEST(GasPricing, WrongLayerOrUnknownOp) {
  const auto p = GasPricing::defaults(ResolutionMode::exhaustive);
  EXPECT_THROW(p.price(L::settlement, Op::deploy, 0), UnknownOperation);
  EXPECT_THROW(p.price(L::execution, Op::claim, 0), UnknownOperation);
  EXPECT_THROW(parse_op("teleport"), UnknownOperation);
  EXPECT_EQ(parse_op("submit_bid"), Op::submit_bid);
  EXPECT_THROW(GasPricing::named(ResolutionMode::exhaustive, "cheap"), std::invalid_argument);
}

TEST(GasPricing, AdjustedShiftsSlope) {
  const auto d = GasPricing::defaults(ResolutionMode::exhaustive);
  const auto a = GasPricing::adjusted(ResolutionMode::exhaustive);
  EXPECT_EQ(a.http_request_cost, 100'000u);
  EXPECT_EQ(a.per_bidder() - d.per_bidder(), 99'000u);
  EXPECT_EQ(a.end_auction(0), d.end_auction(0));
}

TEST(GasLedger, TotalsAreSumOfEntries) {
  GasLedger g(GasPricing::defaults(ResolutionMode::exhaustive));
  g.charge("a", L::execution, Op::deploy);
  g.charge("b", L::settlement, Op::bid_transfer);
  g.charge("b", L::execution, Op::submit_bid);
  g.charge("r", L::execution, Op::end_auction, 3);
  std::uint64_t sum = 0;
  for (const auto& c : g.entries()) sum += c.gas;
  EXPECT_EQ(g.total(), sum);
  EXPECT_EQ(g.total(L::settlement), 21'000u);
  EXPECT_EQ(g.actor_total("b"), 292'160u);
  EXPECT_THROW(g.charge("x", L::settlement, Op::start), UnknownOperation);
  EXPECT_EQ(g.entries().size(), 4u);
}

TEST(GasReport, EmptyLedgerAllZero) {
  GasLedger g(GasPricing::defaults(ResolutionMode::exhaustive));
  for (const auto& r : report(g)) {
    EXPECT_EQ(r.settlement, 0u) << r.operation;
    EXPECT_EQ(r.execution, 0u) << r.operation;
  }
}

TEST(GasReport, FourBidderExhaustiveRows) {
  GasLedger g(GasPricing::defaults(ResolutionMode::exhaustive));
  g.charge("auctioneer", L::execution, Op::deploy);
  g.charge("auctioneer", L::execution, Op::start);
  g.charge("auctioneer", L::settlement, Op::asset_escrow);
  for (int i = 0; i < 4; ++i) {
    g.charge("bidder/" + std::to_string(i), L::execution, Op::submit_bid);
    g.charge("bidder/" + std::to_string(i), L::settlement, Op::bid_transfer);
  }
  g.charge("resolver", L::execution, Op::end_auction, 4);
  g.charge("relayer", L::settlement, Op::asset_claim);
  for (int i = 0; i < 4; ++i) g.charge("relayer", L::settlement, Op::claim);
  const std::vector<ReportRow> want = {
      {"Deploy auction", 0, 3'849'426},
      {"Start auction", 70'618, 124'324},
      {"Submit bid (avg)", 21'000, 271'160},
      {"End auction", 0, 804'800},
      {"Claim valuable (avg)", 21'000, 0},
  };
  EXPECT_EQ(report(g), want);
  EXPECT_NE(format_report(want).find("804800"), std::string::npos);
}

TEST(GasReport, RegisterWinnerRowOnlyInProposerMode) {
  GasLedger g(GasPricing::defaults(ResolutionMode::proposer_based));
  g.charge("proposer", L::execution, Op::register_winner);
  g.charge("proposer", L::execution, Op::register_winner);
  const auto rows = report(g);
  const auto it = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.operation == "Register winner (avg)"; });
  ASSERT_NE(it, rows.end());
  EXPECT_EQ(it->execution, 154'283u);
}

TEST(GasScaling, ExhaustiveAffineProposerFlat) {
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= 20; ++n) ns.push_back(n);
  for (const char* v : {"default", "adjusted"}) {
    const auto ex = scaling_curve(GasPricing::named(ResolutionMode::exhaustive, v), ns);
    const auto slope = ex[1].second - ex[0].second;
    for (std::size_t i = 1; i < ex.size(); ++i) EXPECT_EQ(ex[i].second - ex[i - 1].second, slope);
    const auto pr = scaling_curve(GasPricing::named(ResolutionMode::proposer_based, v), ns);
    for (const auto& [n, gas] : pr) EXPECT_EQ(gas, pr.front().second);
  }
}

TEST(GasScaling, PerBidderCostIndependentOfSize) {
  for (std::size_t n : {1, 100}) {
    GasLedger g(GasPricing::defaults(ResolutionMode::exhaustive));
    for (std::size_t i = 0; i < n; ++i) {
      g.charge("bidder/" + std::to_string(i), L::execution, Op::submit_bid);
      g.charge("bidder/" + std::to_string(i), L::settlement, Op::bid_transfer);
    }
    EXPECT_EQ(g.actor_total("bidder/0"), 292'160u);
  }
}

TEST(GasPlot, CsvShape) {
  std::ostringstream out;
  const std::vector<ResolutionMode> modes = {ResolutionMode::exhaustive, ResolutionMode::proposer_based};
  const std::vector<std::string> variants = {"default", "adjusted"};
  const std::vector<std::size_t> ns = {1, 2, 3};
  write_plot_csv(out, modes, variants, ns);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mode,pricing,bidders,operation,layer,gas");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * 2 * 3);
  EXPECT_NE(out.str().find("exhaustive,default,3,end_auction,execution,703600"), std::string::npos);
}

TEST(ResolutionModeNames, ParseAndPrint) {
  EXPECT_EQ(parse_resolution_mode("exhaustive"), ResolutionMode::exhaustive);
  EXPECT_EQ(parse_resolution_mode("proposer"), ResolutionMode::proposer_based);
  EXPECT_EQ(to_string(ResolutionMode::proposer_based), "proposer_based");
  EXPECT_THROW(parse_resolution_mode("magic"), std::invalid_argument);
}

}  // namespace
}  // namespace sealbid::gas
