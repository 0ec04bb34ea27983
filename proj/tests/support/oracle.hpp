#pragma once

// Brute-force winner from the funding plan, kept apart from the library's own
// oracle so the two can disagree. Rank: cutoff amount desc, completion height
// asc, escrow bytes asc.

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

#include "sealbid/scenario.hpp"

namespace sealbid::testing {

struct Expected {
  std::optional<std::size_t> winner;
  Amount amount = 0;
  std::vector<Amount> cutoff;
  std::vector<Amount> total;  // everything the plan ever sends
};

inline Expected brute_force(const harness::Scenario& s, const std::vector<std::optional<Address>>& escrows) {
  Expected out;
  std::vector<std::uint64_t> reached;
  for (const auto& b : s.bidders) {
    std::vector<std::pair<std::uint64_t, Amount>> sends;
    if (b.deposit > 0) sends.emplace_back(b.funding_height, b.deposit);
    if (b.top_up) sends.emplace_back(b.top_up->height, b.top_up->amount);
    Amount cut = 0;
    Amount all = 0;
    std::uint64_t last = 0;
    for (const auto& [h, v] : sends) {
      all += v;
      if (h <= s.deadline) {
        cut += v;
        last = std::max(last, h);
      }
    }
    out.cutoff.push_back(cut);
    out.total.push_back(all);
    reached.push_back(last);
  }
  for (std::size_t i = 0; i < s.bidders.size(); ++i) {
    if (out.cutoff[i] == 0) continue;
    if (!out.winner) {
      out.winner = i;
      continue;
    }
    const std::size_t w = *out.winner;
    const auto key = [&](std::size_t k) {
      return std::make_tuple(~out.cutoff[k], reached[k], escrows.at(k).value_or(Address{}));
    };
    if (key(i) < key(w)) out.winner = i;
  }
  if (out.winner) out.amount = out.cutoff[*out.winner];
  return out;
}

}  // namespace sealbid::testing
