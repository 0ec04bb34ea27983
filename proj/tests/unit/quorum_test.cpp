#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "sealbid/keccak.hpp"
#include "sealbid/quorum.hpp"

namespace sealbid::quorum {
namespace {

const Hash32 kCode = keccak256("quorum-test");

class QuorumTest : public ::testing::Test {
 protected:
  Hash32 alice_secret = keccak256("q/alice");
  Address alice = derive_address(secp256k1::derive_public_key(alice_secret));
  Address target = Address::from_hex("0x00000000000000000000000000000000000000aa");
  std::unique_ptr<chain::SimChain> chain;
  enclave::Enclave enclave = enclave::Enclave::create_test(1, kCode);
  AuditLog audit;

  void SetUp() override {
    chain::Genesis g;
    g.balances = {{alice, 10'000'000}};
    chain = std::make_unique<chain::SimChain>(chain::ChainParams{}, g);
    UnsignedTx tx;
    tx.gas_price = 1;
    tx.to = target;
    tx.value = 500;
    ASSERT_TRUE(chain->submit_tx(sign_tx(tx, alice_secret, 1)));
    for (int i = 0; i < 12; ++i) chain->mine_block();
  }

  QuorumClient client(std::vector<Behavior> behaviors, std::size_t n, std::size_t q, bool fallback = false,
                      std::uint64_t kappa = 6) {
    std::vector<Endpoint> eps;
    for (std::size_t i = 0; i < behaviors.size(); ++i) eps.emplace_back("rpc-" + std::to_string(i), behaviors[i], *chain, 3);
    std::optional<Endpoint> fb;
    if (fallback) fb.emplace("fallback", Honest{}, *chain, 3);
    return QuorumClient(std::move(eps), QuorumParams{n, q, kappa}, enclave, audit, std::move(fb));
  }
};

TEST_F(QuorumTest, HonestMajority) {
  auto c = client({Honest{}, Honest{}, Honest{}}, 3, 2);
  const auto a = c.query_balance(target, 12);
  EXPECT_EQ(a.value, 500u);
  EXPECT_EQ(a.record.decision, DecisionKind::agreed);
  EXPECT_FALSE(a.record.discrepancy);
  EXPECT_EQ(a.record.samples.size(), 3u);
}

TEST_F(QuorumTest, SingleMisreportOutvoted) {
  auto c = client({Honest{}, MisreportBalance{10, std::nullopt}, Honest{}}, 3, 2);
  const auto a = c.query_balance(target, 12);
  EXPECT_EQ(a.value, 500u);
  EXPECT_TRUE(a.record.discrepancy);
  EXPECT_EQ(audit.discrepancies(), 1u);
}

TEST_F(QuorumTest, UnanimityFallsBackToTrustedSource) {
  auto c = client({Honest{}, MisreportBalance{10, std::nullopt}, Honest{}}, 3, 3, true);
  const auto a = c.query_balance(target, 12);
  EXPECT_EQ(a.value, 500u);
  EXPECT_EQ(a.record.decision, DecisionKind::fallback);
  ASSERT_TRUE(a.record.fallback.has_value());
}

TEST_F(QuorumTest, NoAgreementNoFallbackFails) {
  auto c = client({Honest{}, MisreportBalance{10, std::nullopt}, Honest{}}, 3, 3);
  EXPECT_THROW(c.query_balance(target, 12), QuorumFailure);
  ASSERT_EQ(audit.size(), 1u);
  EXPECT_EQ(audit.records()[0].decision, DecisionKind::failure);
}

TEST_F(QuorumTest, AllWithholdTimesOut) {
  auto c = client({Withhold{1.0}, Withhold{1.0}, Withhold{1.0}}, 3, 2);
  EXPECT_THROW(c.query_height(), QuorumTimeout);
  EXPECT_EQ(audit.records().back().decision, DecisionKind::timeout);
  EXPECT_GE(c.clock(), kTimeoutTicks);
}

TEST_F(QuorumTest, HeightQueries) {
  auto honest = client({Honest{}, Honest{}, Honest{}}, 3, 2);
  EXPECT_EQ(honest.query_height().value, 12u);
  auto one_bad = client({Honest{}, MisreportHeight{5}, Honest{}}, 3, 2);
  EXPECT_EQ(one_bad.query_height().value, 12u);
}

TEST_F(QuorumTest, CollusionAcceptedButAudited) {
  auto c = client({MisreportHeight{5}, MisreportHeight{5}, Honest{}}, 3, 2);
  const auto a = c.query_height();
  EXPECT_EQ(a.value, 17u);
  ASSERT_EQ(a.record.samples.size(), 3u);
  std::multiset<std::uint64_t> raw;
  for (const auto& s : a.record.samples) raw.insert(s.response.get<std::uint64_t>());
  EXPECT_EQ(raw, (std::multiset<std::uint64_t>{12, 17, 17}));
  EXPECT_TRUE(a.record.discrepancy);
}

TEST_F(QuorumTest, FixedMisreport) {
  auto c = client({MisreportBalance{0, 1}, MisreportBalance{0, 1}, Honest{}}, 3, 2);
  EXPECT_EQ(c.query_balance(target, 12).value, 1u);
}

TEST_F(QuorumTest, ConfirmDeadlineBoundary) {
  auto c = client({Honest{}, Honest{}, Honest{}}, 3, 2, false, 2);
  EXPECT_EQ(c.confirm_deadline(10), DeadlineStatus::confirmed);  // head = deadline + kappa
  EXPECT_EQ(c.confirm_deadline(11), DeadlineStatus::not_yet);
  auto k0 = client({Honest{}, Honest{}, Honest{}}, 3, 2, false, 0);
  EXPECT_EQ(k0.confirm_deadline(12), DeadlineStatus::confirmed);
  EXPECT_EQ(k0.confirm_deadline(13), DeadlineStatus::not_yet);
}

TEST_F(QuorumTest, ConfigErrors) {
  EXPECT_THROW(client({Honest{}, Honest{}}, 3, 2), ConfigError);
  EXPECT_THROW(client({Honest{}, Honest{}, Honest{}}, 3, 4), ConfigError);
  EXPECT_THROW(client({Honest{}, Honest{}, Honest{}}, 0, 0), ConfigError);
}

TEST_F(QuorumTest, SampleWholeListWhenNEqualsM) {
  auto c = client({Honest{}, Honest{}, Honest{}, Honest{}}, 4, 3);
  auto s = c.sample_endpoints();
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST_F(QuorumTest, SingleSampleIsUniform) {
  constexpr std::size_t m = 5;
  constexpr int draws = 10'000;
  auto c = client(std::vector<Behavior>(m, Honest{}), 1, 1);
  std::array<int, m> counts{};
  for (int i = 0; i < draws; ++i) {
    const auto s = c.sample_endpoints();
    ASSERT_EQ(s.size(), 1u);
    ++counts[s[0]];
  }
  const double p = 1.0 / m;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int k : counts) EXPECT_LT(std::abs(k - draws * p), 3 * sigma);
}

TEST_F(QuorumTest, SamplesAreDistinct) {
  auto c = client(std::vector<Behavior>(7, Honest{}), 4, 3);
  for (int i = 0; i < 500; ++i) {
    const auto s = c.sample_endpoints();
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 4u);
  }
}

TEST_F(QuorumTest, AuditCompleteIncludingFailures) {
  auto c = client({Honest{}, MisreportBalance{10, std::nullopt}, Withhold{0.5}}, 3, 3);
  std::size_t thrown = 0;
  for (int i = 0; i < 20; ++i) {
    try {
      c.query_balance(target, 12);
    } catch (const QuorumError&) {
      ++thrown;
    }
    try {
      c.query_height();
    } catch (const QuorumError&) {
      ++thrown;
    }
  }
  EXPECT_GT(thrown, 0u);
  EXPECT_EQ(audit.size(), c.queries_issued());
  EXPECT_EQ(c.queries_issued(), 40u);
  EXPECT_EQ(c.balance_queries_issued(), 20u);
}

TEST_F(QuorumTest, AuditLinesAreJson) {
  auto c = client({Honest{}, Honest{}, Honest{}}, 3, 2);
  c.query_balance(target, 12);
  c.query_height();
  std::istringstream in(audit.text());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_TRUE(j.contains("query"));
    EXPECT_TRUE(j.contains("params"));
    EXPECT_TRUE(j.contains("samples"));
    EXPECT_TRUE(j.contains("decision"));
    EXPECT_TRUE(j["samples"][0].contains("latency"));
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST_F(QuorumTest, HonestFallbackNeverHurts) {
  // same sample stream with and without a fallback
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto e1 = enclave::Enclave::create_test(seed, kCode);
    auto e2 = enclave::Enclave::create_test(seed, kCode);
    AuditLog a1, a2;
    auto make = [&](enclave::Enclave& e, AuditLog& a, bool fb) {
      std::vector<Endpoint> eps;
      eps.emplace_back("a", Honest{}, *chain, seed);
      eps.emplace_back("b", MisreportBalance{3, std::nullopt}, *chain, seed);
      eps.emplace_back("c", Honest{}, *chain, seed);
      eps.emplace_back("d", Honest{}, *chain, seed);
      std::optional<Endpoint> f;
      if (fb) f.emplace("fallback", Honest{}, *chain, seed);
      return QuorumClient(std::move(eps), QuorumParams{3, 2, 6}, e, a, std::move(f));
    };
    auto plain = make(e1, a1, false);
    auto with = make(e2, a2, true);
    const auto x = plain.query_balance(target, 12).value;
    const auto y = with.query_balance(target, 12).value;
    EXPECT_EQ(x, 500u);
    EXPECT_EQ(y, 500u);
  }
}

}  // namespace
}  // namespace sealbid::quorum
