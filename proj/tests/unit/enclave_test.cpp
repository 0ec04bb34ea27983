#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "sealbid/enclave.hpp"
#include "sealbid/keccak.hpp"

namespace sealbid::enclave {
namespace {

const Hash32 kCode = keccak256("enclave-test/code");

Envelope envelope_for(const EncryptionPublicKey& to, const std::string& msg, std::uint8_t salt) {
  std::array<std::uint8_t, 24> nonce{};
  nonce.fill(salt);
  return seal_envelope(to, as_view(msg), keccak256(std::string(1, static_cast<char>(salt))), nonce);
}

TEST(Enclave, SameSeedSameKeys) {
  auto a = Enclave::create_test(0, kCode);
  auto b = Enclave::create_test(0, kCode);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a.generate_keypair().second, b.generate_keypair().second);
  EXPECT_EQ(a.random(64), b.random(64));
}

TEST(Enclave, DifferentSeedsDiffer) {
  auto a = Enclave::create_test(0, kCode);
  auto b = Enclave::create_test(1, kCode);
  EXPECT_NE(a.generate_keypair().second, b.generate_keypair().second);
}

TEST(Enclave, ProductionInstancesDiffer) {
  auto a = Enclave::create_production(kCode);
  auto b = Enclave::create_production(kCode);
  EXPECT_EQ(a.mode(), Mode::production);
  EXPECT_NE(a.generate_keypair().second, b.generate_keypair().second);
}

TEST(Enclave, KeypairsDistinctAndSignable) {
  auto e = Enclave::create_test(3, kCode);
  std::set<Address> seen;
  for (int i = 0; i < 10'000; ++i) ASSERT_TRUE(seen.insert(e.generate_keypair().second).second);
  const auto [h, addr] = e.generate_keypair();
  EXPECT_EQ(addr.bytes().size(), 20u);
  EXPECT_EQ(e.address_of(h), addr);
  UnsignedTx tx;
  tx.to = addr;
  EXPECT_EQ(recover_signer(e.sign_with(h, tx)), addr);
}

TEST(Enclave, RandomBytes) {
  auto e = Enclave::create_test(4, kCode);
  EXPECT_TRUE(e.random(0).empty());
  EXPECT_EQ(e.random(17).size(), 17u);
  EXPECT_THROW(e.random_below(0), std::invalid_argument);
  for (int i = 0; i < 100; ++i) EXPECT_LT(e.random_below(7), 7u);
}

TEST(Enclave, ProductionStreamChiSquare) {
  auto e = Enclave::create_production(kCode);
  const Bytes data = e.random(1 << 20);
  std::array<double, 256> counts{};
  for (auto b : data) counts[b] += 1;
  const double expected = data.size() / 256.0;
  double chi = 0;
  for (double c : counts) chi += (c - expected) * (c - expected) / expected;
  // 255 degrees of freedom; 350 is far beyond the 99.99th percentile
  EXPECT_LT(chi, 350.0);
  EXPECT_GT(chi, 150.0);
}

TEST(SealedStore, RoundTripAndMissing) {
  auto e = Enclave::create_test(0, kCode);
  e.seal_put("a", Bytes{1, 2, 3});
  EXPECT_EQ(e.seal_get("a"), (Bytes{1, 2, 3}));
  e.seal_put("a", Bytes{4});
  EXPECT_EQ(e.seal_get("a"), Bytes{4});
  EXPECT_TRUE(e.seal_contains("a"));
  EXPECT_FALSE(e.seal_contains("b"));
  EXPECT_THROW(e.seal_get("b"), MissingEntryError);
}

TEST(SealedStore, TamperDetected) {
  auto e = Enclave::create_test(0, kCode);
  e.seal_put("reg", Bytes{9, 9});
  e.inject_tamper("reg");
  EXPECT_THROW(e.seal_get("reg"), IntegrityError);
}

TEST(SealedStore, RollbackDetected) {
  auto e = Enclave::create_test(0, kCode);
  e.seal_put("reg", Bytes{1});
  const SealedEntry old = e.snapshot_entry("reg");
  e.seal_put("reg", Bytes{2});
  e.inject_entry("reg", old);
  EXPECT_THROW(e.seal_get("reg"), RollbackError);
}

TEST(SealedStore, ForgedMacDetected) {
  auto e = Enclave::create_test(0, kCode);
  e.seal_put("reg", Bytes{1});
  SealedEntry forged = e.snapshot_entry("reg");
  forged.value = {7};
  e.inject_entry("reg", forged);
  EXPECT_THROW(e.seal_get("reg"), IntegrityError);
}

TEST(Envelope, RoundTripAndWrongKey) {
  const auto alice = EncryptionKeyPair::from_seed(keccak256("alice"));
  const auto mallory = EncryptionKeyPair::from_seed(keccak256("mallory"));
  const Envelope env = envelope_for(alice.public_key, "escrow", 1);
  EXPECT_EQ(decrypt_envelope(alice, env), to_bytes("escrow"));
  EXPECT_THROW(decrypt_envelope(mallory, env), EnvelopeError);
}

TEST(Envelope, TamperedCiphertextRejected) {
  const auto alice = EncryptionKeyPair::from_seed(keccak256("alice"));
  Envelope env = envelope_for(alice.public_key, "escrow", 1);
  env.ciphertext.back() ^= 1;
  EXPECT_THROW(decrypt_envelope(alice, env), EnvelopeError);
}

TEST(Envelope, EnclaveEncryptionsAreFresh) {
  auto e = Enclave::create_test(0, kCode);
  const auto alice = EncryptionKeyPair::from_seed(keccak256("alice"));
  const std::string msg = "same";
  const Envelope a = e.encrypt_to(alice.public_key, as_view(msg));
  const Envelope b = e.encrypt_to(alice.public_key, as_view(msg));
  EXPECT_NE(a.ciphertext, b.ciphertext);
  EXPECT_NE(a.ephemeral, b.ephemeral);
  EXPECT_EQ(decrypt_envelope(alice, a), decrypt_envelope(alice, b));
}

TEST(Envelope, SerializeParse) {
  const auto alice = EncryptionKeyPair::from_seed(keccak256("alice"));
  const Envelope env = envelope_for(alice.public_key, "x", 2);
  const std::string s = env.serialize();
  EXPECT_EQ(s.substr(0, 2), "0x");
  EXPECT_EQ(s.size(), 2 + 64 + 64 + 2 * env.ciphertext.size());
  EXPECT_EQ(Envelope::parse(s), env);
  EXPECT_THROW(Envelope::parse("0x1234"), std::exception);
}

TEST(Envelope, EnclaveInputKey) {
  auto e = Enclave::create_test(0, kCode);
  const Envelope env = envelope_for(e.input_public_key(), "bid", 3);
  EXPECT_EQ(e.decrypt_input(env), to_bytes("bid"));
}

TEST(Attestation, Verify) {
  auto e = Enclave::create_test(0, kCode);
  const Bytes payload = to_bytes("resolved");
  const auto report = e.attest(payload);
  EXPECT_TRUE(verify_attestation(report, kCode, payload));
  EXPECT_FALSE(verify_attestation(report, keccak256("other code"), payload));
  EXPECT_FALSE(verify_attestation(report, kCode, to_bytes("resolveD")));
  auto forged = report;
  forged.signature.s[5] ^= 1;
  EXPECT_FALSE(verify_attestation(forged, kCode, payload));
}

TEST(Compromise, ExportsKeysInTestMode) {
  auto e = Enclave::create_test(0, kCode);
  const auto [h, addr] = e.generate_keypair();
  e.seal_put("x", Bytes{1});
  const auto leak = e.compromise();
  EXPECT_TRUE(e.compromised());
  ASSERT_EQ(leak.keys.size(), 1u);
  EXPECT_EQ(leak.keys[0].first, addr);
  EXPECT_EQ(derive_address(secp256k1::derive_public_key(leak.keys[0].second)), addr);
  EXPECT_EQ(leak.sealed.at("x"), Bytes{1});
}

TEST(Compromise, RefusedInProduction) {
  auto e = Enclave::create_production(kCode);
  e.generate_keypair();
  EXPECT_THROW(e.compromise(), CompromiseRefused);
  EXPECT_FALSE(e.compromised());
}

}  // namespace
}  // namespace sealbid::enclave
