#include <random>

#include <gtest/gtest.h>

#include "sealbid/keccak.hpp"
#include "sealbid/secp256k1.hpp"
#include "sealbid/transaction.hpp"

namespace sealbid {
namespace {

Hash32 h32(std::string_view hex) { return fixed_from_hex<32>(hex); }

Address addr_of(const Hash32& secret) { return derive_address(secp256k1::derive_public_key(secret)); }

TEST(Address, KnownKeyVectors) {
  EXPECT_EQ(addr_of(h32("4c0883a69102937d6231471b5dbb6204fe5129617082792ae468d01a3f362318")),
            Address::from_hex("0x2c7536E3605D9C16a7a3D7b1898e529396a65c23"));
  Hash32 k46;
  k46.fill(0x46);
  EXPECT_EQ(addr_of(k46), Address::from_hex("0x9d8A62f656a8d1615C1294fd71e9CFb3E4855A4F"));
}

TEST(Address, DeterministicAndDistinct) {
  const Hash32 a = keccak256("a");
  const Hash32 b = keccak256("b");
  EXPECT_EQ(addr_of(a), addr_of(a));
  EXPECT_NE(addr_of(a), addr_of(b));
}

TEST(Address, OffCurvePointRejected) {
  secp256k1::PublicKey bogus;
  bogus.xy.fill(0x01);
  EXPECT_FALSE(secp256k1::is_on_curve(bogus));
  EXPECT_THROW(derive_address(bogus), secp256k1::KeyError);
}

TEST(Secp256k1, SecretRange) {
  Hash32 zero{};
  EXPECT_FALSE(secp256k1::is_valid_secret(zero));
  const Hash32 n = h32("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141");
  EXPECT_FALSE(secp256k1::is_valid_secret(n));
  EXPECT_THROW(secp256k1::derive_public_key(n), secp256k1::KeyError);
  Hash32 n_minus_1 = n;
  n_minus_1[31] = 0x40;
  EXPECT_TRUE(secp256k1::is_valid_secret(n_minus_1));
}

TEST(Secp256k1, SignRecoverLowS) {
  const Hash32 half = h32("7fffffffffffffffffffffffffffffff5d576e7357a4501ddfe92f46681b20a0");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Hash32 secret;
    Hash32 digest;
    for (auto& x : secret) x = static_cast<std::uint8_t>(rng());
    for (auto& x : digest) x = static_cast<std::uint8_t>(rng());
    if (!secp256k1::is_valid_secret(secret)) continue;
    const auto sig = secp256k1::sign(digest, secret);
    EXPECT_LE(sig.s, half);
    EXPECT_EQ(secp256k1::recover(digest, sig), secp256k1::derive_public_key(secret));
  }
}

TEST(Secp256k1, HighSRejected) {
  const Hash32 secret = keccak256("k");
  const Hash32 digest = keccak256("m");
  auto sig = secp256k1::sign(digest, secret);
  // s' = n - s flips to the high half
  const Hash32 n = h32("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141");
  Hash32 hs{};
  int borrow = 0;
  for (int i = 31; i >= 0; --i) {
    int d = n[i] - sig.s[i] - borrow;
    borrow = d < 0;
    hs[i] = static_cast<std::uint8_t>(d + (borrow ? 256 : 0));
  }
  sig.s = hs;
  sig.recovery_id ^= 1;
  EXPECT_THROW(secp256k1::recover(digest, sig), secp256k1::SignatureError);
}

TEST(Secp256k1, BadRecoveryId) {
  auto sig = secp256k1::sign(keccak256("m"), keccak256("k"));
  sig.recovery_id = 4;
  EXPECT_THROW(secp256k1::recover(keccak256("m"), sig), secp256k1::SignatureError);
}

UnsignedTx eip155_tx() {
  UnsignedTx tx;
  tx.nonce = 9;
  tx.gas_price = 20'000'000'000;
  tx.gas_limit = 21'000;
  tx.to = Address::from_hex("0x3535353535353535353535353535353535353535");
  tx.value = 1'000'000'000'000'000'000;
  tx.chain_id = 1;
  return tx;
}

TEST(Transaction, ReplayProtectedVector) {
  Hash32 key;
  key.fill(0x46);
  const auto tx = eip155_tx();
  EXPECT_EQ(to_hex(signing_hash(tx), false), "daf5a779ae972f972197303d7b574746c7ef83eadac0f2791ad23db92e4c8e53");
  const auto stx = sign_tx(tx, key, 1);
  EXPECT_EQ(stx.v, 37u);
  EXPECT_EQ(raw_hex(stx),
            "0xf86c098504a817c800825208943535353535353535353535353535353535353535880de0b6b3a76400008025a028ef61340bd"
            "939bc2195fe537567866003e1a15d3c71ff63e1590620aa636276a067cbe9d8997f761aecb703304b3800ccf555c9f3dc6421"
            "4b297fb1966a3b6d83");
  EXPECT_EQ(recover_signer(stx), addr_of(key));
}

TEST(Transaction, RawRoundTrip) {
  const auto stx = sign_tx(eip155_tx(), keccak256("key"), 1);
  const auto back = decode_raw(encode_raw(stx));
  EXPECT_EQ(back, stx);
  EXPECT_EQ(tx_hash(back), tx_hash(stx));
}

TEST(Transaction, ChainIdsGiveDistinctSignatures) {
  auto tx1 = eip155_tx();
  auto tx2 = eip155_tx();
  tx2.chain_id = 2;
  const auto s1 = sign_tx(tx1, keccak256("key"), 1);
  const auto s2 = sign_tx(tx2, keccak256("key"), 2);
  EXPECT_NE(s1.r, s2.r);
  EXPECT_EQ(s2.v - 35 - (s2.v - 35) % 2, 4u);
  EXPECT_THROW(sign_tx(tx1, keccak256("key"), 2), std::invalid_argument);
}

TEST(Transaction, TamperedValueChangesSigner) {
  auto stx = sign_tx(eip155_tx(), keccak256("key"), 1);
  const Address signer = recover_signer(stx);
  stx.tx.value += 1;
  Address other;
  try {
    other = recover_signer(stx);
  } catch (const secp256k1::SignatureError&) {
    return;  // also acceptable: no point recovers
  }
  EXPECT_NE(other, signer);
}

TEST(Transaction, LegacyVRejected) {
  auto stx = sign_tx(eip155_tx(), keccak256("key"), 1);
  stx.v = 27;
  EXPECT_THROW(recover_signer(stx), secp256k1::SignatureError);
  EXPECT_THROW(decode_raw(encode_raw(stx)), TxDecodeError);
}

TEST(Transaction, AssetTransferData) {
  const Bytes d = asset_transfer_data(42);
  EXPECT_EQ(d.size(), 36u);
  EXPECT_EQ(parse_asset_transfer(d), 42u);
  EXPECT_FALSE(parse_asset_transfer(Bytes{}).has_value());
  Bytes wrong = d;
  wrong[0] ^= 1;
  EXPECT_FALSE(parse_asset_transfer(wrong).has_value());
}

TEST(TransactionProperty, RandomPairsRecover) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    Hash32 key;
    for (auto& x : key) x = static_cast<std::uint8_t>(rng());
    if (!secp256k1::is_valid_secret(key)) continue;
    UnsignedTx tx;
    tx.nonce = rng() % 1000;
    tx.gas_price = rng() % 100;
    tx.value = rng();
    tx.to = Address::from_bytes(Bytes(20, static_cast<std::uint8_t>(i)));
    tx.chain_id = 1 + rng() % 5;
    tx.data = Bytes(rng() % 40, 0xab);
    const auto stx = sign_tx(tx, key, tx.chain_id);
    ASSERT_EQ(recover_signer(stx), addr_of(key));
    ASSERT_EQ(decode_raw(encode_raw(stx)), stx);
  }
}

}  // namespace
}  // namespace sealbid
