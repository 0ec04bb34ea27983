#include <random>

#include <gtest/gtest.h>

#include "rlp_reference.hpp"
#include "sealbid/keccak.hpp"
#include "sealbid/rlp.hpp"

namespace sealbid {
namespace {

std::string hex_of(ByteView b) { return to_hex(b, false); }

TEST(Hex, RoundTripAndPrefix) {
  const Bytes b = {0x00, 0xab, 0xff};
  EXPECT_EQ(to_hex(b), "0x00abff");
  EXPECT_EQ(to_hex(b, false), "00abff");
  EXPECT_EQ(from_hex("0x00ABff"), b);
  EXPECT_EQ(from_hex("00abff"), b);
  EXPECT_TRUE(from_hex("0x").empty());
}

TEST(Hex, RejectsMalformed) {
  EXPECT_THROW(from_hex("0xabc"), HexError);
  EXPECT_THROW(from_hex("zz"), HexError);
  EXPECT_THROW(Address::from_hex("0x1234"), HexError);
}

TEST(BigEndian, MinimalEncoding) {
  EXPECT_TRUE(be_bytes(0).empty());
  EXPECT_EQ(be_bytes(1), Bytes{1});
  EXPECT_EQ(be_bytes(0x0400), (Bytes{0x04, 0x00}));
  const Hash32 w = be_word(0x0102);
  EXPECT_EQ(w[30], 0x01);
  EXPECT_EQ(w[31], 0x02);
  EXPECT_EQ(w[0], 0);
}

TEST(Keccak, KnownDigests) {
  EXPECT_EQ(hex_of(keccak256("")), "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
  EXPECT_EQ(hex_of(keccak256("abc")), "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Keccak, NotSha3Padding) {
  // FIPS SHA3-256("") starts a7ffc6f8
  EXPECT_NE(hex_of(keccak256("")).substr(0, 8), "a7ffc6f8");
}

TEST(Keccak, MultiBlockInput) {
  // crosses the 136-byte rate several times
  const std::string long_input(1000, 'a');
  const auto a = keccak256(long_input);
  const auto b = keccak256(std::string(1000, 'a'));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, keccak256(std::string(999, 'a')));
  // rate boundary lengths
  EXPECT_NE(keccak256(std::string(135, 'x')), keccak256(std::string(136, 'x')));
  EXPECT_NE(keccak256(std::string(136, 'x')), keccak256(std::string(137, 'x')));
}

using rlp::Item;

std::string enc(const Item& i) { return hex_of(rlp::encode(i)); }

TEST(Rlp, BaseCases) {
  EXPECT_EQ(enc(Item(Bytes{})), "80");
  EXPECT_EQ(enc(Item(Bytes{0x05})), "05");
  EXPECT_EQ(enc(Item(Bytes{0x80})), "8180");
  EXPECT_EQ(enc(Item(Item::List{})), "c0");
}

TEST(Rlp, ListWithEmptyString) { EXPECT_EQ(enc(Item(Item::List{Item(Bytes{0x05}), Item(Bytes{})})), "c20580"); }

TEST(Rlp, StandardVectors) {
  EXPECT_EQ(enc(Item(to_bytes("dog"))), "83646f67");
  EXPECT_EQ(enc(Item(Item::List{Item(to_bytes("cat")), Item(to_bytes("dog"))})), "c88363617483646f67");
  EXPECT_EQ(enc(Item::uint(0)), "80");
  EXPECT_EQ(enc(Item::uint(15)), "0f");
  EXPECT_EQ(enc(Item::uint(1024)), "820400");
  // set-theoretic representation of three
  const Item e(Item::List{});
  const Item one(Item::List{e});
  const Item two(Item::List{e, one});
  EXPECT_EQ(enc(Item(Item::List{e, one, two})), "c7c0c1c0c3c0c1c0");
}

TEST(Rlp, LongString) {
  const std::string lorem = "Lorem ipsum dolor sit amet, consectetur adipisicing elit";
  EXPECT_EQ(enc(Item(to_bytes(lorem))), "b838" + hex_of(as_view(lorem)));
}

TEST(Rlp, DecodeEmpty) { EXPECT_EQ(rlp::decode(from_hex("80")), Item(Bytes{})); }

TEST(Rlp, DecodeRejectsMalformed) {
  for (const char* bad : {
           "c205",        // truncated list
           "",            // nothing
           "8105",        // single byte below 0x80 must self-encode
           "b80100",      // long form for a short string
           "b90001aa",    // length with a leading zero
           "83646f",      // truncated string
           "0505",        // trailing bytes
           "f800",        // long-form list for a short payload
           "c3820400ff",  // trailing byte after list
       }) {
    EXPECT_THROW(rlp::decode(from_hex(bad)), rlp::DecodeError) << bad;
  }
}

TEST(Rlp, AsUintRejectsLeadingZero) {
  EXPECT_EQ(Item(Bytes{0x04, 0x00}).as_uint(), 1024u);
  EXPECT_THROW(Item(Bytes{0x00, 0x01}).as_uint(), rlp::DecodeError);
  EXPECT_THROW(Item(Bytes(9, 0x01)).as_uint(), rlp::DecodeError);
}

using testing::random_item;
using testing::ref_encode;

TEST(RlpProperty, RoundTripAgainstReference) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Item item = random_item(rng);
    const Bytes e = rlp::encode(item);
    ASSERT_EQ(e, ref_encode(item)) << "item " << i;
    ASSERT_EQ(rlp::decode(e), item) << "item " << i;
  }
}

TEST(RlpProperty, TruncationAlwaysRejected) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const Bytes e = rlp::encode(random_item(rng));
    if (e.size() < 2) continue;
    const Bytes cut(e.begin(), e.end() - 1);
    EXPECT_THROW(rlp::decode(cut), rlp::DecodeError);
  }
}

}  // namespace
}  // namespace sealbid
