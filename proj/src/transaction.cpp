#include "sealbid/transaction.hpp"

#include <algorithm>

#include "sealbid/keccak.hpp"

namespace sealbid {

namespace {

Bytes strip_zeros(const Hash32& word) {
  auto first = std::find_if(word.begin(), word.end(), [](auto b) { return b != 0; });
  return Bytes(first, word.end());
}

Hash32 word_from(const Bytes& b) {
  if (b.size() > 32) throw TxDecodeError("signature component wider than 32 bytes");
  if (!b.empty() && b.front() == 0) throw TxDecodeError("signature component has leading zero");
  Hash32 out{};
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(32 - b.size()));
  return out;
}

rlp::Item::List body_items(const UnsignedTx& tx) {
  return {rlp::Item::uint(tx.nonce),  rlp::Item::uint(tx.gas_price), rlp::Item::uint(tx.gas_limit),
          rlp::Item::bytes(tx.to.view()), rlp::Item::uint(tx.value), rlp::Item(tx.data)};
}

}  // namespace

Address derive_address(const secp256k1::PublicKey& key) {
  if (!secp256k1::is_on_curve(key)) throw secp256k1::KeyError("public key is not on secp256k1");
  Hash32 h = keccak256(ByteView(key.xy));
  std::array<std::uint8_t, Address::kSize> raw{};
  std::copy(h.begin() + 12, h.end(), raw.begin());
  return Address(raw);
}

Hash32 signing_hash(const UnsignedTx& tx) {
  rlp::Item::List items = body_items(tx);
  items.push_back(rlp::Item::uint(tx.chain_id));
  items.push_back(rlp::Item::uint(0));
  items.push_back(rlp::Item::uint(0));
  return keccak256(rlp::encode(rlp::Item(std::move(items))));
}

SignedTransaction sign_tx(const UnsignedTx& tx, const Hash32& secret, std::uint64_t chain_id) {
  if (tx.chain_id != chain_id) throw std::invalid_argument("transaction chain_id does not match signing chain_id");
  auto sig = secp256k1::sign(signing_hash(tx), secret);
  SignedTransaction out;
  out.tx = tx;
  out.v = chain_id * 2 + 35 + (sig.recovery_id & 1);
  out.r = sig.r;
  out.s = sig.s;
  return out;
}

Address recover_signer(const SignedTransaction& stx) {
  const std::uint64_t base = stx.tx.chain_id * 2 + 35;
  if (stx.v != base && stx.v != base + 1) throw secp256k1::SignatureError("v does not encode the chain id");
  secp256k1::RecoverableSignature sig{stx.r, stx.s, static_cast<std::uint8_t>(stx.v - base)};
  return derive_address(secp256k1::recover(signing_hash(stx.tx), sig));
}

Bytes encode_raw(const SignedTransaction& stx) {
  rlp::Item::List items = body_items(stx.tx);
  items.push_back(rlp::Item::uint(stx.v));
  items.push_back(rlp::Item(strip_zeros(stx.r)));
  items.push_back(rlp::Item(strip_zeros(stx.s)));
  return rlp::encode(rlp::Item(std::move(items)));
}

SignedTransaction decode_raw(ByteView raw) {
  rlp::Item item;
  try {
    item = rlp::decode(raw);
  } catch (const rlp::DecodeError& e) {
    throw TxDecodeError(std::string("malformed RLP: ") + e.what());
  }
  try {
    const auto& f = item.as_list();
    if (f.size() != 9) throw TxDecodeError("legacy transaction must have 9 fields");
    SignedTransaction stx;
    stx.tx.nonce = f[0].as_uint();
    stx.tx.gas_price = f[1].as_uint();
    stx.tx.gas_limit = f[2].as_uint();
    stx.tx.to = Address::from_bytes(f[3].as_bytes());
    stx.tx.value = f[4].as_uint();
    stx.tx.data = f[5].as_bytes();
    stx.v = f[6].as_uint();
    if (stx.v < 37) throw TxDecodeError("transaction lacks replay protection (v < 37)");
    stx.tx.chain_id = (stx.v - 35) / 2;
    stx.r = word_from(f[7].as_bytes());
    stx.s = word_from(f[8].as_bytes());
    return stx;
  } catch (const rlp::DecodeError& e) {
    throw TxDecodeError(e.what());
  } catch (const HexError& e) {
    throw TxDecodeError(e.what());
  }
}

Hash32 tx_hash(const SignedTransaction& stx) { return keccak256(encode_raw(stx)); }

Bytes asset_transfer_data(std::uint64_t token_id) {
  Bytes out(kAssetTransferSelector.begin(), kAssetTransferSelector.end());
  Hash32 word = be_word(token_id);
  out.insert(out.end(), word.begin(), word.end());
  return out;
}

std::optional<std::uint64_t> parse_asset_transfer(ByteView data) {
  if (data.size() != 36 || !std::equal(kAssetTransferSelector.begin(), kAssetTransferSelector.end(), data.begin())) {
    return std::nullopt;
  }
  for (std::size_t i = 4; i < 28; ++i) {
    if (data[i] != 0) return std::nullopt;
  }
  std::uint64_t id = 0;
  for (std::size_t i = 28; i < 36; ++i) id = (id << 8) | data[i];
  return id;
}

}  // namespace sealbid
