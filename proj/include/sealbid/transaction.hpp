#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "sealbid/bytes.hpp"
#include "sealbid/rlp.hpp"
#include "sealbid/secp256k1.hpp"

namespace sealbid {

/// Legacy settlement transaction body. `chain_id` is folded into `v` on signing.
struct UnsignedTx {
  std::uint64_t nonce = 0;
  std::uint64_t gas_price = 0;
  std::uint64_t gas_limit = 21'000;
  Address to;
  Amount value = 0;
  Bytes data;
  std::uint64_t chain_id = 1;

  bool operator==(const UnsignedTx&) const = default;
};

struct SignedTransaction {
  UnsignedTx tx;
  std::uint64_t v = 0;  // chain_id * 2 + 35 + parity
  Hash32 r{};
  Hash32 s{};

  bool operator==(const SignedTransaction&) const = default;
};

class TxDecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Last 20 bytes of keccak256(x ‖ y). Throws secp256k1::KeyError for off-curve points.
Address derive_address(const secp256k1::PublicKey& key);

/// keccak256 of rlp([nonce, gas_price, gas_limit, to, value, data, chain_id, 0, 0]).
Hash32 signing_hash(const UnsignedTx& tx);

/// Requires tx.chain_id == chain_id (std::invalid_argument otherwise).
SignedTransaction sign_tx(const UnsignedTx& tx, const Hash32& secret, std::uint64_t chain_id);

/// Throws secp256k1::SignatureError when v does not carry a replay-protected
/// recovery id or the signature is malformed / high-s.
Address recover_signer(const SignedTransaction& stx);

Bytes encode_raw(const SignedTransaction& stx);

/// Inverse of encode_raw. chain_id is recovered from v; pre-replay-protection v (27/28) is rejected.
SignedTransaction decode_raw(ByteView raw);

/// keccak256 of the raw encoding.
Hash32 tx_hash(const SignedTransaction& stx);

inline std::string raw_hex(const SignedTransaction& stx) { return to_hex(encode_raw(stx)); }

// Asset transfers are plain transactions whose data is the ERC-721
// safeTransferFrom selector followed by the 32-byte token id; `to` is the new owner.
inline constexpr std::array<std::uint8_t, 4> kAssetTransferSelector = {0x42, 0x84, 0x2e, 0x0e};

Bytes asset_transfer_data(std::uint64_t token_id);

/// Token id if `data` is an asset transfer call, nullopt otherwise.
std::optional<std::uint64_t> parse_asset_transfer(ByteView data);

}  // namespace sealbid
