#pragma once

#include <array>
#include <stdexcept>

#include "sealbid/bytes.hpp"

namespace sealbid::secp256k1 {

class KeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uncompressed point without the 0x04 tag: x ‖ y, both 32-byte big-endian.
struct PublicKey {
  std::array<std::uint8_t, 64> xy{};
  bool operator==(const PublicKey&) const = default;
};

struct RecoverableSignature {
  Hash32 r{};
  Hash32 s{};
  std::uint8_t recovery_id = 0;  // bit 0: R.y parity, bit 1: R.x overflowed the group order
};

/// 1 <= secret < n.
bool is_valid_secret(const Hash32& secret);

/// Throws KeyError for an out-of-range secret.
PublicKey derive_public_key(const Hash32& secret);

bool is_on_curve(const PublicKey& key);

/// Deterministic (RFC 6979, HMAC-SHA256) ECDSA over a 32-byte digest, normalised to low-s.
RecoverableSignature sign(const Hash32& digest, const Hash32& secret);

/// Throws SignatureError for out-of-range r/s, high-s, a bad recovery id or an
/// unrecoverable point.
PublicKey recover(const Hash32& digest, const RecoverableSignature& sig);

}  // namespace sealbid::secp256k1
