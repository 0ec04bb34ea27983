#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sealbid/bytes.hpp"
#include "sealbid/secp256k1.hpp"
#include "sealbid/transaction.hpp"

namespace sealbid::enclave {

class EnclaveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class MissingEntryError : public EnclaveError {
 public:
  using EnclaveError::EnclaveError;
};
class IntegrityError : public EnclaveError {
 public:
  using EnclaveError::EnclaveError;
};
class RollbackError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};
class CompromiseRefused : public EnclaveError {
 public:
  using EnclaveError::EnclaveError;
};
/// Malformed key or failed authentication while opening an envelope.
class EnvelopeError : public EnclaveError {
 public:
  using EnclaveError::EnclaveError;
};

enum class Mode { test, production };

struct KeyHandle {
  std::uint64_t id = 0;
  auto operator<=>(const KeyHandle&) const = default;
};

// Envelope suite: X25519 key agreement + XSalsa20-Poly1305 (libsodium crypto_box),
// the same construction wallets expose as x25519-xsalsa20-poly1305.
inline constexpr std::string_view kEnvelopeSuite = "x25519-xsalsa20-poly1305";

using EncryptionPublicKey = std::array<std::uint8_t, 32>;

struct EncryptionKeyPair {
  EncryptionPublicKey public_key{};
  std::array<std::uint8_t, 32> secret_key{};

  static EncryptionKeyPair from_seed(const Hash32& seed);
};

struct Envelope {
  EncryptionPublicKey recipient{};
  EncryptionPublicKey ephemeral{};
  Bytes ciphertext;  // 24-byte nonce ‖ authenticated box

  /// hex(recipient) ‖ hex(ephemeral) ‖ hex(ciphertext), one `0x` prefix.
  std::string serialize() const;
  static Envelope parse(std::string_view text);

  bool operator==(const Envelope&) const = default;
};

/// Encrypts under a caller-provided ephemeral seed and nonce. Bidders use this
/// to build encrypted requests; the enclave draws both from its own RNG.
Envelope seal_envelope(const EncryptionPublicKey& recipient, ByteView plaintext, const Hash32& ephemeral_seed,
                       const std::array<std::uint8_t, 24>& nonce);

/// Throws EnvelopeError if the key does not match or the ciphertext was altered.
Bytes decrypt_envelope(const EncryptionKeyPair& recipient, const Envelope& envelope);

struct AttestationReport {
  Hash32 code_hash{};
  Hash32 output_digest{};
  secp256k1::RecoverableSignature signature;
};

/// Address of the static attestation key that signs every report.
Address attestation_signer();

bool verify_attestation(const AttestationReport& report, const Hash32& expected_code_hash, ByteView payload);

/// Raw sealed-store record as seen from outside the enclave boundary.
struct SealedEntry {
  Bytes value;
  std::uint64_t version = 0;
  Hash32 mac{};
};

struct CompromiseExport {
  std::vector<std::pair<Address, Hash32>> keys;
  std::map<std::string, Bytes> sealed;
};

/// Deterministic emulation of a confidential execution environment. One
/// instance is single-threaded; distinct instances are independent.
class Enclave {
 public:
  static Enclave create_test(std::uint64_t seed, const Hash32& code_hash);
  static Enclave create_production(const Hash32& code_hash);

  Mode mode() const { return mode_; }
  const Hash32& code_hash() const { return code_hash_; }

  std::pair<KeyHandle, Address> generate_keypair();
  Address address_of(KeyHandle handle) const;
  SignedTransaction sign_with(KeyHandle handle, const UnsignedTx& tx) const;

  void seal_put(std::string_view label, ByteView value);
  Bytes seal_get(std::string_view label) const;
  bool seal_contains(std::string_view label) const;

  Bytes random(std::size_t n);
  /// Uniform in [0, bound) by rejection sampling. bound must be non-zero.
  std::uint64_t random_below(std::uint64_t bound);

  /// Key bidders encrypt their inputs to.
  const EncryptionPublicKey& input_public_key() const { return input_keys_.public_key; }
  Bytes decrypt_input(const Envelope& envelope) const;

  Envelope encrypt_to(const EncryptionPublicKey& recipient, ByteView plaintext);

  AttestationReport attest(ByteView payload) const;

  /// Full breach: exports every signing key and the sealed store. Test mode only.
  CompromiseExport compromise();
  bool compromised() const { return compromised_; }

  // Harness fault injection on the untrusted storage backing the sealed store.
  void inject_tamper(std::string_view label);
  SealedEntry snapshot_entry(std::string_view label) const;
  void inject_entry(std::string_view label, SealedEntry entry);

 private:
  Enclave(Mode mode, std::uint64_t seed, const Hash32& code_hash);

  void fill_random(std::uint8_t* out, std::size_t n);
  Hash32 entry_mac(std::string_view label, std::uint64_t version, ByteView value) const;

  Mode mode_;
  Hash32 code_hash_;
  bool compromised_ = false;

  // test-mode ChaCha20 stream
  std::array<std::uint8_t, 32> stream_key_{};
  std::uint32_t stream_block_ = 0;
  std::array<std::uint8_t, 64> stream_buf_{};
  std::size_t stream_pos_ = 64;

  std::array<std::uint8_t, 32> seal_key_{};
  EncryptionKeyPair input_keys_;
  std::map<std::uint64_t, Hash32> key_registry_;
  std::uint64_t next_handle_ = 1;
  std::map<std::string, SealedEntry, std::less<>> sealed_;
  std::map<std::string, std::uint64_t, std::less<>> versions_;
};

}  // namespace sealbid::enclave
