#include "sealbid/enclave.hpp"

#include <sodium.h>

#include <cstring>

#include "sealbid/keccak.hpp"

namespace sealbid::enclave {

namespace {

void ensure_sodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw EnclaveError("libsodium initialisation failed");
    return true;
  }();
  (void)ready;
}

const Hash32& attestation_secret() {
  static const Hash32 secret = keccak256(std::string_view("sealbid/attestation-key/v1"));
  return secret;
}

Hash32 report_digest(const Hash32& code_hash, const Hash32& output_digest) {
  Bytes msg(code_hash.begin(), code_hash.end());
  msg.insert(msg.end(), output_digest.begin(), output_digest.end());
  return keccak256(msg);
}

}  // namespace

EncryptionKeyPair EncryptionKeyPair::from_seed(const Hash32& seed) {
  ensure_sodium();
  EncryptionKeyPair kp;
  crypto_box_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

std::string Envelope::serialize() const {
  return to_hex(recipient) + to_hex(ephemeral, false) + to_hex(ciphertext, false);
}

Envelope Envelope::parse(std::string_view text) {
  Bytes raw = from_hex(text);
  if (raw.size() < 64 + crypto_box_NONCEBYTES + crypto_box_MACBYTES) throw EnvelopeError("envelope too short");
  Envelope e;
  std::copy(raw.begin(), raw.begin() + 32, e.recipient.begin());
  std::copy(raw.begin() + 32, raw.begin() + 64, e.ephemeral.begin());
  e.ciphertext.assign(raw.begin() + 64, raw.end());
  return e;
}

Envelope seal_envelope(const EncryptionPublicKey& recipient, ByteView plaintext, const Hash32& ephemeral_seed,
                       const std::array<std::uint8_t, 24>& nonce) {
  ensure_sodium();
  EncryptionKeyPair eph = EncryptionKeyPair::from_seed(ephemeral_seed);
  Envelope env;
  env.recipient = recipient;
  env.ephemeral = eph.public_key;
  env.ciphertext.resize(crypto_box_NONCEBYTES + crypto_box_MACBYTES + plaintext.size());
  std::memcpy(env.ciphertext.data(), nonce.data(), nonce.size());
  if (crypto_box_easy(env.ciphertext.data() + crypto_box_NONCEBYTES, plaintext.data(), plaintext.size(), nonce.data(),
                      recipient.data(), eph.secret_key.data()) != 0) {
    sodium_memzero(eph.secret_key.data(), eph.secret_key.size());
    throw EnvelopeError("malformed recipient key");
  }
  sodium_memzero(eph.secret_key.data(), eph.secret_key.size());
  return env;
}

Bytes decrypt_envelope(const EncryptionKeyPair& recipient, const Envelope& envelope) {
  ensure_sodium();
  if (envelope.ciphertext.size() < crypto_box_NONCEBYTES + crypto_box_MACBYTES) {
    throw EnvelopeError("ciphertext too short");
  }
  const std::size_t box_len = envelope.ciphertext.size() - crypto_box_NONCEBYTES;
  Bytes plain(box_len - crypto_box_MACBYTES);
  if (crypto_box_open_easy(plain.data(), envelope.ciphertext.data() + crypto_box_NONCEBYTES, box_len,
                           envelope.ciphertext.data(), envelope.ephemeral.data(), recipient.secret_key.data()) != 0) {
    throw EnvelopeError("envelope authentication failed");
  }
  return plain;
}

Address attestation_signer() {
  static const Address addr = derive_address(secp256k1::derive_public_key(attestation_secret()));
  return addr;
}

bool verify_attestation(const AttestationReport& report, const Hash32& expected_code_hash, ByteView payload) {
  if (report.code_hash != expected_code_hash) return false;
  if (report.output_digest != keccak256(payload)) return false;
  try {
    auto key = secp256k1::recover(report_digest(report.code_hash, report.output_digest), report.signature);
    return derive_address(key) == attestation_signer();
  } catch (const std::exception&) {
    return false;
  }
}

Enclave::Enclave(Mode mode, std::uint64_t seed, const Hash32& code_hash) : mode_(mode), code_hash_(code_hash) {
  ensure_sodium();
  if (mode_ == Mode::test) {
    Bytes material = to_bytes("sealbid/enclave-rng/v1");
    Hash32 seed_word = be_word(seed);
    material.insert(material.end(), seed_word.begin(), seed_word.end());
    stream_key_ = keccak256(material);
  }
  fill_random(seal_key_.data(), seal_key_.size());
  Hash32 input_seed;
  fill_random(input_seed.data(), input_seed.size());
  input_keys_ = EncryptionKeyPair::from_seed(input_seed);
}

Enclave Enclave::create_test(std::uint64_t seed, const Hash32& code_hash) { return Enclave(Mode::test, seed, code_hash); }

Enclave Enclave::create_production(const Hash32& code_hash) { return Enclave(Mode::production, 0, code_hash); }

void Enclave::fill_random(std::uint8_t* out, std::size_t n) {
  if (mode_ == Mode::production) {
    randombytes_buf(out, n);
    return;
  }
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> kNonce{};
  static constexpr std::array<std::uint8_t, 64> kZero{};
  while (n > 0) {
    if (stream_pos_ == stream_buf_.size()) {
      crypto_stream_chacha20_ietf_xor_ic(stream_buf_.data(), kZero.data(), kZero.size(), kNonce.data(),
                                         stream_block_++, stream_key_.data());
      stream_pos_ = 0;
    }
    std::size_t take = std::min(n, stream_buf_.size() - stream_pos_);
    std::memcpy(out, stream_buf_.data() + stream_pos_, take);
    stream_pos_ += take;
    out += take;
    n -= take;
  }
}

Bytes Enclave::random(std::size_t n) {
  Bytes out(n);
  if (n != 0) fill_random(out.data(), n);
  return out;
}

std::uint64_t Enclave::random_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("random_below: zero bound");
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = 0;
    fill_random(reinterpret_cast<std::uint8_t*>(&v), sizeof v);
    if (v < limit) return v % bound;
  }
}

std::pair<KeyHandle, Address> Enclave::generate_keypair() {
  Hash32 secret;
  do {
    fill_random(secret.data(), secret.size());
  } while (!secp256k1::is_valid_secret(secret));
  KeyHandle handle{next_handle_++};
  key_registry_.emplace(handle.id, secret);
  return {handle, derive_address(secp256k1::derive_public_key(secret))};
}

Address Enclave::address_of(KeyHandle handle) const {
  auto it = key_registry_.find(handle.id);
  if (it == key_registry_.end()) throw EnclaveError("unknown key handle");
  return derive_address(secp256k1::derive_public_key(it->second));
}

SignedTransaction Enclave::sign_with(KeyHandle handle, const UnsignedTx& tx) const {
  auto it = key_registry_.find(handle.id);
  if (it == key_registry_.end()) throw EnclaveError("unknown key handle");
  return sign_tx(tx, it->second, tx.chain_id);
}

Hash32 Enclave::entry_mac(std::string_view label, std::uint64_t version, ByteView value) const {
  Hash32 out;
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, seal_key_.data(), seal_key_.size());
  Hash32 len_word = be_word(label.size());
  Hash32 version_word = be_word(version);
  crypto_auth_hmacsha256_update(&st, len_word.data(), len_word.size());
  crypto_auth_hmacsha256_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  crypto_auth_hmacsha256_update(&st, version_word.data(), version_word.size());
  crypto_auth_hmacsha256_update(&st, value.data(), value.size());
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

void Enclave::seal_put(std::string_view label, ByteView value) {
  auto vit = versions_.find(label);
  std::uint64_t version = vit == versions_.end() ? 1 : vit->second + 1;
  versions_[std::string(label)] = version;
  sealed_[std::string(label)] = SealedEntry{Bytes(value.begin(), value.end()), version, entry_mac(label, version, value)};
}

Bytes Enclave::seal_get(std::string_view label) const {
  auto it = sealed_.find(label);
  if (it == sealed_.end()) throw MissingEntryError("no sealed entry '" + std::string(label) + "'");
  const SealedEntry& e = it->second;
  if (e.mac != entry_mac(label, e.version, e.value)) {
    throw IntegrityError("sealed entry '" + std::string(label) + "' failed integrity check");
  }
  auto vit = versions_.find(label);
  if (vit != versions_.end() && e.version < vit->second) {
    throw RollbackError("sealed entry '" + std::string(label) + "' is a stale snapshot");
  }
  return e.value;
}

bool Enclave::seal_contains(std::string_view label) const { return sealed_.find(label) != sealed_.end(); }

Bytes Enclave::decrypt_input(const Envelope& envelope) const { return decrypt_envelope(input_keys_, envelope); }

Envelope Enclave::encrypt_to(const EncryptionPublicKey& recipient, ByteView plaintext) {
  Hash32 eph_seed{};
  std::array<std::uint8_t, 24> nonce{};
  fill_random(eph_seed.data(), eph_seed.size());
  fill_random(nonce.data(), nonce.size());
  Envelope env = seal_envelope(recipient, plaintext, eph_seed, nonce);
  sodium_memzero(eph_seed.data(), eph_seed.size());
  return env;
}

AttestationReport Enclave::attest(ByteView payload) const {
  AttestationReport report;
  report.code_hash = code_hash_;
  report.output_digest = keccak256(payload);
  report.signature = secp256k1::sign(report_digest(report.code_hash, report.output_digest), attestation_secret());
  return report;
}

CompromiseExport Enclave::compromise() {
  if (mode_ == Mode::production) throw CompromiseRefused("compromise injection is refused in production mode");
  compromised_ = true;
  CompromiseExport out;
  for (const auto& [id, secret] : key_registry_) {
    out.keys.emplace_back(derive_address(secp256k1::derive_public_key(secret)), secret);
  }
  for (const auto& [label, entry] : sealed_) out.sealed.emplace(label, entry.value);
  return out;
}

void Enclave::inject_tamper(std::string_view label) {
  auto it = sealed_.find(label);
  if (it == sealed_.end()) throw MissingEntryError("no sealed entry '" + std::string(label) + "'");
  if (it->second.value.empty()) {
    it->second.value.push_back(0x01);
  } else {
    it->second.value[0] ^= 0x01;
  }
}

SealedEntry Enclave::snapshot_entry(std::string_view label) const {
  auto it = sealed_.find(label);
  if (it == sealed_.end()) throw MissingEntryError("no sealed entry '" + std::string(label) + "'");
  return it->second;
}

void Enclave::inject_entry(std::string_view label, SealedEntry entry) { sealed_[std::string(label)] = std::move(entry); }

}  // namespace sealbid::enclave
