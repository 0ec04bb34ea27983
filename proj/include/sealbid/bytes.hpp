#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sealbid {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;

/// Settlement-layer value in the smallest indivisible unit. No decimals.
using Amount = std::uint64_t;

class HexError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Lower-case hex, `0x` prefixed unless `prefix` is false.
std::string to_hex(ByteView data, bool prefix = true);

/// Accepts an optional `0x` prefix. Throws HexError on odd length or bad digits.
Bytes from_hex(std::string_view text);

inline ByteView as_view(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view text) {
  Bytes raw = from_hex(text);
  if (raw.size() != N) {
    throw HexError("expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
  }
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

/// Minimal big-endian encoding; zero encodes as the empty string.
Bytes be_bytes(std::uint64_t value);

/// Big-endian left-padded to 32 bytes.
Hash32 be_word(std::uint64_t value);

/// 20-byte settlement-layer account identifier.
class Address {
 public:
  static constexpr std::size_t kSize = 20;

  constexpr Address() = default;
  explicit constexpr Address(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

  static Address from_hex(std::string_view text) { return Address(fixed_from_hex<kSize>(text)); }
  static Address from_bytes(ByteView bytes);

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  ByteView view() const { return bytes_; }
  std::string hex() const { return to_hex(bytes_); }
  bool is_zero() const;

  auto operator<=>(const Address&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

/// True if `needle` occurs anywhere in `haystack` as a contiguous byte run.
bool contains_bytes(ByteView haystack, ByteView needle);

}  // namespace sealbid

template <>
struct std::hash<sealbid::Address> {
  std::size_t operator()(const sealbid::Address& a) const noexcept {
    std::size_t h = 0;
    for (auto b : a.bytes()) h = h * 131 + b;
    return h;
  }
};
