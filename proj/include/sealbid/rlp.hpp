#pragma once

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sealbid/bytes.hpp"

namespace sealbid::rlp {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An RLP item: either a byte string or a list of items.
struct Item {
  using List = std::vector<Item>;
  std::variant<Bytes, List> value;

  Item() : value(Bytes{}) {}
  Item(Bytes b) : value(std::move(b)) {}  // NOLINT(google-explicit-constructor)
  Item(List l) : value(std::move(l)) {}   // NOLINT(google-explicit-constructor)

  static Item uint(std::uint64_t v) { return Item(be_bytes(v)); }
  static Item bytes(ByteView v) { return Item(Bytes(v.begin(), v.end())); }

  bool is_list() const { return std::holds_alternative<List>(value); }
  const Bytes& as_bytes() const;
  const List& as_list() const;

  /// Interprets a byte-string item as a canonical big-endian integer.
  /// Throws DecodeError on leading zeros or more than 8 bytes.
  std::uint64_t as_uint() const;

  bool operator==(const Item&) const = default;
};

Bytes encode(const Item& item);

/// Decodes exactly one item spanning all of `data`. Rejects truncation, trailing
/// bytes and every non-canonical length form.
Item decode(ByteView data);

}  // namespace sealbid::rlp
