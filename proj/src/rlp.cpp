#include "sealbid/rlp.hpp"

namespace sealbid::rlp {

const Bytes& Item::as_bytes() const {
  if (const auto* b = std::get_if<Bytes>(&value)) return *b;
  throw DecodeError("expected byte string, found list");
}

const Item::List& Item::as_list() const {
  if (const auto* l = std::get_if<List>(&value)) return *l;
  throw DecodeError("expected list, found byte string");
}

std::uint64_t Item::as_uint() const {
  const Bytes& b = as_bytes();
  if (b.size() > 8) throw DecodeError("integer wider than 64 bits");
  if (!b.empty() && b.front() == 0) throw DecodeError("integer has leading zero byte");
  std::uint64_t v = 0;
  for (auto byte : b) v = (v << 8) | byte;
  return v;
}

namespace {

void put_length(Bytes& out, std::size_t len, std::uint8_t short_base, std::uint8_t long_base) {
  if (len < 56) {
    out.push_back(static_cast<std::uint8_t>(short_base + len));
    return;
  }
  Bytes len_bytes = be_bytes(len);
  out.push_back(static_cast<std::uint8_t>(long_base + len_bytes.size()));
  out.insert(out.end(), len_bytes.begin(), len_bytes.end());
}

void encode_into(Bytes& out, const Item& item) {
  if (const auto* b = std::get_if<Bytes>(&item.value)) {
    if (b->size() == 1 && (*b)[0] < 0x80) {
      out.push_back((*b)[0]);
      return;
    }
    put_length(out, b->size(), 0x80, 0xb7);
    out.insert(out.end(), b->begin(), b->end());
    return;
  }
  Bytes payload;
  for (const auto& child : std::get<Item::List>(item.value)) encode_into(payload, child);
  put_length(out, payload.size(), 0xc0, 0xf7);
  out.insert(out.end(), payload.begin(), payload.end());
}

struct Header {
  bool list = false;
  std::size_t header_len = 0;
  std::size_t payload_len = 0;
};

Header read_header(ByteView in) {
  if (in.empty()) throw DecodeError("truncated input: missing prefix");
  const std::uint8_t p = in[0];
  if (p < 0x80) return {false, 0, 1};
  if (p <= 0xb7) {
    std::size_t len = p - 0x80;
    if (len == 1) {
      if (in.size() < 2) throw DecodeError("truncated input");
      if (in[1] < 0x80) throw DecodeError("non-canonical single byte encoding");
    }
    return {false, 1, len};
  }
  if (p <= 0xbf || (p >= 0xf8)) {
    const bool list = p >= 0xf8;
    const std::size_t len_of_len = p - (list ? 0xf7 : 0xb7);
    if (in.size() < 1 + len_of_len) throw DecodeError("truncated input: length bytes");
    if (in[1] == 0) throw DecodeError("non-minimal length prefix (leading zero)");
    if (len_of_len > 8) throw DecodeError("length prefix too wide");
    std::size_t len = 0;
    for (std::size_t i = 0; i < len_of_len; ++i) len = (len << 8) | in[1 + i];
    if (len < 56) throw DecodeError("non-minimal length prefix (long form for short payload)");
    return {list, 1 + len_of_len, len};
  }
  return {true, 1, static_cast<std::size_t>(p - 0xc0)};
}

Item decode_one(ByteView in, std::size_t& consumed) {
  Header h = read_header(in);
  if (in.size() - h.header_len < h.payload_len) throw DecodeError("truncated input: payload");
  consumed = h.header_len + h.payload_len;
  if (!h.list) {
    auto start = in.begin() + static_cast<std::ptrdiff_t>(h.header_len);
    return Item(Bytes(start, start + static_cast<std::ptrdiff_t>(h.payload_len)));
  }
  Item::List children;
  ByteView body = in.subspan(h.header_len, h.payload_len);
  while (!body.empty()) {
    std::size_t used = 0;
    children.push_back(decode_one(body, used));
    body = body.subspan(used);
  }
  return Item(std::move(children));
}

}  // namespace

Bytes encode(const Item& item) {
  Bytes out;
  encode_into(out, item);
  return out;
}

Item decode(ByteView data) {
  std::size_t consumed = 0;
  Item item = decode_one(data, consumed);
  if (consumed != data.size()) throw DecodeError("trailing bytes after item");
  return item;
}

}  // namespace sealbid::rlp
