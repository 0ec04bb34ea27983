#pragma once

#include "sealbid/bytes.hpp"

namespace sealbid {

/// Keccak-256 with the original 0x01 domain padding (Ethereum flavour, not FIPS-202 SHA3-256).
Hash32 keccak256(ByteView data);

inline Hash32 keccak256(std::string_view text) {
  return keccak256(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace sealbid
