#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zkwf {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);

// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Fixed-width byte string; Tag keeps digests, keys and signatures apart.
template <std::size_t N, typename Tag>
struct FixedBytes {
  std::array<std::uint8_t, N> data{};

  static constexpr std::size_t size() { return N; }
  ByteView view() const { return data; }
  std::string hex() const { return to_hex(data); }
  bool is_zero() const {
    return std::all_of(data.begin(), data.end(), [](std::uint8_t b) { return b == 0; });
  }

  static FixedBytes from_span(ByteView src) {
    if (src.size() != N) {
      throw std::invalid_argument("expected " + std::to_string(N) + " bytes, got " +
                                  std::to_string(src.size()));
    }
    FixedBytes out;
    std::copy(src.begin(), src.end(), out.data.begin());
    return out;
  }
  static FixedBytes from_hex(std::string_view hex) { return from_span(zkwf::from_hex(hex)); }

  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;
};

struct DigestTag {};
using Digest = FixedBytes<32, DigestTag>;

}  // namespace zkwf
