#pragma once

// Process-state byte layout, salted commitments and group-key encryption.
//
// encode_state layout (bit-exact):
//   v:         one byte per executable element, values 0/1/2
//   vars:      8 bytes per variable, big-endian two's complement
//   msgHashes: 32 bytes per message slot (all-zero = not yet sent)

#include <cstdint>
#include <vector>

#include "zkwf/bytes.hpp"
#include "zkwf/crypto.hpp"

namespace zkwf {

struct StatementDescriptor;

struct SaltTag {};
using Salt = FixedBytes<4, SaltTag>;
using Commitment = Digest;

struct StateShape {
  std::size_t elements = 0;
  std::size_t variables = 0;
  std::size_t slots = 0;

  static StateShape of(const StatementDescriptor& d);
  std::size_t encoded_size() const { return elements + 8 * variables + 32 * slots; }
  bool operator==(const StateShape&) const = default;
};

struct ProcessState {
  std::vector<std::uint8_t> v;
  std::vector<std::int64_t> vars;
  std::vector<Digest> msgHashes;

  static ProcessState zero(const StateShape& shape);
  StateShape shape() const { return {v.size(), vars.size(), msgHashes.size()}; }
  bool operator==(const ProcessState&) const = default;
};

class StateCodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes encode_state(const ProcessState& s);
ProcessState decode_state(ByteView bytes, const StateShape& shape);

/// SHA-256(encode_state(s) || salt).
Commitment commit(const ProcessState& s, const Salt& salt);

Salt fresh_salt(RandomSource& rng);

/// AES-256-GCM over encode_state(s) || salt with a fresh random nonce.
Bytes encrypt_state(const ProcessState& s, const Salt& salt, const SymmetricKey& groupKey, RandomSource& rng);

struct DecryptedState {
  ProcessState state;
  Salt salt;
};
/// Throws StateCodecError on authentication failure or a malformed plaintext.
DecryptedState decrypt_state(ByteView ciphertext, const SymmetricKey& groupKey, const StateShape& shape);

std::size_t ciphertext_size(const StateShape& shape);

}  // namespace zkwf
