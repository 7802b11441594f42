#include "zkwf/statecodec.hpp"

#include "zkwf/semantics.hpp"

namespace zkwf {

StateShape StateShape::of(const StatementDescriptor& d) {
  return {d.index.size(), d.variables.size(), d.msgSlots.size()};
}

ProcessState ProcessState::zero(const StateShape& shape) {
  ProcessState s;
  s.v.assign(shape.elements, 0);
  s.vars.assign(shape.variables, 0);
  s.msgHashes.assign(shape.slots, Digest{});
  return s;
}

Bytes encode_state(const ProcessState& s) {
  Bytes out;
  out.reserve(s.shape().encoded_size());
  for (std::uint8_t x : s.v) {
    if (x > 2) throw StateCodecError("element state out of range");
    out.push_back(x);
  }
  for (std::int64_t value : s.vars) {
    auto u = static_cast<std::uint64_t>(value);
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(u >> shift));
  }
  for (const auto& h : s.msgHashes) append(out, h.view());
  return out;
}

ProcessState decode_state(ByteView bytes, const StateShape& shape) {
  if (bytes.size() != shape.encoded_size()) throw StateCodecError("encoded state has the wrong length");
  ProcessState s;
  std::size_t at = 0;
  s.v.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(shape.elements));
  for (auto x : s.v) {
    if (x > 2) throw StateCodecError("element state out of range");
  }
  at += shape.elements;
  for (std::size_t i = 0; i < shape.variables; ++i) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u = (u << 8) | bytes[at++];
    s.vars.push_back(static_cast<std::int64_t>(u));
  }
  for (std::size_t i = 0; i < shape.slots; ++i) {
    s.msgHashes.push_back(Digest::from_span(bytes.subspan(at, 32)));
    at += 32;
  }
  return s;
}

Commitment commit(const ProcessState& s, const Salt& salt) {
  Bytes buf = encode_state(s);
  append(buf, salt.view());
  return sha256(buf);
}

Salt fresh_salt(RandomSource& rng) { return rng.fixed<4, SaltTag>(); }

Bytes encrypt_state(const ProcessState& s, const Salt& salt, const SymmetricKey& groupKey, RandomSource& rng) {
  Bytes plain = encode_state(s);
  append(plain, salt.view());
  return aead_seal(groupKey, plain, rng);
}

DecryptedState decrypt_state(ByteView ciphertext, const SymmetricKey& groupKey, const StateShape& shape) {
  auto plain = aead_open(groupKey, ciphertext);
  if (!plain) throw StateCodecError("state ciphertext failed authentication");
  if (plain->size() != shape.encoded_size() + Salt::size()) throw StateCodecError("decrypted state has the wrong length");
  ByteView view(*plain);
  DecryptedState out{decode_state(view.first(shape.encoded_size()), shape),
                     Salt::from_span(view.last(Salt::size()))};
  return out;
}

std::size_t ciphertext_size(const StateShape& shape) {
  return kAeadNonceSize + shape.encoded_size() + Salt::size() + kAeadTagSize;
}

}  // namespace zkwf
