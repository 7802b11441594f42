#pragma once

// Application-level cryptography: SHA-256, Ed25519 participant keys and
// AES-256-GCM sealing. Everything is backed by OpenSSL's EVP interface.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>

#include "zkwf/bytes.hpp"

namespace zkwf {

struct PublicKeyTag {};
struct SecretKeyTag {};
struct SignatureTag {};
struct SymmetricKeyTag {};

using PublicKey = FixedBytes<32, PublicKeyTag>;
using SecretKey = FixedBytes<32, SecretKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;
using SymmetricKey = FixedBytes<32, SymmetricKeyTag>;

class CryptoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of random bytes. Salts, nonces and key generation draw from an
/// injected source so tests can run deterministically.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N, typename Tag>
  FixedBytes<N, Tag> fixed() {
    FixedBytes<N, Tag> out;
    fill(out.data);
    return out;
  }
};

/// OpenSSL CSPRNG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Seeded, reproducible stream. Not for production secrets.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mt19937_64 engine_;
};

RandomSource& system_random();

Digest sha256(ByteView data);

struct KeyPair {
  SecretKey sk;
  PublicKey pk;

  static KeyPair generate(RandomSource& rng);
  static KeyPair from_secret(const SecretKey& sk);
  /// Deterministic demo identity: sk = SHA-256("zkwf-demo-key:" || seed).
  static KeyPair from_seed(std::string_view seed);
};

PublicKey derive_pk(const SecretKey& sk);
Signature sign(const SecretKey& sk, ByteView msg);
bool verify(const PublicKey& pk, ByteView msg, const Signature& sig);

// Raw-length variants used at parsing boundaries; malformed lengths throw.
Signature sign(ByteView sk, ByteView msg);
bool verify(ByteView pk, ByteView msg, ByteView sig);

constexpr std::size_t kAeadNonceSize = 12;
constexpr std::size_t kAeadTagSize = 16;

/// AES-256-GCM. Output layout: nonce(12) || ciphertext || tag(16).
Bytes aead_seal(const SymmetricKey& key, ByteView plaintext, ByteView nonce);
Bytes aead_seal(const SymmetricKey& key, ByteView plaintext, RandomSource& rng);
/// Returns nullopt when authentication fails.
std::optional<Bytes> aead_open(const SymmetricKey& key, ByteView sealed);

}  // namespace zkwf
