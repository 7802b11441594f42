#include "zkwf/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

namespace zkwf {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

PkeyPtr private_key(ByteView sk) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, sk.data(), sk.size()));
  if (!key) throw CryptoError("invalid Ed25519 secret key");
  return key;
}

}  // namespace

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw CryptoError("RAND_bytes failed");
  }
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) b = static_cast<std::uint8_t>(engine_() >> 56);
}

RandomSource& system_random() {
  static thread_local SystemRandom rng;
  return rng;
}

Digest sha256(ByteView data) {
  Digest out;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw CryptoError("SHA-256 failed");
  }
  return out;
}

KeyPair KeyPair::generate(RandomSource& rng) { return from_secret(rng.fixed<32, SecretKeyTag>()); }

KeyPair KeyPair::from_secret(const SecretKey& sk) { return KeyPair{sk, derive_pk(sk)}; }

KeyPair KeyPair::from_seed(std::string_view seed) {
  Bytes msg;
  append(msg, as_bytes("zkwf-demo-key:"));
  append(msg, as_bytes(seed));
  return from_secret(SecretKey::from_span(sha256(msg).view()));
}

PublicKey derive_pk(const SecretKey& sk) {
  auto key = private_key(sk.view());
  PublicKey pk;
  std::size_t len = pk.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pk.data.data(), &len) != 1 || len != pk.size()) {
    throw CryptoError("cannot derive Ed25519 public key");
  }
  return pk;
}

Signature sign(ByteView sk, ByteView msg) {
  if (sk.size() != SecretKey::size()) throw CryptoError("malformed secret key length");
  auto key = private_key(sk);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  Signature sig;
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data.data(), &len, msg.data(), msg.size()) != 1 ||
      len != sig.size()) {
    throw CryptoError("Ed25519 signing failed");
  }
  return sig;
}

Signature sign(const SecretKey& sk, ByteView msg) { return sign(sk.view(), msg); }

bool verify(ByteView pk, ByteView msg, ByteView sig) {
  if (pk.size() != PublicKey::size() || sig.size() != Signature::size()) {
    throw CryptoError("malformed key or signature length");
  }
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.data(), pk.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

bool verify(const PublicKey& pk, ByteView msg, const Signature& sig) {
  return verify(pk.view(), msg, sig.view());
}

Bytes aead_seal(const SymmetricKey& key, ByteView plaintext, ByteView nonce) {
  if (nonce.size() != kAeadNonceSize) throw CryptoError("AEAD nonce must be 12 bytes");
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  Bytes out(kAeadNonceSize + plaintext.size() + kAeadTagSize);
  std::copy(nonce.begin(), nonce.end(), out.begin());
  int len = 0;
  std::uint8_t* body = out.data() + kAeadNonceSize;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), body, &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), body + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize, body + plaintext.size()) != 1) {
    throw CryptoError("AES-256-GCM encryption failed");
  }
  return out;
}

Bytes aead_seal(const SymmetricKey& key, ByteView plaintext, RandomSource& rng) {
  std::array<std::uint8_t, kAeadNonceSize> nonce{};
  rng.fill(nonce);
  return aead_seal(key, plaintext, nonce);
}

std::optional<Bytes> aead_open(const SymmetricKey& key, ByteView sealed) {
  if (sealed.size() < kAeadNonceSize + kAeadTagSize) return std::nullopt;
  const std::size_t body_len = sealed.size() - kAeadNonceSize - kAeadTagSize;
  Bytes plain(body_len);
  Bytes tag(sealed.end() - kAeadTagSize, sealed.end());
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data.data(), sealed.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), plain.data(), &len, sealed.data() + kAeadNonceSize,
                        static_cast<int>(body_len)) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag.data()) != 1 ||
      EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &len) != 1) {
    return std::nullopt;
  }
  return plain;
}

}  // namespace zkwf
