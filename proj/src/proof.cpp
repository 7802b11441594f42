#include "zkwf/proof.hpp"

#include <algorithm>
#include <map>

namespace zkwf {

namespace {

void put_u32(Bytes& out, std::uint32_t n) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
}

void put_field(Bytes& out, ByteView data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  append(out, data);
}

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  ByteView take(std::size_t n) {
    if (data_.size() - pos_ < n) throw ProofError("truncated proof encoding");
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() {
    auto b = take(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
  }
  ByteView field() { return take(u32()); }
  std::string text() {
    auto b = field();
    return {b.begin(), b.end()};
  }
  template <typename Fixed>
  Fixed fixed() {
    return Fixed::from_span(take(Fixed::size()));
  }
  void finish() const {
    if (pos_ != data_.size()) throw ProofError("trailing bytes in proof encoding");
  }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kTransparentTag = "zkwf-transparent-v1";

SymmetricKey transparent_secret(const Digest& descriptorDigest) {
  Bytes material(kTransparentTag.begin(), kTransparentTag.end());
  append(material, descriptorDigest.view());
  return SymmetricKey::from_span(sha256(material).view());
}

Bytes binding_bytes(const PublicBinding& b) {
  Bytes out;
  append(out, b.h_current.view());
  append(out, b.S_new.view());
  append(out, b.h_new.view());
  return out;
}

class TransparentBackend final : public ProofBackend {
 public:
  std::string id() const override { return kTransparentBackend; }

  std::pair<ProverKey, VerifierKey> setup(const StatementDescriptor& d) const override {
    const std::string doc = d.to_json().dump();
    ProofKey key{id(), sha256(as_bytes(doc)), Bytes(doc.begin(), doc.end())};
    return {ProverKey{key}, VerifierKey{key}};
  }

  Proof prove(const ProverKey& pk, const PrivateInputs& priv, const PublicInputs& pub) const override {
    auto d = descriptor_for(pk);
    StatementResult result = evaluate_statement(*d, priv, pub);
    if (!result.accepted()) throw StatementRefused(result.reason, result.detail);

    Proof proof;
    proof.backendId = id();
    proof.binding = {pub.h_current, pub.S_new, *result.h_new};

    Bytes plain = encode_state(priv.s_current);
    append(plain, priv.r_current.view());
    append(plain, encode_state(priv.s_new));
    append(plain, priv.r_new.view());
    append(plain, priv.pk.view());
    append(plain, priv.sk.view());
    append(plain, pub.h_current.view());
    append(plain, pub.S_new.view());

    Digest nonce = sha256(binding_bytes(proof.binding));
    proof.bytes = aead_seal(transparent_secret(pk.descriptorDigest), plain, ByteView(nonce.data).first(kAeadNonceSize));
    return proof;
  }

  bool verify(const VerifierKey& vk, const PublicBinding& binding, const Proof& proof) const override {
    if (proof.backendId != id() || proof.binding != binding) return false;
    auto d = descriptor_for(vk);
    auto plain = aead_open(transparent_secret(vk.descriptorDigest), proof.bytes);
    if (!plain) return false;

    const StateShape shape = StateShape::of(*d);
    const std::size_t n = shape.encoded_size();
    if (plain->size() != 2 * (n + Salt::size()) + 32 + 32 + 32 + 64) return false;
    Reader in(*plain);
    PrivateInputs priv;
    PublicInputs pub;
    priv.s_current = decode_state(in.take(n), shape);
    priv.r_current = in.fixed<Salt>();
    priv.s_new = decode_state(in.take(n), shape);
    priv.r_new = in.fixed<Salt>();
    priv.pk = in.fixed<PublicKey>();
    priv.sk = in.fixed<SecretKey>();
    pub.h_current = in.fixed<Commitment>();
    pub.S_new = in.fixed<Signature>();
    if (pub.h_current != binding.h_current || pub.S_new != binding.S_new) return false;

    StatementResult result = evaluate_statement(*d, priv, pub);
    return result.accepted() && *result.h_new == binding.h_new;
  }

 private:
  // Parsed descriptors are cached per digest; keys are immutable.
  std::shared_ptr<const StatementDescriptor> descriptor_for(const ProofKey& key) const {
    if (key.backendId != kTransparentBackend) throw ProofError("key belongs to backend " + key.backendId);
    std::lock_guard lock(mu_);
    auto it = cache_.find(key.descriptorDigest);
    if (it != cache_.end()) return it->second;
    if (sha256(key.opaque) != key.descriptorDigest) throw ProofError("key material does not match its digest");
    auto doc = nlohmann::json::parse(key.opaque.begin(), key.opaque.end());
    auto d = std::make_shared<const StatementDescriptor>(StatementDescriptor::from_json(doc));
    cache_.emplace(key.descriptorDigest, d);
    return d;
  }

  mutable std::mutex mu_;
  mutable std::map<Digest, std::shared_ptr<const StatementDescriptor>> cache_;
};

}  // namespace

std::shared_ptr<const ProofBackend> make_transparent_backend() { return std::make_shared<TransparentBackend>(); }

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry;
    r->add(make_transparent_backend());
    return r;
  }();
  return *registry;
}

void BackendRegistry::add(std::shared_ptr<const ProofBackend> backend) {
  std::lock_guard lock(mu_);
  const std::string id = backend->id();
  auto it = std::find_if(backends_.begin(), backends_.end(), [&](const auto& b) { return b->id() == id; });
  if (it != backends_.end()) {
    *it = std::move(backend);
  } else {
    backends_.push_back(std::move(backend));
  }
}

std::shared_ptr<const ProofBackend> BackendRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& b : backends_) {
    if (b->id() == id) return b;
  }
  throw UnknownBackend(id);
}

bool BackendRegistry::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return std::any_of(backends_.begin(), backends_.end(), [&](const auto& b) { return b->id() == id; });
}

std::pair<ProverKey, VerifierKey> setup(const StatementDescriptor& d, const std::string& backendId) {
  return BackendRegistry::global().get(backendId)->setup(d);
}

Proof prove(const ProverKey& pk, const PrivateInputs& priv, const PublicInputs& pub) {
  return BackendRegistry::global().get(pk.backendId)->prove(pk, priv, pub);
}

bool verify(const VerifierKey& vk, const PublicBinding& binding, const Proof& proof) {
  try {
    if (proof.backendId != vk.backendId) return false;
    return BackendRegistry::global().get(vk.backendId)->verify(vk, binding, proof);
  } catch (const std::exception&) {
    return false;
  }
}

Bytes serialize_proof(const Proof& p) {
  Bytes out;
  put_field(out, as_bytes(p.backendId));
  append(out, binding_bytes(p.binding));
  put_field(out, p.bytes);
  return out;
}

Proof parse_proof(ByteView data) {
  Reader in(data);
  Proof p;
  p.backendId = in.text();
  p.binding.h_current = in.fixed<Commitment>();
  p.binding.S_new = in.fixed<Signature>();
  p.binding.h_new = in.fixed<Commitment>();
  auto body = in.field();
  p.bytes.assign(body.begin(), body.end());
  in.finish();
  return p;
}

Bytes serialize_key(const ProofKey& k) {
  Bytes out;
  put_field(out, as_bytes(k.backendId));
  append(out, k.descriptorDigest.view());
  put_field(out, k.opaque);
  return out;
}

ProofKey parse_key(ByteView data) {
  Reader in(data);
  ProofKey k;
  k.backendId = in.text();
  k.descriptorDigest = in.fixed<Digest>();
  auto body = in.field();
  k.opaque.assign(body.begin(), body.end());
  in.finish();
  return k;
}

}  // namespace zkwf
