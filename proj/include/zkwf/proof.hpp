#pragma once

// Proof-system boundary. Protocol code talks to ProofBackend only; the
// registry resolves a backend by the id carried in keys and proofs.
//
// The bundled "transparent" backend is NOT zero-knowledge. Its proofs are the
// private inputs sealed under a key derived from the descriptor, and verify
// re-executes the statement. It makes the protocol testable end to end.

#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "zkwf/statement.hpp"

namespace zkwf {

struct ProofKey {
  std::string backendId;
  Digest descriptorDigest;
  Bytes opaque;

  bool operator==(const ProofKey&) const = default;
};
struct ProverKey : ProofKey {};
struct VerifierKey : ProofKey {};

struct PublicBinding {
  Commitment h_current;
  Signature S_new;
  Commitment h_new;

  bool operator==(const PublicBinding&) const = default;
};

struct Proof {
  std::string backendId;
  Bytes bytes;
  PublicBinding binding;

  bool operator==(const Proof&) const = default;
};

class ProofError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownBackend : public ProofError {
 public:
  explicit UnknownBackend(const std::string& id) : ProofError("unknown proof backend: " + id) {}
};

/// prove() refused because the statement rejected the inputs.
class StatementRefused : public ProofError {
 public:
  StatementRefused(Rejection reason, const std::string& detail)
      : ProofError(std::string(to_string(reason)) + ": " + detail), reason_(reason) {}
  Rejection reason() const { return reason_; }

 private:
  Rejection reason_;
};

class ProofBackend {
 public:
  virtual ~ProofBackend() = default;
  virtual std::string id() const = 0;
  virtual std::pair<ProverKey, VerifierKey> setup(const StatementDescriptor& d) const = 0;
  virtual Proof prove(const ProverKey& pk, const PrivateInputs& priv, const PublicInputs& pub) const = 0;
  virtual bool verify(const VerifierKey& vk, const PublicBinding& binding, const Proof& proof) const = 0;
};

class BackendRegistry {
 public:
  /// Process-wide registry, preloaded with "transparent".
  static BackendRegistry& global();

  void add(std::shared_ptr<const ProofBackend> backend);
  std::shared_ptr<const ProofBackend> get(const std::string& id) const;
  bool contains(const std::string& id) const;

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<const ProofBackend>> backends_;
};

std::shared_ptr<const ProofBackend> make_transparent_backend();

inline constexpr const char* kTransparentBackend = "transparent";

// Registry-dispatching entry points.
std::pair<ProverKey, VerifierKey> setup(const StatementDescriptor& d, const std::string& backendId);
Proof prove(const ProverKey& pk, const PrivateInputs& priv, const PublicInputs& pub);
/// Never throws; an unknown backend or malformed proof yields false.
bool verify(const VerifierKey& vk, const PublicBinding& binding, const Proof& proof);

// Length-prefixed binary: u32 length + backendId, then the fields.
Bytes serialize_proof(const Proof& p);
Proof parse_proof(ByteView data);
Bytes serialize_key(const ProofKey& k);
ProofKey parse_key(ByteView data);

}  // namespace zkwf
