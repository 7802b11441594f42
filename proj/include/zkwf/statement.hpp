#pragma once

// The state-transition statement: the computation a proof attests to.
// Pure functions; safe to call concurrently.

#include <optional>
#include <string>

#include "zkwf/crypto.hpp"
#include "zkwf/semantics.hpp"
#include "zkwf/statecodec.hpp"

namespace zkwf {

enum class DiffKind { FakeUpdate, Matrix, Invalid };

struct DiffResult {
  DiffKind kind = DiffKind::Invalid;
  DeltaRows rows{DeltaRow::padding(), DeltaRow::padding(), DeltaRow::padding()};
  std::size_t changes = 0;
};

/// Decodes positional differences into marking-delta rows:
/// 1->2 gives (-1,i), 0->1 and 0->2 give (+1,i); any other change, or more
/// than three changes, is Invalid. Throws std::invalid_argument when the
/// vectors differ in length.
DiffResult diff_matrix(std::span<const std::uint8_t> v_cur, std::span<const std::uint8_t> v_new);

struct TransitionCheck {
  bool ok = false;
  std::string detail;  // first failed rule, for diagnostics
  explicit operator bool() const { return ok; }
};

TransitionCheck explain_transition(const StatementDescriptor& d, const ProcessState& s_cur, const ProcessState& s_new);

inline bool check_transition(const StatementDescriptor& d, const ProcessState& s_cur, const ProcessState& s_new) {
  return explain_transition(d, s_cur, s_new).ok;
}

bool check_authorization(const StatementDescriptor& d, const DiffResult& diff, const PublicKey& pk);

struct PrivateInputs {
  ProcessState s_current;
  Salt r_current;
  ProcessState s_new;
  Salt r_new;
  PublicKey pk;
  SecretKey sk;

  bool operator==(const PrivateInputs&) const = default;
};

struct PublicInputs {
  Commitment h_current;
  Signature S_new;

  bool operator==(const PublicInputs&) const = default;
};

enum class Rejection { None, HashMismatch, BadTransition, BadAuth, BadSig };

std::string_view to_string(Rejection r);

struct StatementResult {
  std::optional<Commitment> h_new;
  Rejection reason = Rejection::None;
  std::string detail;

  bool accepted() const { return h_new.has_value(); }
};

/// Message covered by a signature commitment: h_prev || h_new (64 bytes).
Bytes signature_message(const Commitment& h_prev, const Commitment& h_new);

StatementResult evaluate_statement(const StatementDescriptor& d, const PrivateInputs& priv, const PublicInputs& pub);

}  // namespace zkwf
