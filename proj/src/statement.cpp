#include "zkwf/statement.hpp"

#include <algorithm>

namespace zkwf {

std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::None: return "OK";
    case Rejection::HashMismatch: return "HASH_MISMATCH";
    case Rejection::BadTransition: return "BAD_TRANSITION";
    case Rejection::BadAuth: return "BAD_AUTH";
    case Rejection::BadSig: return "BAD_SIG";
  }
  return "?";
}

DiffResult diff_matrix(std::span<const std::uint8_t> v_cur, std::span<const std::uint8_t> v_new) {
  if (v_cur.size() != v_new.size()) throw std::invalid_argument("state vectors differ in length");
  DiffResult out;
  for (std::size_t i = 0; i < v_cur.size(); ++i) {
    if (v_cur[i] == v_new[i]) continue;
    if (out.changes == kDeltaRows) {
      out.kind = DiffKind::Invalid;
      out.changes = kDeltaRows + 1;
      return out;
    }
    DeltaRow row;
    if (v_cur[i] == 1 && v_new[i] == 2) {
      row = {-1, static_cast<std::int32_t>(i)};
    } else if (v_cur[i] == 0 && (v_new[i] == 1 || v_new[i] == 2)) {
      row = {+1, static_cast<std::int32_t>(i)};
    } else {
      out.kind = DiffKind::Invalid;
      return out;
    }
    out.rows[out.changes++] = row;
  }
  out.kind = out.changes == 0 ? DiffKind::FakeUpdate : DiffKind::Matrix;
  return out;
}

namespace {

std::vector<DeltaRow> populated(const DeltaRows& rows) {
  std::vector<DeltaRow> out;
  for (const auto& r : rows) {
    if (!r.is_padding()) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool region_idle(const StatementDescriptor& d, std::size_t start, std::span<const std::uint8_t> v) {
  for (std::size_t t = 0; t < d.index.size(); ++t) {
    if (d.index[t].region == d.index[start].region && v[t] != 0) return false;
  }
  return true;
}

TransitionCheck fail(std::string why) { return {false, std::move(why)}; }

}  // namespace

TransitionCheck explain_transition(const StatementDescriptor& d, const ProcessState& s_cur, const ProcessState& s_new) {
  const StateShape shape = StateShape::of(d);
  if (s_cur.shape() != shape || s_new.shape() != shape) return fail("state shape does not match the descriptor");
  const auto& vc = s_cur.v;
  const auto& vn = s_new.v;
  if (std::any_of(vn.begin(), vn.end(), [](std::uint8_t x) { return x > 2; })) return fail("element state out of range");

  DiffResult diff = diff_matrix(vc, vn);
  if (diff.kind == DiffKind::Invalid) return fail("invalid state vector difference");
  if (diff.kind == DiffKind::FakeUpdate) {
    if (s_cur.vars != s_new.vars || s_cur.msgHashes != s_new.msgHashes) {
      return fail("fake update must leave variables and message hashes unchanged");
    }
    return {true, {}};
  }

  // Activations land in Active.
  for (const auto& r : diff.rows) {
    if (r.delta == +1 && vn[static_cast<std::size_t>(r.index)] != 1) return fail("activation must enter the active state");
  }

  const auto rows = populated(diff.rows);
  bool matched = false;
  for (const auto& entry : d.pArray) {
    if (populated(entry.rows) != rows) continue;
    if (!d.guard_holds(entry, s_new.vars)) continue;
    if (entry.is_join_firing()) {
      const auto& j = d.joins[*entry.join];
      if (vn[j.predecessors[0]] != 2 || vn[j.predecessors[1]] != 2) continue;
    }
    if (entry.is_start_activation() && !region_idle(d, static_cast<std::size_t>(entry.rows[0].index), vc)) continue;
    matched = true;
    break;
  }
  if (!matched) return fail("no admissible token-marking change matches");

  for (const auto& j : d.joins) {
    auto [p, q] = j.predecessors;
    bool before = vc[p] == 2 && vc[q] == 2;
    bool after = vn[p] == 2 && vn[q] == 2;
    if (!before && after && vn[j.successor] < 1) return fail("parallel join must activate " + d.index[j.successor].id);
  }

  for (std::size_t k = 0; k < d.variables.size(); ++k) {
    if (s_cur.vars[k] == s_new.vars[k]) continue;
    bool permitted = std::any_of(d.varWriters[k].begin(), d.varWriters[k].end(),
                                 [&](std::size_t w) { return vc[w] == 1 && vn[w] == 2; });
    if (!permitted) return fail("variable '" + d.variables[k] + "' written without permission");
  }

  for (std::size_t s = 0; s < d.msgSlots.size(); ++s) {
    const auto& slot = d.msgSlots[s];
    const bool throw_completes = vc[slot.throwIndex] != 2 && vn[slot.throwIndex] == 2;
    if (vn[slot.throwIndex] == 2 && s_new.msgHashes[s].is_zero()) {
      return fail("message throw " + d.index[slot.throwIndex].id + " completed without a message hash");
    }
    if (s_cur.msgHashes[s] != s_new.msgHashes[s] && !throw_completes) {
      return fail("message hash slot changed outside its throw step");
    }
    if (vc[slot.catchIndex] != 2 && vn[slot.catchIndex] == 2 && vc[slot.throwIndex] != 2) {
      return fail("message catch " + d.index[slot.catchIndex].id + " completed before its throw");
    }
  }
  return {true, {}};
}

bool check_authorization(const StatementDescriptor& d, const DiffResult& diff, const PublicKey& pk) {
  if (diff.kind == DiffKind::FakeUpdate) return d.participantKeys.count(pk) > 0;
  if (diff.kind != DiffKind::Matrix) return false;
  bool completes = false;
  for (const auto& r : diff.rows) {
    if (r.delta != -1) continue;
    completes = true;
    if (d.owner_of(static_cast<std::size_t>(r.index)) != pk) return false;
  }
  if (completes) return true;
  // Pure activation (start events): the activated element's owner acts.
  for (const auto& r : diff.rows) {
    if (r.delta == +1 && d.owner_of(static_cast<std::size_t>(r.index)) != pk) return false;
  }
  return true;
}

Bytes signature_message(const Commitment& h_prev, const Commitment& h_new) {
  Bytes msg;
  msg.reserve(64);
  append(msg, h_prev.view());
  append(msg, h_new.view());
  return msg;
}

StatementResult evaluate_statement(const StatementDescriptor& d, const PrivateInputs& priv, const PublicInputs& pub) {
  StatementResult result;
  auto reject = [&](Rejection r, std::string detail) {
    result.reason = r;
    result.detail = std::move(detail);
    return result;
  };
  const StateShape shape = StateShape::of(d);

  // 1. current state and salt open the public commitment
  try {
    if (priv.s_current.shape() != shape || commit(priv.s_current, priv.r_current) != pub.h_current) {
      return reject(Rejection::HashMismatch, "current state does not open h_current");
    }
  } catch (const StateCodecError& e) {
    return reject(Rejection::HashMismatch, e.what());
  }

  // 2. process-logic validity
  auto transition = explain_transition(d, priv.s_current, priv.s_new);
  if (!transition) return reject(Rejection::BadTransition, transition.detail);

  // 3. key ownership, authorization and signature commitment
  try {
    if (derive_pk(priv.sk) != priv.pk) return reject(Rejection::BadAuth, "secret key does not match pk");
  } catch (const CryptoError& e) {
    return reject(Rejection::BadAuth, e.what());
  }
  if (!check_authorization(d, diff_matrix(priv.s_current.v, priv.s_new.v), priv.pk)) {
    return reject(Rejection::BadAuth, "participant is not authorized for this step");
  }
  const Commitment h_new = commit(priv.s_new, priv.r_new);
  if (!verify(priv.pk, signature_message(pub.h_current, h_new), pub.S_new)) {
    return reject(Rejection::BadSig, "S_new does not sign h_current || h_new");
  }

  // 4. output
  result.h_new = h_new;
  return result;
}

}  // namespace zkwf
