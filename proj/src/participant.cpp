#include "zkwf/participant.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace zkwf {

StepAction StepAction::complete(std::string id, std::map<std::string, std::int64_t> writes,
                                std::optional<Bytes> message) {
  StepAction a;
  a.kind = Kind::Complete;
  a.elementId = std::move(id);
  a.writes = std::move(writes);
  a.message = std::move(message);
  return a;
}

StepAction StepAction::start(std::string id) {
  StepAction a;
  a.kind = Kind::ActivateStart;
  a.elementId = std::move(id);
  return a;
}

StepAction StepAction::fake() { return {}; }

std::string StepAction::describe() const {
  switch (kind) {
    case Kind::Fake: return "fake";
    case Kind::ActivateStart: return "start " + elementId;
    case Kind::Complete: {
      std::string out = "complete " + elementId;
      for (const auto& [k, v] : writes) out += " " + k + "=" + std::to_string(v);
      if (message) out += " +message";
      return out;
    }
  }
  return "?";
}

CongruenceViolation::CongruenceViolation(std::optional<PublicKey> signer, std::uint64_t seq, const std::string& detail)
    : std::runtime_error("CONGRUENCE_VIOLATION at seq " + std::to_string(seq) + " by " +
                         (signer ? signer->hex() : std::string("unknown signer")) + ": " + detail),
      signer_(signer),
      seq_(seq) {}

std::optional<PublicKey> identify_signer(const StatementDescriptor& d, const std::optional<Commitment>& h_prev,
                                         const CommitmentRecord& record) {
  Bytes msg = h_prev ? signature_message(*h_prev, record.h_current) : genesis_message(record.h_current);
  for (const auto& pk : d.participantKeys) {
    if (verify(pk, msg, record.S_current)) return pk;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> audit_chain(const StatementDescriptor& d, const std::vector<HistoryEntry>& history) {
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::optional<Commitment> prev;
    if (i > 0) prev = history[i - 1].record.h_current;
    if (!identify_signer(d, prev, history[i].record)) return history[i].seq;
  }
  return std::nullopt;
}

ParticipantEngine::ParticipantEngine(ParticipantConfig cfg, LedgerApi& ledger, RandomSource& rng)
    : cfg_(std::move(cfg)), ledger_(ledger), rng_(rng) {
  if (!cfg_.descriptor) throw std::invalid_argument("participant config has no descriptor");
  if (!cfg_.descriptor->participantKeys.count(cfg_.keyPair.pk)) {
    throw std::invalid_argument("key " + cfg_.keyPair.pk.hex() + " is not a participant of this model");
  }
  std::tie(proverKey_, verifierKey_) = setup(*cfg_.descriptor, cfg_.backendId);
}

std::string ParticipantEngine::deploy() {
  const ProcessState zero = ProcessState::zero(StateShape::of(descriptor()));
  CommitmentRecord genesis;
  std::lock_guard lock(mu_);
  Salt salt = fresh_salt(rng_);
  genesis.h_current = commit(zero, salt);
  genesis.ciphertext = encrypt_state(zero, salt, cfg_.groupKey, rng_);
  genesis.S_current = sign(cfg_.keyPair.sk, genesis_message(genesis.h_current));
  return ledger_.deploy(verifierKey_, descriptor().digest(), genesis);
}

SyncedState ParticipantEngine::sync(const std::string& instanceId) {
  std::lock_guard lock(mu_);
  auto& cache = caches_[instanceId];
  for (auto& e : ledger_.get_history(instanceId, cache.history.size())) cache.history.push_back(std::move(e));
  if (cache.history.empty()) throw LedgerError("EMPTY_HISTORY", "instance has no history: " + instanceId);

  const std::size_t last = cache.history.size() - 1;
  const CommitmentRecord& record = cache.history[last].record;
  std::optional<Commitment> prev;
  if (last > 0) prev = cache.history[last - 1].record.h_current;
  auto alarm = [&](const std::string& detail) {
    return CongruenceViolation(identify_signer(descriptor(), prev, record), cache.history[last].seq, detail);
  };

  SyncedState out;
  out.record = record;
  out.seq = cache.history[last].seq;
  try {
    auto opened = decrypt_state(record.ciphertext, cfg_.groupKey, StateShape::of(descriptor()));
    out.state = std::move(opened.state);
    out.salt = opened.salt;
  } catch (const StateCodecError& e) {
    throw alarm(e.what());
  }
  if (commit(out.state, out.salt) != record.h_current) throw alarm("decrypted state does not open h_current");
  return out;
}

namespace {

ProcessState apply_rows(const ProcessState& s, const PEntry& entry) {
  ProcessState out = s;
  for (const auto& r : entry.rows) {
    if (r.is_padding()) continue;
    auto& slot = out.v[static_cast<std::size_t>(r.index)];
    slot = r.delta < 0 ? 2 : 1;
  }
  return out;
}

}  // namespace

ProcessState ParticipantEngine::propose(const ProcessState& s_cur, const StepAction& action) const {
  const auto& d = descriptor();
  if (s_cur.shape() != StateShape::of(d)) throw ProposeError("state does not match the descriptor");
  if (action.kind == StepAction::Kind::Fake) return s_cur;

  const auto pos = d.position(action.elementId);
  if (!pos) throw ProposeError("unknown executable element '" + action.elementId + "'");
  const std::size_t t = *pos;
  const auto row = static_cast<std::int32_t>(t);

  ProcessState base = s_cur;
  std::vector<const PEntry*> entries;

  if (action.kind == StepAction::Kind::ActivateStart) {
    if (d.index[t].kind != ElementKind::StartEvent) throw ProposeError(action.elementId + " is not a start event");
    if (s_cur.v[t] != 0) throw ProposeError(action.elementId + " has already been activated");
    if (!action.writes.empty() || action.message) throw ProposeError("start activation carries no data");
    for (const auto& e : d.pArray) {
      if (e.is_start_activation() && e.rows[0].index == row) entries.push_back(&e);
    }
  } else {
    if (s_cur.v[t] != 1) throw ProposeError(action.elementId + " is not active");
    for (const auto& [name, value] : action.writes) {
      auto k = d.variable_index(name);
      if (!k) throw ProposeError("unknown variable '" + name + "'");
      if (!d.varWriters[*k].count(t)) throw ProposeError(action.elementId + " may not write '" + name + "'");
      base.vars[*k] = value;
    }
    if (auto slot = d.slot_of_throw(t)) {
      if (!action.message) throw ProposeError("a message must be provided to complete throw " + action.elementId);
      base.msgHashes[*slot] = sha256(*action.message);
    } else if (action.message) {
      throw ProposeError(action.elementId + " is not a message throw event");
    }
    if (auto slot = d.slot_of_catch(t); slot && s_cur.v[d.msgSlots[*slot].throwIndex] != 2) {
      throw ProposeError("message for " + action.elementId + " has not been thrown yet");
    }
    for (const auto& e : d.pArray) {
      bool completes_t = false;
      bool other_completion = false;
      for (const auto& r : e.rows) {
        if (r.delta == -1) (r.index == row ? completes_t : other_completion) = true;
      }
      if (completes_t && !other_completion) entries.push_back(&e);
    }
  }

  std::vector<ProcessState> candidates;
  std::string why = "no admissible step for " + action.describe();
  for (const PEntry* e : entries) {
    bool blocked = false;
    for (const auto& r : e->rows) {
      if (r.delta == +1 && base.v[static_cast<std::size_t>(r.index)] != 0) blocked = true;
    }
    if (blocked) continue;
    ProcessState cand = apply_rows(base, *e);
    auto check = explain_transition(d, s_cur, cand);
    if (!check) {
      why = check.detail;
      continue;
    }
    if (std::find(candidates.begin(), candidates.end(), cand) == candidates.end()) candidates.push_back(cand);
  }
  if (candidates.size() > 1 && action.branch) {
    auto bpos = d.position(*action.branch);
    if (!bpos) throw ProposeError("unknown branch target '" + *action.branch + "'");
    std::erase_if(candidates, [&](const ProcessState& c) { return c.v[*bpos] == s_cur.v[*bpos]; });
  }
  if (candidates.empty()) throw ProposeError(why);
  if (candidates.size() > 1) throw ProposeError("several branches are enabled after " + action.elementId + "; choose one");
  return candidates.front();
}

UpdateTx ParticipantEngine::build_update(const SyncedState& cur, const ProcessState& s_new) {
  PrivateInputs priv;
  PublicInputs pub;
  UpdateTx tx;
  {
    std::lock_guard lock(mu_);
    priv.r_new = fresh_salt(rng_);
    tx.h_new = commit(s_new, priv.r_new);
    tx.ciphertext_new = encrypt_state(s_new, priv.r_new, cfg_.groupKey, rng_);
  }
  priv.s_current = cur.state;
  priv.r_current = cur.salt;
  priv.s_new = s_new;
  priv.pk = cfg_.keyPair.pk;
  priv.sk = cfg_.keyPair.sk;
  tx.S_new = sign(cfg_.keyPair.sk, signature_message(cur.record.h_current, tx.h_new));
  pub.h_current = cur.record.h_current;
  pub.S_new = tx.S_new;
  tx.proof = prove(proverKey_, priv, pub);
  return tx;
}

SubmitResult ParticipantEngine::submit(const std::string& instanceId, const UpdateTx& tx) {
  if (ringMode_) throw RingModeActive();
  return ledger_.submit_update(instanceId, tx);
}

SubmitResult ParticipantEngine::submit_scheduled(const std::string& instanceId, const UpdateTx& tx) {
  return ledger_.submit_update(instanceId, tx);
}

StepOutcome ParticipantEngine::step(const std::string& instanceId, const StepAction& action) {
  StepOutcome out;
  out.before = sync(instanceId);
  out.proposed = propose(out.before.state, action);
  out.tx = build_update(out.before, out.proposed);
  auto result = submit(instanceId, *out.tx);
  out.accepted = result.accepted;
  out.message = result.message;
  if (result.accepted) out.seq = result.seq;
  return out;
}

bool ParticipantEngine::receive_message(const ProcessState& s, std::size_t slot, ByteView bytes) const {
  const auto& d = descriptor();
  if (slot >= d.msgSlots.size()) throw ProposeError("no message slot " + std::to_string(slot));
  if (s.v.at(d.msgSlots[slot].throwIndex) != 2) throw ProposeError("message throw has not completed");
  return sha256(bytes) == s.msgHashes.at(slot);
}

std::vector<std::string> ParticipantEngine::owned_elements() const {
  std::vector<std::string> out;
  for (const auto& e : descriptor().index) {
    if (e.owner == cfg_.keyPair.pk) out.push_back(e.id);
  }
  return out;
}

void MessageChannel::send(Bytes message) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(message));
}

std::optional<Bytes> MessageChannel::receive() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  Bytes out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

std::size_t MessageChannel::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

namespace {

void write_private(const std::filesystem::path& path, const std::string& content) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) throw std::runtime_error("cannot write " + path.string());
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
  const char* p = content.data();
  std::size_t left = content.size();
  while (left > 0) {
    auto n = ::write(fd, p, left);
    if (n <= 0) {
      ::close(fd);
      throw std::runtime_error("cannot write " + path.string());
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ::close(fd);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace

void save_key_file(const KeyPair& kp, const std::filesystem::path& path) {
  nlohmann::json j{{"publicKey", kp.pk.hex()}, {"secretKey", kp.sk.hex()}};
  write_private(path, j.dump(2) + "\n");
}

KeyPair load_key_file(const std::filesystem::path& path) {
  auto j = read_json(path);
  KeyPair kp = KeyPair::from_secret(SecretKey::from_hex(j.at("secretKey").get<std::string>()));
  if (j.contains("publicKey") && PublicKey::from_hex(j["publicKey"].get<std::string>()) != kp.pk) {
    throw std::runtime_error("key file " + path.string() + " has a mismatched public key");
  }
  return kp;
}

void save_group_key(const SymmetricKey& key, const std::filesystem::path& path) {
  write_private(path, nlohmann::json{{"groupKey", key.hex()}}.dump(2) + "\n");
}

SymmetricKey load_group_key(const std::filesystem::path& path) {
  return SymmetricKey::from_hex(read_json(path).at("groupKey").get<std::string>());
}

ParticipantFileConfig load_participant_config(const std::filesystem::path& path) {
  auto j = read_json(path);
  ParticipantFileConfig c;
  c.keyFile = j.value("keyFile", "");
  c.groupKeyFile = j.value("groupKeyFile", "");
  c.descriptor = j.value("descriptor", "");
  c.ledgerUrl = j.value("ledgerUrl", "");
  return c;
}

}  // namespace zkwf
