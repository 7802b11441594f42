#include "zkwf/ledger.hpp"

#include <fstream>

namespace zkwf {

std::size_t HistoryEntry::observable_size() const {
  std::size_t n = record.h_current.size() + record.ciphertext.size() + record.S_current.size();
  if (proof) n += serialize_proof(*proof).size();
  return n;
}

Bytes genesis_message(const Commitment& h) {
  Bytes msg(64, 0);
  std::copy(h.data.begin(), h.data.end(), msg.begin() + 32);
  return msg;
}

std::optional<HistoryEntry> Subscription::next(std::chrono::milliseconds timeout) {
  if (pos_ == buffer_.size()) {
    buffer_ = ledger_.wait_history(instanceId_, next_, timeout);
    pos_ = 0;
    if (buffer_.empty()) return std::nullopt;
  }
  HistoryEntry e = buffer_[pos_++];
  next_ = e.seq + 1;
  return e;
}

Ledger::Ledger() : Ledger(Options{}) {}

Ledger::Ledger(Options options) : options_(std::move(options)) {
  if (!options_.rng) options_.rng = &system_random();
  if (!options_.clock) {
    options_.clock = [] {
      using namespace std::chrono;
      return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    };
  }
  if (options_.dataDir) {
    std::filesystem::create_directories(*options_.dataDir);
    for (const auto& f : std::filesystem::directory_iterator(*options_.dataDir)) {
      if (f.path().extension() == ".jsonl") load(f.path());
    }
  }
}

std::shared_ptr<Ledger::Instance> Ledger::find(const std::string& instanceId) const {
  std::lock_guard lock(mu_);
  auto it = instances_.find(instanceId);
  if (it == instances_.end()) throw LedgerError("UNKNOWN_INSTANCE", "unknown instance: " + instanceId);
  return it->second;
}

std::string Ledger::deploy(const VerifierKey& vk, const Digest& descriptorDigest, const CommitmentRecord& genesis) {
  auto inst = std::make_shared<Instance>();
  inst->vk = vk;
  inst->descriptorDigest = descriptorDigest;
  HistoryEntry entry;
  entry.record = genesis;
  {
    std::lock_guard lock(clockMu_);
    entry.logicalTime = ++logicalClock_;
    entry.wallClockMs = options_.clock();
  }
  inst->history.push_back(entry);

  std::lock_guard lock(mu_);
  do {
    std::array<std::uint8_t, 8> raw{};
    options_.rng->fill(raw);
    inst->id = to_hex(raw);
  } while (instances_.count(inst->id));
  instances_.emplace(inst->id, inst);
  persist(*inst, &inst->history.front(), true);
  return inst->id;
}

SubmitResult Ledger::submit_update(const std::string& instanceId, const UpdateTx& tx) {
  auto inst = find(instanceId);
  std::unique_lock lock(inst->mu);
  const CommitmentRecord& current = inst->history.back().record;
  PublicBinding binding{current.h_current, tx.S_new, tx.h_new};
  if (!verify(inst->vk, binding, tx.proof)) return {false, 0, "proof does not verify against the current commitment"};

  HistoryEntry entry;
  entry.seq = inst->history.size();
  entry.record = {tx.h_new, tx.ciphertext_new, tx.S_new};
  entry.proof = tx.proof;
  {
    std::lock_guard clock(clockMu_);
    entry.logicalTime = ++logicalClock_;
    entry.wallClockMs = options_.clock();
  }
  inst->history.push_back(entry);
  persist(*inst, &inst->history.back(), false);
  lock.unlock();
  inst->changed.notify_all();
  return {true, entry.seq, "accepted"};
}

CommitmentRecord Ledger::get_state(const std::string& instanceId) {
  auto inst = find(instanceId);
  std::lock_guard lock(inst->mu);
  return inst->history.back().record;
}

std::vector<HistoryEntry> Ledger::get_history(const std::string& instanceId, std::uint64_t from) {
  auto inst = find(instanceId);
  std::lock_guard lock(inst->mu);
  if (from >= inst->history.size()) return {};
  return {inst->history.begin() + static_cast<std::ptrdiff_t>(from), inst->history.end()};
}

std::vector<HistoryEntry> Ledger::wait_history(const std::string& instanceId, std::uint64_t from,
                                               std::chrono::milliseconds timeout) {
  auto inst = find(instanceId);
  std::unique_lock lock(inst->mu);
  inst->changed.wait_for(lock, timeout, [&] { return interrupted_ || inst->history.size() > from; });
  if (from >= inst->history.size()) return {};
  return {inst->history.begin() + static_cast<std::ptrdiff_t>(from), inst->history.end()};
}

std::unique_ptr<Subscription> Ledger::subscribe(const std::string& instanceId, std::uint64_t from) {
  find(instanceId);
  return std::make_unique<Subscription>(*this, instanceId, from);
}

std::vector<std::string> Ledger::instances() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : instances_) ids.push_back(id);
  return ids;
}

Digest Ledger::descriptor_digest(const std::string& instanceId) { return find(instanceId)->descriptorDigest; }

void Ledger::interrupt() {
  interrupted_ = true;
  std::lock_guard lock(mu_);
  for (auto& [_, inst] : instances_) {
    std::lock_guard il(inst->mu);
    inst->changed.notify_all();
  }
}

void Ledger::persist(const Instance& inst, const HistoryEntry* entry, bool header) {
  if (!options_.dataDir) return;
  std::ofstream out(*options_.dataDir / (inst.id + ".jsonl"), std::ios::app);
  if (header) {
    nlohmann::json h{{"type", "deploy"},
                     {"id", inst.id},
                     {"vk", to_hex(serialize_key(inst.vk))},
                     {"descriptorDigest", inst.descriptorDigest.hex()}};
    out << h.dump() << '\n';
  }
  if (entry) {
    auto j = to_json(*entry);
    j["type"] = "entry";
    out << j.dump() << '\n';
  }
  if (!out) throw LedgerError("IO", "cannot append to ledger log for " + inst.id);
}

void Ledger::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::string line;
  std::shared_ptr<Instance> inst;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.at("type") == "deploy") {
      inst = std::make_shared<Instance>();
      inst->id = j.at("id").get<std::string>();
      inst->vk = VerifierKey{parse_key(from_hex(j.at("vk").get<std::string>()))};
      inst->descriptorDigest = Digest::from_hex(j.at("descriptorDigest").get<std::string>());
    } else if (inst) {
      inst->history.push_back(entry_from_json(j));
    }
  }
  if (!inst || inst->history.empty()) throw LedgerError("IO", "corrupt ledger log " + file.string());
  logicalClock_ = std::max(logicalClock_, inst->history.back().logicalTime);
  instances_.emplace(inst->id, inst);
}

nlohmann::json to_json(const CommitmentRecord& r) {
  return {{"h", r.h_current.hex()}, {"ciphertext", to_hex(r.ciphertext)}, {"S", r.S_current.hex()}};
}

CommitmentRecord record_from_json(const nlohmann::json& j) {
  return {Commitment::from_hex(j.at("h").get<std::string>()), from_hex(j.at("ciphertext").get<std::string>()),
          Signature::from_hex(j.at("S").get<std::string>())};
}

nlohmann::json to_json(const UpdateTx& tx) {
  return {{"h_new", tx.h_new.hex()},
          {"ciphertext_new", to_hex(tx.ciphertext_new)},
          {"S_new", tx.S_new.hex()},
          {"proof", to_hex(serialize_proof(tx.proof))}};
}

UpdateTx tx_from_json(const nlohmann::json& j) {
  return {Commitment::from_hex(j.at("h_new").get<std::string>()), from_hex(j.at("ciphertext_new").get<std::string>()),
          Signature::from_hex(j.at("S_new").get<std::string>()),
          parse_proof(from_hex(j.at("proof").get<std::string>()))};
}

nlohmann::json to_json(const HistoryEntry& e) {
  nlohmann::json j = to_json(e.record);
  j["seq"] = e.seq;
  j["logicalTime"] = e.logicalTime;
  j["wallClockMs"] = e.wallClockMs;
  j["proof"] = e.proof ? nlohmann::json(to_hex(serialize_proof(*e.proof))) : nlohmann::json(nullptr);
  return j;
}

HistoryEntry entry_from_json(const nlohmann::json& j) {
  HistoryEntry e;
  e.record = record_from_json(j);
  e.seq = j.at("seq").get<std::uint64_t>();
  e.logicalTime = j.at("logicalTime").get<std::uint64_t>();
  e.wallClockMs = j.at("wallClockMs").get<std::int64_t>();
  if (!j.at("proof").is_null()) e.proof = parse_proof(from_hex(j.at("proof").get<std::string>()));
  return e;
}

}  // namespace zkwf
