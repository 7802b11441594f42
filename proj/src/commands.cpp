#include "zkwf/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "zkwf/bridge.hpp"
#include "zkwf/scenario.hpp"
#include "zkwf/schedule.hpp"

namespace zkwf::cli {

namespace {

constexpr const char* kDefaultLedgerUrl = "http://127.0.0.1:8750";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read '" + path + "'");
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

int exit_for(Rejection r) {
  switch (r) {
    case Rejection::HashMismatch: return kHashMismatch;
    case Rejection::BadTransition: return kBadTransition;
    case Rejection::BadAuth: return kBadAuth;
    case Rejection::BadSig: return kBadSig;
    case Rejection::None: break;
  }
  return kOk;
}

// Maps library exceptions to documented exit codes.
template <typename F>
int guarded(Io io, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    io.err << "parse error: " << e.what() << '\n';
    for (const auto& o : e.offenders()) io.err << "  " << o << '\n';
    return kParse;
  } catch (const ScenarioError& e) {
    io.err << "scenario error: " << e.what() << '\n';
    return kParse;
  } catch (const nlohmann::json::exception& e) {
    io.err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ModelError& e) {
    io.err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::ios_base::failure& e) {
    io.err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    io.err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ConnectionError& e) {
    io.err << "connection error: " << e.what() << '\n';
    return kConnection;
  } catch (const CongruenceViolation& e) {
    io.err << e.what() << '\n';
    return kCongruence;
  } catch (const StatementRefused& e) {
    io.err << "refused: " << e.what() << '\n';
    return exit_for(e.reason());
  } catch (const ProposeError& e) {
    io.err << "propose error: " << e.what() << '\n';
    return kProposeError;
  } catch (const LedgerError& e) {
    io.err << "ledger error [" << e.code() << "]: " << e.what() << '\n';
    return kLedgerReject;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

std::shared_ptr<const StatementDescriptor> load_descriptor_any(const std::string& path) {
  if (path.empty()) throw UsageError("a descriptor (--descriptor) is required");
  if (path.ends_with(".bpmn") || path.ends_with(".xml")) {
    return std::make_shared<const StatementDescriptor>(build_descriptor(load_bpmn_file(path)));
  }
  return std::make_shared<const StatementDescriptor>(load_descriptor_file(path));
}

Identity resolve(Identity id) {
  if (!id.configFile.empty()) {
    auto c = load_participant_config(id.configFile);
    auto base = std::filesystem::path(id.configFile).parent_path();
    auto rel = [&](const std::string& p) { return p.empty() ? p : (base / p).string(); };
    if (!c.keyFile.empty()) id.keyFile = rel(c.keyFile);
    if (!c.groupKeyFile.empty()) id.groupKeyFile = rel(c.groupKeyFile);
    if (!c.descriptor.empty()) id.descriptor = rel(c.descriptor);
    if (!c.ledgerUrl.empty()) id.ledgerUrl = c.ledgerUrl;
  }
  if (id.ledgerUrl.empty()) {
    const char* env = std::getenv("ZKWF_LEDGER_URL");
    id.ledgerUrl = env && *env ? env : kDefaultLedgerUrl;
  }
  return id;
}

KeyPair load_key(const std::string& path) {
  if (path.empty()) throw UsageError("a key file (--key) is required");
  try {
    return load_key_file(path);
  } catch (const nlohmann::json::exception& e) {
    throw std::ios_base::failure("key file '" + path + "' is unreadable: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::ios_base::failure("key file '" + path + "' is unreadable: " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::ios_base::failure(e.what());
  }
}

SymmetricKey load_group(const std::string& path) {
  if (path.empty()) throw UsageError("a group key file (--group-key) is required");
  try {
    return load_group_key(path);
  } catch (const std::runtime_error& e) {
    throw std::ios_base::failure(e.what());
  } catch (const std::exception& e) {
    throw std::ios_base::failure("group key '" + path + "' is unreadable: " + e.what());
  }
}

std::string fit(const std::string& s, std::size_t width) {
  return s.size() <= width ? s : s.substr(0, width - 1) + "~";
}

}  // namespace

int cmd_compile(Io io, const std::string& modelPath, const std::string& outPath) {
  return guarded(io, [&] {
    Model model = load_bpmn_file(modelPath);
    ValidationReport report = validate_structure(model);
    if (!report.empty()) {
      io.err << "model violates structural constraints:\n";
      for (const auto& issue : report) io.err << "  " << issue.code << ": " << issue.subject << " " << issue.detail << '\n';
      return static_cast<int>(kValidation);
    }
    StatementDescriptor d = build_descriptor(model);
    std::string target = outPath;
    if (target.empty()) {
      auto p = std::filesystem::path(modelPath);
      target = (p.parent_path() / p.stem()).string() + ".zkwf.json";
    }
    if (target == "-") {
      io.out << d.to_json().dump(2) << '\n';
    } else {
      save_descriptor_file(d, target);
      io.out << "wrote " << target << ": |T|=" << d.index.size() << " |P|=" << d.pArray.size()
             << " variables=" << d.variables.size() << " slots=" << d.msgSlots.size()
             << " digest=" << d.digest().hex() << '\n';
    }
    return static_cast<int>(kOk);
  });
}

int cmd_keygen(Io io, const std::string& outPath, const std::string& seed, bool group) {
  return guarded(io, [&] {
    if (outPath.empty()) throw UsageError("--out is required");
    if (group) {
      SymmetricKey key = seed.empty() ? system_random().fixed<32, SymmetricKeyTag>() : group_key_from_seed(seed);
      save_group_key(key, outPath);
      io.out << "wrote group key " << outPath << '\n';
    } else {
      KeyPair kp = seed.empty() ? KeyPair::generate(system_random()) : KeyPair::from_seed(seed);
      save_key_file(kp, outPath);
      io.out << kp.pk.hex() << '\n';
    }
    return static_cast<int>(kOk);
  });
}

int cmd_deploy(Io io, Identity flags) {
  return guarded(io, [&] {
    Identity id = resolve(flags);
    auto d = load_descriptor_any(id.descriptor);
    KeyPair kp = load_key(id.keyFile);
    SymmetricKey gk = load_group(id.groupKeyFile);
    if (!d->participantKeys.count(kp.pk)) {
      io.err << "refusing to deploy: key " << kp.pk.hex() << " is not a participant of this model\n";
      return static_cast<int>(kBadAuth);
    }
    HttpLedgerClient ledger(id.ledgerUrl);
    ParticipantEngine engine({kp, gk, d}, ledger);
    io.out << engine.deploy() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_step(Io io, Identity flags, const StepFlags& step) {
  return guarded(io, [&] {
    if (step.instance.empty()) throw UsageError("--instance is required");
    const int chosen = !step.complete.empty() + !step.start.empty() + step.fake;
    if (chosen != 1) throw UsageError("choose exactly one of --complete, --start, --fake");
    Identity id = resolve(flags);
    auto d = load_descriptor_any(id.descriptor);
    KeyPair kp = load_key(id.keyFile);
    SymmetricKey gk = load_group(id.groupKeyFile);
    if (!d->participantKeys.count(kp.pk)) throw StatementRefused(Rejection::BadAuth, "key is not a participant");

    StepAction action = step.fake ? StepAction::fake()
                        : step.start.empty() ? StepAction::complete(step.complete)
                                             : StepAction::start(step.start);
    for (const auto& kv : step.sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects var=value, got '" + kv + "'");
      try {
        action.writes[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
      } catch (const std::logic_error&) {
        throw UsageError("--set value is not a 64-bit integer: '" + kv + "'");
      }
    }
    if (!step.messageFile.empty()) action.message = read_file(step.messageFile);
    if (!step.branch.empty()) action.branch = step.branch;

    HttpLedgerClient ledger(id.ledgerUrl);
    ParticipantEngine engine({kp, gk, d}, ledger);
    StepOutcome out = engine.step(step.instance, action);
    if (!out.accepted) {
      io.out << "rejected: " << out.message << '\n';
      return static_cast<int>(kLedgerReject);
    }
    io.out << "accepted seq=" << *out.seq << " h=" << out.tx->h_new.hex() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_run_scenario(Io io, const std::string& scriptPath, const std::string& reportPath, bool wallClock,
                     const std::string& ledgerUrl) {
  return guarded(io, [&] {
    ScenarioScript script = load_scenario(scriptPath);
    ScenarioOptions options;
    options.virtualTime = !wallClock;
    std::unique_ptr<HttpLedgerClient> remote;
    if (!ledgerUrl.empty()) {
      remote = std::make_unique<HttpLedgerClient>(ledgerUrl);
      options.ledger = remote.get();
    }
    ScenarioReport report = run_scenario(script, options);
    io.out << "instance " << report.instanceId << '\n';
    for (const auto& s : report.steps) {
      io.out << (s.matches() ? "  ok    " : "  FAIL  ") << std::setw(3) << s.index << "  " << std::left
             << std::setw(10) << fit(s.as, 10) << std::setw(44) << fit(s.action, 44) << std::right << s.actual;
      if (!s.matches()) io.out << " (expected " << s.expected << ", line " << s.line << ")";
      io.out << '\n';
      if (!s.matches() && !s.detail.empty()) io.out << "        " << s.detail << '\n';
    }
    io.out << report.steps.size() << " steps, " << report.mismatches << " mismatches, " << std::fixed
           << std::setprecision(2) << report.seconds << " s\n";
    if (!reportPath.empty()) {
      std::ofstream out(reportPath);
      out << report.to_json().dump(2) << '\n';
      if (!out) throw std::ios_base::failure("cannot write report '" + reportPath + "'");
    }
    return static_cast<int>(report.mismatches == 0 ? kOk : kScenarioMismatch);
  });
}

int cmd_ring(Io io, const RingFlags& flags) {
  return guarded(io, [&] {
    ScenarioScript script = load_scenario(flags.scenario);
    auto descriptor = std::make_shared<const StatementDescriptor>(build_descriptor(load_bpmn_file(script.modelPath)));
    VirtualClock clock;
    Ledger::Options lo;
    if (!flags.wallClock) lo.clock = clock.source();
    Ledger ledger(lo);

    RingConfig cfg;
    cfg.quantumMs = flags.quantumMs;
    cfg.tailEpochs = flags.tailEpochs;
    cfg.minEpochs = flags.minEpochs;
    std::vector<std::unique_ptr<ParticipantEngine>> owned;
    std::vector<ParticipantEngine*> engines;
    for (const auto& [alias, kp] : script.participants) {
      cfg.participants.push_back(alias);
      owned.push_back(std::make_unique<ParticipantEngine>(ParticipantConfig{kp, script.groupKey, descriptor}, ledger));
      engines.push_back(owned.back().get());
    }
    std::deque<PendingAction> pending;
    for (const auto& s : script.steps) {
      if (s.expect != "accept" || !s.force.empty() || s.action.kind == StepAction::Kind::Fake) continue;
      pending.push_back({script.position_of(s.as), s.action});
    }
    const std::string instance = engines[script.position_of(script.deployer)]->deploy();
    RingReport report = run_ring(cfg, engines, instance, pending, flags.wallClock ? nullptr : &clock);

    io.out << "epoch  participant  decision  action\n";
    for (const auto& r : report.epochs) {
      io.out << std::setw(5) << r.epoch << "  " << std::left << std::setw(11) << fit(cfg.participants[r.participant], 11)
             << "  " << std::setw(8) << r.decision << "  " << r.action << std::right;
      if (!r.note.empty()) io.out << "  [" << r.note << "]";
      io.out << '\n';
    }
    auto metrics = measure(observe(ledger.get_history(instance), report.startMs, cfg.quantumMs), cfg.quantumMs);
    io.out << "\nobserver metrics\n";
    io.out << "  epochs spanned          " << metrics.epochsSpanned << '\n';
    for (const auto& [count, epochs] : metrics.txsPerEpoch) {
      io.out << "  epochs with " << count << " tx        " << epochs << '\n';
    }
    io.out << "  inter-arrival variance  " << metrics.interArrivalVariance << '\n';
    io.out << "  tx size variance        " << metrics.sizeVariance << '\n';
    io.out << "  exposure                " << (metrics.exposure ? "yes" : "no") << '\n';
    if (!flags.reportPath.empty()) {
      nlohmann::json j = report.to_json();
      j["metrics"] = metrics.to_json();
      std::ofstream out(flags.reportPath);
      out << j.dump(2) << '\n';
      if (!out) throw std::ios_base::failure("cannot write report '" + flags.reportPath + "'");
    }
    return static_cast<int>(report.errors == 0 ? kOk : kScenarioMismatch);
  });
}

int cmd_inspect(Io io, Identity flags, const std::string& instance) {
  return guarded(io, [&] {
    if (instance.empty()) throw UsageError("--instance is required");
    Identity id = resolve(flags);
    HttpLedgerClient ledger(id.ledgerUrl);
    auto history = ledger.get_history(instance);
    for (const auto& e : history) {
      io.out << "seq " << e.seq << "  t=" << e.logicalTime << "  clock=" << e.wallClockMs << '\n';
      io.out << "  h          " << e.record.h_current.hex() << '\n';
      io.out << "  S          " << e.record.S_current.hex() << '\n';
      io.out << "  ciphertext " << to_hex(e.record.ciphertext) << '\n';
      if (e.proof) io.out << "  proof      " << e.proof->backendId << ", " << e.proof->bytes.size() << " bytes\n";
    }
    if (id.groupKeyFile.empty() || id.descriptor.empty()) return static_cast<int>(kOk);

    auto d = load_descriptor_any(id.descriptor);
    SymmetricKey gk = load_group(id.groupKeyFile);
    const auto& last = history.back();
    std::optional<Commitment> prev;
    if (history.size() > 1) prev = history[history.size() - 2].record.h_current;
    DecryptedState opened;
    try {
      opened = decrypt_state(last.record.ciphertext, gk, StateShape::of(*d));
    } catch (const StateCodecError& e) {
      throw CongruenceViolation(identify_signer(*d, prev, last.record), last.seq, e.what());
    }
    if (commit(opened.state, opened.salt) != last.record.h_current) {
      throw CongruenceViolation(identify_signer(*d, prev, last.record), last.seq, "ciphertext does not open h_current");
    }
    io.out << "\ndecrypted state\n" << describe_state(*d, opened.state).dump(2) << '\n';
    auto broken = audit_chain(*d, history);
    io.out << "signature chain: " << (broken ? "broken at seq " + std::to_string(*broken) : std::string("intact")) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_serve(Io io, const std::string& host, int port, const std::string& dataDir) {
  return guarded(io, [&] {
    Ledger::Options lo;
    if (!dataDir.empty()) lo.dataDir = dataDir;
    Ledger ledger(lo);
    LedgerServer server(ledger);
    io.out << "ledger listening on http://" << host << ":" << port << std::endl;
    server.listen(host, port);
    return static_cast<int>(kOk);
  });
}

int cmd_bridge(Io io, Identity flags, const std::string& instance, const std::string& host, int port) {
  return guarded(io, [&] {
    if (instance.empty()) throw UsageError("--instance is required");
    Identity id = resolve(flags);
    auto d = load_descriptor_any(id.descriptor);
    HttpLedgerClient ledger(id.ledgerUrl);
    ParticipantEngine engine({load_key(id.keyFile), load_group(id.groupKeyFile), d}, ledger);
    BridgeServer bridge(engine, instance);
    io.out << "bridge listening on http://" << host << ":" << port << std::endl;
    bridge.listen(host, port);
    return static_cast<int>(kOk);
  });
}

}  // namespace zkwf::cli
