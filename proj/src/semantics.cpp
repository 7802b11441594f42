#include "zkwf/semantics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace zkwf {

bool PEntry::is_join_firing() const {
  return join.has_value() && std::any_of(rows.begin(), rows.end(), [](const DeltaRow& r) { return r.delta == +1; });
}

std::optional<std::size_t> StatementDescriptor::position(std::string_view id) const {
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t StatementDescriptor::position_or_throw(std::string_view id) const {
  auto p = position(id);
  if (!p) throw ModelError("'" + std::string(id) + "' is not an executable element");
  return *p;
}

std::optional<std::size_t> StatementDescriptor::slot_of_throw(std::size_t t) const {
  for (std::size_t s = 0; s < msgSlots.size(); ++s) {
    if (msgSlots[s].throwIndex == t) return s;
  }
  return std::nullopt;
}

std::optional<std::size_t> StatementDescriptor::slot_of_catch(std::size_t t) const {
  for (std::size_t s = 0; s < msgSlots.size(); ++s) {
    if (msgSlots[s].catchIndex == t) return s;
  }
  return std::nullopt;
}

std::optional<std::size_t> StatementDescriptor::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == name) return i;
  }
  return std::nullopt;
}

bool StatementDescriptor::guard_holds(const PEntry& entry, std::span<const std::int64_t> vars) const {
  return std::all_of(entry.guard.begin(), entry.guard.end(), [&](const GuardLiteral& lit) {
    return conditions[lit.condition].expr.evaluate(vars) != lit.negated;
  });
}

namespace {

struct Outcome {
  std::vector<std::size_t> activations;
  std::optional<std::size_t> join;
  std::vector<GuardLiteral> guard;
};

class DescriptorBuilder {
 public:
  explicit DescriptorBuilder(const Model& m) : m_(m) {}

  StatementDescriptor build() {
    auto report = validate_structure(m_);
    if (!report.empty()) {
      throw ModelError("model violates structural constraints: " + report.front().code + " (" +
                       report.front().subject + ")");
    }
    d_.modelDigest = model_digest(m_);
    d_.participantKeys = m_.participantKeys;
    d_.variables = m_.variable_names();
    build_index();
    build_variables();
    build_conditions();
    build_joins();
    build_slots();
    build_entries();
    return std::move(d_);
  }

 private:
  std::size_t pos(const std::string& id) const { return d_.position_or_throw(id); }

  void build_index() {
    for (const auto& e : m_.elements) {
      if (!is_executable(e.kind)) continue;
      ExecutableInfo info;
      info.id = e.id;
      info.kind = e.kind;
      info.owner = resolve_owner(m_, e.id);
      for (std::size_t p = 0; p < m_.pools.size(); ++p) {
        const auto& members = m_.pools[p].members;
        if (std::find(members.begin(), members.end(), e.id) != members.end()) info.region = p;
      }
      d_.index.push_back(std::move(info));
    }
    if (d_.index.size() < 2) throw ModelError("a model needs at least a start and an end event");
  }

  void build_variables() {
    d_.varWriters.resize(d_.variables.size());
    for (std::size_t v = 0; v < m_.variables.size(); ++v) {
      for (const auto& w : m_.variables[v].writers) d_.varWriters[v].insert(pos(w));
    }
  }

  void build_conditions() {
    for (const auto& f : m_.flows) {
      if (!f.condition) continue;
      const Element& src = m_.at(f.source);
      if (src.kind != ElementKind::ExclusiveGateway) continue;
      condition_of_[f.id] = d_.conditions.size();
      d_.conditions.push_back({f.id, compile_condition(*f.condition, d_.variables)});
    }
  }

  void build_joins() {
    for (const auto& e : m_.elements) {
      if (e.kind != ElementKind::ParallelGateway) continue;
      auto in = m_.incoming(e.id);
      if (in.size() != 2) continue;
      JoinInfo j;
      j.gatewayId = e.id;
      j.predecessors = {pos(in[0]->source), pos(in[1]->source)};
      std::sort(j.predecessors.begin(), j.predecessors.end());
      j.successor = pos(m_.outgoing(e.id).at(0)->target);
      join_of_[e.id] = d_.joins.size();
      d_.joins.push_back(j);
    }
  }

  void build_slots() {
    for (std::size_t t = 0; t < d_.index.size(); ++t) {
      if (d_.index[t].kind != ElementKind::MessageThrowEvent) continue;
      for (const auto& mf : m_.messageFlows) {
        if (mf.source == d_.index[t].id) d_.msgSlots.push_back({t, pos(mf.target)});
      }
    }
  }

  GuardLiteral literal_for(const SequenceFlow& branch) const {
    if (branch.condition) return {condition_of_.at(branch.id), false};
    for (const auto* sibling : m_.outgoing(branch.source)) {
      if (sibling->id != branch.id && sibling->condition) return {condition_of_.at(sibling->id), true};
    }
    throw ModelError("exclusive gateway '" + branch.source + "' has no condition");
  }

  std::vector<Outcome> resolve(const SequenceFlow& flow) const {
    const Element& target = m_.at(flow.target);
    if (is_executable(target.kind)) return {Outcome{{pos(target.id)}, std::nullopt, {}}};
    auto in = m_.incoming(target.id);
    auto out = m_.outgoing(target.id);
    if (in.size() == 2) {
      if (target.kind == ElementKind::ParallelGateway) return {Outcome{{}, join_of_.at(target.id), {}}};
      return resolve(*out.at(0));
    }
    std::vector<Outcome> result;
    if (target.kind == ElementKind::ParallelGateway) {
      for (const auto& a : resolve(*out.at(0))) {
        for (const auto& b : resolve(*out.at(1))) {
          if (a.join || b.join) throw ModelError("parallel split '" + target.id + "' feeds a join directly");
          Outcome o;
          o.activations = a.activations;
          o.activations.insert(o.activations.end(), b.activations.begin(), b.activations.end());
          o.guard = a.guard;
          o.guard.insert(o.guard.end(), b.guard.begin(), b.guard.end());
          result.push_back(std::move(o));
        }
      }
      return result;
    }
    for (const auto* branch : out) {
      GuardLiteral lit = literal_for(*branch);
      for (auto o : resolve(*branch)) {
        o.guard.push_back(lit);
        result.push_back(std::move(o));
      }
    }
    return result;
  }

  void add_entry(PEntry entry) {
    std::sort(entry.guard.begin(), entry.guard.end());
    entry.guard.erase(std::unique(entry.guard.begin(), entry.guard.end()), entry.guard.end());
    if (std::find(d_.pArray.begin(), d_.pArray.end(), entry) == d_.pArray.end()) d_.pArray.push_back(std::move(entry));
  }

  void build_entries() {
    for (std::size_t t = 0; t < d_.index.size(); ++t) {
      const auto& info = d_.index[t];
      const auto idx = static_cast<std::int32_t>(t);
      if (info.kind == ElementKind::StartEvent) {
        PEntry start;
        start.rows[0] = {+1, idx};
        add_entry(start);
      }
      auto out = m_.outgoing(info.id);
      if (out.empty()) {
        PEntry terminal;
        terminal.rows[0] = {-1, idx};
        add_entry(terminal);
        continue;
      }
      for (const auto& outcome : resolve(*out.front())) {
        if (outcome.join) {
          PEntry waiting;
          waiting.rows[0] = {-1, idx};
          waiting.join = outcome.join;
          add_entry(waiting);
          PEntry firing = waiting;
          firing.rows[1] = {+1, static_cast<std::int32_t>(d_.joins[*outcome.join].successor)};
          add_entry(firing);
          continue;
        }
        if (outcome.activations.size() > kDeltaRows - 1) {
          throw ModelError("completing '" + info.id + "' would activate too many elements");
        }
        PEntry entry;
        entry.rows[0] = {-1, idx};
        auto acts = outcome.activations;
        std::sort(acts.begin(), acts.end());
        for (std::size_t k = 0; k < acts.size(); ++k) entry.rows[k + 1] = {+1, static_cast<std::int32_t>(acts[k])};
        entry.guard = outcome.guard;
        add_entry(entry);
      }
    }
  }

  const Model& m_;
  StatementDescriptor d_;
  std::map<std::string, std::size_t> condition_of_;
  std::map<std::string, std::size_t> join_of_;
};

}  // namespace

StatementDescriptor build_descriptor(const Model& model) { return DescriptorBuilder(model).build(); }

nlohmann::json StatementDescriptor::to_json() const {
  using nlohmann::json;
  json idx = json::array();
  for (const auto& e : index) {
    idx.push_back({{"id", e.id}, {"kind", to_string(e.kind)}, {"owner", e.owner.hex()}, {"region", e.region}});
  }
  json entries = json::array();
  for (const auto& p : pArray) {
    json rows = json::array();
    for (const auto& r : p.rows) rows.push_back({r.delta, r.index});
    json guard = json::array();
    for (const auto& g : p.guard) guard.push_back({g.condition, g.negated});
    entries.push_back({{"rows", rows}, {"guard", guard}, {"join", p.join ? json(*p.join) : json(nullptr)}});
  }
  json keys = json::array();
  for (const auto& k : participantKeys) keys.push_back(k.hex());
  json vars = json::array();
  for (std::size_t v = 0; v < variables.size(); ++v) {
    vars.push_back({{"name", variables[v]}, {"writers", std::vector<std::size_t>(varWriters[v].begin(), varWriters[v].end())}});
  }
  json slots = json::array();
  for (const auto& s : msgSlots) slots.push_back({s.throwIndex, s.catchIndex});
  json conds = json::array();
  for (const auto& c : conditions) conds.push_back({{"flow", c.flowId}, {"source", c.expr.source()}});
  json js = json::array();
  for (const auto& j : joins) {
    js.push_back({{"gateway", j.gatewayId}, {"predecessors", j.predecessors}, {"successor", j.successor}});
  }
  return {{"format", "zkwf-descriptor/1"},
          {"modelDigest", modelDigest.hex()},
          {"index", idx},
          {"pArray", entries},
          {"participantKeys", keys},
          {"variables", vars},
          {"msgSlots", slots},
          {"conditions", conds},
          {"joins", js}};
}

StatementDescriptor StatementDescriptor::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "zkwf-descriptor/1") throw ModelError("not a compiled model document");
  StatementDescriptor d;
  d.modelDigest = Digest::from_hex(doc.at("modelDigest").get<std::string>());
  for (const auto& e : doc.at("index")) {
    d.index.push_back({e.at("id").get<std::string>(), element_kind_from_string(e.at("kind").get<std::string>()),
                       PublicKey::from_hex(e.at("owner").get<std::string>()), e.at("region").get<std::size_t>()});
  }
  for (const auto& k : doc.at("participantKeys")) d.participantKeys.insert(PublicKey::from_hex(k.get<std::string>()));
  for (const auto& v : doc.at("variables")) {
    d.variables.push_back(v.at("name").get<std::string>());
    auto w = v.at("writers").get<std::vector<std::size_t>>();
    d.varWriters.emplace_back(w.begin(), w.end());
  }
  for (const auto& s : doc.at("msgSlots")) d.msgSlots.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
  for (const auto& c : doc.at("conditions")) {
    d.conditions.push_back({c.at("flow").get<std::string>(), compile_condition(c.at("source").get<std::string>(), d.variables)});
  }
  for (const auto& j : doc.at("joins")) {
    d.joins.push_back({j.at("gateway").get<std::string>(), j.at("predecessors").get<std::array<std::size_t, 2>>(),
                       j.at("successor").get<std::size_t>()});
  }
  const auto n = static_cast<std::int32_t>(d.index.size());
  for (const auto& p : doc.at("pArray")) {
    PEntry entry;
    for (std::size_t r = 0; r < kDeltaRows; ++r) {
      entry.rows[r] = {p.at("rows").at(r).at(0).get<std::int8_t>(), p.at("rows").at(r).at(1).get<std::int32_t>()};
      if (!entry.rows[r].is_padding() && (entry.rows[r].index < 0 || entry.rows[r].index >= n)) {
        throw ModelError("P entry references an index outside T");
      }
    }
    for (const auto& g : p.at("guard")) {
      entry.guard.push_back({g.at(0).get<std::size_t>(), g.at(1).get<bool>()});
      if (entry.guard.back().condition >= d.conditions.size()) throw ModelError("guard references unknown condition");
    }
    if (!p.at("join").is_null()) entry.join = p.at("join").get<std::size_t>();
    d.pArray.push_back(std::move(entry));
  }
  return d;
}

Digest StatementDescriptor::digest() const { return sha256(as_bytes(to_json().dump())); }

StatementDescriptor load_descriptor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read descriptor '" + path + "'");
  return StatementDescriptor::from_json(nlohmann::json::parse(in));
}

void save_descriptor_file(const StatementDescriptor& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write descriptor '" + path + "'");
  out << d.to_json().dump(2) << "\n";
  if (!out) throw std::ios_base::failure("cannot write descriptor '" + path + "'");
}

}  // namespace zkwf
