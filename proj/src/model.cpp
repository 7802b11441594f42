#include "zkwf/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace zkwf {

namespace {

constexpr std::pair<ElementKind, std::string_view> kKindNames[] = {
    {ElementKind::StartEvent, "StartEvent"},
    {ElementKind::EndEvent, "EndEvent"},
    {ElementKind::Task, "Task"},
    {ElementKind::MessageThrowEvent, "MessageThrowEvent"},
    {ElementKind::MessageCatchEvent, "MessageCatchEvent"},
    {ElementKind::ExclusiveGateway, "ExclusiveGateway"},
    {ElementKind::ParallelGateway, "ParallelGateway"},
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

ElementKind element_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown element kind '" + std::string(name) + "'");
}

ParseError::ParseError(Kind kind, std::vector<std::string> offenders, const std::string& what)
    : std::runtime_error(offenders.empty() ? what : what + ": " + join(offenders)),
      kind_(kind),
      offenders_(std::move(offenders)) {}

const Element* Model::find(std::string_view id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const Element& Model::at(std::string_view id) const {
  const Element* e = find(id);
  if (!e) throw ModelError("no element '" + std::string(id) + "'");
  return *e;
}

std::vector<const SequenceFlow*> Model::incoming(std::string_view id) const {
  std::vector<const SequenceFlow*> out;
  for (const auto& f : flows) {
    if (f.target == id) out.push_back(&f);
  }
  return out;
}

std::vector<const SequenceFlow*> Model::outgoing(std::string_view id) const {
  std::vector<const SequenceFlow*> out;
  for (const auto& f : flows) {
    if (f.source == id) out.push_back(&f);
  }
  return out;
}

const SequenceFlow* Model::flow(std::string_view id) const {
  for (const auto& f : flows) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const Pool* Model::pool_of(std::string_view elementId) const {
  for (const auto& p : pools) {
    if (std::find(p.members.begin(), p.members.end(), elementId) != p.members.end()) return &p;
  }
  return nullptr;
}

std::vector<std::string> Model::variable_names() const {
  std::vector<std::string> out;
  out.reserve(variables.size());
  for (const auto& v : variables) out.push_back(v.name);
  return out;
}

bool Model::operator==(const Model& other) const {
  return elements == other.elements && flows == other.flows && messageFlows == other.messageFlows &&
         pools == other.pools && variables == other.variables && participantKeys == other.participantKeys;
}

bool report_contains(const ValidationReport& report, std::string_view code) {
  return std::any_of(report.begin(), report.end(), [&](const ValidationIssue& i) { return i.code == code; });
}

PublicKey resolve_owner(const Model& model, std::string_view elementId) {
  const Element& e = model.at(elementId);
  if (!is_executable(e.kind)) throw ModelError("'" + e.id + "' is not an executable element");
  if (e.ownerKey) return *e.ownerKey;
  const Pool* pool = model.pool_of(elementId);
  if (pool) {
    // Innermost lane first: a lane is deeper than every lane on its parent chain.
    std::optional<std::size_t> best;
    std::size_t best_depth = 0;
    for (std::size_t i = 0; i < pool->lanes.size(); ++i) {
      const Lane& lane = pool->lanes[i];
      if (std::find(lane.members.begin(), lane.members.end(), elementId) == lane.members.end()) continue;
      std::size_t depth = 0;
      for (auto p = lane.parent; p; p = pool->lanes[*p].parent) ++depth;
      if (!best || depth > best_depth) {
        best = i;
        best_depth = depth;
      }
    }
    for (auto l = best; l; l = pool->lanes[*l].parent) {
      if (pool->lanes[*l].ownerKey) return *pool->lanes[*l].ownerKey;
    }
    if (pool->ownerKey) return *pool->ownerKey;
  }
  throw ModelError("unowned executable element '" + e.id + "'");
}

nlohmann::json model_to_json(const Model& model) {
  using nlohmann::json;
  auto key_or_null = [](const std::optional<PublicKey>& k) { return k ? json(k->hex()) : json(nullptr); };

  json elements = json::array();
  for (const auto& e : model.elements) {
    elements.push_back({{"id", e.id},
                        {"name", e.name},
                        {"kind", to_string(e.kind)},
                        {"process", e.processId},
                        {"publicKey", key_or_null(e.ownerKey)},
                        {"variables", e.writableVars},
                        {"default", e.defaultFlow ? json(*e.defaultFlow) : json(nullptr)}});
  }
  json flows = json::array();
  for (const auto& f : model.flows) {
    flows.push_back({{"id", f.id},
                     {"source", f.source},
                     {"target", f.target},
                     {"condition", f.condition ? json(*f.condition) : json(nullptr)}});
  }
  json messageFlows = json::array();
  for (const auto& f : model.messageFlows) {
    messageFlows.push_back({{"id", f.id}, {"source", f.source}, {"target", f.target}});
  }
  json pools = json::array();
  for (const auto& p : model.pools) {
    json lanes = json::array();
    for (const auto& l : p.lanes) {
      lanes.push_back({{"id", l.id},
                       {"name", l.name},
                       {"publicKey", key_or_null(l.ownerKey)},
                       {"members", l.members},
                       {"parent", l.parent ? json(*l.parent) : json(nullptr)}});
    }
    pools.push_back({{"id", p.id},
                     {"name", p.name},
                     {"process", p.processId},
                     {"publicKey", key_or_null(p.ownerKey)},
                     {"lanes", lanes},
                     {"members", p.members}});
  }
  json variables = json::array();
  for (const auto& v : model.variables) variables.push_back({{"name", v.name}, {"writers", v.writers}});
  json keys = json::array();
  for (const auto& k : model.participantKeys) keys.push_back(k.hex());

  return {{"elements", elements},
          {"flows", flows},
          {"messageFlows", messageFlows},
          {"pools", pools},
          {"variables", variables},
          {"participantKeys", keys}};
}

Digest model_digest(const Model& model) { return sha256(as_bytes(model_to_json(model).dump())); }

Model load_bpmn_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bpmn(buf.str());
}

}  // namespace zkwf
