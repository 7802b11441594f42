#include <expat.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "zkwf/model.hpp"

namespace zkwf {

namespace {

constexpr std::string_view kBpmnNs = "http://www.omg.org/spec/BPMN/20100524/MODEL";
constexpr std::string_view kZkpNs = "http://zkwf.dev/schema/zkp";
constexpr char kNsSep = '\x1f';

struct XmlAttr {
  std::string ns;
  std::string local;
  std::string prefix;
  std::string value;
};

struct XmlNode {
  std::string ns;
  std::string local;
  std::vector<XmlAttr> attrs;
  std::vector<std::unique_ptr<XmlNode>> children;
  std::string text;
  long line = 0;

  bool is_bpmn() const { return ns.empty() || ns == kBpmnNs; }

  const std::string* attr(std::string_view name) const {
    for (const auto& a : attrs) {
      if (a.prefix.empty() && a.local == name) return &a.value;
    }
    return nullptr;
  }
  const std::string* zkp_attr(std::string_view name) const {
    for (const auto& a : attrs) {
      if (a.prefix == "zkp" && a.local == name) return &a.value;
    }
    return nullptr;
  }
};

// Splits an expat triplet "uri<sep>local<sep>prefix".
void split_name(const char* raw, std::string& ns, std::string& local, std::string& prefix) {
  std::string s(raw);
  auto first = s.find(kNsSep);
  if (first == std::string::npos) {
    ns.clear();
    local = s;
    prefix.clear();
    return;
  }
  ns = s.substr(0, first);
  auto second = s.find(kNsSep, first + 1);
  if (second == std::string::npos) {
    local = s.substr(first + 1);
    prefix.clear();
  } else {
    local = s.substr(first + 1, second - first - 1);
    prefix = s.substr(second + 1);
  }
}

struct DomBuilder {
  std::unique_ptr<XmlNode> root;
  std::vector<XmlNode*> stack;
  XML_Parser parser = nullptr;

  static void on_start(void* ud, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<DomBuilder*>(ud);
    auto node = std::make_unique<XmlNode>();
    std::string prefix;
    split_name(name, node->ns, node->local, prefix);
    node->line = static_cast<long>(XML_GetCurrentLineNumber(self->parser));
    for (int i = 0; atts[i]; i += 2) {
      XmlAttr a;
      split_name(atts[i], a.ns, a.local, a.prefix);
      a.value = atts[i + 1];
      node->attrs.push_back(std::move(a));
    }
    XmlNode* raw = node.get();
    if (self->stack.empty()) {
      self->root = std::move(node);
    } else {
      self->stack.back()->children.push_back(std::move(node));
    }
    self->stack.push_back(raw);
  }
  static void on_end(void* ud, const XML_Char*) { static_cast<DomBuilder*>(ud)->stack.pop_back(); }
  static void on_text(void* ud, const XML_Char* s, int len) {
    auto* self = static_cast<DomBuilder*>(ud);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<XmlNode> parse_dom(std::string_view xml) {
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreateNS(nullptr, kNsSep),
                                                                       &XML_ParserFree);
  if (!parser) throw std::bad_alloc();
  DomBuilder builder;
  builder.parser = parser.get();
  XML_SetReturnNSTriplet(parser.get(), 1);
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &DomBuilder::on_start, &DomBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &DomBuilder::on_text);
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), 1) == XML_STATUS_ERROR) {
    std::ostringstream msg;
    msg << "XML syntax error at line " << XML_GetCurrentLineNumber(parser.get()) << ": "
        << XML_ErrorString(XML_GetErrorCode(parser.get()));
    throw ParseError(ParseError::Kind::Syntax, {}, msg.str());
  }
  if (!builder.root) throw ParseError(ParseError::Kind::Syntax, {}, "empty document");
  return std::move(builder.root);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

class ModelReader {
 public:
  Model read(const XmlNode& root) {
    if (!root.is_bpmn() || root.local != "definitions") {
      throw ParseError(ParseError::Kind::Unsupported, {root.local}, "document root must be bpmn:definitions");
    }
    for (const auto& child : root.children) {
      if (!child->is_bpmn()) continue;  // diagram interchange and foreign extensions
      const std::string& tag = child->local;
      if (tag == "collaboration") read_collaboration(*child);
      else if (tag == "process") read_process(*child);
      else if (tag == "message" || tag == "documentation" || tag == "extensionElements") continue;
      else unsupported(*child);
    }
    raise_collected();
    assemble_pools();
    check_references();
    collect_variables();
    return std::move(model_);
  }

 private:
  struct Participant {
    std::string id, name, processRef;
    std::optional<PublicKey> key;
  };
  struct ProcessInfo {
    std::string id;
    std::optional<PublicKey> key;
    std::vector<Lane> lanes;
    std::vector<std::string> members;
  };

  void unsupported(const XmlNode& n) {
    std::string what = n.local;
    if (const auto* id = n.attr("id")) what += " '" + *id + "'";
    what += " (line " + std::to_string(n.line) + ")";
    unsupported_.push_back(what);
  }

  std::optional<std::string> require_id(const XmlNode& n) {
    const auto* id = n.attr("id");
    if (!id || id->empty()) {
      missing_ids_.push_back(n.local + " (line " + std::to_string(n.line) + ")");
      return std::nullopt;
    }
    if (!ids_.insert(*id).second) duplicates_.push_back(*id);
    return *id;
  }

  std::optional<PublicKey> read_key(const XmlNode& n, const std::string& owner) {
    const auto* raw = n.zkp_attr("publicKey");
    if (!raw) return std::nullopt;
    try {
      auto key = PublicKey::from_hex(trim(*raw));
      model_.participantKeys.insert(key);
      return key;
    } catch (const std::invalid_argument&) {
      invalid_.push_back("zkp:publicKey on '" + owner + "' is not 32 hex-encoded bytes");
      return std::nullopt;
    }
  }

  void read_collaboration(const XmlNode& collab) {
    require_id(collab);
    for (const auto& child : collab.children) {
      if (!child->is_bpmn()) continue;
      const std::string& tag = child->local;
      if (tag == "participant") {
        auto id = require_id(*child);
        if (!id) continue;
        Participant p;
        p.id = *id;
        if (const auto* n = child->attr("name")) p.name = *n;
        if (const auto* ref = child->attr("processRef")) p.processRef = *ref;
        p.key = read_key(*child, p.id);
        participants_.push_back(std::move(p));
      } else if (tag == "messageFlow") {
        auto id = require_id(*child);
        if (!id) continue;
        MessageFlow mf;
        mf.id = *id;
        if (const auto* s = child->attr("sourceRef")) mf.source = *s;
        if (const auto* t = child->attr("targetRef")) mf.target = *t;
        model_.messageFlows.push_back(std::move(mf));
      } else if (tag == "documentation" || tag == "extensionElements") {
        continue;
      } else {
        unsupported(*child);
      }
    }
  }

  void read_lanes(const XmlNode& laneSet, ProcessInfo& proc, std::optional<std::size_t> parent) {
    for (const auto& child : laneSet.children) {
      if (!child->is_bpmn()) continue;
      if (child->local != "lane") {
        if (child->local != "documentation" && child->local != "extensionElements") unsupported(*child);
        continue;
      }
      auto id = require_id(*child);
      if (!id) continue;
      Lane lane;
      lane.id = *id;
      if (const auto* n = child->attr("name")) lane.name = *n;
      lane.ownerKey = read_key(*child, lane.id);
      lane.parent = parent;
      std::size_t index = proc.lanes.size();
      proc.lanes.push_back(lane);
      for (const auto& sub : child->children) {
        if (!sub->is_bpmn()) continue;
        if (sub->local == "flowNodeRef") {
          proc.lanes[index].members.push_back(trim(sub->text));
        } else if (sub->local == "childLaneSet") {
          read_lanes(*sub, proc, index);
        } else if (sub->local != "documentation" && sub->local != "extensionElements") {
          unsupported(*sub);
        }
      }
    }
  }

  bool has_message_definition(const XmlNode& n) {
    bool message = false;
    for (const auto& c : n.children) {
      if (!c->is_bpmn()) continue;
      if (c->local == "messageEventDefinition") message = true;
      else if (c->local.size() > 15 && c->local.ends_with("EventDefinition")) unsupported(*c);
    }
    return message;
  }

  bool has_event_definition(const XmlNode& n) {
    return std::any_of(n.children.begin(), n.children.end(), [](const auto& c) {
      return c->is_bpmn() && c->local.ends_with("EventDefinition");
    });
  }

  // Child tags permitted inside flow nodes; anything else is unsupported.
  void check_node_children(const XmlNode& n) {
    static const std::set<std::string> kAllowed = {"incoming", "outgoing", "documentation", "extensionElements",
                                                   "messageEventDefinition"};
    for (const auto& c : n.children) {
      if (!c->is_bpmn()) continue;
      if (!kAllowed.count(c->local) && !c->local.ends_with("EventDefinition")) unsupported(*c);
    }
  }

  void read_process(const XmlNode& proc_node) {
    auto pid = require_id(proc_node);
    if (!pid) return;
    ProcessInfo proc;
    proc.id = *pid;
    proc.key = read_key(proc_node, proc.id);
    for (const auto& child : proc_node.children) {
      if (!child->is_bpmn()) continue;
      const XmlNode& n = *child;
      const std::string& tag = n.local;
      if (tag == "documentation" || tag == "extensionElements") continue;
      if (tag == "laneSet") {
        read_lanes(n, proc, std::nullopt);
        continue;
      }
      if (tag == "sequenceFlow") {
        read_sequence_flow(n);
        continue;
      }
      std::optional<ElementKind> kind;
      if (tag == "startEvent") {
        if (has_event_definition(n)) {
          unsupported(n);
          continue;
        }
        kind = ElementKind::StartEvent;
      } else if (tag == "endEvent") {
        if (has_event_definition(n)) {
          unsupported(n);
          continue;
        }
        kind = ElementKind::EndEvent;
      } else if (tag == "task" || tag == "userTask" || tag == "manualTask") {
        kind = ElementKind::Task;
      } else if (tag == "intermediateThrowEvent" || tag == "intermediateCatchEvent") {
        if (!has_message_definition(n)) {
          unsupported(n);
          continue;
        }
        kind = tag == "intermediateThrowEvent" ? ElementKind::MessageThrowEvent : ElementKind::MessageCatchEvent;
      } else if (tag == "exclusiveGateway") {
        kind = ElementKind::ExclusiveGateway;
      } else if (tag == "parallelGateway") {
        kind = ElementKind::ParallelGateway;
      } else {
        unsupported(n);
        continue;
      }
      check_node_children(n);
      auto id = require_id(n);
      if (!id) continue;
      Element e;
      e.id = *id;
      e.kind = *kind;
      e.processId = proc.id;
      if (const auto* name = n.attr("name")) e.name = *name;
      if (is_gateway(e.kind)) {
        if (n.zkp_attr("publicKey")) invalid_.push_back("gateway '" + e.id + "' must not carry zkp:publicKey");
        if (e.kind == ElementKind::ExclusiveGateway) {
          if (const auto* d = n.attr("default")) e.defaultFlow = *d;
        }
      } else {
        e.ownerKey = read_key(n, e.id);
      }
      if (const auto* vars = n.zkp_attr("variables")) {
        if (e.kind != ElementKind::Task) {
          invalid_.push_back("zkp:variables on '" + e.id + "' (only tasks may write variables)");
        } else {
          std::stringstream ss(*vars);
          std::string item;
          while (std::getline(ss, item, ',')) {
            std::string name = trim(item);
            if (name.empty()) continue;
            if (!is_identifier(name)) {
              invalid_.push_back("variable name '" + name + "' on '" + e.id + "'");
              continue;
            }
            if (std::find(e.writableVars.begin(), e.writableVars.end(), name) == e.writableVars.end()) {
              e.writableVars.push_back(name);
            }
          }
        }
      }
      proc.members.push_back(e.id);
      model_.elements.push_back(std::move(e));
    }
    processes_.push_back(std::move(proc));
  }

  void read_sequence_flow(const XmlNode& n) {
    auto id = require_id(n);
    if (!id) return;
    SequenceFlow f;
    f.id = *id;
    if (const auto* s = n.attr("sourceRef")) f.source = *s;
    if (const auto* t = n.attr("targetRef")) f.target = *t;
    for (const auto& c : n.children) {
      if (!c->is_bpmn()) continue;
      if (c->local == "conditionExpression") {
        std::string text = trim(c->text);
        if (!text.empty()) f.condition = text;
      } else if (c->local != "documentation" && c->local != "extensionElements") {
        unsupported(*c);
      }
    }
    model_.flows.push_back(std::move(f));
  }

  void raise_collected() {
    if (!unsupported_.empty()) {
      throw ParseError(ParseError::Kind::Unsupported, unsupported_, "unsupported element");
    }
    if (!missing_ids_.empty()) throw ParseError(ParseError::Kind::MissingId, missing_ids_, "missing id");
    if (!duplicates_.empty()) throw ParseError(ParseError::Kind::DuplicateId, duplicates_, "duplicate id");
    if (!invalid_.empty()) throw ParseError(ParseError::Kind::InvalidAttribute, invalid_, "invalid attribute");
  }

  void assemble_pools() {
    std::set<std::string> claimed;
    for (const auto& p : participants_) {
      auto it = std::find_if(processes_.begin(), processes_.end(),
                             [&](const ProcessInfo& pi) { return pi.id == p.processRef; });
      if (it == processes_.end()) {
        // Black-box pool without a process: nothing executable inside.
        dangling_.push_back("participant '" + p.id + "' processRef '" + p.processRef + "'");
        continue;
      }
      claimed.insert(it->id);
      Pool pool;
      pool.id = p.id;
      pool.name = p.name;
      pool.processId = it->id;
      pool.ownerKey = p.key ? p.key : it->key;
      pool.lanes = it->lanes;
      pool.members = it->members;
      model_.pools.push_back(std::move(pool));
    }
    for (const auto& pi : processes_) {
      if (claimed.count(pi.id)) continue;
      Pool pool;
      pool.id = pi.id;
      pool.processId = pi.id;
      pool.ownerKey = pi.key;
      pool.lanes = pi.lanes;
      pool.members = pi.members;
      model_.pools.push_back(std::move(pool));
    }
  }

  void check_references() {
    auto element_exists = [&](const std::string& id) { return model_.find(id) != nullptr; };
    for (const auto& f : model_.flows) {
      if (!element_exists(f.source)) dangling_.push_back("sequenceFlow '" + f.id + "' sourceRef '" + f.source + "'");
      if (!element_exists(f.target)) dangling_.push_back("sequenceFlow '" + f.id + "' targetRef '" + f.target + "'");
    }
    for (const auto& f : model_.messageFlows) {
      if (!element_exists(f.source)) dangling_.push_back("messageFlow '" + f.id + "' sourceRef '" + f.source + "'");
      if (!element_exists(f.target)) dangling_.push_back("messageFlow '" + f.id + "' targetRef '" + f.target + "'");
    }
    for (const auto& p : model_.pools) {
      for (const auto& l : p.lanes) {
        for (const auto& m : l.members) {
          if (std::find(p.members.begin(), p.members.end(), m) == p.members.end()) {
            dangling_.push_back("lane '" + l.id + "' flowNodeRef '" + m + "'");
          }
        }
      }
    }
    for (const auto& e : model_.elements) {
      if (e.defaultFlow && !model_.flow(*e.defaultFlow)) {
        dangling_.push_back("gateway '" + e.id + "' default '" + *e.defaultFlow + "'");
      }
    }
    if (!dangling_.empty()) throw ParseError(ParseError::Kind::DanglingReference, dangling_, "dangling reference");
  }

  void collect_variables() {
    for (const auto& e : model_.elements) {
      for (const auto& name : e.writableVars) {
        auto it = std::find_if(model_.variables.begin(), model_.variables.end(),
                               [&](const VariableDecl& v) { return v.name == name; });
        if (it == model_.variables.end()) {
          model_.variables.push_back({name, {e.id}});
        } else {
          it->writers.push_back(e.id);
        }
      }
    }
  }

  Model model_;
  std::vector<Participant> participants_;
  std::vector<ProcessInfo> processes_;
  std::set<std::string> ids_;
  std::vector<std::string> unsupported_, missing_ids_, duplicates_, invalid_, dangling_;
};

// ---- writer ----

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string key_attr(const std::optional<PublicKey>& k) {
  return k ? " zkp:publicKey=\"" + k->hex() + "\"" : std::string();
}

std::string tag_for(const Element& e) {
  switch (e.kind) {
    case ElementKind::StartEvent: return "startEvent";
    case ElementKind::EndEvent: return "endEvent";
    case ElementKind::Task: return "task";
    case ElementKind::MessageThrowEvent: return "intermediateThrowEvent";
    case ElementKind::MessageCatchEvent: return "intermediateCatchEvent";
    case ElementKind::ExclusiveGateway: return "exclusiveGateway";
    case ElementKind::ParallelGateway: return "parallelGateway";
  }
  return "task";
}

void write_lanes(std::ostringstream& out, const Pool& pool, std::optional<std::size_t> parent, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  for (std::size_t i = 0; i < pool.lanes.size(); ++i) {
    const Lane& l = pool.lanes[i];
    if (l.parent != parent) continue;
    out << pad << "<bpmn:lane id=\"" << escape(l.id) << "\" name=\"" << escape(l.name) << "\""
        << key_attr(l.ownerKey) << ">\n";
    for (const auto& m : l.members) out << pad << "  <bpmn:flowNodeRef>" << escape(m) << "</bpmn:flowNodeRef>\n";
    bool has_children = std::any_of(pool.lanes.begin(), pool.lanes.end(),
                                    [&](const Lane& c) { return c.parent == std::optional<std::size_t>(i); });
    if (has_children) {
      out << pad << "  <bpmn:childLaneSet id=\"" << escape(l.id) << "_children\">\n";
      write_lanes(out, pool, i, indent + 4);
      out << pad << "  </bpmn:childLaneSet>\n";
    }
    out << pad << "</bpmn:lane>\n";
  }
}

}  // namespace

Model parse_bpmn(std::string_view xml) {
  auto dom = parse_dom(xml);
  return ModelReader().read(*dom);
}

std::string write_bpmn(const Model& model) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<bpmn:definitions xmlns:bpmn=\"" << kBpmnNs << "\" xmlns:zkp=\"" << kZkpNs
      << "\" id=\"Definitions_zkwf\" targetNamespace=\"http://bpmn.io/schema/bpmn\">\n";
  bool any_participant = std::any_of(model.pools.begin(), model.pools.end(),
                                     [](const Pool& p) { return p.id != p.processId; });
  if (any_participant || !model.messageFlows.empty()) {
    out << "  <bpmn:collaboration id=\"Collaboration_zkwf\">\n";
    for (const auto& p : model.pools) {
      if (p.id == p.processId) continue;
      out << "    <bpmn:participant id=\"" << escape(p.id) << "\" name=\"" << escape(p.name) << "\" processRef=\""
          << escape(p.processId) << "\"" << key_attr(p.ownerKey) << " />\n";
    }
    for (const auto& f : model.messageFlows) {
      out << "    <bpmn:messageFlow id=\"" << escape(f.id) << "\" sourceRef=\"" << escape(f.source)
          << "\" targetRef=\"" << escape(f.target) << "\" />\n";
    }
    out << "  </bpmn:collaboration>\n";
  }
  for (const auto& p : model.pools) {
    out << "  <bpmn:process id=\"" << escape(p.processId) << "\" isExecutable=\"true\""
        << (p.id == p.processId ? key_attr(p.ownerKey) : std::string()) << ">\n";
    if (!p.lanes.empty()) {
      out << "    <bpmn:laneSet id=\"" << escape(p.processId) << "_lanes\">\n";
      write_lanes(out, p, std::nullopt, 6);
      out << "    </bpmn:laneSet>\n";
    }
    for (const auto& e : model.elements) {
      if (e.processId != p.processId) continue;
      out << "    <bpmn:" << tag_for(e) << " id=\"" << escape(e.id) << "\" name=\"" << escape(e.name) << "\""
          << key_attr(e.ownerKey);
      if (!e.writableVars.empty()) {
        std::string vars;
        for (const auto& v : e.writableVars) vars += (vars.empty() ? "" : ",") + v;
        out << " zkp:variables=\"" << escape(vars) << "\"";
      }
      if (e.defaultFlow) out << " default=\"" << escape(*e.defaultFlow) << "\"";
      if (e.kind == ElementKind::MessageThrowEvent || e.kind == ElementKind::MessageCatchEvent) {
        out << ">\n      <bpmn:messageEventDefinition id=\"" << escape(e.id) << "_def\" />\n    </bpmn:"
            << tag_for(e) << ">\n";
      } else {
        out << " />\n";
      }
    }
    for (const auto& f : model.flows) {
      const Element* src = model.find(f.source);
      if (!src || src->processId != p.processId) continue;
      out << "    <bpmn:sequenceFlow id=\"" << escape(f.id) << "\" sourceRef=\"" << escape(f.source)
          << "\" targetRef=\"" << escape(f.target) << "\"";
      if (f.condition) {
        out << ">\n      <bpmn:conditionExpression>" << escape(*f.condition)
            << "</bpmn:conditionExpression>\n    </bpmn:sequenceFlow>\n";
      } else {
        out << " />\n";
      }
    }
    out << "  </bpmn:process>\n";
  }
  out << "</bpmn:definitions>\n";
  return out.str();
}

}  // namespace zkwf
