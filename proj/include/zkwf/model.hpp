#pragma once

// BPMN collaboration subset: parsing, structural validation, owner
// resolution and canonical serialization.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zkwf/crypto.hpp"

namespace zkwf {

enum class ElementKind {
  StartEvent,
  EndEvent,
  Task,
  MessageThrowEvent,
  MessageCatchEvent,
  ExclusiveGateway,
  ParallelGateway,
};

std::string_view to_string(ElementKind kind);
ElementKind element_kind_from_string(std::string_view name);

inline bool is_gateway(ElementKind k) {
  return k == ElementKind::ExclusiveGateway || k == ElementKind::ParallelGateway;
}
inline bool is_executable(ElementKind k) { return !is_gateway(k); }

struct Element {
  std::string id;
  std::string name;
  ElementKind kind = ElementKind::Task;
  std::string processId;
  std::optional<PublicKey> ownerKey;
  std::vector<std::string> writableVars;   // zkp:variables, tasks only
  std::optional<std::string> defaultFlow;  // exclusive gateways only

  bool operator==(const Element&) const = default;
};

struct SequenceFlow {
  std::string id;
  std::string source;
  std::string target;
  std::optional<std::string> condition;

  bool operator==(const SequenceFlow&) const = default;
};

struct MessageFlow {
  std::string id;
  std::string source;  // throw event
  std::string target;  // catch event

  bool operator==(const MessageFlow&) const = default;
};

struct Lane {
  std::string id;
  std::string name;
  std::optional<PublicKey> ownerKey;
  std::vector<std::string> members;
  std::optional<std::size_t> parent;  // index into Pool::lanes

  bool operator==(const Lane&) const = default;
};

struct Pool {
  std::string id;  // participant id, or the process id for a bare process
  std::string name;
  std::string processId;
  std::optional<PublicKey> ownerKey;
  std::vector<Lane> lanes;
  std::vector<std::string> members;

  bool operator==(const Pool&) const = default;
};

struct VariableDecl {
  std::string name;
  std::vector<std::string> writers;

  bool operator==(const VariableDecl&) const = default;
};

struct Model {
  std::vector<Element> elements;  // document order
  std::vector<SequenceFlow> flows;
  std::vector<MessageFlow> messageFlows;
  std::vector<Pool> pools;
  std::vector<VariableDecl> variables;  // order of first declaration
  std::set<PublicKey> participantKeys;

  const Element* find(std::string_view id) const;
  const Element& at(std::string_view id) const;
  std::vector<const SequenceFlow*> incoming(std::string_view id) const;
  std::vector<const SequenceFlow*> outgoing(std::string_view id) const;
  const SequenceFlow* flow(std::string_view id) const;
  const Pool* pool_of(std::string_view elementId) const;
  std::vector<std::string> variable_names() const;

  bool operator==(const Model& other) const;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Unsupported, MissingId, DanglingReference, InvalidAttribute, DuplicateId };
  ParseError(Kind kind, std::vector<std::string> offenders, const std::string& what);
  Kind kind() const { return kind_; }
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  Kind kind_;
  std::vector<std::string> offenders_;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Model parse_bpmn(std::string_view xml);
Model load_bpmn_file(const std::string& path);

/// BPMN XML for the model (no diagram interchange section).
std::string write_bpmn(const Model& model);

struct ValidationIssue {
  std::string code;  // e.g. "gateway not binary", "cycle"
  std::string subject;
  std::string detail;

  auto operator<=>(const ValidationIssue&) const = default;
};
using ValidationReport = std::vector<ValidationIssue>;

/// Sorted list of structural violations; empty iff the model is admissible.
ValidationReport validate_structure(const Model& model);

bool report_contains(const ValidationReport& report, std::string_view code);

/// Nearest zkp:publicKey on element, enclosing lanes (innermost first), pool.
PublicKey resolve_owner(const Model& model, std::string_view elementId);

/// Canonical JSON (sorted keys) and its SHA-256.
nlohmann::json model_to_json(const Model& model);
Digest model_digest(const Model& model);

}  // namespace zkwf
