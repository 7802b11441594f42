#pragma once

// Compilation of a validated model into the statement descriptor: the
// executable index, the table of admissible one-step token-marking deltas,
// compiled gateway conditions and authorization data.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zkwf/condition.hpp"
#include "zkwf/model.hpp"

namespace zkwf {

/// One row of a marking delta: +1 activation, -1 completion, 0 padding.
struct DeltaRow {
  std::int8_t delta = 0;
  std::int32_t index = -1;

  static constexpr DeltaRow padding() { return {0, -1}; }
  bool is_padding() const { return delta == 0; }
  auto operator<=>(const DeltaRow&) const = default;
};

constexpr std::size_t kDeltaRows = 3;
using DeltaRows = std::array<DeltaRow, kDeltaRows>;

/// Conjunct of an entry guard: condition `condition` must evaluate to !negated.
struct GuardLiteral {
  std::size_t condition = 0;
  bool negated = false;
  auto operator<=>(const GuardLiteral&) const = default;
};

struct PEntry {
  DeltaRows rows{DeltaRow::padding(), DeltaRow::padding(), DeltaRow::padding()};
  std::vector<GuardLiteral> guard;
  std::optional<std::size_t> join;  // index into StatementDescriptor::joins

  bool is_start_activation() const { return rows[0].delta == +1 && rows[1].is_padding(); }
  /// A join entry that carries the successor's activation.
  bool is_join_firing() const;
  auto operator<=>(const PEntry&) const = default;
};

struct ExecutableInfo {
  std::string id;
  ElementKind kind = ElementKind::Task;
  PublicKey owner;
  std::size_t region = 0;  // pool index; a start may fire only while its region is idle
};

struct JoinInfo {
  std::string gatewayId;
  std::array<std::size_t, 2> predecessors{};
  std::size_t successor = 0;
};

struct MessageSlot {
  std::size_t throwIndex = 0;
  std::size_t catchIndex = 0;
};

struct CompiledCondition {
  std::string flowId;
  ConditionExpr expr;
};

struct StatementDescriptor {
  Digest modelDigest;
  std::vector<ExecutableInfo> index;  // T, in document order
  std::vector<PEntry> pArray;
  std::set<PublicKey> participantKeys;
  std::vector<std::string> variables;
  std::vector<std::set<std::size_t>> varWriters;  // parallel to variables
  std::vector<MessageSlot> msgSlots;
  std::vector<CompiledCondition> conditions;
  std::vector<JoinInfo> joins;

  std::optional<std::size_t> position(std::string_view id) const;
  std::size_t position_or_throw(std::string_view id) const;
  const PublicKey& owner_of(std::size_t t) const { return index[t].owner; }
  std::optional<std::size_t> slot_of_throw(std::size_t t) const;
  std::optional<std::size_t> slot_of_catch(std::size_t t) const;
  std::optional<std::size_t> variable_index(std::string_view name) const;
  bool guard_holds(const PEntry& entry, std::span<const std::int64_t> vars) const;

  /// Canonical JSON document ("compiled model").
  nlohmann::json to_json() const;
  static StatementDescriptor from_json(const nlohmann::json& doc);
  Digest digest() const;
};

/// Requires an empty validate_structure report; throws ModelError otherwise.
StatementDescriptor build_descriptor(const Model& model);

StatementDescriptor load_descriptor_file(const std::string& path);
void save_descriptor_file(const StatementDescriptor& d, const std::string& path);

// ---- independent token-game reference ----

/// Executable element ids of the model in document order.
std::vector<std::string> executable_ids(const Model& model);

/// Every marking reachable by one atomic token-game step from `v`.
/// Message catches need their throw completed; conditions read `vars`
/// (ordered like model.variables).
std::set<std::vector<std::uint8_t>> oracle_step(const Model& model, const std::vector<std::uint8_t>& v,
                                                const std::vector<std::int64_t>& vars);

}  // namespace zkwf
