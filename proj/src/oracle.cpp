// Token-game reference semantics, computed directly on the model graph.
// Shares nothing with the descriptor construction beyond the condition
// compiler; tests compare the two.

#include <algorithm>
#include <map>

#include "zkwf/semantics.hpp"

namespace zkwf {

std::vector<std::string> executable_ids(const Model& model) {
  std::vector<std::string> ids;
  for (const auto& e : model.elements) {
    if (is_executable(e.kind)) ids.push_back(e.id);
  }
  return ids;
}

namespace {

// A token delivered by a step: either straight to an executable element or
// onto one input of a parallel join.
struct Arrival {
  std::string element;
  const SequenceFlow* via = nullptr;  // set for join inputs
};
using Alternative = std::vector<Arrival>;

class TokenGame {
 public:
  TokenGame(const Model& m, const std::vector<std::int64_t>& vars)
      : m_(m), ids_(executable_ids(m)), names_(m.variable_names()), vars_(vars) {
    for (std::size_t i = 0; i < ids_.size(); ++i) pos_[ids_[i]] = i;
  }

  std::set<std::vector<std::uint8_t>> successors(const std::vector<std::uint8_t>& v) {
    std::set<std::vector<std::uint8_t>> out;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      const Element& e = m_.at(ids_[i]);
      if (e.kind == ElementKind::StartEvent && v[i] == 0 && pool_idle(e.id, v)) {
        auto next = v;
        next[i] = 1;
        out.insert(std::move(next));
      }
      if (v[i] == 1) complete(e, v, out);
    }
    return out;
  }

 private:
  bool pool_idle(const std::string& id, const std::vector<std::uint8_t>& v) const {
    const Pool* pool = m_.pool_of(id);
    for (const auto& member : pool->members) {
      auto it = pos_.find(member);
      if (it != pos_.end() && v[it->second] != 0) return false;
    }
    return true;
  }

  bool condition(const SequenceFlow& f) {
    auto it = compiled_.find(f.id);
    if (it == compiled_.end()) it = compiled_.emplace(f.id, compile_condition(*f.condition, names_)).first;
    return it->second.evaluate(vars_);
  }

  bool branch_enabled(const SequenceFlow& f) {
    if (f.condition) return condition(f);
    for (const auto* sibling : m_.outgoing(f.source)) {
      if (sibling->id != f.id && sibling->condition) return !condition(*sibling);
    }
    return true;
  }

  std::vector<Alternative> route(const SequenceFlow& f) {
    const Element& t = m_.at(f.target);
    if (is_executable(t.kind)) return {{Arrival{t.id, nullptr}}};
    auto in = m_.incoming(t.id);
    auto out = m_.outgoing(t.id);
    if (t.kind == ElementKind::ParallelGateway) {
      if (in.size() == 2) return {{Arrival{t.id, &f}}};
      std::vector<Alternative> result;
      for (const auto& a : route(*out[0])) {
        for (const auto& b : route(*out[1])) {
          Alternative both = a;
          both.insert(both.end(), b.begin(), b.end());
          result.push_back(std::move(both));
        }
      }
      return result;
    }
    if (in.size() == 2) return route(*out[0]);  // exclusive merge passes the token on
    std::vector<Alternative> result;
    for (const auto* branch : out) {
      if (!branch_enabled(*branch)) continue;
      for (auto& alt : route(*branch)) result.push_back(std::move(alt));
    }
    return result;
  }

  void complete(const Element& e, const std::vector<std::uint8_t>& v, std::set<std::vector<std::uint8_t>>& out) {
    const std::size_t self = pos_.at(e.id);
    if (e.kind == ElementKind::MessageCatchEvent) {
      auto mf = std::find_if(m_.messageFlows.begin(), m_.messageFlows.end(),
                             [&](const MessageFlow& f) { return f.target == e.id; });
      if (mf == m_.messageFlows.end() || v[pos_.at(mf->source)] != 2) return;
    }
    auto outgoing = m_.outgoing(e.id);
    if (outgoing.empty()) {
      auto next = v;
      next[self] = 2;
      out.insert(std::move(next));
      return;
    }
    for (const auto& alt : route(*outgoing.front())) {
      auto next = v;
      next[self] = 2;
      bool enabled = true;
      for (const auto& a : alt) {
        if (!a.via) {
          std::size_t t = pos_.at(a.element);
          if (v[t] != 0) enabled = false;
          next[t] = 1;
          continue;
        }
        // Join input: the other input holds a token iff its source has
        // completed and the join has not fired yet.
        const SequenceFlow* other = nullptr;
        for (const auto* f : m_.incoming(a.element)) {
          if (f != a.via) other = f;
        }
        std::size_t sibling = pos_.at(other->source);
        std::size_t successor = pos_.at(m_.outgoing(a.element).front()->target);
        if (v[sibling] == 2) {
          if (v[successor] != 0) enabled = false;
          next[successor] = 1;
        }
      }
      if (enabled) out.insert(std::move(next));
    }
  }

  const Model& m_;
  std::vector<std::string> ids_;
  std::vector<std::string> names_;
  std::vector<std::int64_t> vars_;
  std::map<std::string, std::size_t> pos_;
  std::map<std::string, ConditionExpr> compiled_;
};

}  // namespace

std::set<std::vector<std::uint8_t>> oracle_step(const Model& model, const std::vector<std::uint8_t>& v,
                                                const std::vector<std::int64_t>& vars) {
  return TokenGame(model, vars).successors(v);
}

}  // namespace zkwf
