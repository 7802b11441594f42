#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "zkwf/condition.hpp"
#include "zkwf/model.hpp"

namespace zkwf {

namespace {

class Validator {
 public:
  explicit Validator(const Model& m) : m_(m), var_names_(m.variable_names()) {}

  ValidationReport run() {
    check_flows();
    check_gateways();
    bool acyclic = check_acyclic();
    check_owners();
    check_conditions();
    check_messages();
    check_starts();
    if (acyclic) check_step_width();
    std::sort(report_.begin(), report_.end());
    report_.erase(std::unique(report_.begin(), report_.end()), report_.end());
    return std::move(report_);
  }

 private:
  void add(std::string code, std::string subject, std::string detail) {
    report_.push_back({std::move(code), std::move(subject), std::move(detail)});
  }

  void check_flows() {
    for (const auto& f : m_.flows) {
      const Element& s = m_.at(f.source);
      const Element& t = m_.at(f.target);
      if (s.processId != t.processId) add("cross-pool sequence flow", f.id, s.id + " -> " + t.id);
      if (f.source == f.target) add("cycle", f.id, "self loop on " + s.id);
    }
    for (const auto& e : m_.elements) {
      if (!is_executable(e.kind)) continue;
      std::size_t in = m_.incoming(e.id).size();
      std::size_t out = m_.outgoing(e.id).size();
      std::size_t want_in = e.kind == ElementKind::StartEvent ? 0 : 1;
      std::size_t want_out = e.kind == ElementKind::EndEvent ? 0 : 1;
      if (in != want_in || out != want_out) {
        add("flow arity", e.id,
            std::string(to_string(e.kind)) + " needs " + std::to_string(want_in) + " incoming/" +
                std::to_string(want_out) + " outgoing, has " + std::to_string(in) + "/" + std::to_string(out));
      }
    }
  }

  void check_gateways() {
    for (const auto& e : m_.elements) {
      if (!is_gateway(e.kind)) continue;
      auto in = m_.incoming(e.id);
      auto out = m_.outgoing(e.id);
      bool split = in.size() == 1 && out.size() == 2;
      bool join = in.size() == 2 && out.size() == 1;
      if (!split && !join) {
        add("gateway not binary", e.id,
            std::to_string(in.size()) + " incoming, " + std::to_string(out.size()) + " outgoing");
        continue;
      }
      if (e.kind == ElementKind::ParallelGateway && join) {
        for (const auto* f : in) {
          if (!is_executable(m_.at(f->source).kind)) {
            add("join shape", e.id, "input " + f->id + " must come directly from an executable element");
          }
        }
        if (!is_executable(m_.at(out[0]->target).kind)) {
          add("join shape", e.id, "output " + out[0]->id + " must lead directly to an executable element");
        }
      }
      if (e.defaultFlow && !(e.kind == ElementKind::ExclusiveGateway && split &&
                             std::any_of(out.begin(), out.end(), [&](auto* f) { return f->id == *e.defaultFlow; }))) {
        add("invalid default flow", e.id, *e.defaultFlow);
      }
    }
  }

  bool check_acyclic() {
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> mark;
    bool acyclic = true;
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
      mark[id] = Mark::Active;
      for (const auto* f : m_.outgoing(id)) {
        Mark t = mark[f->target];
        if (t == Mark::Active) {
          acyclic = false;
          add("cycle", f->id, f->source + " -> " + f->target + " closes a loop");
        } else if (t == Mark::None) {
          visit(f->target);
        }
      }
      mark[id] = Mark::Done;
    };
    for (const auto& e : m_.elements) {
      if (mark[e.id] == Mark::None) visit(e.id);
    }
    return acyclic;
  }

  void check_owners() {
    for (const auto& e : m_.elements) {
      if (!is_executable(e.kind)) continue;
      try {
        resolve_owner(m_, e.id);
      } catch (const ModelError&) {
        add("unowned executable element", e.id, "no zkp:publicKey on element, lane or pool");
      }
    }
  }

  void check_conditions() {
    for (const auto& f : m_.flows) {
      const Element& src = m_.at(f.source);
      bool xor_split = src.kind == ElementKind::ExclusiveGateway && m_.outgoing(src.id).size() == 2;
      if (f.condition && !xor_split) add("condition outside exclusive split", f.id, *f.condition);
      if (f.condition && xor_split) {
        try {
          compile_condition(*f.condition, var_names_);
        } catch (const ConditionError& err) {
          add("unparseable condition", f.id, err.what());
        }
      }
    }
    for (const auto& e : m_.elements) {
      if (e.kind != ElementKind::ExclusiveGateway) continue;
      auto out = m_.outgoing(e.id);
      if (out.size() != 2) continue;
      int unconditioned = 0;
      for (const auto* f : out) {
        bool is_default = e.defaultFlow && *e.defaultFlow == f->id;
        if (is_default && f->condition) add("default flow has condition", f->id, *f->condition);
        if (!f->condition) ++unconditioned;
      }
      if (unconditioned > 1) add("missing condition", e.id, "at most one outgoing flow may be the default");
    }
  }

  void check_messages() {
    std::map<std::string, int> sends, receives;
    for (const auto& f : m_.messageFlows) {
      const Element& s = m_.at(f.source);
      const Element& t = m_.at(f.target);
      if (s.kind != ElementKind::MessageThrowEvent) add("message flow", f.id, "source " + s.id + " is not a throw event");
      if (t.kind != ElementKind::MessageCatchEvent) add("message flow", f.id, "target " + t.id + " is not a catch event");
      ++sends[f.source];
      ++receives[f.target];
    }
    for (const auto& e : m_.elements) {
      if (e.kind == ElementKind::MessageThrowEvent && sends[e.id] != 1) {
        add("message flow", e.id, "throw event needs exactly one outgoing message flow");
      }
      if (e.kind == ElementKind::MessageCatchEvent && receives[e.id] != 1) {
        add("message flow", e.id, "catch event needs exactly one incoming message flow");
      }
    }
  }

  void check_starts() {
    for (const auto& p : m_.pools) {
      if (p.members.empty()) continue;
      auto starts = std::count_if(p.members.begin(), p.members.end(),
                                  [&](const std::string& id) { return m_.at(id).kind == ElementKind::StartEvent; });
      if (starts != 1) add("start event count", p.id, std::to_string(starts) + " start events");
    }
  }

  // Number of executable elements that receive a token when the flow fires,
  // maximized over exclusive choices.
  std::size_t width(const SequenceFlow& f) {
    const Element& t = m_.at(f.target);
    if (is_executable(t.kind)) return 1;
    auto out = m_.outgoing(t.id);
    auto in = m_.incoming(t.id);
    if (out.empty()) return 0;
    if (in.size() == 2) {
      return t.kind == ElementKind::ParallelGateway ? 1 : width(*out[0]);
    }
    std::size_t a = width(*out[0]);
    std::size_t b = out.size() > 1 ? width(*out[1]) : 0;
    return t.kind == ElementKind::ParallelGateway ? a + b : std::max(a, b);
  }

  void check_step_width() {
    for (const auto& e : m_.elements) {
      if (!is_executable(e.kind)) continue;
      for (const auto* f : m_.outgoing(e.id)) {
        if (width(*f) > 2) add("step too wide", e.id, "completion would activate more than two elements");
      }
    }
  }

  const Model& m_;
  std::vector<std::string> var_names_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_structure(const Model& model) { return Validator(model).run(); }

}  // namespace zkwf
