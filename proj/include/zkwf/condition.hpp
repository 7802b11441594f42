#pragma once

// Exclusive-gateway condition language.
//
//   expr    := or
//   or      := and { ("or" | "||") and }
//   and     := not { ("and" | "&&") not }
//   not     := ("not" | "!") not | cmp
//   cmp     := sum [ ("==" | "!=" | "<" | "<=" | ">" | ">=") sum ]
//   sum     := product { ("+" | "-") product }
//   product := unary { "*" unary }
//   unary   := "-" unary | primary
//   primary := integer | identifier | "true" | "false" | "(" expr ")"
//
// Integers are signed 64-bit with wrapping arithmetic. A condition must be
// boolean-typed; arithmetic on booleans and comparisons of booleans are type
// errors.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zkwf {

class ConditionError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownVariable, Type };
  ConditionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class ConditionOp {
  IntLiteral,
  BoolLiteral,
  Variable,
  Add,
  Sub,
  Mul,
  Negate,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Not,
};

struct ConditionNode {
  ConditionOp op;
  std::int64_t value = 0;     // IntLiteral / BoolLiteral
  std::size_t variable = 0;   // Variable: index into the declared variable list
  std::string name;           // Variable
  std::shared_ptr<const ConditionNode> lhs;
  std::shared_ptr<const ConditionNode> rhs;
};

class ConditionExpr {
 public:
  ConditionExpr() = default;
  ConditionExpr(std::shared_ptr<const ConditionNode> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  const ConditionNode& root() const { return *root_; }
  const std::string& source() const { return source_; }

  /// Values indexed like the variable list the expression was compiled against.
  bool evaluate(std::span<const std::int64_t> values) const;

  /// Fully parenthesized rendering; stable across equivalent spellings.
  std::string canonical() const;

 private:
  std::shared_ptr<const ConditionNode> root_;
  std::string source_;
};

ConditionExpr compile_condition(std::string_view source, std::span<const std::string> variables);

/// Name-keyed evaluation; every referenced variable must be present.
bool eval_condition(const ConditionExpr& expr, const std::map<std::string, std::int64_t>& values);

}  // namespace zkwf
