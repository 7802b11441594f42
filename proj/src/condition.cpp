#include "zkwf/condition.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

namespace zkwf {

namespace {

enum class Tok { Int, Ident, LParen, RParen, Plus, Minus, Star, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto err = [&](const std::string& msg) {
    throw ConditionError(ConditionError::Kind::Syntax,
                         "syntax error at offset " + std::to_string(i) + ": " + msg);
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      out.push_back({Tok::Int, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      std::string word(src.substr(start, i - start));
      if (word == "and") out.push_back({Tok::And, word, start});
      else if (word == "or") out.push_back({Tok::Or, word, start});
      else if (word == "not") out.push_back({Tok::Not, word, start});
      else out.push_back({Tok::Ident, word, start});
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "==") { out.push_back({Tok::Eq, "==", start}); i += 2; continue; }
    if (two == "!=") { out.push_back({Tok::Ne, "!=", start}); i += 2; continue; }
    if (two == "<=") { out.push_back({Tok::Le, "<=", start}); i += 2; continue; }
    if (two == ">=") { out.push_back({Tok::Ge, ">=", start}); i += 2; continue; }
    if (two == "&&") { out.push_back({Tok::And, "&&", start}); i += 2; continue; }
    if (two == "||") { out.push_back({Tok::Or, "||", start}); i += 2; continue; }
    switch (c) {
      case '(': out.push_back({Tok::LParen, "(", start}); break;
      case ')': out.push_back({Tok::RParen, ")", start}); break;
      case '+': out.push_back({Tok::Plus, "+", start}); break;
      case '-': out.push_back({Tok::Minus, "-", start}); break;
      case '*': out.push_back({Tok::Star, "*", start}); break;
      case '<': out.push_back({Tok::Lt, "<", start}); break;
      case '>': out.push_back({Tok::Gt, ">", start}); break;
      case '!': out.push_back({Tok::Not, "!", start}); break;
      default: err(std::string("unexpected character '") + c + "'");
    }
    ++i;
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

using NodePtr = std::shared_ptr<const ConditionNode>;

struct Typed {
  NodePtr node;
  bool boolean;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::span<const std::string> vars) : toks_(std::move(toks)), vars_(vars) {}

  NodePtr parse() {
    Typed e = parse_or();
    if (peek().kind != Tok::End) syntax("unexpected '" + peek().text + "'");
    if (!e.boolean) type_error("condition must be boolean");
    return e.node;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void syntax(const std::string& msg) const {
    throw ConditionError(ConditionError::Kind::Syntax,
                         "syntax error at offset " + std::to_string(peek().pos) + ": " + msg);
  }
  [[noreturn]] static void type_error(const std::string& msg) {
    throw ConditionError(ConditionError::Kind::Type, "type error: " + msg);
  }

  static NodePtr make(ConditionOp op, NodePtr lhs, NodePtr rhs = nullptr) {
    auto n = std::make_shared<ConditionNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  Typed logical(Typed lhs, Typed rhs, ConditionOp op) {
    if (!lhs.boolean || !rhs.boolean) type_error("logical operator needs boolean operands");
    return {make(op, lhs.node, rhs.node), true};
  }

  Typed parse_or() {
    Typed lhs = parse_and();
    while (accept(Tok::Or)) lhs = logical(lhs, parse_and(), ConditionOp::Or);
    return lhs;
  }

  Typed parse_and() {
    Typed lhs = parse_not();
    while (accept(Tok::And)) lhs = logical(lhs, parse_not(), ConditionOp::And);
    return lhs;
  }

  Typed parse_not() {
    if (accept(Tok::Not)) {
      Typed inner = parse_not();
      if (!inner.boolean) type_error("'not' needs a boolean operand");
      return {make(ConditionOp::Not, inner.node), true};
    }
    return parse_cmp();
  }

  Typed parse_cmp() {
    Typed lhs = parse_sum();
    ConditionOp op;
    switch (peek().kind) {
      case Tok::Eq: op = ConditionOp::Eq; break;
      case Tok::Ne: op = ConditionOp::Ne; break;
      case Tok::Lt: op = ConditionOp::Lt; break;
      case Tok::Le: op = ConditionOp::Le; break;
      case Tok::Gt: op = ConditionOp::Gt; break;
      case Tok::Ge: op = ConditionOp::Ge; break;
      default: return lhs;
    }
    take();
    Typed rhs = parse_sum();
    if (lhs.boolean || rhs.boolean) type_error("comparison needs integer operands");
    return {make(op, lhs.node, rhs.node), true};
  }

  Typed arith(Typed lhs, Typed rhs, ConditionOp op) {
    if (lhs.boolean || rhs.boolean) type_error("arithmetic needs integer operands");
    return {make(op, lhs.node, rhs.node), false};
  }

  Typed parse_sum() {
    Typed lhs = parse_product();
    for (;;) {
      if (accept(Tok::Plus)) lhs = arith(lhs, parse_product(), ConditionOp::Add);
      else if (accept(Tok::Minus)) lhs = arith(lhs, parse_product(), ConditionOp::Sub);
      else return lhs;
    }
  }

  Typed parse_product() {
    Typed lhs = parse_unary();
    while (accept(Tok::Star)) lhs = arith(lhs, parse_unary(), ConditionOp::Mul);
    return lhs;
  }

  Typed parse_unary() {
    if (peek().kind == Tok::Minus) {
      take();
      // Fold "-<literal>" so INT64_MIN is expressible.
      if (peek().kind == Tok::Int) return parse_int(true);
      Typed inner = parse_unary();
      if (inner.boolean) type_error("negation needs an integer operand");
      return {make(ConditionOp::Negate, inner.node), false};
    }
    return parse_primary();
  }

  Typed parse_int(bool negative) {
    Token t = take();
    std::uint64_t magnitude = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), magnitude);
    const std::uint64_t limit = negative ? std::uint64_t{1} << 63 : (std::uint64_t{1} << 63) - 1;
    if (ec != std::errc() || magnitude > limit) syntax("integer literal out of range");
    auto n = std::make_shared<ConditionNode>();
    n->op = ConditionOp::IntLiteral;
    n->value = negative ? static_cast<std::int64_t>(~magnitude + 1) : static_cast<std::int64_t>(magnitude);
    return {n, false};
  }

  Typed parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: return parse_int(false);
      case Tok::Ident: {
        Token id = take();
        if (id.text == "true" || id.text == "false") {
          auto n = std::make_shared<ConditionNode>();
          n->op = ConditionOp::BoolLiteral;
          n->value = id.text == "true" ? 1 : 0;
          return {n, true};
        }
        auto it = std::find(vars_.begin(), vars_.end(), id.text);
        if (it == vars_.end()) {
          throw ConditionError(ConditionError::Kind::UnknownVariable, "unknown variable '" + id.text + "'");
        }
        auto n = std::make_shared<ConditionNode>();
        n->op = ConditionOp::Variable;
        n->variable = static_cast<std::size_t>(it - vars_.begin());
        n->name = id.text;
        return {n, false};
      }
      case Tok::LParen: {
        take();
        Typed inner = parse_or();
        if (!accept(Tok::RParen)) syntax("expected ')'");
        return inner;
      }
      case Tok::End: syntax("unexpected end of expression");
      default: syntax("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

std::int64_t eval(const ConditionNode& n, std::span<const std::int64_t> values) {
  auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };
  switch (n.op) {
    case ConditionOp::IntLiteral:
    case ConditionOp::BoolLiteral: return n.value;
    case ConditionOp::Variable: return values[n.variable];
    case ConditionOp::Add: return wrap(u(eval(*n.lhs, values)) + u(eval(*n.rhs, values)));
    case ConditionOp::Sub: return wrap(u(eval(*n.lhs, values)) - u(eval(*n.rhs, values)));
    case ConditionOp::Mul: return wrap(u(eval(*n.lhs, values)) * u(eval(*n.rhs, values)));
    case ConditionOp::Negate: return wrap(~u(eval(*n.lhs, values)) + 1);
    case ConditionOp::Eq: return eval(*n.lhs, values) == eval(*n.rhs, values);
    case ConditionOp::Ne: return eval(*n.lhs, values) != eval(*n.rhs, values);
    case ConditionOp::Lt: return eval(*n.lhs, values) < eval(*n.rhs, values);
    case ConditionOp::Le: return eval(*n.lhs, values) <= eval(*n.rhs, values);
    case ConditionOp::Gt: return eval(*n.lhs, values) > eval(*n.rhs, values);
    case ConditionOp::Ge: return eval(*n.lhs, values) >= eval(*n.rhs, values);
    case ConditionOp::And: return eval(*n.lhs, values) && eval(*n.rhs, values);
    case ConditionOp::Or: return eval(*n.lhs, values) || eval(*n.rhs, values);
    case ConditionOp::Not: return !eval(*n.lhs, values);
  }
  return 0;
}

const char* symbol(ConditionOp op) {
  switch (op) {
    case ConditionOp::Add: return "+";
    case ConditionOp::Sub: return "-";
    case ConditionOp::Mul: return "*";
    case ConditionOp::Eq: return "==";
    case ConditionOp::Ne: return "!=";
    case ConditionOp::Lt: return "<";
    case ConditionOp::Le: return "<=";
    case ConditionOp::Gt: return ">";
    case ConditionOp::Ge: return ">=";
    case ConditionOp::And: return "and";
    case ConditionOp::Or: return "or";
    default: return "?";
  }
}

std::string render(const ConditionNode& n) {
  switch (n.op) {
    case ConditionOp::IntLiteral: return std::to_string(n.value);
    case ConditionOp::BoolLiteral: return n.value ? "true" : "false";
    case ConditionOp::Variable: return n.name;
    case ConditionOp::Negate: return "(-" + render(*n.lhs) + ")";
    case ConditionOp::Not: return "(not " + render(*n.lhs) + ")";
    default: return "(" + render(*n.lhs) + " " + symbol(n.op) + " " + render(*n.rhs) + ")";
  }
}

}  // namespace

bool ConditionExpr::evaluate(std::span<const std::int64_t> values) const { return eval(*root_, values) != 0; }

std::string ConditionExpr::canonical() const { return render(*root_); }

ConditionExpr compile_condition(std::string_view source, std::span<const std::string> variables) {
  Parser parser(lex(source), variables);
  return ConditionExpr(parser.parse(), std::string(source));
}

bool eval_condition(const ConditionExpr& expr, const std::map<std::string, std::int64_t>& values) {
  // Rebind by name into a dense vector large enough for every index used.
  std::vector<std::int64_t> dense;
  std::vector<const ConditionNode*> stack{&expr.root()};
  while (!stack.empty()) {
    const ConditionNode* n = stack.back();
    stack.pop_back();
    if (n->op == ConditionOp::Variable) {
      auto it = values.find(n->name);
      if (it == values.end()) throw std::out_of_range("missing value for variable '" + n->name + "'");
      if (dense.size() <= n->variable) dense.resize(n->variable + 1, 0);
      dense[n->variable] = it->second;
    }
    if (n->lhs) stack.push_back(n->lhs.get());
    if (n->rhs) stack.push_back(n->rhs.get());
  }
  return expr.evaluate(dense);
}

}  // namespace zkwf
