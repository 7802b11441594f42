#include <gtest/gtest.h>

#include <random>

#include "zkwf/condition.hpp"

using namespace zkwf;

namespace {

const std::vector<std::string> kVars = {"x", "y", "z"};

ConditionError::Kind error_kind(const std::string& src) {
  try {
    compile_condition(src, kVars);
  } catch (const ConditionError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << src;
  return ConditionError::Kind::Syntax;
}

}  // namespace

TEST(Condition, ComparisonNode) {
  auto e = compile_condition("x > 10", kVars);
  EXPECT_EQ(e.root().op, ConditionOp::Gt);
  EXPECT_EQ(e.root().lhs->op, ConditionOp::Variable);
  EXPECT_EQ(e.root().rhs->value, 10);
}

TEST(Condition, MultiplicationBindsTighter) {
  auto e = compile_condition("x + y*2 == 14", kVars);
  ASSERT_EQ(e.root().op, ConditionOp::Eq);
  const auto& sum = *e.root().lhs;
  ASSERT_EQ(sum.op, ConditionOp::Add);
  EXPECT_EQ(sum.rhs->op, ConditionOp::Mul);
  EXPECT_EQ(e.canonical(), "((x + (y * 2)) == 14)");
}

TEST(Condition, UnknownVariable) {
  EXPECT_EQ(error_kind("z > 1 and w < 2"), ConditionError::Kind::UnknownVariable);
  EXPECT_THROW(compile_condition("z > 1", std::vector<std::string>{"x"}), ConditionError);
}

TEST(Condition, SyntaxAndTypeErrors) {
  EXPECT_EQ(error_kind("x >"), ConditionError::Kind::Syntax);
  EXPECT_EQ(error_kind("(x > 1"), ConditionError::Kind::Syntax);
  EXPECT_EQ(error_kind("x / 2 > 1"), ConditionError::Kind::Syntax);
  EXPECT_EQ(error_kind("x + 1"), ConditionError::Kind::Type);
  EXPECT_EQ(error_kind("true + 1 > 0"), ConditionError::Kind::Type);
  EXPECT_EQ(error_kind("(x > 1) == true"), ConditionError::Kind::Type);
  EXPECT_EQ(error_kind("not x"), ConditionError::Kind::Type);
}

TEST(Condition, Boundaries) {
  auto e = compile_condition("x > 10", kVars);
  EXPECT_TRUE(eval_condition(e, {{"x", 11}}));
  EXPECT_FALSE(eval_condition(e, {{"x", 10}}));
  auto n = compile_condition("not(x > 10)", kVars);
  EXPECT_TRUE(eval_condition(n, {{"x", 10}}));
}

TEST(Condition, AlternativeSpellings) {
  auto a = compile_condition("x > 1 && !(y == 2) || z != 3", kVars);
  auto b = compile_condition("x > 1 and not (y == 2) or z != 3", kVars);
  EXPECT_EQ(a.canonical(), b.canonical());
}

TEST(Condition, WrappingArithmetic) {
  auto e = compile_condition("x + 1 < x", kVars);
  std::vector<std::int64_t> v = {INT64_MAX, 0, 0};
  EXPECT_TRUE(e.evaluate(v));
  auto m = compile_condition("-x == x", kVars);
  std::vector<std::int64_t> w = {INT64_MIN, 0, 0};
  EXPECT_TRUE(m.evaluate(w));
}

namespace {

// Random typed expression, rendered fully parenthesized, with its value
// computed alongside.
struct Gen {
  std::mt19937_64 rng;
  std::vector<std::int64_t> vals;

  static std::int64_t wrap(std::uint64_t u) { return static_cast<std::int64_t>(u); }

  std::pair<std::string, std::int64_t> integer(int depth) {
    int pick = depth <= 0 ? static_cast<int>(rng() % 2) : static_cast<int>(rng() % 6);
    switch (pick) {
      case 0: {
        std::int64_t lit = static_cast<std::int64_t>(rng() % 2001) - 1000;
        if (lit < 0) return {"(-" + std::to_string(-lit) + ")", lit};
        return {std::to_string(lit), lit};
      }
      case 1: {
        std::size_t k = rng() % vals.size();
        return {kVars[k], vals[k]};
      }
      case 2: {
        auto a = integer(depth - 1), b = integer(depth - 1);
        return {"(" + a.first + " + " + b.first + ")",
                wrap(static_cast<std::uint64_t>(a.second) + static_cast<std::uint64_t>(b.second))};
      }
      case 3: {
        auto a = integer(depth - 1), b = integer(depth - 1);
        return {"(" + a.first + " - " + b.first + ")",
                wrap(static_cast<std::uint64_t>(a.second) - static_cast<std::uint64_t>(b.second))};
      }
      case 4: {
        auto a = integer(depth - 1), b = integer(depth - 1);
        return {"(" + a.first + " * " + b.first + ")",
                wrap(static_cast<std::uint64_t>(a.second) * static_cast<std::uint64_t>(b.second))};
      }
      default: {
        auto a = integer(depth - 1);
        return {"(-" + a.first + ")", wrap(0 - static_cast<std::uint64_t>(a.second))};
      }
    }
  }

  std::pair<std::string, bool> boolean(int depth) {
    int pick = depth <= 0 ? 0 : static_cast<int>(rng() % 5);
    switch (pick) {
      case 0: {
        auto a = integer(2), b = integer(2);
        static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
        int op = static_cast<int>(rng() % 6);
        bool r = false;
        switch (op) {
          case 0: r = a.second == b.second; break;
          case 1: r = a.second != b.second; break;
          case 2: r = a.second < b.second; break;
          case 3: r = a.second <= b.second; break;
          case 4: r = a.second > b.second; break;
          default: r = a.second >= b.second; break;
        }
        return {"(" + a.first + " " + ops[op] + " " + b.first + ")", r};
      }
      case 1: {
        auto a = boolean(depth - 1), b = boolean(depth - 1);
        return {"(" + a.first + " and " + b.first + ")", a.second && b.second};
      }
      case 2: {
        auto a = boolean(depth - 1), b = boolean(depth - 1);
        return {"(" + a.first + " or " + b.first + ")", a.second || b.second};
      }
      case 3: {
        auto a = boolean(depth - 1);
        return {"(not " + a.first + ")", !a.second};
      }
      default: {
        bool t = rng() % 2;
        return {t ? "true" : "false", t};
      }
    }
  }
};

}  // namespace

TEST(Condition, RandomTreesMatchIndependentEvaluator) {
  Gen g{std::mt19937_64(99), {}};
  for (int i = 0; i < 2000; ++i) {
    g.vals = {static_cast<std::int64_t>(g.rng()), static_cast<std::int64_t>(g.rng() % 100),
              static_cast<std::int64_t>(g.rng() % 7) - 3};
    auto [src, expected] = g.boolean(3);
    auto e = compile_condition(src, kVars);
    ASSERT_EQ(e.evaluate(g.vals), expected) << src;
    auto again = compile_condition(e.canonical(), kVars);
    ASSERT_EQ(again.canonical(), e.canonical()) << src;
  }
}
