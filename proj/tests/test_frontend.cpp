#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "common.hpp"
#include "loopsum/frontend.hpp"

using namespace loopsum;
using K = ast::Stmt::Kind;

TEST(Parse, Fig1aHasOneLoopWithThreeBranches) {
  auto p = testutil::corpus("fig1a.wl");
  ASSERT_EQ(p.body.size(), 1u);
  const auto& loop = *p.body[0];
  EXPECT_EQ(loop.kind, K::While);
  ASSERT_EQ(loop.then_body.size(), 1u);
  const auto& a = *loop.then_body[0];
  ASSERT_EQ(a.kind, K::If);
  EXPECT_EQ(ast::to_source(a.cond), "x > 1");
  ASSERT_EQ(a.else_body.size(), 1u);
  const auto& c = *a.else_body[0];
  ASSERT_EQ(c.kind, K::If);
  EXPECT_EQ(ast::to_source(c.cond), "x < -1");
  EXPECT_EQ(c.then_body.size(), 2u);
  EXPECT_EQ(c.else_body.size(), 2u);  // branch B
  ASSERT_EQ(p.inputs.size(), 2u);
  EXPECT_EQ(p.inputs[0].name, "x");
  EXPECT_EQ(p.inputs[0].lo, -100);
}

TEST(Parse, EmptyProgram) {
  auto r = parse("");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.program->body.empty());
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST(Parse, ArrayStoreIsMemoryOp) {
  auto r = parse("int a = 0;\nint i = 0;\nwhile (i < 3) {\n  a[i] = 0;\n  i = i + 1;\n}\n");
  EXPECT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  ASSERT_TRUE(r.diagnostics[0].tag.has_value());
  EXPECT_EQ(*r.diagnostics[0].tag, FeatureTag::MemoryOp);
  EXPECT_EQ(r.diagnostics[0].loc.line, 4);
}

TEST(Parse, UnsupportedConstructsAreRejected) {
  const std::vector<std::pair<std::string, std::optional<FeatureTag>>> bad = {
      {"float x = 1;", FeatureTag::RealType},
      {"int x = 1; int y = x / x;", FeatureTag::DivByVar},
      {"int *p = 0;", FeatureTag::MemoryOp},
      {"int x = f(1);", FeatureTag::UnsupportedExpr},
      {"int x = 0; x = y;", std::nullopt},
      {"while (1) { x = 1; }", std::nullopt},
      {"int x = 0; while (x < 3) { x = x + 1; ", std::nullopt},
  };
  for (const auto& [src, tag] : bad) {
    auto r = parse(src);
    EXPECT_FALSE(r.ok()) << src;
    ASSERT_FALSE(r.diagnostics.empty()) << src;
    EXPECT_EQ(r.diagnostics[0].severity, Severity::Error);
    if (tag) EXPECT_EQ(r.diagnostics[0].tag, tag) << src;
  }
}

TEST(Parse, SugarLowersToCoreStatements) {
  auto p = testutil::program("// input n in [0, 9]\nint s = 0;\nfor (int i = 0; i < n; i++) { s += i; }\n");
  ASSERT_EQ(p.body.size(), 3u);  // s, i, while
  EXPECT_EQ(p.body[2]->kind, K::While);
  EXPECT_EQ(p.body[2]->then_body.size(), 2u);
  EXPECT_EQ(p.inputs[0].hi, 9);
}

TEST(Parse, NondetGuardBecomesBoundedCounter) {
  auto p = testutil::corpus("nondet_trip.wl");
  ASSERT_EQ(p.inputs.size(), 2u);
  EXPECT_EQ(p.inputs[1].lo, 0);
  EXPECT_EQ(p.inputs[1].hi, 60);
  const auto& loop = *p.body.back();
  EXPECT_EQ(loop.kind, K::While);
  EXPECT_NE(ast::to_source(loop.cond).find(p.inputs[1].name), std::string::npos);
}

TEST(Parse, BitWidthPragma) {
  auto p = testutil::program("// bits 8\n// input x in [0, 10]\nx = x + 1;\n");
  ASSERT_TRUE(p.bit_width.has_value());
  EXPECT_EQ(*p.bit_width, 8);
}

TEST(ParseExpression, FreeIdentifiers) {
  auto e = parse_expression("x0 + 2 * n >= 0");
  EXPECT_EQ(ast::to_source(e), "x0 + 2 * n >= 0");
  EXPECT_THROW(parse_expression("x +"), ParseError);
}

TEST(RoundTrip, CorpusPrograms) {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(LOOPSUM_CORPUS_DIR)) {
    if (entry.path().extension() != ".wl") continue;
    auto first = parse(testutil::read_file(entry.path().string()));
    ASSERT_TRUE(first.ok()) << entry.path();
    auto again = parse(ast::pretty_print(*first.program));
    ASSERT_TRUE(again.ok()) << entry.path() << "\n" << ast::pretty_print(*first.program);
    EXPECT_TRUE(ast::same_structure(*first.program, *again.program)) << entry.path();
  }
}

namespace {

/// Random well-formed programs over two inputs and two locals.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::string program() {
    std::string s = "// input x in [-5, 5]\n// input y in [-5, 5]\nint a = 0;\nint b = 1;\n";
    s += block(2);
    return s;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string atom() {
    static const char* names[] = {"x", "y", "a", "b"};
    return pick(3) == 0 ? std::to_string(pick(21) - 10) : names[pick(4)];
  }
  std::string arith(int depth) {
    if (depth == 0 || pick(3) == 0) return atom();
    static const char* ops[] = {" + ", " - ", " * "};
    std::string e = arith(depth - 1) + ops[pick(3)] + arith(depth - 1);
    if (pick(4) == 0) e = "(" + e + ") / " + std::to_string(pick(5) + 1);
    if (pick(5) == 0) e = "(" + e + ") % " + std::to_string(pick(5) + 1);
    return pick(2) ? "(" + e + ")" : e;
  }
  std::string cond(int depth) {
    static const char* rel[] = {" < ", " <= ", " > ", " >= ", " == ", " != "};
    std::string c = arith(1) + rel[pick(6)] + arith(1);
    if (depth > 0 && pick(3) == 0) c = "(" + c + (pick(2) ? " && " : " || ") + cond(depth - 1) + ")";
    if (pick(6) == 0) c = "!(" + c + ")";
    return c;
  }
  std::string stmt(int depth) {
    static const char* names[] = {"x", "y", "a", "b"};
    switch (depth > 0 ? pick(5) : 0) {
      case 1:
        return "if (" + cond(1) + ") {\n" + block(depth - 1) + "} else {\n" + block(depth - 1) + "}\n";
      case 2:
        return "while (" + cond(1) + ") {\n" + block(depth - 1) + "}\n";
      case 3:
        return "assert(" + cond(1) + ");\n";
      default:
        return std::string(names[pick(4)]) + " = " + arith(2) + ";\n";
    }
  }
  std::string block(int depth) {
    std::string s;
    int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) s += stmt(depth);
    return s;
  }

  std::mt19937_64 rng_;
};

}  // namespace

TEST(RoundTrip, RandomPrograms) {
  Gen gen(2024);
  for (int i = 0; i < 300; ++i) {
    std::string src = gen.program();
    auto first = parse(src);
    ASSERT_TRUE(first.ok()) << src << "\n" << first.diagnostics[0].to_string();
    std::string printed = ast::pretty_print(*first.program);
    auto again = parse(printed);
    ASSERT_TRUE(again.ok()) << printed;
    EXPECT_TRUE(ast::same_structure(*first.program, *again.program)) << src << "\n----\n" << printed;
  }
}
