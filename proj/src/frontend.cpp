#include "loopsum/frontend.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <regex>
#include <set>

namespace loopsum {

std::string to_string(FeatureTag t) {
  switch (t) {
    case FeatureTag::MemoryOp:
      return "MEMORY_OP";
    case FeatureTag::RealType:
      return "REAL_TYPE";
    case FeatureTag::UnsupportedExpr:
      return "UNSUPPORTED_EXPR";
    case FeatureTag::DivByVar:
      return "DIV_BY_VAR";
  }
  return "?";
}

std::string SourceDiagnostic::to_string() const {
  std::string out = std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": ";
  out += severity == Severity::Error ? "error" : "warning";
  if (tag) out += " [" + loopsum::to_string(*tag) + "]";
  return out + ": " + message;
}

namespace {

using ast::BinOp;
using ast::ExprNode;
using ast::ExprPtr;
using ast::Loc;
using ast::Stmt;
using ast::StmtPtr;

[[noreturn]] void fail(Loc loc, std::string message, std::optional<FeatureTag> tag = std::nullopt) {
  throw ParseError(SourceDiagnostic{loc, Severity::Error, std::move(message), tag});
}

enum class Tok { Ident, Int, Float, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Loc loc;
  Int value = 0;
};

struct Pragmas {
  std::vector<ast::InputDecl> inputs;
  std::optional<int> bits;
  std::optional<std::pair<Int, Int>> nondet;
};

Int parse_int(const std::string& s, Loc loc) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(loc, "integer literal out of range: " + s);
  return v;
}

void read_pragma(const std::string& body, Loc loc, Pragmas& out) {
  static const std::regex input_re(
      R"(^\s*input\s+([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)(?:\s+in\s+\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\])?\s*$)");
  static const std::regex bits_re(R"(^\s*bits\s+(\d+)\s*$)");
  static const std::regex nondet_re(R"(^\s*nondet\s+in\s+\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*$)");
  std::smatch m;
  if (std::regex_match(body, m, input_re)) {
    ast::InputDecl proto;
    if (m[2].matched) {
      proto.lo = parse_int(m[2], loc);
      proto.hi = parse_int(m[3], loc);
      if (proto.lo > proto.hi) fail(loc, "empty input domain");
    }
    static const std::regex name_re(R"([A-Za-z_]\w*)");
    std::string names = m[1];
    for (auto it = std::sregex_iterator(names.begin(), names.end(), name_re); it != std::sregex_iterator(); ++it) {
      ast::InputDecl d = proto;
      d.name = it->str();
      for (const auto& prev : out.inputs) {
        if (prev.name == d.name) fail(loc, "input '" + d.name + "' declared twice");
      }
      out.inputs.push_back(d);
    }
  } else if (std::regex_match(body, m, bits_re)) {
    int b = static_cast<int>(parse_int(m[1], loc));
    if (b < 2 || b > 64) fail(loc, "bit width must be in [2, 64]");
    out.bits = b;
  } else if (std::regex_match(body, m, nondet_re)) {
    Int lo = parse_int(m[1], loc);
    Int hi = parse_int(m[2], loc);
    if (lo > hi) fail(loc, "empty nondet domain");
    out.nondet = {lo, hi};
  }
}

class Lexer {
 public:
  Lexer(std::string_view src, Pragmas* pragmas) : src_(src), pragmas_(pragmas) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        Loc loc{line_, col_};
        advance();
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        if (pragmas_) read_pragma(std::string(src_.substr(start, pos_ - start)), loc, *pragmas_);
      } else if (src_.substr(pos_, 2) == "/*") {
        Loc loc{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) fail(loc, "unterminated comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    std::size_t start = pos_;
    bool real = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '.' || c == 'e' || c == 'E') {
        real = true;
        advance();
        if ((c == 'e' || c == 'E') && pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
      } else if (c == 'f' || c == 'F') {
        real = true;
        advance();
        break;
      } else {
        break;
      }
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    if (real) {
      t.kind = Tok::Float;
      return;
    }
    t.kind = Tok::Int;
    t.value = parse_int(t.text, t.loc);
  }

  void lex_punct(Token& t) {
    static const char* const kLong[] = {"<<=", ">>=", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=",
                                        "%=",  "++",  "--", "->", "<<", ">>", "&=", "|=", "^="};
    for (const char* p : kLong) {
      std::string_view s(p);
      if (src_.substr(pos_, s.size()) == s) {
        t.kind = Tok::Punct;
        t.text = std::string(s);
        for (std::size_t i = 0; i < s.size(); ++i) advance();
        return;
      }
    }
    char c = src_[pos_];
    static const std::string kSingle = "+-*/%<>=!(){}[];,&|^~?:.";
    if (kSingle.find(c) == std::string::npos) fail(t.loc, std::string("unexpected character '") + c + "'");
    t.kind = Tok::Punct;
    t.text = std::string(1, c);
    advance();
  }

  std::string_view src_;
  Pragmas* pragmas_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_bool_node(const ExprPtr& e) { return e->is_bool(); }

class Parser {
 public:
  Parser(std::vector<Token> tokens, Pragmas pragmas, const ParseOptions& options, bool free_identifiers)
      : toks_(std::move(tokens)), pragmas_(std::move(pragmas)), free_identifiers_(free_identifiers) {
    nondet_domain_ = pragmas_.nondet.value_or(std::make_pair(options.nondet_lo, options.nondet_hi));
    for (const auto& in : pragmas_.inputs) known_.insert(in.name);
  }

  ast::Program program() {
    ast::Program p;
    skip_procedure_header();
    while (!at_end() && !(wrapped_ && peek_is("}"))) parse_stmt(p.body);
    if (wrapped_) {
      expect("}");
      if (!at_end()) fail(peek().loc, "unexpected tokens after procedure body");
    }
    p.inputs = pragmas_.inputs;
    p.inputs.insert(p.inputs.end(), nondet_inputs_.begin(), nondet_inputs_.end());
    p.locals = locals_;
    p.bit_width = pragmas_.bits;
    ast::renumber(p);
    return p;
  }

  ExprPtr lone_expression() {
    auto e = expr();
    if (!at_end()) fail(peek().loc, "unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  // ---- token helpers ----
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool peek_is(std::string_view s, std::size_t k = 0) const {
    const auto& t = peek(k);
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == s;
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(std::string_view s) {
    if (!peek_is(s)) return false;
    take();
    return true;
  }
  Token expect(std::string_view s) {
    if (!peek_is(s)) {
      const auto& t = peek();
      fail(t.loc, "expected '" + std::string(s) + "' but found " + (t.kind == Tok::End ? "end of input" : "'" + t.text + "'"));
    }
    return take();
  }

  static bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw = {"int", "if", "else", "while", "for", "assert", "break", "true", "false",
                                             "nondet"};
    return kw.count(s) > 0;
  }

  Token expect_ident() {
    const auto& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail(t.loc, "expected identifier");
    reject_type_keyword(t);
    return take();
  }

  static void reject_type_keyword(const Token& t) {
    if (t.kind != Tok::Ident) return;
    static const std::set<std::string> reals = {"float", "double", "real"};
    static const std::set<std::string> other = {"char", "short", "long", "unsigned", "signed", "bool", "void",
                                                "struct", "union", "enum"};
    if (reals.count(t.text)) fail(t.loc, "real-typed variables are not supported", FeatureTag::RealType);
    if (t.text == "malloc" || t.text == "free") fail(t.loc, "memory operations are not supported", FeatureTag::MemoryOp);
    if (other.count(t.text)) fail(t.loc, "type '" + t.text + "' is not supported", FeatureTag::UnsupportedExpr);
  }

  void skip_procedure_header() {
    // Optional `int main() {` / `void f(void) {` wrapper around the body.
    if ((peek_is("int") || peek_is("void")) && peek(1).kind == Tok::Ident && peek_is("(", 2)) {
      take();
      take();
      take();
      accept("void");
      expect(")");
      expect("{");
      wrapped_ = true;
    }
  }

  void declare_use(const Token& t) {
    if (free_identifiers_) return;
    if (!known_.count(t.text)) fail(t.loc, "use of undeclared variable '" + t.text + "'");
  }

  // ---- statements ----
  void parse_block_or_stmt(ast::Block& out) {
    if (accept("{")) {
      while (!peek_is("}")) {
        if (at_end()) fail(peek().loc, "expected '}' but found end of input");
        parse_stmt(out);
      }
      take();
    } else {
      parse_stmt(out);
    }
  }

  StmtPtr make(Stmt::Kind kind, Loc loc) {
    auto s = std::make_shared<Stmt>();
    s->kind = kind;
    s->loc = loc;
    return s;
  }

  void parse_stmt(ast::Block& out) {
    const Token& t = peek();
    if (t.kind == Tok::Punct) {
      if (t.text == ";") {
        take();
        return;
      }
      if (t.text == "{") {
        parse_block_or_stmt(out);
        return;
      }
      if (t.text == "(") {
        parse_parallel(out);
        return;
      }
      if (t.text == "*") fail(t.loc, "pointer dereference is not supported", FeatureTag::MemoryOp);
      if (t.text == "++" || t.text == "--") {
        Loc loc = take().loc;
        Token name = expect_ident();
        declare_use(name);
        out.push_back(step_assign(name, t.text == "++" ? BinOp::Add : BinOp::Sub, loc));
        expect(";");
        return;
      }
      fail(t.loc, "unexpected '" + t.text + "'");
    }
    if (t.kind != Tok::Ident) fail(t.loc, "expected a statement");
    const std::string& w = t.text;
    if (w == "int") return parse_decl(out);
    if (w == "if") return out.push_back(parse_if());
    if (w == "while") return parse_while(out);
    if (w == "for") return parse_for(out);
    if (w == "assert") {
      Loc loc = take().loc;
      expect("(");
      auto s = make(Stmt::Kind::Assert, loc);
      s->cond = condition(expr());
      expect(")");
      expect(";");
      out.push_back(s);
      return;
    }
    if (w == "break") {
      Loc loc = take().loc;
      if (loop_depth_ == 0) fail(loc, "'break' outside of a loop");
      expect(";");
      out.push_back(make(Stmt::Kind::Break, loc));
      return;
    }
    static const std::set<std::string> unsupported = {"continue", "return", "goto", "do", "switch", "case"};
    if (unsupported.count(w)) fail(t.loc, "'" + w + "' statements are not supported", FeatureTag::UnsupportedExpr);
    reject_type_keyword(t);
    parse_assignment(out);
  }

  void parse_decl(ast::Block& out) {
    take();
    if (peek_is("*")) fail(peek().loc, "pointer declarations are not supported", FeatureTag::MemoryOp);
    do {
      Token name = expect_ident();
      if (peek_is("[")) fail(peek().loc, "arrays are not supported", FeatureTag::MemoryOp);
      if (known_.count(name.text)) fail(name.loc, "redeclaration of '" + name.text + "'");
      auto s = make(Stmt::Kind::Decl, name.loc);
      s->target = name.text;
      if (accept("=")) s->value = integer(expr());
      known_.insert(name.text);
      locals_.push_back(name.text);
      out.push_back(s);
    } while (accept(","));
    expect(";");
  }

  StmtPtr step_assign(const Token& name, BinOp op, Loc loc) {
    auto s = make(Stmt::Kind::Assign, loc);
    s->target = name.text;
    s->value = ast::binary(op, ast::var_ref(name.text, name.loc), ast::int_lit(1, loc), loc);
    return s;
  }

  void parse_assignment(ast::Block& out) {
    Token name = expect_ident();
    const Token& op = peek();
    if (op.text == "[") fail(op.loc, "array access is not supported", FeatureTag::MemoryOp);
    if (op.text == "." || op.text == "->") fail(op.loc, "field access is not supported", FeatureTag::MemoryOp);
    if (op.text == "(") fail(op.loc, "function calls are not supported", FeatureTag::UnsupportedExpr);
    declare_use(name);
    if (op.text == "++" || op.text == "--") {
      Loc loc = take().loc;
      out.push_back(step_assign(name, op.text == "++" ? BinOp::Add : BinOp::Sub, loc));
      expect(";");
      return;
    }
    static const std::set<std::string> bitwise = {"&=", "|=", "^=", "<<=", ">>="};
    if (bitwise.count(op.text)) fail(op.loc, "bitwise operators are not supported", FeatureTag::UnsupportedExpr);
    Token tok = take();
    auto s = make(Stmt::Kind::Assign, name.loc);
    s->target = name.text;
    ExprPtr rhs;
    if (tok.text == "=") {
      rhs = integer(expr());
    } else {
      static const std::map<std::string, BinOp> compound = {{"+=", BinOp::Add}, {"-=", BinOp::Sub}, {"*=", BinOp::Mul},
                                                            {"/=", BinOp::Div}, {"%=", BinOp::Mod}};
      auto it = compound.find(tok.text);
      if (it == compound.end()) fail(tok.loc, "expected an assignment operator after '" + name.text + "'");
      ExprPtr operand = integer(expr());
      if (it->second == BinOp::Div || it->second == BinOp::Mod) check_divisor(operand, tok.loc);
      rhs = ast::binary(it->second, ast::var_ref(name.text, name.loc), operand, tok.loc);
    }
    s->value = rhs;
    expect(";");
    out.push_back(s);
  }

  void parse_parallel(ast::Block& out) {
    Loc loc = expect("(").loc;
    auto s = make(Stmt::Kind::ParallelAssign, loc);
    std::vector<Token> names;
    do {
      names.push_back(expect_ident());
      declare_use(names.back());
    } while (accept(","));
    expect(")");
    expect("=");
    expect("(");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) expect(",");
      s->parallel.emplace_back(names[i].text, integer(expr()));
    }
    expect(")");
    expect(";");
    out.push_back(s);
  }

  StmtPtr parse_if() {
    Loc loc = take().loc;
    auto s = make(Stmt::Kind::If, loc);
    expect("(");
    s->cond = condition(expr());
    expect(")");
    parse_block_or_stmt(s->then_body);
    if (accept("else")) {
      if (peek_is("if")) {
        s->else_body.push_back(parse_if());
      } else {
        parse_block_or_stmt(s->else_body);
      }
    }
    return s;
  }

  void parse_while(ast::Block& out) {
    Loc loc = take().loc;
    expect("(");
    if (peek_is("nondet") && peek_is("(", 1) && peek_is(")", 2) && peek_is(")", 3)) {
      Loc nd = peek().loc;
      if (loop_depth_ > 0) fail(nd, "nondet() inside a loop body is not supported", FeatureTag::UnsupportedExpr);
      take();
      take();
      take();
      take();
      // Unknown trip count: a fresh bound and a counter replace the nondet guard.
      std::string bound = fresh_nondet();
      std::string counter = "__k_" + std::to_string(counter_id_++);
      known_.insert(counter);
      locals_.push_back(counter);
      auto decl = make(Stmt::Kind::Decl, nd);
      decl->target = counter;
      decl->value = ast::int_lit(0, nd);
      out.push_back(decl);
      auto s = make(Stmt::Kind::While, loc);
      s->cond = ast::binary(BinOp::Lt, ast::var_ref(counter, nd), ast::var_ref(bound, nd), nd);
      auto step = make(Stmt::Kind::Assign, nd);
      step->target = counter;
      step->value = ast::binary(BinOp::Add, ast::var_ref(counter, nd), ast::int_lit(1, nd), nd);
      s->then_body.push_back(step);
      ++loop_depth_;
      parse_block_or_stmt(s->then_body);
      --loop_depth_;
      out.push_back(s);
      return;
    }
    auto s = make(Stmt::Kind::While, loc);
    s->cond = condition(expr());
    expect(")");
    ++loop_depth_;
    parse_block_or_stmt(s->then_body);
    --loop_depth_;
    out.push_back(s);
  }

  // for (init; cond; step) body  ==>  init; while (cond) { body; step }
  void parse_for(ast::Block& out) {
    Loc loc = take().loc;
    expect("(");
    if (!peek_is(";")) {
      if (peek_is("int")) {
        parse_decl(out);
      } else {
        parse_assignment(out);
      }
    } else {
      take();
    }
    auto s = make(Stmt::Kind::While, loc);
    s->cond = peek_is(";") ? ast::bool_lit(true, loc) : condition(expr());
    expect(";");
    ast::Block step;
    if (!peek_is(")")) parse_for_step(step);
    expect(")");
    ++loop_depth_;
    parse_block_or_stmt(s->then_body);
    --loop_depth_;
    s->then_body.insert(s->then_body.end(), step.begin(), step.end());
    out.push_back(s);
  }

  void parse_for_step(ast::Block& out) {
    if (peek_is("++") || peek_is("--")) {
      Token op = take();
      Token name = expect_ident();
      declare_use(name);
      out.push_back(step_assign(name, op.text == "++" ? BinOp::Add : BinOp::Sub, op.loc));
      return;
    }
    // Reuse the assignment parser by feeding it a terminating ';'.
    Token semi;
    semi.kind = Tok::Punct;
    semi.text = ";";
    std::size_t depth = 0;
    std::size_t end = pos_;
    while (end < toks_.size() && !(depth == 0 && toks_[end].kind == Tok::Punct && toks_[end].text == ")")) {
      if (toks_[end].text == "(") ++depth;
      if (toks_[end].text == ")") --depth;
      ++end;
    }
    semi.loc = toks_[std::min(end, toks_.size() - 1)].loc;
    toks_.insert(toks_.begin() + static_cast<std::ptrdiff_t>(end), semi);
    parse_assignment(out);
  }

  std::string fresh_nondet() {
    std::string name = "__nd_" + std::to_string(nondet_inputs_.size());
    nondet_inputs_.push_back({name, nondet_domain_.first, nondet_domain_.second});
    known_.insert(name);
    return name;
  }

  // ---- expressions ----
  ExprPtr integer(ExprPtr e) {
    if (is_bool_node(e)) fail(e->loc, "boolean value used as an integer", FeatureTag::UnsupportedExpr);
    return e;
  }

  static ExprPtr condition(ExprPtr e) {
    if (is_bool_node(e)) return e;
    return ast::binary(BinOp::Ne, e, ast::int_lit(0, e->loc), e->loc);
  }

  static bool literal_value(const ExprPtr& e, Int& out) {
    if (e->kind == ExprNode::Kind::IntLit) {
      out = e->value;
      return true;
    }
    if (e->kind == ExprNode::Kind::Neg && literal_value(e->lhs, out)) {
      out = -out;
      return true;
    }
    return false;
  }

  static void check_divisor(const ExprPtr& d, Loc loc) {
    Int v = 0;
    if (!literal_value(d, v)) fail(loc, "divisor must be an integer literal", FeatureTag::DivByVar);
    if (v == 0) fail(loc, "division by the literal zero", FeatureTag::DivByVar);
  }

  void reject_bitwise() {
    const Token& t = peek();
    if (t.kind != Tok::Punct) return;
    if (t.text == "&" || t.text == "|" || t.text == "^" || t.text == "<<" || t.text == ">>") {
      fail(t.loc, "bitwise operator '" + t.text + "' is not supported", FeatureTag::UnsupportedExpr);
    }
    if (t.text == "?") fail(t.loc, "conditional expressions are not supported", FeatureTag::UnsupportedExpr);
    if (t.text == "[") fail(t.loc, "array access is not supported", FeatureTag::MemoryOp);
    if (t.text == "." || t.text == "->") fail(t.loc, "field access is not supported", FeatureTag::MemoryOp);
  }

  ExprPtr expr() {
    auto lhs = conj();
    while (peek_is("||")) {
      Loc loc = take().loc;
      lhs = ast::binary(BinOp::Or, condition(lhs), condition(conj()), loc);
    }
    reject_bitwise();
    return lhs;
  }

  ExprPtr conj() {
    auto lhs = equality();
    while (peek_is("&&")) {
      Loc loc = take().loc;
      lhs = ast::binary(BinOp::And, condition(lhs), condition(equality()), loc);
    }
    return lhs;
  }

  ExprPtr equality() {
    auto lhs = relational();
    while (peek_is("==") || peek_is("!=")) {
      Token op = take();
      auto rhs = relational();
      lhs = ast::binary(op.text == "==" ? BinOp::Eq : BinOp::Ne, integer(lhs), integer(rhs), op.loc);
    }
    return lhs;
  }

  ExprPtr relational() {
    auto lhs = additive();
    for (;;) {
      BinOp op;
      if (peek_is("<")) {
        op = BinOp::Lt;
      } else if (peek_is("<=")) {
        op = BinOp::Le;
      } else if (peek_is(">")) {
        op = BinOp::Gt;
      } else if (peek_is(">=")) {
        op = BinOp::Ge;
      } else {
        return lhs;
      }
      Loc loc = take().loc;
      auto rhs = additive();
      lhs = ast::binary(op, integer(lhs), integer(rhs), loc);
    }
  }

  ExprPtr additive() {
    auto lhs = multiplicative();
    while (peek_is("+") || peek_is("-")) {
      Token op = take();
      auto rhs = multiplicative();
      lhs = ast::binary(op.text == "+" ? BinOp::Add : BinOp::Sub, integer(lhs), integer(rhs), op.loc);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    auto lhs = unary_expr();
    for (;;) {
      reject_bitwise();
      BinOp op;
      if (peek_is("*")) {
        op = BinOp::Mul;
      } else if (peek_is("/")) {
        op = BinOp::Div;
      } else if (peek_is("%")) {
        op = BinOp::Mod;
      } else {
        return lhs;
      }
      Loc loc = take().loc;
      auto rhs = unary_expr();
      if (op != BinOp::Mul) check_divisor(rhs, loc);
      lhs = ast::binary(op, integer(lhs), integer(rhs), loc);
    }
  }

  ExprPtr unary_expr() {
    const Token& t = peek();
    if (t.kind == Tok::Punct) {
      if (t.text == "-") {
        Loc loc = take().loc;
        return ast::unary(ExprNode::Kind::Neg, integer(unary_expr()), loc);
      }
      if (t.text == "+") {
        take();
        return integer(unary_expr());
      }
      if (t.text == "!") {
        Loc loc = take().loc;
        return ast::unary(ExprNode::Kind::Not, condition(unary_expr()), loc);
      }
      if (t.text == "*" || t.text == "&") {
        fail(t.loc, "pointer operations are not supported", FeatureTag::MemoryOp);
      }
      if (t.text == "~") fail(t.loc, "bitwise operator '~' is not supported", FeatureTag::UnsupportedExpr);
      if (t.text == "++" || t.text == "--") {
        fail(t.loc, "increment inside an expression is not supported", FeatureTag::UnsupportedExpr);
      }
    }
    return primary();
  }

  ExprPtr primary() {
    Token t = take();
    switch (t.kind) {
      case Tok::Int:
        return ast::int_lit(t.value, t.loc);
      case Tok::Float:
        fail(t.loc, "real-valued literal '" + t.text + "' is not supported", FeatureTag::RealType);
      case Tok::End:
        fail(t.loc, "unexpected end of input in expression");
      case Tok::Punct:
        if (t.text == "(") {
          if (peek().kind == Tok::Ident) {
            static const std::set<std::string> casts = {"float", "double", "real"};
            if (casts.count(peek().text)) fail(peek().loc, "real-typed cast is not supported", FeatureTag::RealType);
          }
          auto e = expr();
          expect(")");
          return e;
        }
        fail(t.loc, "unexpected '" + t.text + "' in expression");
      case Tok::Ident:
        break;
    }
    if (t.text == "true") return ast::bool_lit(true, t.loc);
    if (t.text == "false") return ast::bool_lit(false, t.loc);
    if (t.text == "nondet") {
      expect("(");
      expect(")");
      if (loop_depth_ > 0) fail(t.loc, "nondet() inside a loop body is not supported", FeatureTag::UnsupportedExpr);
      return ast::var_ref(fresh_nondet(), t.loc);
    }
    reject_type_keyword(t);
    if (is_keyword(t.text)) fail(t.loc, "unexpected keyword '" + t.text + "' in expression");
    if (peek_is("(")) fail(t.loc, "call to '" + t.text + "' is not supported", FeatureTag::UnsupportedExpr);
    reject_bitwise();
    declare_use(t);
    return ast::var_ref(t.text, t.loc);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Pragmas pragmas_;
  bool free_identifiers_;
  bool wrapped_ = false;
  int loop_depth_ = 0;
  int counter_id_ = 0;
  std::pair<Int, Int> nondet_domain_;
  std::set<std::string> known_;
  std::vector<std::string> locals_;
  std::vector<ast::InputDecl> nondet_inputs_;
};

}  // namespace

ParseResult parse(std::string_view source, const ParseOptions& options) {
  ParseResult result;
  try {
    Pragmas pragmas;
    auto tokens = Lexer(source, &pragmas).run();
    Parser parser(std::move(tokens), std::move(pragmas), options, false);
    result.program = parser.program();
  } catch (const ParseError& e) {
    result.diagnostics.push_back(e.diagnostic);
  }
  return result;
}

ast::ExprPtr parse_expression(std::string_view text) {
  auto tokens = Lexer(text, nullptr).run();
  Parser parser(std::move(tokens), {}, {}, true);
  return parser.lone_expression();
}

}  // namespace loopsum
