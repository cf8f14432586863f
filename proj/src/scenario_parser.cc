// Copyright 2026 The CascadeLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cascadelab/scenario_parser.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace cascadelab {

ScenarioError::ScenarioError(Kind kind, int line, int column,
                             const std::string& message)
    : std::runtime_error(
          (kind == Kind::kReference ? std::string("reference error")
           : kind == Kind::kIo      ? std::string("io error")
                                    : std::string("syntax error")) +
          (line > 0 ? " at " + std::to_string(line) + ":" +
                          std::to_string(column)
                    : std::string()) +
          ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

enum class TokKind { kIdent, kInt, kString, kOp, kEnd };

struct Token {
  TokKind kind = TokKind::kEnd;
  std::string text;
  int column = 0;
};

struct Line {
  int number = 0;
  std::string raw;
  std::vector<Token> tokens;
};

[[noreturn]] void SyntaxError(int line, int column, const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::kSyntax, line, column, msg);
}

[[noreturn]] void ReferenceError(int line, int column,
                                 const std::string& msg) {
  throw ScenarioError(ScenarioError::Kind::kReference, line, column, msg);
}

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> Tokenize(const std::string& text, int line_no) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    int col = static_cast<int>(i) + 1;
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (IsIdentStart(c)) {
      size_t j = i;
      while (j < text.size() && IsIdentChar(text[j])) ++j;
      out.push_back({TokKind::kIdent, text.substr(i, j - i), col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({TokKind::kInt, text.substr(i, j - i), col});
      i = j;
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '"') ++j;
      if (j >= text.size()) SyntaxError(line_no, col, "unterminated string");
      out.push_back({TokKind::kString, text.substr(i + 1, j - i - 1), col});
      i = j + 1;
      continue;
    }
    static const char* kTwoChar[] = {"==", "!=", "<=", ">=", "&&", "||"};
    bool matched = false;
    for (const char* op : kTwoChar) {
      if (text.compare(i, 2, op) == 0) {
        out.push_back({TokKind::kOp, op, col});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("+-*/%<>!=(),{}").find(c) != std::string::npos) {
      out.push_back({TokKind::kOp, std::string(1, c), col});
      ++i;
      continue;
    }
    SyntaxError(line_no, col, std::string("unexpected character '") + c + "'");
  }
  return out;
}

// Cursor over the tokens of one line.
class TokenStream {
 public:
  explicit TokenStream(const Line& line) : line_(line) {}

  const Token& Peek(size_t ahead = 0) const {
    static const Token kEnd;
    size_t at = pos_ + ahead;
    return at < line_.tokens.size() ? line_.tokens[at] : kEnd;
  }
  bool AtEnd() const { return pos_ >= line_.tokens.size(); }
  Token Next() {
    Token t = Peek();
    if (!AtEnd()) ++pos_;
    return t;
  }
  int Column() const {
    return AtEnd() ? static_cast<int>(line_.raw.size()) + 1 : Peek().column;
  }
  int LineNo() const { return line_.number; }

  bool PeekIs(const std::string& text) const {
    const Token& t = Peek();
    return (t.kind == TokKind::kOp || t.kind == TokKind::kIdent) &&
           t.text == text;
  }
  bool Accept(const std::string& text) {
    if (!PeekIs(text)) return false;
    ++pos_;
    return true;
  }
  void Expect(const std::string& text) {
    if (!Accept(text)) {
      SyntaxError(LineNo(), Column(),
                  "expected '" + text + "'" + Found());
    }
  }
  std::string ExpectIdent(const std::string& what) {
    if (Peek().kind != TokKind::kIdent) {
      SyntaxError(LineNo(), Column(), "expected " + what + Found());
    }
    return Next().text;
  }
  int64_t ExpectInt(const std::string& what) {
    bool negative = Accept("-");
    if (Peek().kind != TokKind::kInt) {
      SyntaxError(LineNo(), Column(), "expected " + what + Found());
    }
    int64_t v = std::stoll(Next().text);
    return negative ? -v : v;
  }
  void ExpectEnd() {
    if (!AtEnd()) {
      SyntaxError(LineNo(), Column(), "unexpected '" + Peek().text + "'");
    }
  }
  std::string Found() const {
    return AtEnd() ? ", found end of line" : ", found '" + Peek().text + "'";
  }

  Expr ParseExpr() { return ParseBinary(0); }

 private:
  static int Precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return -1;
  }

  Expr ParseBinary(int min_prec) {
    Expr lhs = ParseUnary();
    while (Peek().kind == TokKind::kOp) {
      const std::string op = Peek().text;
      int prec = Precedence(op);
      if (prec < 0 || prec < min_prec) break;
      Next();
      Expr rhs = ParseBinary(prec + 1);
      Expr node;
      node.kind = Expr::Kind::kBinary;
      node.name = op;
      node.operands.push_back(std::move(lhs));
      node.operands.push_back(std::move(rhs));
      lhs = std::move(node);
    }
    return lhs;
  }

  Expr ParseUnary() {
    if (PeekIs("!") || PeekIs("-")) {
      std::string op = Next().text;
      Expr node;
      node.kind = Expr::Kind::kUnary;
      node.name = op;
      node.operands.push_back(ParseUnary());
      return node;
    }
    return ParsePrimary();
  }

  Expr ParsePrimary() {
    const Token& t = Peek();
    switch (t.kind) {
      case TokKind::kInt:
        return Expr::Int(std::stoll(Next().text));
      case TokKind::kString:
        return Expr::Str(Next().text);
      case TokKind::kIdent:
        return Expr::Name(Next().text);
      case TokKind::kOp:
        if (t.text == "(") {
          Next();
          Expr inner = ParseExpr();
          Expect(")");
          return inner;
        }
        break;
      case TokKind::kEnd:
        break;
    }
    SyntaxError(LineNo(), Column(), "expected expression" + Found());
  }

  const Line& line_;
  size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view source) {
    std::istringstream in{std::string(source)};
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      Line line{number, raw, Tokenize(raw, number)};
      if (line.tokens.empty() && !IsHeaderCandidate(raw)) continue;
      lines_.push_back(std::move(line));
    }
  }

  Scenario Parse() {
    ParseHeader();
    while (pos_ < lines_.size()) {
      const Line& line = lines_[pos_];
      TokenStream ts(line);
      std::string word = ts.ExpectIdent("top-level declaration");
      if (word == "scenario") {
        ParseScenarioName(line);
      } else if (word == "config") {
        ParseConfig(ts);
      } else if (word == "noise") {
        std::string what = ts.ExpectIdent("noise setting");
        if (what != "work_jitter") {
          SyntaxError(line.number, 1, "unknown noise setting '" + what + "'");
        }
        scenario_.config.work_jitter_ms = ts.ExpectInt("jitter bound");
        ts.ExpectEnd();
        ++pos_;
      } else if (word == "state") {
        std::string name = ts.ExpectIdent("state name");
        ts.Expect("=");
        scenario_.state.push_back({name, ts.ParseExpr()});
        ts.ExpectEnd();
        ++pos_;
      } else if (word == "planted") {
        ParsePlanted(line);
      } else if (word == "component") {
        ParseComponent(ts);
      } else if (word == "test") {
        ParseTest(ts);
      } else {
        SyntaxError(line.number, 1, "unknown declaration '" + word + "'");
      }
    }
    if (scenario_.name.empty()) {
      SyntaxError(0, 0, "missing 'scenario <name>' declaration");
    }
    return std::move(scenario_);
  }

 private:
  static bool IsHeaderCandidate(const std::string& raw) {
    return raw.find("cascadelab-scenario") != std::string::npos;
  }

  void ParseHeader() {
    if (lines_.empty()) SyntaxError(1, 1, "empty scenario");
    std::string first = lines_[0].raw;
    size_t b = first.find_first_not_of(" \t");
    size_t e = first.find_last_not_of(" \t");
    first = b == std::string::npos ? "" : first.substr(b, e - b + 1);
    if (first != kScenarioHeader) {
      SyntaxError(lines_[0].number, 1,
                  "expected header '" + std::string(kScenarioHeader) + "'");
    }
    pos_ = 1;
  }

  void ParseScenarioName(const Line& line) {
    std::istringstream words(line.raw);
    std::string kw, name, extra;
    words >> kw >> name;
    if (name.empty()) SyntaxError(line.number, 10, "expected scenario name");
    if (words >> extra && extra[0] != '#') {
      SyntaxError(line.number, 1, "unexpected '" + extra + "'");
    }
    scenario_.name = name;
    ++pos_;
  }

  void ParseConfig(TokenStream& ts) {
    std::string key = ts.ExpectIdent("config key");
    ts.Expect("=");
    Expr e = ts.ParseExpr();
    if (!e.IsLiteral()) {
      SyntaxError(ts.LineNo(), ts.Column(), "config values must be literals");
    }
    ts.ExpectEnd();
    scenario_.config.values[key] = e.literal;
    ++pos_;
  }

  void ParsePlanted(const Line& line) {
    std::istringstream words(line.raw);
    std::string kw;
    PlantedEdge edge;
    words >> kw >> edge.src >> edge.kind >> edge.dst >> edge.test;
    if (edge.test.empty()) {
      SyntaxError(line.number, 1, "expected 'planted <src> <kind> <dst> <test>'");
    }
    scenario_.planted.push_back(edge);
    ++pos_;
  }

  const Line& Current() {
    if (pos_ >= lines_.size()) {
      SyntaxError(lines_.empty() ? 0 : lines_.back().number, 1,
                  "unexpected end of file, missing '}'");
    }
    return lines_[pos_];
  }

  void ParseComponent(TokenStream& ts) {
    Component comp;
    comp.name = ts.ExpectIdent("component name");
    ts.Expect("{");
    ts.ExpectEnd();
    ++pos_;
    while (true) {
      const Line& line = Current();
      TokenStream body(line);
      if (body.Accept("}")) {
        body.ExpectEnd();
        ++pos_;
        break;
      }
      std::string word = body.ExpectIdent("'handler' or 'detector'");
      if (word == "handler") {
        comp.handlers.push_back(ParseHandler(body, comp.name));
      } else if (word == "detector") {
        comp.detectors.push_back(ParseDetector(body));
        ++pos_;
      } else {
        SyntaxError(line.number, 1, "unknown component member '" + word + "'");
      }
    }
    scenario_.components.push_back(std::move(comp));
  }

  std::vector<Parameter> ParseParams(TokenStream& ts) {
    std::vector<Parameter> params;
    if (!ts.Accept("(")) return params;
    if (ts.Accept(")")) return params;
    do {
      Parameter p;
      p.name = ts.ExpectIdent("parameter name");
      p.default_value = Expr::Int(0);
      if (ts.Accept("=")) {
        Expr e = ts.ParseExpr();
        if (!e.IsLiteral()) {
          SyntaxError(ts.LineNo(), ts.Column(),
                      "parameter defaults must be literals");
        }
        p.default_value = e;
      }
      params.push_back(std::move(p));
    } while (ts.Accept(","));
    ts.Expect(")");
    return params;
  }

  std::vector<Argument> ParseArgs(TokenStream& ts) {
    std::vector<Argument> args;
    if (!ts.Accept("(")) return args;
    if (ts.Accept(")")) return args;
    do {
      Argument a;
      a.name = ts.ExpectIdent("argument name");
      ts.Expect("=");
      a.value = ts.ParseExpr();
      args.push_back(std::move(a));
    } while (ts.Accept(","));
    ts.Expect(")");
    return args;
  }

  DetectorDecl ParseDetector(TokenStream& ts) {
    DetectorDecl d;
    d.line = ts.LineNo();
    d.id = ts.ExpectIdent("detector id");
    d.params = ParseParams(ts);
    ts.Expect("returns");
    d.healthy_when = ts.ParseExpr();
    while (!ts.AtEnd()) {
      std::string attr = ts.ExpectIdent("detector attribute");
      if (attr == "final_only") {
        d.attributes.final_only_inputs = true;
      } else if (attr == "constant_return") {
        d.attributes.constant_or_unused_return = true;
      } else if (attr == "primitive_only") {
        d.attributes.primitive_only_computation = true;
      } else if (attr == "jdk_like") {
        d.attributes.jdk_like_utility = true;
      } else {
        SyntaxError(ts.LineNo(), ts.Column(),
                    "unknown detector attribute '" + attr + "'");
      }
    }
    return d;
  }

  Handler ParseHandler(TokenStream& ts, const std::string& component) {
    Handler h;
    h.line = ts.LineNo();
    h.name = ts.ExpectIdent("handler name");
    h.params = ParseParams(ts);
    ts.Expect("{");
    ts.ExpectEnd();
    ++pos_;
    prefix_ = component + "." + h.name + "#";
    counter_ = 0;
    h.body = ParseBlockUntilClose();
    const Line& close = Current();
    TokenStream cts(close);
    cts.Expect("}");
    cts.ExpectEnd();
    ++pos_;
    return h;
  }

  // Parses statements up to (not consuming) a line that starts with '}'.
  Block ParseBlockUntilClose() {
    Block block;
    while (true) {
      const Line& line = Current();
      if (!line.tokens.empty() && line.tokens[0].text == "}" &&
          line.tokens[0].kind == TokKind::kOp) {
        return block;
      }
      block.push_back(ParseStatement());
    }
  }

  // Consumes a bare '}' line.
  void ExpectCloseLine() {
    const Line& close = Current();
    TokenStream cts(close);
    cts.Expect("}");
    cts.ExpectEnd();
    ++pos_;
  }

  Block ParseNestedBody(TokenStream& ts) {
    ts.Expect("{");
    ts.ExpectEnd();
    ++pos_;
    return ParseBlockUntilClose();
  }

  Statement ParseStatement() {
    const Line& line = Current();
    TokenStream ts(line);
    Statement stmt;
    stmt.line = line.number;
    stmt.id = prefix_ + std::to_string(++counter_);
    std::string word = ts.ExpectIdent("statement");
    if (word == "if") {
      IfStmt s;
      s.condition = ts.ParseExpr();
      s.then_body = ParseNestedBody(ts);
      const Line& close = Current();
      TokenStream cts(close);
      cts.Expect("}");
      if (cts.Accept("else")) {
        cts.Expect("{");
        cts.ExpectEnd();
        ++pos_;
        s.else_body = ParseBlockUntilClose();
        ExpectCloseLine();
      } else {
        cts.ExpectEnd();
        ++pos_;
      }
      stmt.node = std::move(s);
      return stmt;
    }
    if (word == "loop") {
      LoopStmt s;
      s.loop_id = ts.ExpectIdent("loop id");
      ts.Expect("bound");
      s.bound = ts.ParseExpr();
      while (!ts.PeekIs("{")) {
        std::string flag = ts.ExpectIdent("loop flag or '{'");
        if (flag == "const") {
          s.constant_bound = true;
        } else if (flag == "io") {
          s.performs_io = true;
        } else if (flag == "jitter") {
          s.jitter = ts.ExpectInt("jitter bound");
        } else {
          SyntaxError(line.number, ts.Column(), "unknown loop flag '" + flag + "'");
        }
      }
      s.body = ParseNestedBody(ts);
      ExpectCloseLine();
      stmt.node = std::move(s);
      return stmt;
    }
    if (word == "retry") {
      RetryStmt s;
      s.loop_id = ts.ExpectIdent("retry loop id");
      ts.Expect("attempts");
      s.attempts = ts.ParseExpr();
      while (!ts.PeekIs("{")) {
        std::string flag = ts.ExpectIdent("retry option or '{'");
        if (flag == "backoff") {
          s.backoff = ts.ParseExpr();
        } else if (flag == "const") {
          s.constant_bound = true;
        } else if (flag == "io") {
          s.performs_io = true;
        } else {
          SyntaxError(line.number, ts.Column(), "unknown retry option '" + flag + "'");
        }
      }
      s.body = ParseNestedBody(ts);
      ExpectCloseLine();
      stmt.node = std::move(s);
      return stmt;
    }
    if (word == "try") {
      TryStmt s;
      s.body = ParseNestedBody(ts);
      const Line& close = Current();
      TokenStream cts(close);
      cts.Expect("}");
      cts.Expect("catch");
      if (cts.Accept("*")) {
        s.catch_type = "*";
      } else {
        s.catch_type = cts.ExpectIdent("exception type");
      }
      cts.Expect("{");
      cts.ExpectEnd();
      ++pos_;
      s.handler = ParseBlockUntilClose();
      ExpectCloseLine();
      stmt.node = std::move(s);
      return stmt;
    }
    if (word == "detect") {
      DetectStmt s;
      s.detector_id = ts.ExpectIdent("detector id");
      s.args = ParseArgs(ts);
      if (ts.PeekIs("{")) {
        s.on_error = ParseNestedBody(ts);
        ExpectCloseLine();
      } else {
        ts.ExpectEnd();
        ++pos_;
      }
      stmt.node = std::move(s);
      return stmt;
    }
    // Single-line statements.
    if (word == "call") {
      CallStmt s;
      s.handler = ts.ExpectIdent("handler name");
      s.args = ParseArgs(ts);
      stmt.node = std::move(s);
    } else if (word == "send") {
      SendStmt s;
      s.component = ts.ExpectIdent("component name");
      s.handler = ts.ExpectIdent("handler name");
      s.args = ParseArgs(ts);
      while (!ts.AtEnd()) {
        std::string opt = ts.ExpectIdent("send option");
        if (opt == "size") {
          s.size = ts.ParseExpr();
        } else if (opt == "timeout") {
          s.timeout = ts.ParseExpr();
          ts.Expect("as");
          s.timeout_id = ts.ExpectIdent("timeout fault id");
          ts.Expect("raises");
          s.timeout_exception = ts.ExpectIdent("exception type");
        } else {
          SyntaxError(line.number, ts.Column(), "unknown send option '" + opt + "'");
        }
      }
      stmt.node = std::move(s);
    } else if (word == "throw") {
      ThrowStmt s;
      s.point_id = ts.ExpectIdent("throw point id");
      s.exception = ts.ExpectIdent("exception type");
      ts.Expect("if");
      s.guard = ts.ParseExpr();
      if (ts.Accept("excluded")) s.excluded = true;
      stmt.node = std::move(s);
    } else if (word == "libcall") {
      LibCallStmt s;
      s.call_id = ts.ExpectIdent("call id");
      while (!ts.AtEnd()) {
        std::string opt = ts.ExpectIdent("libcall option");
        if (opt == "raises") {
          s.exception = ts.ExpectIdent("exception type");
        } else if (opt == "fails_if") {
          s.fails_if = ts.ParseExpr();
        } else if (opt == "cost") {
          s.cost = ts.ParseExpr();
        } else {
          SyntaxError(line.number, ts.Column(), "unknown libcall option '" + opt + "'");
        }
      }
      if (s.fails_if && s.exception.empty()) {
        SyntaxError(line.number, 1, "fails_if requires a declared exception");
      }
      stmt.node = std::move(s);
    } else if (word == "work") {
      stmt.node = WorkStmt{ts.ParseExpr()};
    } else if (word == "sleep") {
      stmt.node = SleepStmt{ts.ParseExpr()};
    } else if (word == "set" || word == "let") {
      AssignStmt s;
      s.name = ts.ExpectIdent("variable name");
      ts.Expect("=");
      s.value = ts.ParseExpr();
      s.declares_local = word == "let";
      stmt.node = std::move(s);
    } else {
      SyntaxError(line.number, 1, "unknown statement '" + word + "'");
    }
    ts.ExpectEnd();
    ++pos_;
    return stmt;
  }

  void ParseTest(TokenStream& ts) {
    TestWorkload test;
    test.name = ts.ExpectIdent("test name");
    ts.Expect("{");
    ts.ExpectEnd();
    test_lines_[test.name] = ts.LineNo();
    ++pos_;
    while (true) {
      const Line& line = Current();
      TokenStream body(line);
      if (body.Accept("}")) {
        body.ExpectEnd();
        ++pos_;
        break;
      }
      std::string word = body.ExpectIdent("test statement");
      if (word == "set") {
        std::string key = body.ExpectIdent("config key");
        body.Expect("=");
        Expr e = body.ParseExpr();
        if (!e.IsLiteral()) {
          SyntaxError(line.number, body.Column(), "config overrides must be literals");
        }
        test.config_overrides[key] = e.literal;
        override_lines_[test.name + "/" + key] = line.number;
      } else if (word == "request") {
        Request r;
        r.line = line.number;
        r.component = body.ExpectIdent("component name");
        r.handler = body.ExpectIdent("handler name");
        r.args = ParseArgs(body);
        test.requests.push_back(std::move(r));
      } else if (word == "duration") {
        test.expected_duration_ms = body.ExpectInt("duration");
      } else {
        SyntaxError(line.number, 1, "unknown test statement '" + word + "'");
      }
      body.ExpectEnd();
      ++pos_;
    }
    scenario_.tests.push_back(std::move(test));
  }

 public:
  std::map<std::string, int> test_lines_;
  std::map<std::string, int> override_lines_;

 private:
  std::vector<Line> lines_;
  size_t pos_ = 0;
  Scenario scenario_;
  std::string prefix_;
  int counter_ = 0;
};

// Reference validation and derived metadata.
class Validator {
 public:
  Validator(Scenario& s, const std::map<std::string, int>& test_lines,
            const std::map<std::string, int>& override_lines)
      : s_(s), test_lines_(test_lines), override_lines_(override_lines) {}

  void Run() {
    CheckUniqueNames();
    for (const auto& sv : s_.state) state_names_.insert(sv.name);
    for (const auto& [key, _] : s_.config.values) config_names_.insert(key);
    for (const auto& sv : s_.state) {
      CheckNames(sv.initial, {}, 0, "state '" + sv.name + "'", false);
    }
    for (const auto& comp : s_.components) {
      for (const auto& det : comp.detectors) {
        std::set<std::string> locals;
        for (const auto& p : det.params) locals.insert(p.name);
        CheckNames(det.healthy_when, locals, det.line,
                   "detector '" + det.id + "'", true);
      }
      for (const auto& h : comp.handlers) {
        std::set<std::string> locals;
        for (const auto& p : h.params) locals.insert(p.name);
        CollectLets(h.body, locals);
        CheckBlock(comp, h, h.body, locals);
      }
    }
    CheckTests();
    CheckPlanted();
    BuildLoopMeta();
  }

 private:
  void CheckUniqueNames() {
    std::set<std::string> comps;
    for (const auto& c : s_.components) {
      if (!comps.insert(c.name).second) {
        ReferenceError(0, 0, "duplicate component '" + c.name + "'");
      }
      std::set<std::string> handlers;
      for (const auto& h : c.handlers) {
        if (!handlers.insert(h.name).second) {
          ReferenceError(h.line, 1, "duplicate handler '" + c.name + "." + h.name + "'");
        }
      }
      for (const auto& d : c.detectors) ClaimElementId(d.id, d.line);
    }
    std::set<std::string> tests;
    for (const auto& t : s_.tests) {
      if (!tests.insert(t.name).second) {
        ReferenceError(LineOf(t.name), 1, "duplicate test '" + t.name + "'");
      }
    }
  }

  int LineOf(const std::string& test) const {
    auto it = test_lines_.find(test);
    return it == test_lines_.end() ? 0 : it->second;
  }

  void ClaimElementId(const std::string& id, int line) {
    if (!element_ids_.insert(id).second) {
      ReferenceError(line, 1, "duplicate element id '" + id + "'");
    }
  }

  static void CollectLets(const Block& block, std::set<std::string>& locals) {
    for (const auto& st : block) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
              if (node.declares_local) locals.insert(node.name);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
              CollectLets(node.then_body, locals);
              CollectLets(node.else_body, locals);
            } else if constexpr (std::is_same_v<T, LoopStmt> ||
                                 std::is_same_v<T, RetryStmt>) {
              CollectLets(node.body, locals);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              CollectLets(node.body, locals);
              CollectLets(node.handler, locals);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              CollectLets(node.on_error, locals);
            }
          },
          st.node);
    }
  }

  void CheckNames(const Expr& e, const std::set<std::string>& locals, int line,
                  const std::string& where, bool allow_builtins) {
    std::vector<std::string> names;
    e.CollectNames(names);
    for (const auto& n : names) {
      if (locals.count(n) || state_names_.count(n) || config_names_.count(n)) {
        continue;
      }
      if (allow_builtins && (n == "elapsed" || n == "now")) continue;
      ReferenceError(line, 1, "undeclared name '" + n + "' in " + where);
    }
  }

  void CheckArgs(const std::vector<Argument>& args,
                 const std::vector<Parameter>& params, int line,
                 const std::string& target) {
    for (const auto& a : args) {
      bool found = false;
      for (const auto& p : params) found = found || p.name == a.name;
      if (!found) {
        ReferenceError(line, 1, "'" + target + "' has no parameter '" + a.name + "'");
      }
    }
  }

  void CheckBlock(const Component& comp, const Handler& h, const Block& block,
                  const std::set<std::string>& locals) {
    const std::string where = "handler '" + comp.name + "." + h.name + "'";
    for (const auto& st : block) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IfStmt>) {
              CheckNames(node.condition, locals, st.line, where, true);
              CheckBlock(comp, h, node.then_body, locals);
              CheckBlock(comp, h, node.else_body, locals);
            } else if constexpr (std::is_same_v<T, LoopStmt>) {
              ClaimElementId(node.loop_id, st.line);
              CheckNames(node.bound, locals, st.line, where, true);
              CheckBlock(comp, h, node.body, locals);
            } else if constexpr (std::is_same_v<T, RetryStmt>) {
              ClaimElementId(node.loop_id, st.line);
              CheckNames(node.attempts, locals, st.line, where, true);
              if (node.backoff) CheckNames(*node.backoff, locals, st.line, where, true);
              CheckBlock(comp, h, node.body, locals);
            } else if constexpr (std::is_same_v<T, CallStmt>) {
              const Handler* target = comp.FindHandler(node.handler);
              if (!target) {
                ReferenceError(st.line, 1, "call to undeclared handler '" +
                                               comp.name + "." + node.handler + "'");
              }
              CheckArgs(node.args, target->params, st.line, comp.name + "." + node.handler);
              for (const auto& a : node.args) CheckNames(a.value, locals, st.line, where, true);
            } else if constexpr (std::is_same_v<T, SendStmt>) {
              const Component* dst = s_.FindComponent(node.component);
              if (!dst) {
                ReferenceError(st.line, 1, "send to undeclared component '" + node.component + "'");
              }
              const Handler* target = dst->FindHandler(node.handler);
              if (!target) {
                ReferenceError(st.line, 1, "send to undeclared handler '" +
                                               node.component + "." + node.handler + "'");
              }
              CheckArgs(node.args, target->params, st.line, node.component + "." + node.handler);
              for (const auto& a : node.args) CheckNames(a.value, locals, st.line, where, true);
              if (node.size) CheckNames(*node.size, locals, st.line, where, true);
              if (node.timeout) {
                CheckNames(*node.timeout, locals, st.line, where, true);
                ClaimElementId(node.timeout_id, st.line);
              }
            } else if constexpr (std::is_same_v<T, ThrowStmt>) {
              ClaimElementId(node.point_id, st.line);
              CheckNames(node.guard, locals, st.line, where, true);
            } else if constexpr (std::is_same_v<T, LibCallStmt>) {
              ClaimElementId(node.call_id, st.line);
              if (node.fails_if) CheckNames(*node.fails_if, locals, st.line, where, true);
              if (node.cost) CheckNames(*node.cost, locals, st.line, where, true);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              const DetectorDecl* det = comp.FindDetector(node.detector_id);
              if (!det) {
                ReferenceError(st.line, 1, "undeclared detector '" + node.detector_id +
                                               "' in component '" + comp.name + "'");
              }
              CheckArgs(node.args, det->params, st.line, node.detector_id);
              for (const auto& a : node.args) CheckNames(a.value, locals, st.line, where, true);
              CheckBlock(comp, h, node.on_error, locals);
            } else if constexpr (std::is_same_v<T, WorkStmt> ||
                                 std::is_same_v<T, SleepStmt>) {
              CheckNames(node.amount, locals, st.line, where, true);
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
              if (!node.declares_local && !locals.count(node.name) &&
                  !state_names_.count(node.name)) {
                ReferenceError(st.line, 1, "assignment to undeclared variable '" +
                                               node.name + "'");
              }
              CheckNames(node.value, locals, st.line, where, true);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              CheckBlock(comp, h, node.body, locals);
              CheckBlock(comp, h, node.handler, locals);
            }
          },
          st.node);
    }
  }

  void CheckTests() {
    for (const auto& t : s_.tests) {
      for (const auto& [key, _] : t.config_overrides) {
        if (!config_names_.count(key)) {
          auto it = override_lines_.find(t.name + "/" + key);
          ReferenceError(it == override_lines_.end() ? 0 : it->second, 1,
                         "test '" + t.name + "' overrides undeclared config '" + key + "'");
        }
      }
      for (const auto& r : t.requests) {
        const Component* comp = s_.FindComponent(r.component);
        if (!comp) {
          ReferenceError(r.line, 1, "request to undeclared component '" + r.component + "'");
        }
        const Handler* h = comp->FindHandler(r.handler);
        if (!h) {
          ReferenceError(r.line, 1, "request to undeclared handler '" + r.component +
                                        "." + r.handler + "'");
        }
        CheckArgs(r.args, h->params, r.line, r.component + "." + r.handler);
        for (const auto& a : r.args) {
          CheckNames(a.value, {}, r.line, "test '" + t.name + "'", false);
        }
      }
    }
  }

  void CheckPlanted() {
    static const std::set<std::string> kKinds = {"E(D)", "S+(D)", "E(I)",
                                                 "S+(I)", "ICFG", "CFG"};
    for (const auto& p : s_.planted) {
      if (!kKinds.count(p.kind)) {
        ReferenceError(0, 0, "unknown planted edge kind '" + p.kind + "'");
      }
      for (const auto* id : {&p.src, &p.dst}) {
        if (!element_ids_.count(*id)) {
          ReferenceError(0, 0, "planted edge references unknown element '" + *id + "'");
        }
      }
      if (!s_.FindTest(p.test)) {
        ReferenceError(0, 0, "planted edge references unknown test '" + p.test + "'");
      }
    }
  }

  // Counts statements reachable from `block`, following call/send edges.
  void Reach(const Component& comp, const Block& block, int64_t& size,
             bool& io, std::set<std::string>& visited) {
    for (const auto& st : block) {
      ++size;
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IfStmt>) {
              Reach(comp, node.then_body, size, io, visited);
              Reach(comp, node.else_body, size, io, visited);
            } else if constexpr (std::is_same_v<T, LoopStmt> ||
                                 std::is_same_v<T, RetryStmt>) {
              Reach(comp, node.body, size, io, visited);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              Reach(comp, node.body, size, io, visited);
              Reach(comp, node.handler, size, io, visited);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              Reach(comp, node.on_error, size, io, visited);
            } else if constexpr (std::is_same_v<T, CallStmt>) {
              const Handler* h = comp.FindHandler(node.handler);
              if (visited.insert(comp.name + "." + h->name).second) {
                Reach(comp, h->body, size, io, visited);
              }
            } else if constexpr (std::is_same_v<T, SendStmt>) {
              io = true;
              const Component* dst = s_.FindComponent(node.component);
              const Handler* h = dst->FindHandler(node.handler);
              if (visited.insert(dst->name + "." + h->name).second) {
                Reach(*dst, h->body, size, io, visited);
              }
            } else if constexpr (std::is_same_v<T, LibCallStmt>) {
              io = true;
            }
          },
          st.node);
    }
  }

  void CollectLoops(const Component& comp, const Handler& h, const Block& block,
                    const std::optional<std::string>& parent) {
    std::vector<size_t> in_block;
    for (const auto& st : block) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, LoopStmt> ||
                          std::is_same_v<T, RetryStmt>) {
              LoopMeta meta;
              meta.loop_id = node.loop_id;
              meta.constant_bound = node.constant_bound;
              meta.parent_loop = parent;
              meta.statement_id = st.id;
              meta.component = comp.name;
              meta.handler = h.name;
              std::set<std::string> visited{comp.name + "." + h.name};
              bool io = node.performs_io;
              Reach(comp, node.body, meta.reachable_code_size, io, visited);
              meta.performs_io = io;
              in_block.push_back(s_.loops.size());
              s_.loops.push_back(std::move(meta));
              CollectLoops(comp, h, node.body, node.loop_id);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
              CollectLoops(comp, h, node.then_body, parent);
              CollectLoops(comp, h, node.else_body, parent);
            } else if constexpr (std::is_same_v<T, TryStmt>) {
              CollectLoops(comp, h, node.body, parent);
              CollectLoops(comp, h, node.handler, parent);
            } else if constexpr (std::is_same_v<T, DetectStmt>) {
              CollectLoops(comp, h, node.on_error, parent);
            }
          },
          st.node);
    }
    for (size_t i = 0; i + 1 < in_block.size(); ++i) {
      s_.loops[in_block[i]].next_sibling_loop = s_.loops[in_block[i + 1]].loop_id;
    }
  }

  void BuildLoopMeta() {
    s_.loops.clear();
    for (const auto& comp : s_.components) {
      for (const auto& h : comp.handlers) {
        CollectLoops(comp, h, h.body, std::nullopt);
      }
    }
  }

  Scenario& s_;
  const std::map<std::string, int>& test_lines_;
  const std::map<std::string, int>& override_lines_;
  std::set<std::string> element_ids_;
  std::set<std::string> state_names_;
  std::set<std::string> config_names_;
};

}  // namespace

Scenario ParseScenario(std::string_view source) {
  Parser parser(source);
  Scenario s = parser.Parse();
  Validator(s, parser.test_lines_, parser.override_lines_).Run();
  return s;
}

Scenario LoadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(ScenarioError::Kind::kIo, 0, 0,
                        "cannot open scenario file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseScenario(buf.str());
}

}  // namespace cascadelab
