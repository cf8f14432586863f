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

#include "cascadelab/expr.h"

#include <utility>

namespace cascadelab {

std::string ValueToString(const Value& value) {
  if (const auto* i = std::get_if<int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

int64_t AsInt(const Value& value) {
  if (const auto* i = std::get_if<int64_t>(&value)) return *i;
  throw EvalError("expected integer, got string \"" +
                  std::get<std::string>(value) + "\"");
}

bool Truthy(const Value& value) {
  if (const auto* i = std::get_if<int64_t>(&value)) return *i != 0;
  return !std::get<std::string>(value).empty();
}

Expr Expr::Int(int64_t v) {
  Expr e;
  e.kind = Kind::kLiteral;
  e.literal = v;
  return e;
}

Expr Expr::Str(std::string v) {
  Expr e;
  e.kind = Kind::kLiteral;
  e.literal = std::move(v);
  return e;
}

Expr Expr::Name(std::string v) {
  Expr e;
  e.kind = Kind::kName;
  e.name = std::move(v);
  return e;
}

void Expr::CollectNames(std::vector<std::string>& out) const {
  if (kind == Kind::kName) out.push_back(name);
  for (const auto& op : operands) op.CollectNames(out);
}

namespace {

Value Compare(const std::string& op, const Value& a, const Value& b) {
  if (op == "==") return int64_t{a == b};
  if (op == "!=") return int64_t{a != b};
  int64_t x = AsInt(a);
  int64_t y = AsInt(b);
  if (op == "<") return int64_t{x < y};
  if (op == "<=") return int64_t{x <= y};
  if (op == ">") return int64_t{x > y};
  return int64_t{x >= y};
}

}  // namespace

Value Evaluate(const Expr& expr, const NameLookup& lookup) {
  switch (expr.kind) {
    case Expr::Kind::kLiteral:
      return expr.literal;
    case Expr::Kind::kName:
      return lookup(expr.name);
    case Expr::Kind::kUnary: {
      Value v = Evaluate(expr.operands[0], lookup);
      if (expr.name == "!") return int64_t{!Truthy(v)};
      return -AsInt(v);
    }
    case Expr::Kind::kBinary:
      break;
  }
  const std::string& op = expr.name;
  if (op == "&&") {
    if (!Truthy(Evaluate(expr.operands[0], lookup))) return int64_t{0};
    return int64_t{Truthy(Evaluate(expr.operands[1], lookup))};
  }
  if (op == "||") {
    if (Truthy(Evaluate(expr.operands[0], lookup))) return int64_t{1};
    return int64_t{Truthy(Evaluate(expr.operands[1], lookup))};
  }
  Value a = Evaluate(expr.operands[0], lookup);
  Value b = Evaluate(expr.operands[1], lookup);
  if (op == "+") {
    if (std::holds_alternative<std::string>(a) ||
        std::holds_alternative<std::string>(b)) {
      return ValueToString(a) + ValueToString(b);
    }
    return AsInt(a) + AsInt(b);
  }
  if (op == "-") return AsInt(a) - AsInt(b);
  if (op == "*") return AsInt(a) * AsInt(b);
  if (op == "/" || op == "%") {
    int64_t d = AsInt(b);
    if (d == 0) throw EvalError("division by zero");
    return op == "/" ? AsInt(a) / d : AsInt(a) % d;
  }
  return Compare(op, a, b);
}

std::string ExprToString(const Expr& expr) {
  switch (expr.kind) {
    case Expr::Kind::kLiteral:
      if (std::holds_alternative<std::string>(expr.literal)) {
        return "\"" + std::get<std::string>(expr.literal) + "\"";
      }
      return ValueToString(expr.literal);
    case Expr::Kind::kName:
      return expr.name;
    case Expr::Kind::kUnary:
      return expr.name + ExprToString(expr.operands[0]);
    case Expr::Kind::kBinary:
      return "(" + ExprToString(expr.operands[0]) + " " + expr.name + " " +
             ExprToString(expr.operands[1]) + ")";
  }
  return {};
}

}  // namespace cascadelab
