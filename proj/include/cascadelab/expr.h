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

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cascadelab {

using Value = std::variant<int64_t, std::string>;

std::string ValueToString(const Value& value);
int64_t AsInt(const Value& value);
bool Truthy(const Value& value);

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Expr {
  enum class Kind { kLiteral, kName, kUnary, kBinary };

  Kind kind = Kind::kLiteral;
  Value literal = int64_t{0};
  std::string name;  // identifier for kName, operator for kUnary/kBinary
  std::vector<Expr> operands;

  static Expr Int(int64_t v);
  static Expr Str(std::string v);
  static Expr Name(std::string v);

  bool IsLiteral() const { return kind == Kind::kLiteral; }

  // Every identifier referenced by this expression, in order.
  void CollectNames(std::vector<std::string>& out) const;
};

using NameLookup = std::function<Value(const std::string&)>;

Value Evaluate(const Expr& expr, const NameLookup& lookup);

std::string ExprToString(const Expr& expr);

}  // namespace cascadelab
