#pragma once

#include <functional>
#include <optional>

#include "pmask/lang/ast.hpp"

namespace pmask::lang {

struct Value {
  bool is_bool = false;
  bool truth = false;
  Rat number;

  static Value boolean(bool v) {
    Value out;
    out.is_bool = true;
    out.truth = v;
    return out;
  }
  static Value num(Rat v) {
    Value out;
    out.number = std::move(v);
    return out;
  }
};

using Env = std::function<std::optional<Value>(const std::string&)>;

inline Value eval(const Expr& e, const Env& env) {
  auto want_num = [&](const Expr& sub) {
    Value v = eval(sub, env);
    if (v.is_bool) throw EvalError(sub.pos.str() + ": expected a numeric operand");
    return v.number;
  };
  auto want_bool = [&](const Expr& sub) {
    Value v = eval(sub, env);
    if (!v.is_bool) throw EvalError(sub.pos.str() + ": expected a boolean operand");
    return v.truth;
  };
  switch (e.kind) {
    case ExprKind::Number:
      return Value::num(e.number);
    case ExprKind::Bool:
      return Value::boolean(e.truth);
    case ExprKind::Ident: {
      auto v = env(e.ident);
      if (!v) throw EvalError(e.pos.str() + ": unknown variable " + e.ident);
      return *v;
    }
    case ExprKind::Unary:
      if (e.op == "!") return Value::boolean(!want_bool(e.args[0]));
      return Value::num(-want_num(e.args[0]));
    case ExprKind::Ternary:
      return eval(e.args[want_bool(e.args[0]) ? 1 : 2], env);
    case ExprKind::Binary: {
      if (e.op == "&") return Value::boolean(want_bool(e.args[0]) && want_bool(e.args[1]));
      if (e.op == "|") return Value::boolean(want_bool(e.args[0]) || want_bool(e.args[1]));
      Rat lhs = want_num(e.args[0]);
      Rat rhs = want_num(e.args[1]);
      if (e.op == "+") return Value::num(lhs + rhs);
      if (e.op == "-") return Value::num(lhs - rhs);
      if (e.op == "*") return Value::num(lhs * rhs);
      if (e.op == "/") {
        if (rhs == 0) throw EvalError(e.pos.str() + ": division by zero");
        return Value::num(lhs / rhs);
      }
      if (e.op == "=") return Value::boolean(lhs == rhs);
      if (e.op == "!=") return Value::boolean(lhs != rhs);
      if (e.op == "<") return Value::boolean(lhs < rhs);
      if (e.op == "<=") return Value::boolean(lhs <= rhs);
      if (e.op == ">") return Value::boolean(lhs > rhs);
      if (e.op == ">=") return Value::boolean(lhs >= rhs);
      throw EvalError(e.pos.str() + ": bad operator " + e.op);
    }
  }
  throw EvalError("unreachable expression kind");
}

/// Collects identifiers referenced by an expression.
inline void collect_idents(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == ExprKind::Ident) out.push_back(&e);
  for (auto& sub : e.args) collect_idents(sub, out);
}

}  // namespace pmask::lang
