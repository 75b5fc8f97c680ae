#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pmask/rational.hpp"

namespace pmask::lang {

struct SourcePos {
  int line = 0, col = 0;
  std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

struct ParseError : std::runtime_error {
  SourcePos pos;
  ParseError(SourcePos p, const std::string& msg)
      : std::runtime_error(p.str() + ": " + msg), pos(p) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExprKind { Number, Bool, Ident, Unary, Binary, Ternary };

struct Expr {
  ExprKind kind = ExprKind::Bool;
  Rat number;
  bool truth = false;
  std::string ident;
  std::string op;
  std::vector<Expr> args;
  SourcePos pos;
};

struct Assignment {
  std::string var;
  Expr value;
  SourcePos pos;
};

/// One probabilistic alternative of a command: optional probability
/// expression (absent = the command's single branch, probability 1) and the
/// simultaneous assignments; an empty assignment list is the identity update.
struct UpdateBranch {
  std::optional<Expr> prob;
  std::vector<Assignment> assigns;
};

struct Command {
  std::string action;
  Expr guard;
  std::vector<UpdateBranch> branches;
  SourcePos pos;
};

struct VarDecl {
  std::string name;
  Expr lower, upper, init;
  SourcePos pos;
};

struct ModuleAst {
  std::string name;
  std::vector<VarDecl> variables;
  std::vector<Command> commands;
};

struct ModelFile {
  std::map<std::string, std::optional<Rat>> constants;  // nullopt: value supplied at run time
  ModuleAst module;
  std::set<std::string> declared_faults;
};

}  // namespace pmask::lang
