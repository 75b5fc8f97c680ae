#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "pmask/lang/ast.hpp"
#include "pmask/lang/eval.hpp"

namespace pmask::lang {

namespace detail {

enum class Tok {
  Ident, Number, KwModule, KwEndmodule, KwInit, KwConst, KwFaults, KwTrue, KwFalse,
  LBracket, RBracket, LParen, RParen, Semi, Colon, Comma, Arrow, Prime, DotDot,
  Amp, Pipe, Bang, Eq, Neq, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash, Question, End,
};

struct Token {
  Tok kind;
  std::string text;
  Rat number;
  SourcePos pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string text, SourcePos p) { out.push_back({k, std::move(text), Rat(0), p}); };
  while (i < src.size()) {
    char c = src[i];
    SourcePos pos{line, col};
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word(src.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      Tok k = Tok::Ident;
      if (word == "module") k = Tok::KwModule;
      else if (word == "endmodule") k = Tok::KwEndmodule;
      else if (word == "init") k = Tok::KwInit;
      else if (word == "const") k = Tok::KwConst;
      else if (word == "faults") k = Tok::KwFaults;
      else if (word == "true") k = Tok::KwTrue;
      else if (word == "false") k = Tok::KwFalse;
      push(k, word, pos);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      // a '.' begins a fractional part only if not followed by another '.'
      if (j < src.size() && src[j] == '.' && !(j + 1 < src.size() && src[j + 1] == '.')) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      std::string text(src.substr(i, j - i));
      auto r = rat_parse(text);
      if (!r) throw ParseError(pos, "malformed number '" + text + "'");
      col += static_cast<int>(j - i);
      i = j;
      out.push_back({Tok::Number, text, *r, pos});
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    if (two('-', '>')) { push(Tok::Arrow, "->", pos); i += 2; col += 2; continue; }
    if (two('.', '.')) { push(Tok::DotDot, "..", pos); i += 2; col += 2; continue; }
    if (two('!', '=')) { push(Tok::Neq, "!=", pos); i += 2; col += 2; continue; }
    if (two('<', '=')) { push(Tok::Le, "<=", pos); i += 2; col += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge, ">=", pos); i += 2; col += 2; continue; }
    Tok k;
    switch (c) {
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case ',': k = Tok::Comma; break;
      case '\'': k = Tok::Prime; break;
      case '&': k = Tok::Amp; break;
      case '|': k = Tok::Pipe; break;
      case '!': k = Tok::Bang; break;
      case '=': k = Tok::Eq; break;
      case '<': k = Tok::Lt; break;
      case '>': k = Tok::Gt; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '?': k = Tok::Question; break;
      default:
        throw ParseError(pos, std::string("unexpected character '") + c + "'");
    }
    push(k, std::string(1, c), pos);
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", Rat(0), {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  ModelFile parse_model() {
    ModelFile file;
    bool have_module = false;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::KwConst) {
        next();
        Token name = expect(Tok::Ident, "constant name");
        if (file.constants.count(name.text))
          throw ParseError(name.pos, "duplicate constant '" + name.text + "'");
        if (peek().kind == Tok::Eq) {
          next();
          Expr e = parse_expr();
          Rat v = eval_const(e, file);
          file.constants[name.text] = v;
        } else {
          file.constants[name.text] = std::nullopt;
        }
        expect(Tok::Semi, "';'");
      } else if (peek().kind == Tok::KwFaults) {
        next();
        file.declared_faults.insert(expect(Tok::Ident, "action name").text);
        while (peek().kind == Tok::Comma) {
          next();
          file.declared_faults.insert(expect(Tok::Ident, "action name").text);
        }
        expect(Tok::Semi, "';'");
      } else if (peek().kind == Tok::KwModule) {
        if (have_module) throw ParseError(peek().pos, "only one module per file is supported");
        have_module = true;
        file.module = parse_module();
      } else {
        throw ParseError(peek().pos, "expected 'const', 'faults' or 'module', got '" + peek().text + "'");
      }
    }
    if (!have_module) throw ParseError(peek().pos, "no module declared");
    resolve(file);
    return file;
  }

 private:
  ModuleAst parse_module() {
    expect(Tok::KwModule, "'module'");
    ModuleAst mod;
    mod.name = expect(Tok::Ident, "module name").text;
    while (peek().kind != Tok::KwEndmodule) {
      if (peek().kind == Tok::Ident) {
        VarDecl var;
        Token name = next();
        var.name = name.text;
        var.pos = name.pos;
        expect(Tok::Colon, "':'");
        expect(Tok::LBracket, "'['");
        var.lower = parse_expr();
        expect(Tok::DotDot, "'..'");
        var.upper = parse_expr();
        expect(Tok::RBracket, "']'");
        expect(Tok::KwInit, "'init'");
        var.init = parse_expr();
        expect(Tok::Semi, "';'");
        mod.variables.push_back(std::move(var));
      } else if (peek().kind == Tok::LBracket) {
        mod.commands.push_back(parse_command());
      } else {
        throw ParseError(peek().pos, "expected variable declaration or command, got '" + peek().text + "'");
      }
    }
    next();  // endmodule
    return mod;
  }

  Command parse_command() {
    Command cmd;
    cmd.pos = expect(Tok::LBracket, "'['").pos;
    cmd.action = expect(Tok::Ident, "action name").text;
    expect(Tok::RBracket, "']'");
    cmd.guard = parse_expr();
    expect(Tok::Arrow, "'->'");
    cmd.branches.push_back(parse_branch());
    while (peek().kind == Tok::Plus) {
      next();
      cmd.branches.push_back(parse_branch());
    }
    expect(Tok::Semi, "';'");
    if (cmd.branches.size() > 1)
      for (auto& b : cmd.branches)
        if (!b.prob) throw ParseError(cmd.pos, "every alternative of a probabilistic command needs a probability");
    return cmd;
  }

  UpdateBranch parse_branch() {
    UpdateBranch branch;
    if (is_assignment_start()) {
      branch.assigns = parse_assignment_list();
      return branch;
    }
    if (peek().kind == Tok::KwTrue && peek(1).kind != Tok::Colon && !is_expr_continuation(peek(1).kind)) {
      next();
      return branch;  // identity update
    }
    branch.prob = parse_expr();
    expect(Tok::Colon, "':'");
    branch.assigns = parse_assignment_list();
    return branch;
  }

  std::vector<Assignment> parse_assignment_list() {
    std::vector<Assignment> out;
    if (peek().kind == Tok::KwTrue) {
      next();
      return out;  // identity
    }
    out.push_back(parse_assignment());
    while (peek().kind == Tok::Amp) {
      next();
      out.push_back(parse_assignment());
    }
    return out;
  }

  Assignment parse_assignment() {
    expect(Tok::LParen, "'('");
    Assignment a;
    Token name = expect(Tok::Ident, "variable name");
    a.var = name.text;
    a.pos = name.pos;
    expect(Tok::Prime, "'''");
    expect(Tok::Eq, "'='");
    a.value = parse_expr();
    expect(Tok::RParen, "')'");
    return a;
  }

  bool is_assignment_start() {
    return peek().kind == Tok::LParen && peek(1).kind == Tok::Ident && peek(2).kind == Tok::Prime;
  }

  static bool is_expr_continuation(Tok k) {
    switch (k) {
      case Tok::Amp: case Tok::Pipe: case Tok::Question: case Tok::Eq: case Tok::Neq:
      case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge: case Tok::Plus:
      case Tok::Minus: case Tok::Star: case Tok::Slash:
        return true;
      default:
        return false;
    }
  }

  // expression grammar, lowest precedence first
  Expr parse_expr() { return parse_ternary(); }

  Expr parse_ternary() {
    Expr cond = parse_or();
    if (peek().kind != Tok::Question) return cond;
    SourcePos pos = next().pos;
    Expr then = parse_ternary();
    expect(Tok::Colon, "':'");
    Expr other = parse_ternary();
    Expr e;
    e.kind = ExprKind::Ternary;
    e.pos = pos;
    e.args = {std::move(cond), std::move(then), std::move(other)};
    return e;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (peek().kind == Tok::Pipe) {
      SourcePos pos = next().pos;
      lhs = binary("|", std::move(lhs), parse_and(), pos);
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (peek().kind == Tok::Amp) {
      SourcePos pos = next().pos;
      lhs = binary("&", std::move(lhs), parse_not(), pos);
    }
    return lhs;
  }

  Expr parse_not() {
    if (peek().kind == Tok::Bang) {
      SourcePos pos = next().pos;
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = "!";
      e.pos = pos;
      e.args.push_back(parse_not());
      return e;
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr lhs = parse_addsub();
    std::string op;
    switch (peek().kind) {
      case Tok::Eq: op = "="; break;
      case Tok::Neq: op = "!="; break;
      case Tok::Lt: op = "<"; break;
      case Tok::Le: op = "<="; break;
      case Tok::Gt: op = ">"; break;
      case Tok::Ge: op = ">="; break;
      default: return lhs;
    }
    SourcePos pos = next().pos;
    return binary(op, std::move(lhs), parse_addsub(), pos);
  }

  Expr parse_addsub() {
    Expr lhs = parse_muldiv();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      std::string op = peek().kind == Tok::Plus ? "+" : "-";
      SourcePos pos = next().pos;
      lhs = binary(op, std::move(lhs), parse_muldiv(), pos);
    }
    return lhs;
  }

  Expr parse_muldiv() {
    Expr lhs = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      std::string op = peek().kind == Tok::Star ? "*" : "/";
      SourcePos pos = next().pos;
      lhs = binary(op, std::move(lhs), parse_unary(), pos);
    }
    return lhs;
  }

  Expr parse_unary() {
    if (peek().kind == Tok::Minus) {
      SourcePos pos = next().pos;
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = "-";
      e.pos = pos;
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_atom();
  }

  Expr parse_atom() {
    Token t = next();
    Expr e;
    e.pos = t.pos;
    switch (t.kind) {
      case Tok::Number:
        e.kind = ExprKind::Number;
        e.number = t.number;
        return e;
      case Tok::KwTrue:
        e.kind = ExprKind::Bool;
        e.truth = true;
        return e;
      case Tok::KwFalse:
        e.kind = ExprKind::Bool;
        e.truth = false;
        return e;
      case Tok::Ident:
        e.kind = ExprKind::Ident;
        e.ident = t.text;
        return e;
      case Tok::LParen: {
        Expr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        throw ParseError(t.pos, "expected expression, got '" + t.text + "'");
    }
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.op = std::move(op);
    e.pos = pos;
    e.args = {std::move(lhs), std::move(rhs)};
    return e;
  }

  // Constant-only evaluation for `const` initializers.
  Rat eval_const(const Expr& e, const ModelFile& file);

  // Post-parse identifier and probability checks.
  void resolve(ModelFile& file);
  void check_idents(const Expr& e, const ModelFile& file, bool consts_only, const char* what);

  const Token& peek(int ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) throw ParseError(peek().pos, "expected " + what + ", got '" + peek().text + "'");
    return next();
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

inline Rat Parser::eval_const(const Expr& e, const ModelFile& file) {
  Env env = [&](const std::string& name) -> std::optional<Value> {
    auto it = file.constants.find(name);
    if (it == file.constants.end() || !it->second) return std::nullopt;
    return Value::num(*it->second);
  };
  try {
    Value v = eval(e, env);
    if (v.is_bool) throw ParseError(e.pos, "constant initializer must be numeric");
    return v.number;
  } catch (const EvalError& err) {
    throw ParseError(e.pos, err.what());
  }
}

inline void Parser::check_idents(const Expr& e, const ModelFile& file, bool consts_only, const char* what) {
  std::vector<const Expr*> idents;
  collect_idents(e, idents);
  for (const Expr* id : idents) {
    bool is_const = file.constants.count(id->ident) > 0;
    bool is_var = false;
    for (auto& v : file.module.variables) is_var |= v.name == id->ident;
    if (!is_const && !is_var) throw ParseError(id->pos, "unknown variable " + id->ident);
    if (consts_only && is_var)
      throw ParseError(id->pos, std::string(what) + " not constant: references variable " + id->ident);
  }
}

inline void Parser::resolve(ModelFile& file) {
  for (size_t i = 0; i < file.module.variables.size(); ++i) {
    const auto& var = file.module.variables[i];
    for (size_t j = 0; j < i; ++j)
      if (file.module.variables[j].name == var.name)
        throw ParseError(var.pos, "duplicate variable " + var.name);
    if (file.constants.count(var.name)) throw ParseError(var.pos, "variable shadows constant " + var.name);
    check_idents(var.lower, file, true, "variable bound");
    check_idents(var.upper, file, true, "variable bound");
    check_idents(var.init, file, true, "variable initializer");
  }
  for (auto& cmd : file.module.commands) {
    check_idents(cmd.guard, file, false, "guard");
    for (auto& branch : cmd.branches) {
      if (branch.prob) check_idents(*branch.prob, file, true, "probability expression");
      for (size_t i = 0; i < branch.assigns.size(); ++i) {
        const auto& a = branch.assigns[i];
        bool declared = false;
        for (auto& v : file.module.variables) declared |= v.name == a.var;
        if (!declared) throw ParseError(a.pos, "unknown variable " + a.var);
        for (size_t j = 0; j < i; ++j)
          if (branch.assigns[j].var == a.var)
            throw ParseError(a.pos, "variable " + a.var + " assigned twice in one update");
        check_idents(a.value, file, false, "update");
      }
    }
    // Probability sums are checked here whenever all referenced constants
    // already carry values; otherwise elaboration rechecks after overrides.
    bool evaluable = true;
    for (auto& branch : cmd.branches) {
      if (!branch.prob) continue;
      std::vector<const Expr*> idents;
      collect_idents(*branch.prob, idents);
      for (const Expr* id : idents) {
        auto it = file.constants.find(id->ident);
        if (it == file.constants.end() || !it->second) evaluable = false;
      }
    }
    if (evaluable && cmd.branches.size() > 0 && cmd.branches[0].prob) {
      Rat total = 0;
      Env env = [&](const std::string& name) -> std::optional<Value> {
        auto it = file.constants.find(name);
        if (it == file.constants.end() || !it->second) return std::nullopt;
        return Value::num(*it->second);
      };
      for (auto& branch : cmd.branches) {
        Value v = eval(*branch.prob, env);
        if (v.is_bool) throw ParseError(branch.prob->pos, "probability expression must be numeric");
        if (v.number < 0 || v.number > 1)
          throw ParseError(branch.prob->pos, "probability " + rat_to_string(v.number) + " outside [0,1]");
        total += v.number;
      }
      if (total != 1)
        throw ParseError(cmd.pos, "probabilities sum to " + rat_to_string(total) + " on [" + cmd.action + "]");
    }
  }
}

}  // namespace detail

/// Parses the guarded-command module language. Throws ParseError with
/// line:column on malformed input, unknown identifiers, duplicate variables,
/// and probability vectors that are constant but do not sum to 1.
inline ModelFile parse(std::string_view text) { return detail::Parser(text).parse_model(); }

}  // namespace pmask::lang
