#pragma once

// Small expression parser for user-defined level sets.
// Variables x, y; operators + - * / ^; functions sin, cos, atan2, sqrt.

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "aifem/geometry.hpp"

namespace aifem {

class ExprProgram {
 public:
  double eval(double x, double y) const {
    double stack[64];
    int sp = 0;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::Push: stack[sp++] = in.value; break;
        case Op::VarX: stack[sp++] = x; break;
        case Op::VarY: stack[sp++] = y; break;
        case Op::Add: sp--; stack[sp - 1] += stack[sp]; break;
        case Op::Sub: sp--; stack[sp - 1] -= stack[sp]; break;
        case Op::Mul: sp--; stack[sp - 1] *= stack[sp]; break;
        case Op::Div: sp--; stack[sp - 1] /= stack[sp]; break;
        case Op::Pow:
          sp--;
          stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]);
          break;
        case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
        case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
        case Op::Sqrt: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
        case Op::Atan2:
          sp--;
          stack[sp - 1] = std::atan2(stack[sp - 1], stack[sp]);
          break;
      }
    }
    return stack[0];
  }

  static ExprProgram parse(const std::string& text) {
    Parser p(text);
    ExprProgram prog;
    p.expr(prog);
    p.expect_end();
    return prog;
  }

 private:
  enum class Op {
    Push, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg,
    Sin, Cos, Sqrt, Atan2
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };
  std::vector<Instr> code_;

  void emit(Op op, double v = 0.0) { code_.push_back({op, v}); }

  class Parser {
   public:
    explicit Parser(const std::string& s) : s_(s) {}

    void expr(ExprProgram& out) {
      term(out);
      for (;;) {
        skip_ws();
        if (accept('+')) {
          term(out);
          out.emit(Op::Add);
        } else if (accept('-')) {
          term(out);
          out.emit(Op::Sub);
        } else {
          return;
        }
      }
    }

    void expect_end() {
      skip_ws();
      if (pos_ != s_.size())
        throw Error("expression: unexpected '" + s_.substr(pos_) + "'");
    }

   private:
    void term(ExprProgram& out) {
      factor(out);
      for (;;) {
        skip_ws();
        if (accept('*')) {
          factor(out);
          out.emit(Op::Mul);
        } else if (accept('/')) {
          factor(out);
          out.emit(Op::Div);
        } else {
          return;
        }
      }
    }

    // right-associative power binds tighter than unary minus on the left
    void factor(ExprProgram& out) {
      unary(out);
      skip_ws();
      if (accept('^')) {
        factor(out);
        out.emit(Op::Pow);
      }
    }

    void unary(ExprProgram& out) {
      skip_ws();
      if (accept('-')) {
        unary(out);
        out.emit(Op::Neg);
        return;
      }
      accept('+');
      primary(out);
    }

    void primary(ExprProgram& out) {
      skip_ws();
      if (accept('(')) {
        out.parse_subexpr(*this);
        expect(')');
        return;
      }
      if (pos_ < s_.size() && (std::isdigit(s_[pos_]) || s_[pos_] == '.')) {
        size_t used = 0;
        const double v = std::stod(s_.substr(pos_), &used);
        pos_ += used;
        out.emit(Op::Push, v);
        return;
      }
      std::string id = ident();
      if (id == "x") {
        out.emit(Op::VarX);
      } else if (id == "y") {
        out.emit(Op::VarY);
      } else if (id == "pi") {
        out.emit(Op::Push, M_PI);
      } else if (id == "sin" || id == "cos" || id == "sqrt") {
        expect('(');
        out.parse_subexpr(*this);
        expect(')');
        out.emit(id == "sin" ? Op::Sin : id == "cos" ? Op::Cos : Op::Sqrt);
      } else if (id == "atan2") {
        expect('(');
        out.parse_subexpr(*this);
        expect(',');
        out.parse_subexpr(*this);
        expect(')');
        out.emit(Op::Atan2);
      } else {
        throw Error("expression: unknown identifier '" + id + "'");
      }
    }

    std::string ident() {
      skip_ws();
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(s_[pos_]) || s_[pos_] == '_'))
        ++pos_;
      if (start == pos_) throw Error("expression: expected identifier/number");
      return s_.substr(start, pos_ - start);
    }

    void skip_ws() {
      while (pos_ < s_.size() && std::isspace(s_[pos_])) ++pos_;
    }
    bool accept(char c) {
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == c) {
        ++pos_;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c))
        throw Error(std::string("expression: expected '") + c + "'");
    }

    const std::string& s_;
    size_t pos_ = 0;

    friend class ExprProgram;
  };

  void parse_subexpr(Parser& p) { p.expr(*this); }

  friend class Parser;
};

inline LevelSet make_expression_levelset(const std::string& name,
                                         const std::string& expr) {
  ExprProgram prog = ExprProgram::parse(expr);
  return {name, {}, [prog](double x, double y) { return prog.eval(x, y); }};
}

}  // namespace aifem
