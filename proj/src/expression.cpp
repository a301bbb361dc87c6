#include "qgx/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "qgx/errors.hpp"

namespace qgx {

namespace {

constexpr int kMaxDepth = 64;

class Parser {
 public:
  Parser(const std::string& text, const std::string& allowed) : s_(text), allowed_(allowed) {}

  void parse(std::vector<Expression::Instr>& code, std::uint32_t& used) {
    code_ = &code;
    used_ = &used;
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    if (max_depth_ > kMaxDepth) fail("expression nests too deeply");
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression: " + msg + " at column " + std::to_string(pos_ + 1), 1,
                     pos_ + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Op op, int index = 0, double value = 0.0) {
    code_->push_back({op, index, value});
    switch (op) {
      case Op::Const:
      case Op::Load:
        ++depth_;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow:
      case Op::Min:
      case Op::Max:
        --depth_;
        break;
      default:
        break;
    }
    if (depth_ > max_depth_) max_depth_ = depth_;
  }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::Add);
      } else if (accept('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::Neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();  // right associative, binds tighter than unary minus on the left
      emit(Op::Pow);
    }
  }

  void primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      emit(Op::Const, 0, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = s_.substr(start, pos_ - start);
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        call(name, start);
        return;
      }
      variable(name, start);
      return;
    }
    if (accept('(')) {
      expr();
      expect(')');
      return;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  void variable(const std::string& name, std::size_t start) {
    if (name == "pi") {
      emit(Op::Const, 0, std::numbers::pi);
      return;
    }
    static const std::string vars = "tyzx";
    if (name.size() == 1) {
      const auto idx = vars.find(name[0]);
      if (idx != std::string::npos) {
        if (allowed_.find(name[0]) == std::string::npos) {
          pos_ = start;
          fail("variable '" + name + "' is not allowed here");
        }
        *used_ |= 1u << idx;
        emit(Op::Load, static_cast<int>(idx));
        return;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  void call(const std::string& name, std::size_t start) {
    struct Fn {
      const char* name;
      Op op;
      int arity;
    };
    static const Fn fns[] = {{"abs", Op::Abs, 1},   {"exp", Op::Exp, 1},   {"log", Op::Log, 1},
                             {"sqrt", Op::Sqrt, 1}, {"tanh", Op::Tanh, 1}, {"sin", Op::Sin, 1},
                             {"cos", Op::Cos, 1},   {"min", Op::Min, 2},   {"max", Op::Max, 2}};
    const Fn* fn = nullptr;
    for (const auto& f : fns) {
      if (name == f.name) fn = &f;
    }
    if (fn == nullptr) {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    expect('(');
    expr();
    for (int a = 1; a < fn->arity; ++a) {
      expect(',');
      expr();
    }
    expect(')');
    emit(fn->op);
  }

  const std::string& s_;
  const std::string& allowed_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int max_depth_ = 0;
  std::vector<Expression::Instr>* code_ = nullptr;
  std::uint32_t* used_ = nullptr;
};

struct Dual {
  double v;
  double d;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

template <class N>
N make(double v, bool seed);
template <>
double make<double>(double v, bool) {
  return v;
}
template <>
Dual make<Dual>(double v, bool seed) {
  return {v, seed ? 1.0 : 0.0};
}

inline double apply(Expression::Op op, double a) {
  using Op = Expression::Op;
  switch (op) {
    case Op::Neg: return -a;
    case Op::Abs: return std::abs(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Tanh: return std::tanh(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    default: return a;
  }
}

inline Dual apply(Expression::Op op, Dual a) {
  using Op = Expression::Op;
  switch (op) {
    case Op::Neg: return {-a.v, -a.d};
    case Op::Abs: return {std::abs(a.v), a.v > 0.0 ? a.d : (a.v < 0.0 ? -a.d : 0.0)};
    case Op::Exp: {
      const double e = std::exp(a.v);
      return {e, e * a.d};
    }
    case Op::Log: return {std::log(a.v), a.d / a.v};
    case Op::Sqrt: {
      const double r = std::sqrt(a.v);
      return {r, a.d / (2.0 * r)};
    }
    case Op::Tanh: {
      const double th = std::tanh(a.v);
      return {th, (1.0 - th * th) * a.d};
    }
    case Op::Sin: return {std::sin(a.v), std::cos(a.v) * a.d};
    case Op::Cos: return {std::cos(a.v), -std::sin(a.v) * a.d};
    default: return a;
  }
}

inline double power(double a, double b) { return std::pow(a, b); }
inline Dual power(Dual a, Dual b) {
  const double v = std::pow(a.v, b.v);
  if (b.d == 0.0) {
    return {v, b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0) * a.d};
  }
  return {v, v * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}

inline double value_of(double a) { return a; }
inline double value_of(Dual a) { return a.v; }

}  // namespace

Expression Expression::parse(const std::string& text, const std::string& allowed) {
  Expression e;
  e.source_ = text;
  Parser(text, allowed).parse(e.code_, e.used_);
  return e;
}

template <class N>
N Expression::run(const Vars& v, int wrt) const {
  N stack[kMaxDepth + 1];
  int sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: stack[sp++] = make<N>(in.value, false); break;
      case Op::Load: stack[sp++] = make<N>(v[in.index], in.index == wrt); break;
      case Op::Add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
      case Op::Sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
      case Op::Mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
      case Op::Div: --sp; stack[sp - 1] = stack[sp - 1] / stack[sp]; break;
      case Op::Pow: --sp; stack[sp - 1] = power(stack[sp - 1], stack[sp]); break;
      case Op::Min:
        --sp;
        if (value_of(stack[sp]) < value_of(stack[sp - 1])) stack[sp - 1] = stack[sp];
        break;
      case Op::Max:
        --sp;
        if (value_of(stack[sp]) > value_of(stack[sp - 1])) stack[sp - 1] = stack[sp];
        break;
      default: stack[sp - 1] = apply(in.op, stack[sp - 1]); break;
    }
  }
  return stack[0];
}

double Expression::eval(const Vars& v) const { return run<double>(v, -1); }

std::array<double, 2> Expression::eval_derivative(const Vars& v, Var wrt) const {
  const Dual r = run<Dual>(v, wrt);
  return {r.v, r.d};
}

}  // namespace qgx
