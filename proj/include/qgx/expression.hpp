#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qgx {

/// Small arithmetic language: numbers, + - * / ^, parentheses, the variables
/// t y z x, the constant pi and the functions abs exp log sqrt tanh sin cos
/// (one argument) and min max (two arguments).
///
/// Compiled once to a stack program; evaluation is reentrant.
class Expression {
 public:
  enum Var : int { T = 0, Y = 1, Z = 2, X = 3 };
  using Vars = std::array<double, 4>;

  /// `allowed` is a subset of "tyzx". Throws ParseError (line 1, 1-based
  /// column) on malformed input or a variable outside `allowed`.
  static Expression parse(const std::string& text, const std::string& allowed = "tyzx");

  double eval(const Vars& v) const;
  /// Value and derivative with respect to variable `wrt` (forward mode).
  std::array<double, 2> eval_derivative(const Vars& v, Var wrt) const;

  bool uses(Var v) const noexcept { return (used_ >> v) & 1u; }
  const std::string& source() const noexcept { return source_; }

  enum class Op : std::uint8_t {
    Const, Load, Add, Sub, Mul, Div, Pow, Neg,
    Abs, Exp, Log, Sqrt, Tanh, Sin, Cos, Min, Max
  };
  struct Instr {
    Op op;
    int index;
    double value;
  };

 private:
  template <class N>
  N run(const Vars& v, int wrt) const;

  std::string source_;
  std::vector<Instr> code_;
  std::uint32_t used_ = 0;
};

}  // namespace qgx
