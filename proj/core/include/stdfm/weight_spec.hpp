#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stdfm {

/// c * x_1^{e_1} * ... * x_d^{e_d} with nonnegative real exponents.
struct Monomial {
  double coefficient = 1.0;
  std::vector<double> exponents;  // length d

  double operator()(std::span<const double> x) const;
  double degree() const;
  /// Index of the single coordinate carrying a nonzero exponent, -1 for a constant,
  /// -2 when several coordinates are involved.
  int single_coordinate() const;
};

/// One weight function g_m: a finite linear combination of monomials.
struct WeightFunction {
  std::vector<Monomial> terms;

  double operator()(std::span<const double> x) const;
};

/// The vector g = (g_1, ..., g_q) of weight functions on [0,1]^d.
class WeightSpec {
 public:
  WeightSpec(std::vector<WeightFunction> functions, int d);

  /// Parses the mini-language: functions separated by ';', each a sum of terms
  /// `c*x1^a*x2^b`, e.g. "1;x1" or "x1;x2;2*x1+2*x2" or "x1^2".
  static WeightSpec parse(std::string_view text, int d);
  static WeightSpec constant(int d) { return parse("1", d); }

  int q() const { return static_cast<int>(functions_.size()); }
  int d() const { return d_; }
  const WeightFunction& operator[](int m) const { return functions_[m]; }
  const std::vector<WeightFunction>& functions() const { return functions_; }

  void eval(std::span<const double> x, std::span<double> out) const;

  /// Canonical text form; parse(to_string()) reproduces the spec.
  std::string to_string() const;

 private:
  std::vector<WeightFunction> functions_;
  int d_;
};

}  // namespace stdfm
