#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stabcert/matrix.hpp"

namespace stabcert::theta {

enum class NodeKind { Constant, Parameter, Add, Sub, Mul, Div, Pow, Negate };

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  // Constant
  int param = 0;       // Parameter, 1-based
  int lhs = -1;
  int rhs = -1;
  int exponent = 0;    // Pow
};

// Parsed parameter-dependence expression over mu1..mup. Grammar: real
// literals, mu<k>, + - * / ^ with integer exponents and parentheses.
// Division is only allowed by nonzero constant subexpressions, so every
// expression is a polynomial in mu.
class ThetaExpr {
 public:
  // Throws SyntaxError (with position) or UnknownParameter.
  static ThetaExpr parse(const std::string& source, int p);

  double eval(const Vector& mu) const;
  std::string unparse() const;

  int param_dimension() const { return p_; }
  const std::string& source() const { return source_; }
  // Sorted unique list of 1-based parameter indices the expression references.
  std::vector<int> dependent_params() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  std::vector<Node> nodes_;
  int root_ = -1;
  int p_ = 0;
  std::string source_;
  friend class Parser;
};

// Theta(mu) = [Theta_1(mu), ..., Theta_Q(mu)]'.
struct ThetaMap {
  std::vector<ThetaExpr> exprs;
  int p = 0;

  static ThetaMap parse(const std::vector<std::string>& sources, int p);
  std::size_t q() const { return exprs.size(); }
  Vector eval(const Vector& mu) const;
  std::vector<std::string> sources() const;
};

enum class Shape1D { Affine, Convex, Concave, Unknown };

const char* to_string(Shape1D s);

// Sound 1D shape classification of a single-parameter expression on [lo, hi]:
// an Affine/Convex/Concave verdict is certified (Bernstein-coefficient sign
// analysis of the second derivative); Unknown is always permitted.
Shape1D classify_shape(const ThetaExpr& expr, double lo, double hi);

// --- polynomial analysis (backs classification and enclosure generation) ---

// Sparse multivariate polynomial; terms sorted by exponent tuple.
struct MultiPoly {
  std::vector<std::pair<std::vector<int>, double>> terms;
  int p = 0;
};

// Expand an expression into monomials. Throws Error on blowup (the guarded
// caps are generous for the polynomial maps this toolkit targets).
MultiPoly expand(const ThetaExpr& expr);

bool is_affine(const MultiPoly& poly);
bool is_constant(const MultiPoly& poly);

// Fix a subset of parameters to values ("nullopt" keeps a parameter free).
MultiPoly substitute(const MultiPoly& poly, const std::vector<std::optional<double>>& fixed);

// 1-based indices of parameters with a nonzero exponent somewhere.
std::vector<int> poly_params(const MultiPoly& poly);

// Coefficients (ascending degree) of a polynomial that depends on at most
// the given parameter. Throws std::invalid_argument otherwise.
std::vector<double> univariate_coefficients(const MultiPoly& poly, int param);

double poly_eval(const std::vector<double>& coeffs, double x);
std::vector<double> poly_derivative(const std::vector<double>& coeffs);

// Rigorous enclosure of the polynomial's range over a box (interval
// arithmetic per monomial; possibly loose, never under-covering).
std::pair<double, double> interval_range(const MultiPoly& poly,
                                         const std::vector<std::pair<double, double>>& box);

Shape1D classify_univariate(const std::vector<double>& coeffs, double lo, double hi);

} // namespace stabcert::theta
