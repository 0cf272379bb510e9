#include "stabcert/theta.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

#include "stabcert/errors.hpp"

namespace stabcert::theta {

namespace {

constexpr int kMaxExponent = 1 << 20;

struct Token {
  enum Kind { Number, Mu, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
  double value = 0.0;
  int param = 0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Token::End, 0.0, 0, start};
    const char ch = src_[pos_];
    switch (ch) {
      case '+': ++pos_; return {Token::Plus, 0.0, 0, start};
      case '-': ++pos_; return {Token::Minus, 0.0, 0, start};
      case '*': ++pos_; return {Token::Star, 0.0, 0, start};
      case '/': ++pos_; return {Token::Slash, 0.0, 0, start};
      case '^': ++pos_; return {Token::Caret, 0.0, 0, start};
      case '(': ++pos_; return {Token::LParen, 0.0, 0, start};
      case ')': ++pos_; return {Token::RParen, 0.0, 0, start};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      return lex_number(start);
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      return lex_identifier(start);
    }
    throw SyntaxError(std::string("unexpected character '") + ch + "'", start);
  }

 private:
  Token lex_number(std::size_t start) {
    std::size_t end = start;
    bool seen_dot = false;
    while (end < src_.size()) {
      const char c = src_[end];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++end;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
        ++end;
      } else {
        break;
      }
    }
    // Optional exponent part.
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
      if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
        ++e;
        while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
        end = e;
      }
    }
    const std::string text = src_.substr(start, end - start);
    if (text == ".") throw SyntaxError("malformed number", start);
    char* parse_end = nullptr;
    const double v = std::strtod(text.c_str(), &parse_end);
    if (parse_end != text.c_str() + text.size())
      throw SyntaxError("malformed number '" + text + "'", start);
    pos_ = end;
    return {Token::Number, v, 0, start};
  }

  Token lex_identifier(std::size_t start) {
    std::size_t end = start;
    while (end < src_.size() && std::isalpha(static_cast<unsigned char>(src_[end]))) ++end;
    const std::string name = src_.substr(start, end - start);
    if (name != "mu")
      throw SyntaxError("unknown identifier '" + name + "'", start);
    std::size_t d = end;
    while (d < src_.size() && std::isdigit(static_cast<unsigned char>(src_[d]))) ++d;
    if (d == end) throw SyntaxError("'mu' must be followed by a parameter index", start);
    int index = 0;
    const auto [ptr, ec] = std::from_chars(src_.data() + end, src_.data() + d, index);
    if (ec != std::errc() || ptr != src_.data() + d || index < 1)
      throw SyntaxError("malformed parameter index", end);
    pos_ = d;
    return {Token::Mu, 0.0, index, start};
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

} // namespace

class Parser {
 public:
  Parser(const std::string& src, int p) : lexer_(src), p_(p) { advance(); }

  ThetaExpr run(const std::string& src) {
    ThetaExpr e;
    e.p_ = p_;
    e.source_ = src;
    nodes_ = &e.nodes_;
    e.root_ = parse_expr();
    if (cur_.kind != Token::End)
      throw SyntaxError("unexpected trailing input", cur_.pos);
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  int add(Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (cur_.kind == Token::Plus || cur_.kind == Token::Minus) {
      const bool plus = cur_.kind == Token::Plus;
      advance();
      const int rhs = parse_term();
      Node n;
      n.kind = plus ? NodeKind::Add : NodeKind::Sub;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_factor();
    while (cur_.kind == Token::Star || cur_.kind == Token::Slash) {
      const bool mul = cur_.kind == Token::Star;
      const std::size_t op_pos = cur_.pos;
      advance();
      const int rhs = parse_factor();
      if (!mul) check_divisor(rhs, op_pos);
      Node n;
      n.kind = mul ? NodeKind::Mul : NodeKind::Div;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = add(n);
    }
    return lhs;
  }

  int parse_factor() {
    if (cur_.kind == Token::Minus) {
      advance();
      const int child = parse_factor();
      Node n;
      n.kind = NodeKind::Negate;
      n.lhs = child;
      return add(n);
    }
    if (cur_.kind == Token::Plus) {
      advance();
      return parse_factor();
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (cur_.kind == Token::Caret) {
      const std::size_t caret_pos = cur_.pos;
      advance();
      if (cur_.kind != Token::Number)
        throw SyntaxError("exponent must be a nonnegative integer literal", cur_.pos);
      const double v = cur_.value;
      if (!(v >= 0.0) || v != std::floor(v) || v > kMaxExponent)
        throw SyntaxError("exponent must be a nonnegative integer literal", cur_.pos);
      advance();
      Node n;
      n.kind = NodeKind::Pow;
      n.lhs = base;
      n.exponent = static_cast<int>(v);
      base = add(n);
      if (cur_.kind == Token::Caret)
        throw SyntaxError("chained '^' requires parentheses", caret_pos);
    }
    return base;
  }

  int parse_atom() {
    switch (cur_.kind) {
      case Token::Number: {
        Node n;
        n.kind = NodeKind::Constant;
        n.value = cur_.value;
        advance();
        return add(n);
      }
      case Token::Mu: {
        if (cur_.param > p_) throw UnknownParameter(cur_.param, p_);
        Node n;
        n.kind = NodeKind::Parameter;
        n.param = cur_.param;
        advance();
        return add(n);
      }
      case Token::LParen: {
        advance();
        const int e = parse_expr();
        if (cur_.kind != Token::RParen)
          throw SyntaxError("expected ')'", cur_.pos);
        advance();
        return e;
      }
      default:
        throw SyntaxError("expected a number, parameter, or '('", cur_.pos);
    }
  }

  bool subtree_constant(int idx) const {
    const Node& n = (*nodes_)[idx];
    switch (n.kind) {
      case NodeKind::Constant: return true;
      case NodeKind::Parameter: return false;
      case NodeKind::Pow:
      case NodeKind::Negate: return subtree_constant(n.lhs);
      default: return subtree_constant(n.lhs) && subtree_constant(n.rhs);
    }
  }

  double subtree_value(int idx) const {
    const Node& n = (*nodes_)[idx];
    switch (n.kind) {
      case NodeKind::Constant: return n.value;
      case NodeKind::Add: return subtree_value(n.lhs) + subtree_value(n.rhs);
      case NodeKind::Sub: return subtree_value(n.lhs) - subtree_value(n.rhs);
      case NodeKind::Mul: return subtree_value(n.lhs) * subtree_value(n.rhs);
      case NodeKind::Div: return subtree_value(n.lhs) / subtree_value(n.rhs);
      case NodeKind::Pow: return std::pow(subtree_value(n.lhs), n.exponent);
      case NodeKind::Negate: return -subtree_value(n.lhs);
      default: return 0.0;
    }
  }

  void check_divisor(int idx, std::size_t pos) const {
    if (!subtree_constant(idx))
      throw SyntaxError("division is only allowed by constant subexpressions", pos);
    const double v = subtree_value(idx);
    if (!(std::abs(v) > 0.0) || !std::isfinite(v))
      throw SyntaxError("division by zero constant", pos);
  }

  Lexer lexer_;
  Token cur_{Token::End, 0.0, 0, 0};
  int p_ = 0;
  std::vector<Node>* nodes_ = nullptr;
};

ThetaExpr ThetaExpr::parse(const std::string& source, int p) {
  if (p < 0) throw std::invalid_argument("ThetaExpr::parse: negative parameter dimension");
  Parser parser(source, p);
  return parser.run(source);
}

namespace {

double pow_int(double base, int k) {
  double result = 1.0;
  double b = base;
  int e = k;
  while (e > 0) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

double eval_node(const std::vector<Node>& nodes, int idx, const Vector& mu) {
  const Node& n = nodes[idx];
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Parameter: return mu[static_cast<std::size_t>(n.param) - 1];
    case NodeKind::Add: return eval_node(nodes, n.lhs, mu) + eval_node(nodes, n.rhs, mu);
    case NodeKind::Sub: return eval_node(nodes, n.lhs, mu) - eval_node(nodes, n.rhs, mu);
    case NodeKind::Mul: return eval_node(nodes, n.lhs, mu) * eval_node(nodes, n.rhs, mu);
    case NodeKind::Div: return eval_node(nodes, n.lhs, mu) / eval_node(nodes, n.rhs, mu);
    case NodeKind::Pow: return pow_int(eval_node(nodes, n.lhs, mu), n.exponent);
    case NodeKind::Negate: return -eval_node(nodes, n.lhs, mu);
  }
  return 0.0;
}

} // namespace

double ThetaExpr::eval(const Vector& mu) const {
  if (static_cast<int>(mu.size()) < p_)
    throw std::invalid_argument("ThetaExpr::eval: mu has dimension " +
                                std::to_string(mu.size()) + ", expected " + std::to_string(p_));
  const double v = eval_node(nodes_, root_, mu);
  if (!std::isfinite(v))
    throw NonFinite("expression '" + source_ + "' evaluated to a non-finite value");
  return v;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

bool is_leaf(const Node& n) {
  return n.kind == NodeKind::Constant || n.kind == NodeKind::Parameter;
}

std::string unparse_node(const std::vector<Node>& nodes, int idx) {
  const Node& n = nodes[idx];
  auto wrap = [&](int child) {
    const std::string s = unparse_node(nodes, child);
    return is_leaf(nodes[child]) ? s : "(" + s + ")";
  };
  switch (n.kind) {
    case NodeKind::Constant: return format_double(n.value);
    case NodeKind::Parameter: return "mu" + std::to_string(n.param);
    case NodeKind::Add: return wrap(n.lhs) + "+" + wrap(n.rhs);
    case NodeKind::Sub: return wrap(n.lhs) + "-" + wrap(n.rhs);
    case NodeKind::Mul: return wrap(n.lhs) + "*" + wrap(n.rhs);
    case NodeKind::Div: return wrap(n.lhs) + "/" + wrap(n.rhs);
    case NodeKind::Pow: return wrap(n.lhs) + "^" + std::to_string(n.exponent);
    case NodeKind::Negate: return "-" + wrap(n.lhs);
  }
  return {};
}

} // namespace

std::string ThetaExpr::unparse() const { return unparse_node(nodes_, root_); }

std::vector<int> ThetaExpr::dependent_params() const {
  std::set<int> seen;
  for (const Node& n : nodes_)
    if (n.kind == NodeKind::Parameter) seen.insert(n.param);
  return {seen.begin(), seen.end()};
}

ThetaMap ThetaMap::parse(const std::vector<std::string>& sources, int p) {
  if (sources.empty()) throw std::invalid_argument("ThetaMap: Q must be >= 1");
  ThetaMap map;
  map.p = p;
  map.exprs.reserve(sources.size());
  for (const std::string& s : sources) map.exprs.push_back(ThetaExpr::parse(s, p));
  return map;
}

Vector ThetaMap::eval(const Vector& mu) const {
  Vector psi(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) psi[i] = exprs[i].eval(mu);
  return psi;
}

std::vector<std::string> ThetaMap::sources() const {
  std::vector<std::string> out;
  out.reserve(exprs.size());
  for (const ThetaExpr& e : exprs) out.push_back(e.source());
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial expansion and shape analysis
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxTerms = 4096;
constexpr int kMaxDegree = 64;

using TermMap = std::map<std::vector<int>, double>;

void check_caps(const TermMap& t) {
  if (t.size() > kMaxTerms)
    throw Error("polynomial expansion exceeded the term cap");
}

TermMap poly_add(const TermMap& a, const TermMap& b, double sign) {
  TermMap r = a;
  for (const auto& [e, c] : b) r[e] += sign * c;
  check_caps(r);
  return r;
}

TermMap poly_mul(const TermMap& a, const TermMap& b, int p) {
  TermMap r;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(static_cast<std::size_t>(p), 0);
      for (int i = 0; i < p; ++i) {
        e[static_cast<std::size_t>(i)] = ea[static_cast<std::size_t>(i)] + eb[static_cast<std::size_t>(i)];
        if (e[static_cast<std::size_t>(i)] > kMaxDegree)
          throw Error("polynomial expansion exceeded the degree cap");
      }
      r[e] += ca * cb;
    }
    check_caps(r);
  }
  return r;
}

TermMap expand_node(const std::vector<Node>& nodes, int idx, int p) {
  const Node& n = nodes[idx];
  switch (n.kind) {
    case NodeKind::Constant: {
      TermMap r;
      r[std::vector<int>(static_cast<std::size_t>(p), 0)] = n.value;
      return r;
    }
    case NodeKind::Parameter: {
      TermMap r;
      std::vector<int> e(static_cast<std::size_t>(p), 0);
      e[static_cast<std::size_t>(n.param) - 1] = 1;
      r[e] = 1.0;
      return r;
    }
    case NodeKind::Add:
      return poly_add(expand_node(nodes, n.lhs, p), expand_node(nodes, n.rhs, p), 1.0);
    case NodeKind::Sub:
      return poly_add(expand_node(nodes, n.lhs, p), expand_node(nodes, n.rhs, p), -1.0);
    case NodeKind::Mul:
      return poly_mul(expand_node(nodes, n.lhs, p), expand_node(nodes, n.rhs, p), p);
    case NodeKind::Div: {
      TermMap lhs = expand_node(nodes, n.lhs, p);
      TermMap rhs = expand_node(nodes, n.rhs, p);
      double divisor = 0.0;
      for (const auto& [e, c] : rhs) divisor += c;  // divisor is constant by construction
      TermMap r;
      for (const auto& [e, c] : lhs) r[e] = c / divisor;
      return r;
    }
    case NodeKind::Pow: {
      TermMap base = expand_node(nodes, n.lhs, p);
      TermMap result;
      result[std::vector<int>(static_cast<std::size_t>(p), 0)] = 1.0;
      TermMap sq = base;
      int e = n.exponent;
      while (e > 0) {
        if (e & 1) result = poly_mul(result, sq, p);
        e >>= 1;
        if (e > 0) sq = poly_mul(sq, sq, p);
      }
      return result;
    }
    case NodeKind::Negate: {
      TermMap r = expand_node(nodes, n.lhs, p);
      for (auto& [e, c] : r) c = -c;
      return r;
    }
  }
  return {};
}

MultiPoly from_term_map(TermMap t, int p) {
  MultiPoly poly;
  poly.p = p;
  for (auto& [e, c] : t)
    if (c != 0.0) poly.terms.emplace_back(e, c);
  return poly;
}

} // namespace

MultiPoly expand(const ThetaExpr& expr) {
  return from_term_map(expand_node(expr.nodes(), expr.root(), expr.param_dimension()),
                       expr.param_dimension());
}

bool is_affine(const MultiPoly& poly) {
  for (const auto& [e, c] : poly.terms) {
    int total = 0;
    for (int k : e) total += k;
    if (total > 1) return false;
  }
  return true;
}

bool is_constant(const MultiPoly& poly) {
  for (const auto& [e, c] : poly.terms)
    for (int k : e)
      if (k != 0) return false;
  return true;
}

MultiPoly substitute(const MultiPoly& poly, const std::vector<std::optional<double>>& fixed) {
  if (static_cast<int>(fixed.size()) != poly.p)
    throw std::invalid_argument("substitute: dimension mismatch");
  TermMap t;
  for (const auto& [e, c] : poly.terms) {
    double coeff = c;
    std::vector<int> rest(e.size(), 0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (fixed[i].has_value()) {
        coeff *= pow_int(*fixed[i], e[i]);
      } else {
        rest[i] = e[i];
      }
    }
    t[rest] += coeff;
  }
  return from_term_map(std::move(t), poly.p);
}

std::vector<int> poly_params(const MultiPoly& poly) {
  std::set<int> seen;
  for (const auto& [e, c] : poly.terms)
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) seen.insert(static_cast<int>(i) + 1);
  return {seen.begin(), seen.end()};
}

std::vector<double> univariate_coefficients(const MultiPoly& poly, int param) {
  std::vector<double> coeffs{0.0};
  for (const auto& [e, c] : poly.terms) {
    int deg = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (static_cast<int>(i) + 1 != param)
        throw std::invalid_argument("univariate_coefficients: polynomial depends on mu" +
                                    std::to_string(i + 1));
      deg = e[i];
    }
    if (static_cast<std::size_t>(deg) >= coeffs.size()) coeffs.resize(static_cast<std::size_t>(deg) + 1, 0.0);
    coeffs[static_cast<std::size_t>(deg)] += c;
  }
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  return coeffs;
}

double poly_eval(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0};
  std::vector<double> d(coeffs.size() - 1);
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    d[i - 1] = coeffs[i] * static_cast<double>(i);
  return d;
}

namespace {

struct IntervalQ {
  double lo;
  double hi;
};

IntervalQ interval_pow(double lo, double hi, int k) {
  if (k == 0) return {1.0, 1.0};
  const double plo = pow_int(lo, k);
  const double phi = pow_int(hi, k);
  if (k % 2 == 1) return {plo, phi};
  // Even power: minimum at zero when the interval straddles it.
  const double top = std::max(plo, phi);
  if (lo <= 0.0 && hi >= 0.0) return {0.0, top};
  return {std::min(plo, phi), top};
}

IntervalQ interval_mul(IntervalQ a, IntervalQ b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {std::min({c[0], c[1], c[2], c[3]}), std::max({c[0], c[1], c[2], c[3]})};
}

} // namespace

std::pair<double, double> interval_range(const MultiPoly& poly,
                                         const std::vector<std::pair<double, double>>& box) {
  if (static_cast<int>(box.size()) != poly.p)
    throw std::invalid_argument("interval_range: box dimension mismatch");
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& [e, c] : poly.terms) {
    IntervalQ acc{1.0, 1.0};
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      acc = interval_mul(acc, interval_pow(box[i].first, box[i].second, e[i]));
    }
    IntervalQ scaled = interval_mul(acc, {c, c});
    lo += scaled.lo;
    hi += scaled.hi;
  }
  return {lo, hi};
}

namespace {

// Compose p(lo + w*s) to map the question onto [0, 1].
std::vector<double> compose_affine(const std::vector<double>& coeffs, double lo, double w) {
  std::vector<double> q{0.0};
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    // q = q * (lo + w s) + c_i
    std::vector<double> next(q.size() + 1, 0.0);
    for (std::size_t k = 0; k < q.size(); ++k) {
      next[k] += q[k] * lo;
      next[k + 1] += q[k] * w;
    }
    next[0] += coeffs[i];
    while (next.size() > 1 && next.back() == 0.0) next.pop_back();
    q = std::move(next);
  }
  return q;
}

// Bernstein coefficients on [0,1] of a power-basis polynomial.
std::vector<double> bernstein_coefficients(const std::vector<double>& a) {
  const std::size_t m = a.size() - 1;
  std::vector<double> b(m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k <= i; ++k) {
      // ratio C(i,k)/C(m,k), accumulated multiplicatively for stability
      double ratio = 1.0;
      for (std::size_t t = 0; t < k; ++t)
        ratio *= static_cast<double>(i - t) / static_cast<double>(m - t);
      sum += ratio * a[k];
    }
    b[i] = sum;
  }
  return b;
}

// de Casteljau split of Bernstein coefficients at t = 1/2.
std::pair<std::vector<double>, std::vector<double>> split_half(const std::vector<double>& b) {
  std::vector<double> tri = b;
  std::vector<double> left(b.size()), right(b.size());
  left[0] = tri[0];
  right[b.size() - 1] = tri[b.size() - 1];
  for (std::size_t level = 1; level < b.size(); ++level) {
    for (std::size_t i = 0; i + level < b.size(); ++i)
      tri[i] = 0.5 * (tri[i] + tri[i + 1]);
    left[level] = tri[0];
    right[b.size() - 1 - level] = tri[b.size() - 1 - level];
  }
  return {left, right};
}

enum class SignVerdict { NonNegative, NonPositive, Mixed, Undecided };

SignVerdict bernstein_sign(const std::vector<double>& b, double tol, int budget) {
  bool all_nonneg = true;
  bool all_nonpos = true;
  for (double v : b) {
    if (v < -tol) all_nonneg = false;
    if (v > tol) all_nonpos = false;
  }
  if (all_nonneg) return SignVerdict::NonNegative;
  if (all_nonpos) return SignVerdict::NonPositive;
  // Endpoint Bernstein coefficients are exact values of the polynomial.
  const double v0 = b.front();
  const double v1 = b.back();
  if ((v0 > tol && v1 < -tol) || (v0 < -tol && v1 > tol)) return SignVerdict::Mixed;
  if (budget <= 0) return SignVerdict::Undecided;
  const auto [left, right] = split_half(b);
  const SignVerdict sl = bernstein_sign(left, tol, budget / 2);
  if (sl == SignVerdict::Mixed) return SignVerdict::Mixed;
  const SignVerdict sr = bernstein_sign(right, tol, budget / 2);
  if (sr == SignVerdict::Mixed) return SignVerdict::Mixed;
  if (sl == SignVerdict::NonNegative && sr == SignVerdict::NonNegative)
    return SignVerdict::NonNegative;
  if (sl == SignVerdict::NonPositive && sr == SignVerdict::NonPositive)
    return SignVerdict::NonPositive;
  return SignVerdict::Undecided;
}

} // namespace

Shape1D classify_univariate(const std::vector<double>& coeffs, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("classify_univariate: empty interval");
  std::vector<double> c = coeffs;
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.size() <= 2) return Shape1D::Affine;
  if (lo == hi) return Shape1D::Affine;
  const std::vector<double> second = poly_derivative(poly_derivative(c));
  if (second.size() == 1) {
    if (second[0] > 0.0) return Shape1D::Convex;
    if (second[0] < 0.0) return Shape1D::Concave;
    return Shape1D::Affine;
  }
  const std::vector<double> shifted = compose_affine(second, lo, hi - lo);
  const std::vector<double> bern = bernstein_coefficients(shifted);
  double scale = 0.0;
  for (double v : bern) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1.0);
  switch (bernstein_sign(bern, tol, 256)) {
    case SignVerdict::NonNegative: return Shape1D::Convex;
    case SignVerdict::NonPositive: return Shape1D::Concave;
    default: return Shape1D::Unknown;
  }
}

Shape1D classify_shape(const ThetaExpr& expr, double lo, double hi) {
  const std::vector<int> params = expr.dependent_params();
  if (params.size() > 1)
    throw std::invalid_argument("classify_shape: expression depends on more than one parameter");
  MultiPoly poly;
  try {
    poly = expand(expr);
  } catch (const Error&) {
    return Shape1D::Unknown;
  }
  if (params.empty()) return Shape1D::Affine;
  return classify_univariate(univariate_coefficients(poly, params.front()), lo, hi);
}

const char* to_string(Shape1D s) {
  switch (s) {
    case Shape1D::Affine: return "affine";
    case Shape1D::Convex: return "convex";
    case Shape1D::Concave: return "concave";
    case Shape1D::Unknown: return "unknown";
  }
  return "unknown";
}

} // namespace stabcert::theta
