#include "hamflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

namespace hamflow::expr {

// ---------------------------------------------------------------------------
// ChartSpec

ChartSpec::ChartSpec(ChartKind kind, int dimension)
    : kind_(kind), dimension_(dimension) {
  if (dimension < 1) {
    throw Error(ErrorCode::Validation, "chart dimension must be >= 1");
  }
}

std::size_t ChartSpec::size() const noexcept {
  return kind_ == ChartKind::Config ? static_cast<std::size_t>(dimension_) + 1
                                    : 2 * static_cast<std::size_t>(dimension_) + 1;
}

std::string ChartSpec::name_of(std::size_t index) const {
  const auto n = static_cast<std::size_t>(dimension_);
  if (index >= size()) {
    throw Error(ErrorCode::Validation, "coordinate index out of range");
  }
  if (index == 0) return "t";
  if (index <= n) return "x" + std::to_string(index);
  const char prefix = kind_ == ChartKind::Velocity ? 'v' : 'p';
  return prefix + std::to_string(index - n);
}

std::optional<std::size_t> ChartSpec::index_of(std::string_view name) const {
  if (name == "t") return 0;
  if (name.size() < 2) return std::nullopt;
  const char head = name.front();
  std::size_t number = 0;
  const auto* begin = name.data() + 1;
  const auto* end = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(begin, end, number);
  if (ec != std::errc() || ptr != end || number < 1 ||
      number > static_cast<std::size_t>(dimension_)) {
    return std::nullopt;
  }
  if (head == 'x') return number;
  if (kind_ == ChartKind::Config) return std::nullopt;
  const char prefix = kind_ == ChartKind::Velocity ? 'v' : 'p';
  if (head == prefix) return static_cast<std::size_t>(dimension_) + number;
  return std::nullopt;
}

std::vector<std::string> ChartSpec::names() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(name_of(i));
  return out;
}

// ---------------------------------------------------------------------------
// AST

namespace detail {

enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Exp, Ln, Sqrt };

struct Node {
  Kind kind;
  double value = 0.0;       // Constant
  std::size_t index = 0;    // Variable: slot in the chart point
  std::string name;         // Variable: coordinate name
  Func func = Func::Sin;    // Call
  NodePtr lhs;              // also the single child of Negate/Call
  NodePtr rhs;
};

}  // namespace detail

namespace {

using detail::Func;
using detail::Kind;
using detail::Node;

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = v;
  return n;
}

NodePtr make_variable(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->index = index;
  n->name = std::move(name);
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == Kind::Constant && n->value == v;
}

bool is_const(const NodePtr& n) { return n->kind == Kind::Constant; }

NodePtr make_negate(const NodePtr& a) {
  if (is_const(a)) return make_constant(-a->value);
  if (a->kind == Kind::Negate) return a->lhs;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->lhs = a;
  return n;
}

NodePtr make_binary(Kind kind, const NodePtr& a, const NodePtr& b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = a;
  n->rhs = b;
  return n;
}

NodePtr make_add(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_constant(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make_binary(Kind::Add, a, b);
}

NodePtr make_sub(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_constant(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return make_negate(b);
  return make_binary(Kind::Sub, a, b);
}

NodePtr make_mul(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_constant(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return make_negate(b);
  if (is_const(b, -1.0)) return make_negate(a);
  return make_binary(Kind::Mul, a, b);
}

NodePtr make_div(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b) && b->value != 0.0) {
    return make_constant(a->value / b->value);
  }
  if (is_const(a, 0.0)) return make_constant(0.0);
  if (is_const(b, 1.0)) return a;
  return make_binary(Kind::Div, a, b);
}

NodePtr make_pow(const NodePtr& base, const NodePtr& exponent) {
  if (exponent->kind != Kind::Constant) {
    throw Error(ErrorCode::Validation, "exponent of ^ must be a constant");
  }
  const double e = exponent->value;
  if (e == 0.0) return make_constant(1.0);
  if (e == 1.0) return base;
  if (is_const(base)) return make_constant(std::pow(base->value, e));
  return make_binary(Kind::Pow, base, exponent);
}

NodePtr make_call(Func func, const NodePtr& arg) {
  if (is_const(arg)) {
    const double a = arg->value;
    switch (func) {
      case Func::Sin: return make_constant(std::sin(a));
      case Func::Cos: return make_constant(std::cos(a));
      case Func::Exp: return make_constant(std::exp(a));
      case Func::Ln:
        if (a > 0.0) return make_constant(std::log(a));
        break;
      case Func::Sqrt:
        if (a >= 0.0) return make_constant(std::sqrt(a));
        break;
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = func;
  n->lhs = arg;
  return n;
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

// Printing, precedence-aware so output reparses identically.
// Levels: add/sub 1, mul/div 2, negate 3, pow 4, atom 5.
int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Negate: return 3;
    case Kind::Pow: return 4;
    default: break;
  }
  if (n.kind == Kind::Constant && (n.value < 0.0 || std::signbit(n.value))) {
    return 3;
  }
  return 5;
}

void print_node(const Node& n, std::string& out);

void print_child(const NodePtr& child, int min_prec, std::string& out) {
  const bool parens = precedence(*child) < min_prec;
  if (parens) out += '(';
  print_node(*child, out);
  if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      out += buf;
      return;
    }
    case Kind::Variable:
      out += n.name;
      return;
    case Kind::Negate:
      out += '-';
      print_child(n.lhs, 3, out);
      return;
    case Kind::Add:
      print_child(n.lhs, 1, out);
      out += " + ";
      print_child(n.rhs, 2, out);
      return;
    case Kind::Sub:
      print_child(n.lhs, 1, out);
      out += " - ";
      print_child(n.rhs, 2, out);
      return;
    case Kind::Mul:
      print_child(n.lhs, 2, out);
      out += '*';
      print_child(n.rhs, 3, out);
      return;
    case Kind::Div:
      print_child(n.lhs, 2, out);
      out += '/';
      print_child(n.rhs, 3, out);
      return;
    case Kind::Pow:
      print_child(n.lhs, 5, out);
      out += '^';
      out += '(';
      print_node(*n.rhs, out);
      out += ')';
      return;
    case Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

std::string to_text(const NodePtr& n) {
  std::string out;
  print_node(*n, out);
  return out;
}

[[noreturn]] void domain_error(const char* what, const NodePtr& at) {
  throw Error(ErrorCode::Domain, std::string(what) + " in '" + to_text(at) + "'",
              Error::no_offset, to_text(at));
}

double eval_node(const NodePtr& n, std::span<const double> point) {
  switch (n->kind) {
    case Kind::Constant: return n->value;
    case Kind::Variable: return point[n->index];
    case Kind::Negate: return -eval_node(n->lhs, point);
    case Kind::Add: return eval_node(n->lhs, point) + eval_node(n->rhs, point);
    case Kind::Sub: return eval_node(n->lhs, point) - eval_node(n->rhs, point);
    case Kind::Mul: return eval_node(n->lhs, point) * eval_node(n->rhs, point);
    case Kind::Div: {
      const double denom = eval_node(n->rhs, point);
      if (denom == 0.0) domain_error("division by zero", n);
      return eval_node(n->lhs, point) / denom;
    }
    case Kind::Pow: {
      const double base = eval_node(n->lhs, point);
      const double e = n->rhs->value;
      if (base == 0.0 && e < 0.0) domain_error("zero raised to a negative power", n);
      if (base < 0.0 && e != std::floor(e)) {
        domain_error("negative base with non-integer exponent", n);
      }
      return std::pow(base, e);
    }
    case Kind::Call: {
      const double a = eval_node(n->lhs, point);
      switch (n->func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return std::exp(a);
        case Func::Ln:
          if (a <= 0.0) domain_error("ln of a non-positive value", n);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) domain_error("sqrt of a negative value", n);
          return std::sqrt(a);
      }
    }
  }
  throw Error(ErrorCode::Validation, "corrupt expression node");
}

NodePtr diff_node(const NodePtr& n, std::size_t index) {
  switch (n->kind) {
    case Kind::Constant:
      return make_constant(0.0);
    case Kind::Variable:
      return make_constant(n->index == index ? 1.0 : 0.0);
    case Kind::Negate:
      return make_negate(diff_node(n->lhs, index));
    case Kind::Add:
      return make_add(diff_node(n->lhs, index), diff_node(n->rhs, index));
    case Kind::Sub:
      return make_sub(diff_node(n->lhs, index), diff_node(n->rhs, index));
    case Kind::Mul:
      return make_add(make_mul(diff_node(n->lhs, index), n->rhs),
                      make_mul(n->lhs, diff_node(n->rhs, index)));
    case Kind::Div:
      return make_div(make_sub(make_mul(diff_node(n->lhs, index), n->rhs),
                               make_mul(n->lhs, diff_node(n->rhs, index))),
                      make_mul(n->rhs, n->rhs));
    case Kind::Pow: {
      const double e = n->rhs->value;
      return make_mul(make_mul(make_constant(e), make_pow(n->lhs, make_constant(e - 1.0))),
                      diff_node(n->lhs, index));
    }
    case Kind::Call: {
      const NodePtr da = diff_node(n->lhs, index);
      switch (n->func) {
        case Func::Sin: return make_mul(make_call(Func::Cos, n->lhs), da);
        case Func::Cos: return make_negate(make_mul(make_call(Func::Sin, n->lhs), da));
        case Func::Exp: return make_mul(make_call(Func::Exp, n->lhs), da);
        case Func::Ln: return make_div(da, n->lhs);
        case Func::Sqrt:
          return make_div(da, make_mul(make_constant(2.0), make_call(Func::Sqrt, n->lhs)));
      }
    }
  }
  throw Error(ErrorCode::Validation, "corrupt expression node");
}

bool depends_on_node(const NodePtr& n, std::size_t index) {
  switch (n->kind) {
    case Kind::Constant: return false;
    case Kind::Variable: return n->index == index;
    case Kind::Negate:
    case Kind::Call: return depends_on_node(n->lhs, index);
    default:
      return depends_on_node(n->lhs, index) || depends_on_node(n->rhs, index);
  }
}

// ---------------------------------------------------------------------------
// Parser

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  TokKind kind;
  std::size_t offset;
  double number = 0.0;
  std::string_view text = {};
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {TokKind::End, start};
    const char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; return {TokKind::Plus, start};
      case '-': ++pos_; return {TokKind::Minus, start};
      case '*': ++pos_; return {TokKind::Star, start};
      case '/': ++pos_; return {TokKind::Slash, start};
      case '^': ++pos_; return {TokKind::Caret, start};
      case '(': ++pos_; return {TokKind::LParen, start};
      case ')': ++pos_; return {TokKind::RParen, start};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return lex_number(start);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      return {TokKind::Ident, start, 0.0, src_.substr(start, pos_ - start)};
    }
    throw Error(ErrorCode::Parse,
                "unknown character '" + std::string(1, c) + "' at offset " +
                    std::to_string(start),
                start);
  }

 private:
  Token lex_number(std::size_t start) {
    std::size_t end = start;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
      if (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) {
        end = exp;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (ec != std::errc() || ptr != src_.data() + end) {
      throw Error(ErrorCode::Parse,
                  "malformed number at offset " + std::to_string(start), start);
    }
    pos_ = end;
    return {TokKind::Number, start, value};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, const ChartSpec& chart)
      : lexer_(src), chart_(chart) {
    advance();
  }

  NodePtr parse_all() {
    NodePtr root = parse_sum();
    if (cur_.kind != TokKind::End) {
      throw Error(ErrorCode::Parse,
                  "unexpected token at offset " + std::to_string(cur_.offset),
                  cur_.offset);
    }
    return root;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    while (cur_.kind == TokKind::Plus || cur_.kind == TokKind::Minus) {
      const bool plus = cur_.kind == TokKind::Plus;
      advance();
      NodePtr rhs = parse_product();
      lhs = plus ? make_add(lhs, rhs) : make_sub(lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    while (cur_.kind == TokKind::Star || cur_.kind == TokKind::Slash) {
      const bool mul = cur_.kind == TokKind::Star;
      advance();
      NodePtr rhs = parse_unary();
      lhs = mul ? make_mul(lhs, rhs) : make_div(lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (cur_.kind == TokKind::Minus) {
      advance();
      return make_negate(parse_unary());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (cur_.kind != TokKind::Caret) return base;
    const std::size_t caret = cur_.offset;
    advance();
    NodePtr exponent = parse_unary();  // right-associative
    if (exponent->kind != Kind::Constant) {
      throw Error(ErrorCode::Parse,
                  "exponent of ^ must be a constant (offset " +
                      std::to_string(caret) + ")",
                  caret);
    }
    return make_pow(base, exponent);
  }

  NodePtr parse_atom() {
    switch (cur_.kind) {
      case TokKind::Number: {
        const double v = cur_.number;
        advance();
        return make_constant(v);
      }
      case TokKind::LParen: {
        const std::size_t open = cur_.offset;
        advance();
        NodePtr inner = parse_sum();
        if (cur_.kind != TokKind::RParen) {
          throw Error(ErrorCode::Parse,
                      "missing ')' for '(' at offset " + std::to_string(open), open);
        }
        advance();
        return inner;
      }
      case TokKind::Ident:
        return parse_ident();
      default:
        throw Error(ErrorCode::Parse,
                    "expected a value at offset " + std::to_string(cur_.offset),
                    cur_.offset);
    }
  }

  NodePtr parse_ident() {
    const Token tok = cur_;
    advance();
    if (cur_.kind == TokKind::LParen) {
      Func func;
      if (tok.text == "sin") func = Func::Sin;
      else if (tok.text == "cos") func = Func::Cos;
      else if (tok.text == "exp") func = Func::Exp;
      else if (tok.text == "ln") func = Func::Ln;
      else if (tok.text == "sqrt") func = Func::Sqrt;
      else {
        throw Error(ErrorCode::UnknownIdentifier,
                    "unknown function '" + std::string(tok.text) + "' at offset " +
                        std::to_string(tok.offset),
                    tok.offset);
      }
      advance();
      NodePtr arg = parse_sum();
      if (cur_.kind != TokKind::RParen) {
        throw Error(ErrorCode::Parse,
                    "missing ')' after argument of " + std::string(tok.text),
                    cur_.offset);
      }
      advance();
      return make_call(func, arg);
    }
    const auto index = chart_.index_of(tok.text);
    if (!index) {
      throw Error(ErrorCode::UnknownIdentifier,
                  "unknown identifier '" + std::string(tok.text) + "' at offset " +
                      std::to_string(tok.offset),
                  tok.offset);
    }
    return make_variable(*index, std::string(tok.text));
  }

  Lexer lexer_;
  ChartSpec chart_;
  Token cur_{TokKind::End, 0};
};

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(ChartSpec chart, NodePtr root)
    : chart_(chart), root_(std::move(root)) {}

ScalarField ScalarField::constant(const ChartSpec& chart, double value) {
  return ScalarField(chart, make_constant(value));
}

ScalarField ScalarField::coordinate(const ChartSpec& chart, std::string_view name) {
  const auto index = chart.index_of(name);
  if (!index) {
    throw Error(ErrorCode::UnknownIdentifier,
                "unknown coordinate '" + std::string(name) + "'");
  }
  return ScalarField(chart, make_variable(*index, std::string(name)));
}

double ScalarField::operator()(std::span<const double> point) const {
  if (point.size() != chart_.size()) {
    throw Error(ErrorCode::Validation,
                "point supplies " + std::to_string(point.size()) +
                    " coordinates, chart has " + std::to_string(chart_.size()));
  }
  return eval_node(root_, point);
}

ScalarField ScalarField::diff(std::string_view coord) const {
  const auto index = chart_.index_of(coord);
  if (!index) {
    throw Error(ErrorCode::UnknownIdentifier,
                "unknown coordinate '" + std::string(coord) + "'");
  }
  return diff_index(*index);
}

ScalarField ScalarField::diff_index(std::size_t coord_index) const {
  if (coord_index >= chart_.size()) {
    throw Error(ErrorCode::Validation, "coordinate index out of range");
  }
  return ScalarField(chart_, diff_node(root_, coord_index));
}

std::string ScalarField::str() const { return to_text(root_); }

bool ScalarField::is_constant_zero() const noexcept { return is_const(root_, 0.0); }

bool ScalarField::is_constant(double value) const noexcept {
  return is_const(root_, value);
}

bool ScalarField::depends_on(std::size_t coord_index) const noexcept {
  return depends_on_node(root_, coord_index);
}

namespace {
void require_same_chart(const ScalarField& a, const ScalarField& b) {
  if (!(a.chart() == b.chart())) {
    throw Error(ErrorCode::ChartMismatch, "scalar fields live on different charts");
  }
}
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a, b);
  return ScalarField(a.chart_, make_add(a.root_, b.root_));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a, b);
  return ScalarField(a.chart_, make_sub(a.root_, b.root_));
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a, b);
  return ScalarField(a.chart_, make_mul(a.root_, b.root_));
}

ScalarField operator-(const ScalarField& a) {
  return ScalarField(a.chart_, make_negate(a.root_));
}

ScalarField operator*(double c, const ScalarField& a) {
  return ScalarField(a.chart_, make_mul(make_constant(c), a.root_));
}

ScalarField pow(const ScalarField& base, double exponent) {
  return ScalarField(base.chart_, make_pow(base.root_, make_constant(exponent)));
}

ScalarField parse(std::string_view source, const ChartSpec& chart) {
  if (source.empty()) {
    throw Error(ErrorCode::Parse, "empty expression", 0);
  }
  Parser parser(source, chart);
  return ScalarField(chart, parser.parse_all());
}

FdCheck fd_check(const ScalarField& f, std::string_view coord,
                 std::span<const double> point) {
  const auto index = f.chart().index_of(coord);
  if (!index) {
    throw Error(ErrorCode::UnknownIdentifier,
                "unknown coordinate '" + std::string(coord) + "'");
  }
  const double symbolic = f.diff_index(*index)(point);
  std::vector<double> shifted(point.begin(), point.end());
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                   std::max(1.0, std::abs(point[*index]));
  shifted[*index] = point[*index] + h;
  const double hi = f(shifted);
  shifted[*index] = point[*index] - h;
  const double lo = f(shifted);
  return {symbolic, (hi - lo) / (2.0 * h)};
}

}  // namespace hamflow::expr
