#include "scorekit/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "scorekit/error.hpp"

namespace scorekit::expr {

enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Exp, Log, Abs, Sqrt, Sin, Cos, Tanh };

struct Node {
  Kind kind = Kind::Number;
  double value = 0.0;
  Func fn = Func::Exp;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  bool has_x = false;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

template <class T> struct Lift;
template <> struct Lift<double> {
  static double of(double c) { return c; }
};
template <class T> struct Lift<Dual<T>> {
  static Dual<T> of(double c) { return {Lift<T>::of(c), Lift<T>::of(0.0)}; }
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
template <class T> Dual<T> operator*(double c, const Dual<T>& a) { return Lift<Dual<T>>::of(c) * a; }

double fexp(double a) { return std::exp(a); }
double flog(double a) { return std::log(a); }
double fabs_(double a) { return std::abs(a); }
double fsqrt(double a) { return std::sqrt(a); }
double fsin(double a) { return std::sin(a); }
double fcos(double a) { return std::cos(a); }
double ftanh(double a) { return std::tanh(a); }
double fsign(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }
double fpow(double a, double p) { return std::pow(a, p); }

template <class T> Dual<T> fexp(const Dual<T>& a);
template <class T> Dual<T> flog(const Dual<T>& a);
template <class T> Dual<T> fsqrt(const Dual<T>& a);
template <class T> Dual<T> fsin(const Dual<T>& a);
template <class T> Dual<T> fcos(const Dual<T>& a);
template <class T> Dual<T> ftanh(const Dual<T>& a);
template <class T> double fsign(const Dual<T>& a);
template <class T> Dual<T> fabs_(const Dual<T>& a);
template <class T> Dual<T> fpow(const Dual<T>& a, double p);

template <class T> Dual<T> fexp(const Dual<T>& a) { const T e = fexp(a.v); return {e, e * a.d}; }
template <class T> Dual<T> flog(const Dual<T>& a) { return {flog(a.v), a.d / a.v}; }
template <class T> Dual<T> fsqrt(const Dual<T>& a) {
  const T s = fsqrt(a.v);
  return {s, a.d / (Lift<T>::of(2.0) * s)};
}
template <class T> Dual<T> fsin(const Dual<T>& a) { return {fsin(a.v), fcos(a.v) * a.d}; }
template <class T> Dual<T> fcos(const Dual<T>& a) { return {fcos(a.v), -(fsin(a.v) * a.d)}; }
template <class T> Dual<T> ftanh(const Dual<T>& a) {
  const T t = ftanh(a.v);
  return {t, (Lift<T>::of(1.0) - t * t) * a.d};
}
template <class T> double fsign(const Dual<T>& a) { return fsign(a.v); }
template <class T> Dual<T> fabs_(const Dual<T>& a) {
  const double s = fsign(a.v);
  return {fabs_(a.v), Lift<T>::of(s) * a.d};
}
template <class T> Dual<T> fpow(const Dual<T>& a, double p) {
  return {fpow(a.v, p), Lift<T>::of(p) * fpow(a.v, p - 1.0) * a.d};
}

// Exposes a value of any nesting depth as double, for constant exponents.
double scalar(double a) { return a; }
template <class T> double scalar(const Dual<T>& a) { return scalar(a.v); }

template <class T>
T eval(const Node& n, const T& x) {
  switch (n.kind) {
    case Kind::Number: return Lift<T>::of(n.value);
    case Kind::Variable: return x;
    case Kind::Neg: return -eval(*n.lhs, x);
    case Kind::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Kind::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Kind::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Kind::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Kind::Pow: {
      const T base = eval(*n.lhs, x);
      if (!n.rhs->has_x) return fpow(base, scalar(eval(*n.rhs, x)));
      return fexp(eval(*n.rhs, x) * flog(base));
    }
    case Kind::Call: {
      const T a = eval(*n.lhs, x);
      switch (n.fn) {
        case Func::Exp: return fexp(a);
        case Func::Log: return flog(a);
        case Func::Abs: return fabs_(a);
        case Func::Sqrt: return fsqrt(a);
        case Func::Sin: return fsin(a);
        case Func::Cos: return fcos(a);
        case Func::Tanh: return ftanh(a);
      }
    }
  }
  return Lift<T>::of(std::nan(""));
}

NodePtr make(Kind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->has_x = (a && a->has_x) || (b && b->has_x);
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::map<std::string, double>& constants)
      : s_(text), constants_(constants) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    std::ostringstream os;
    os << "expression parse error at column " << pos_ + 1 << ": " << what << " in \"" << s_ << "\"";
    fail(ErrorCode::ParseError, os.str());
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Kind::Add, lhs, term());
      else if (accept('-')) lhs = make(Kind::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Kind::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Kind::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    error("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr literal() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) error("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return number(v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id = s_.substr(start, pos_ - start);
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::map<std::string, Func> funcs = {
          {"exp", Func::Exp}, {"log", Func::Log}, {"abs", Func::Abs}, {"sqrt", Func::Sqrt},
          {"sin", Func::Sin}, {"cos", Func::Cos}, {"tanh", Func::Tanh}};
      const auto it = funcs.find(id);
      if (it == funcs.end()) error("unknown function '" + id + "'");
      ++pos_;
      NodePtr arg = expr();
      if (!accept(')')) error("expected ')' after function argument");
      auto n = std::make_shared<Node>();
      n->kind = Kind::Call;
      n->fn = it->second;
      n->has_x = arg->has_x;
      n->lhs = std::move(arg);
      return n;
    }
    if (id == "x") {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Variable;
      n->has_x = true;
      return n;
    }
    if (const auto it = constants_.find(id); it != constants_.end()) return number(it->second);
    if (id == "pi") return number(std::numbers::pi);
    if (id == "e") return number(std::numbers::e);
    error("unknown name '" + id + "'");
  }

  const std::string& s_;
  const std::map<std::string, double>& constants_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text,
                             const std::map<std::string, double>& constants) {
  Parser p(text, constants);
  return Expression(text, p.parse());
}

double Expression::operator()(double x) const { return eval(*root_, x); }

double Expression::derivative(double x) const {
  return eval(*root_, Dual<double>{x, 1.0}).d;
}

double Expression::second_derivative(double x) const {
  using D2 = Dual<Dual<double>>;
  return eval(*root_, D2{{x, 1.0}, {1.0, 0.0}}).d.d;
}

bool Expression::depends_on_x() const noexcept { return root_->has_x; }

}  // namespace scorekit::expr
