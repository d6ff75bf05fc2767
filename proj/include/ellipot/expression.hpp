#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ellipot/errors.hpp"
#include "ellipot/geometry.hpp"

namespace ellipot {

/// Tiny arithmetic-expression language for scenario data: coordinates
/// x, y, z, w, the radial distance r, constants pi and e, the operators
/// + - * / ^ with usual precedence, and the one-argument functions
/// sin cos tan exp log sqrt abs, plus two-argument pow, min, max.
/// Malformed input throws ParseError.
class Expression {
 public:
  static Expression parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse_expr(0);
    p.expect_end();
    e.text_ = text;
    return e;
  }

  double eval(const Vec& x) const { return root_->eval(x); }

  std::function<double(const Vec&)> compiled() const {
    auto node = root_;
    return [node](const Vec& x) { return node->eval(x); };
  }

  const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(const Vec& x) const = 0;
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Num : Node {
    double v;
    explicit Num(double value) : v(value) {}
    double eval(const Vec&) const override { return v; }
  };
  struct Coord : Node {
    int axis;
    explicit Coord(int a) : axis(a) {}
    double eval(const Vec& x) const override {
      if (axis >= x.n) throw DomainError("coordinate beyond the grid dimension");
      return x[axis];
    }
  };
  struct Radial : Node {
    double eval(const Vec& x) const override { return x.norm(); }
  };
  struct Unary : Node {
    NodePtr a;
    double (*fn)(double);
    Unary(NodePtr arg, double (*f)(double)) : a(std::move(arg)), fn(f) {}
    double eval(const Vec& x) const override { return fn(a->eval(x)); }
  };
  struct Binary : Node {
    NodePtr a, b;
    double (*fn)(double, double);
    Binary(NodePtr lhs, NodePtr rhs, double (*f)(double, double))
        : a(std::move(lhs)), b(std::move(rhs)), fn(f) {}
    double eval(const Vec& x) const override { return fn(a->eval(x), b->eval(x)); }
  };

  class Parser {
   public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse_expr(int min_bp) {
      NodePtr lhs = parse_prefix();
      while (true) {
        skip_ws();
        const char op = peek();
        int bp = 0;
        if (op == '+' || op == '-') bp = 10;
        else if (op == '*' || op == '/') bp = 20;
        else if (op == '^') bp = 30;
        else break;
        if (bp < min_bp) break;
        ++pos_;
        // '^' binds right, the rest left
        NodePtr rhs = parse_expr(op == '^' ? bp : bp + 1);
        switch (op) {
          case '+': lhs = make<Binary>(lhs, rhs, +[](double a, double b) { return a + b; }); break;
          case '-': lhs = make<Binary>(lhs, rhs, +[](double a, double b) { return a - b; }); break;
          case '*': lhs = make<Binary>(lhs, rhs, +[](double a, double b) { return a * b; }); break;
          case '/': lhs = make<Binary>(lhs, rhs, +[](double a, double b) { return a / b; }); break;
          case '^': lhs = make<Binary>(lhs, rhs, +[](double a, double b) { return std::pow(a, b); }); break;
        }
      }
      return lhs;
    }

    void expect_end() {
      skip_ws();
      if (pos_ != s_.size()) throw ParseError("trailing input in expression: '" + s_.substr(pos_) + "'");
    }

   private:
    NodePtr parse_prefix() {
      skip_ws();
      const char c = peek();
      if (c == '-') {
        ++pos_;
        NodePtr a = parse_expr(25);
        return make<Unary>(a, +[](double v) { return -v; });
      }
      if (c == '+') {
        ++pos_;
        return parse_expr(25);
      }
      if (c == '(') {
        ++pos_;
        NodePtr e = parse_expr(0);
        skip_ws();
        if (peek() != ')') throw ParseError("missing ')' in expression");
        ++pos_;
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
      throw ParseError(std::string("unexpected character '") + c + "' in expression");
    }

    NodePtr parse_number() {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        throw ParseError("bad number in expression");
      }
      pos_ += used;
      return make<Num>(v);
    }

    NodePtr parse_ident() {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      skip_ws();
      if (peek() == '(') {
        ++pos_;
        std::vector<NodePtr> args;
        skip_ws();
        if (peek() != ')') {
          args.push_back(parse_expr(0));
          skip_ws();
          while (peek() == ',') {
            ++pos_;
            args.push_back(parse_expr(0));
            skip_ws();
          }
        }
        if (peek() != ')') throw ParseError("missing ')' after arguments of " + name);
        ++pos_;
        return apply(name, args);
      }
      if (name == "x") return make<Coord>(0);
      if (name == "y") return make<Coord>(1);
      if (name == "z") return make<Coord>(2);
      if (name == "w") return make<Coord>(3);
      if (name == "r") return make<Radial>();
      if (name == "pi") return make<Num>(3.14159265358979323846);
      if (name == "e") return make<Num>(2.71828182845904523536);
      throw ParseError("unknown name '" + name + "' in expression");
    }

    NodePtr apply(const std::string& name, const std::vector<NodePtr>& args) {
      auto unary = [&](double (*fn)(double)) {
        if (args.size() != 1) throw ParseError(name + " takes one argument");
        return make<Unary>(args[0], fn);
      };
      auto binary = [&](double (*fn)(double, double)) {
        if (args.size() != 2) throw ParseError(name + " takes two arguments");
        return make<Binary>(args[0], args[1], fn);
      };
      if (name == "sin") return unary(+[](double v) { return std::sin(v); });
      if (name == "cos") return unary(+[](double v) { return std::cos(v); });
      if (name == "tan") return unary(+[](double v) { return std::tan(v); });
      if (name == "exp") return unary(+[](double v) { return std::exp(v); });
      if (name == "log") return unary(+[](double v) { return std::log(v); });
      if (name == "sqrt") return unary(+[](double v) { return std::sqrt(v); });
      if (name == "abs") return unary(+[](double v) { return std::fabs(v); });
      if (name == "pow") return binary(+[](double a, double b) { return std::pow(a, b); });
      if (name == "min") return binary(+[](double a, double b) { return std::min(a, b); });
      if (name == "max") return binary(+[](double a, double b) { return std::max(a, b); });
      throw ParseError("unknown function '" + name + "' in expression");
    }

    template <typename T, typename... Args>
    NodePtr make(Args&&... args) {
      return std::make_shared<const T>(std::forward<Args>(args)...);
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip_ws() {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string s_;
    std::size_t pos_ = 0;
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace ellipot
