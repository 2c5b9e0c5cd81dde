#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "fdde/error.hpp"

namespace fdde {

enum class Var : unsigned char { t = 1, u = 2, v = 4 };

/// Subset of {t, u, v}.
class VarSet {
public:
    constexpr VarSet() = default;
    constexpr VarSet(std::initializer_list<Var> vars) {
        for (Var x : vars) bits_ |= static_cast<unsigned>(x);
    }
    constexpr bool contains(Var x) const { return (bits_ & static_cast<unsigned>(x)) != 0; }
    constexpr VarSet operator|(VarSet o) const { VarSet r; r.bits_ = bits_ | o.bits_; return r; }
    constexpr bool subset_of(VarSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool operator==(const VarSet&) const = default;

private:
    unsigned bits_ = 0;
};

inline constexpr VarSet vars_t{Var::t};
inline constexpr VarSet vars_tuv{Var::t, Var::u, Var::v};

enum class BinaryOp : unsigned char { add, sub, mul, div, pow };
enum class Func : unsigned char { sin, cos, tan, exp, ln, abs, sqrt };

/// Immutable expression tree node. Children are shared so subtrees can be
/// reused; the tree is built bottom-up and therefore acyclic.
struct ExprNode {
    enum class Kind : unsigned char { constant, variable, negate, binary, call };

    explicit ExprNode(Kind k) : kind(k) {}

    Kind kind;
    double value = 0.0;           // constant
    std::string_view name;        // named constant ("pi", "e"); empty otherwise
    Var var = Var::t;             // variable
    BinaryOp op = BinaryOp::add;  // binary
    Func func = Func::sin;        // call
    std::shared_ptr<const ExprNode> lhs;  // negate/call operand, binary left
    std::shared_ptr<const ExprNode> rhs;  // binary right
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace detail {

inline constexpr std::pair<std::string_view, Func> function_names[] = {
    {"sin", Func::sin}, {"cos", Func::cos}, {"tan", Func::tan}, {"exp", Func::exp},
    {"ln", Func::ln},   {"abs", Func::abs}, {"sqrt", Func::sqrt}};

inline std::string_view func_name(Func f) {
    for (const auto& [n, g] : function_names) {
        if (g == f) return n;
    }
    return "?";
}

inline char var_name(Var x) {
    switch (x) {
        case Var::t: return 't';
        case Var::u: return 'u';
        case Var::v: return 'v';
    }
    return '?';
}

inline ExprPtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

}  // namespace detail

/// A parsed arithmetic expression over t, u, v.
class Expr {
public:
    Expr() = default;
    explicit Expr(ExprPtr root) : root_(std::move(root)) { vars_ = collect(root_.get()); }

    const ExprNode* root() const { return root_.get(); }
    bool empty() const { return root_ == nullptr; }

    /// Variables actually referenced by the tree.
    VarSet variables() const { return vars_; }

    double operator()(double t, double u = 0.0, double v = 0.0) const {
        if (!root_) throw EvalError("eval: empty expression");
        return eval_node(*root_, t, u, v);
    }

    /// Fully parenthesised text that parses back to an expression with
    /// bit-identical evaluation.
    std::string to_string() const {
        std::string out;
        if (root_) print(*root_, out);
        return out;
    }

private:
    static VarSet collect(const ExprNode* n) {
        if (!n) return {};
        VarSet s = n->kind == ExprNode::Kind::variable ? VarSet{n->var} : VarSet{};
        return s | collect(n->lhs.get()) | collect(n->rhs.get());
    }

    static double checked(double x, const char* what) {
        if (!std::isfinite(x)) {
            throw EvalError(std::string("eval: non-finite result in ") + what);
        }
        return x;
    }

    static double eval_node(const ExprNode& n, double t, double u, double v) {
        using K = ExprNode::Kind;
        switch (n.kind) {
            case K::constant:
                return n.value;
            case K::variable:
                return n.var == Var::t ? t : (n.var == Var::u ? u : v);
            case K::negate:
                return -eval_node(*n.lhs, t, u, v);
            case K::binary: {
                const double a = eval_node(*n.lhs, t, u, v);
                const double b = eval_node(*n.rhs, t, u, v);
                switch (n.op) {
                    case BinaryOp::add: return checked(a + b, "+");
                    case BinaryOp::sub: return checked(a - b, "-");
                    case BinaryOp::mul: return checked(a * b, "*");
                    case BinaryOp::div:
                        if (b == 0.0) throw EvalError("eval: division by zero");
                        return checked(a / b, "/");
                    case BinaryOp::pow: return checked(std::pow(a, b), "^");
                }
                break;
            }
            case K::call: {
                const double a = eval_node(*n.lhs, t, u, v);
                switch (n.func) {
                    case Func::sin: return checked(std::sin(a), "sin");
                    case Func::cos: return checked(std::cos(a), "cos");
                    case Func::tan: return checked(std::tan(a), "tan");
                    case Func::exp: return checked(std::exp(a), "exp");
                    case Func::ln:
                        if (a <= 0.0) throw EvalError("eval: ln of non-positive value");
                        return checked(std::log(a), "ln");
                    case Func::abs: return std::abs(a);
                    case Func::sqrt:
                        if (a < 0.0) throw EvalError("eval: sqrt of negative value");
                        return std::sqrt(a);
                }
                break;
            }
        }
        throw EvalError("eval: corrupt expression node");
    }

    static void print(const ExprNode& n, std::string& out) {
        using K = ExprNode::Kind;
        switch (n.kind) {
            case K::constant:
                if (!n.name.empty()) {
                    out += n.name;
                } else {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
                    if (std::signbit(n.value)) {
                        out += "(-";
                        out += buf;
                        out += ')';
                    } else {
                        out += buf;
                    }
                }
                return;
            case K::variable:
                out += detail::var_name(n.var);
                return;
            case K::negate:
                out += "(-";
                print(*n.lhs, out);
                out += ')';
                return;
            case K::binary: {
                static constexpr char ops[] = {'+', '-', '*', '/', '^'};
                out += '(';
                print(*n.lhs, out);
                out += ops[static_cast<int>(n.op)];
                print(*n.rhs, out);
                out += ')';
                return;
            }
            case K::call:
                out += detail::func_name(n.func);
                out += '(';
                print(*n.lhs, out);
                out += ')';
                return;
        }
    }

    ExprPtr root_;
    VarSet vars_;
};

namespace detail {

// Recursive-descent parser:
//   expr    := term (("+"|"-") term)*
//   term    := factor (("*"|"/") factor)*
//   factor  := "-" factor | primary ("^" factor)?
//   primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
// Unary minus applies to the whole power, so -u^2 is -(u^2); the exponent
// may itself be negated (2^-1).
class Parser {
public:
    Parser(std::string_view src, VarSet allowed) : src_(src), allowed_(allowed) {}

    ExprPtr parse() {
        skip_ws();
        if (pos_ == src_.size()) fail_syntax("empty expression");
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size()) fail_syntax("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail_syntax(const std::string& msg) const {
        throw ParseError(ParseError::Kind::syntax, pos_, "syntax error: " + msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
        ExprNode n{ExprNode::Kind::binary};
        n.op = op;
        n.lhs = std::move(a);
        n.rhs = std::move(b);
        return make_node(std::move(n));
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = binary(BinaryOp::add, lhs, term());
            } else if (accept('-')) {
                lhs = binary(BinaryOp::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = binary(BinaryOp::mul, lhs, factor());
            } else if (accept('/')) {
                lhs = binary(BinaryOp::div, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr factor() {
        if (accept('-')) {
            ExprNode n{ExprNode::Kind::negate};
            n.lhs = factor();
            return make_node(std::move(n));
        }
        ExprPtr base = primary();
        if (accept('^')) {
            return binary(BinaryOp::pow, base, factor());
        }
        return base;
    }

    ExprPtr primary() {
        skip_ws();
        if (pos_ == src_.size()) fail_syntax("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!accept(')')) fail_syntax("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail_syntax(std::string("unexpected character '") + c + "'");
    }

    ExprPtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            fail_syntax("malformed number");
        }
        // exponent only if digits follow, so "2*e" style text is never eaten
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc{} || ptr != src_.data() + pos_ || !std::isfinite(value)) {
            pos_ = start;
            fail_syntax("number out of range");
        }
        ExprNode n{ExprNode::Kind::constant};
        n.value = value;
        return make_node(std::move(n));
    }

    ExprPtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view id = src_.substr(start, pos_ - start);

        for (const auto& [fname, f] : function_names) {
            if (id == fname) {
                if (!accept('(')) fail_syntax("expected '(' after " + std::string(id));
                ExprNode n{ExprNode::Kind::call};
                n.func = f;
                n.lhs = expr();
                if (!accept(')')) fail_syntax("expected ')'");
                return make_node(std::move(n));
            }
        }

        ExprNode n{ExprNode::Kind::constant};
        if (id == "pi") {
            n.value = std::numbers::pi;
            n.name = "pi";
        } else if (id == "e") {
            n.value = std::numbers::e;
            n.name = "e";
        } else if (id == "t" || id == "u" || id == "v") {
            const Var x = id == "t" ? Var::t : (id == "u" ? Var::u : Var::v);
            if (!allowed_.contains(x)) {
                throw ParseError(ParseError::Kind::disallowed_variable, start,
                                 "variable '" + std::string(id) + "' is not allowed here");
            }
            n.kind = ExprNode::Kind::variable;
            n.var = x;
        } else {
            throw ParseError(ParseError::Kind::unknown_identifier, start,
                             "unknown identifier '" + std::string(id) + "'");
        }
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') fail_syntax("'" + std::string(id) + "' is not a function");
        return make_node(std::move(n));
    }

    std::string_view src_;
    VarSet allowed_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `source` into an expression, rejecting variables outside `allowed`.
inline Expr parse_expr(std::string_view source, VarSet allowed = vars_tuv) {
    return Expr(detail::Parser(source, allowed).parse());
}

}  // namespace fdde
