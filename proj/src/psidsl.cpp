#include "wk/psidsl.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace wk {

PsiSyntaxError::PsiSyntaxError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

enum class Op { literal, var, add, sub, mul, div, pow, neg, exp, log, sin, cos, sqrt, abs, min, max };

struct PsiExpr::Node {
    Op op = Op::literal;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const PsiExpr::Node>;

NodePtr leaf(double v) {
    auto n = std::make_shared<PsiExpr::Node>();
    n->value = v;
    return n;
}

NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<PsiExpr::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

struct FunctionInfo {
    const char* name;
    Op op;
    int arity;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{{"exp", Op::exp, 1},
                                                  {"log", Op::log, 1},
                                                  {"sin", Op::sin, 1},
                                                  {"cos", Op::cos, 1},
                                                  {"sqrt", Op::sqrt, 1},
                                                  {"abs", Op::abs, 1},
                                                  {"min", Op::min, 2},
                                                  {"max", Op::max, 2}}};

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw PsiSyntaxError(what, pos_); }

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

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::add, lhs, term());
            else if (accept('-')) lhs = make(Op::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::mul, lhs, unary());
            else if (accept('/')) lhs = make(Op::div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (accept('(')) {
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        std::string buf(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(buf.c_str(), &end);
        if (end == buf.c_str()) fail("malformed number");
        pos_ = start + static_cast<std::size_t>(end - buf.c_str());
        return leaf(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id == "nx" || id == "ny" || id == "nz") {
            auto n = std::make_shared<PsiExpr::Node>();
            n->op = Op::var;
            n->var = id[1] - 'x';
            return n;
        }
        for (const auto& f : kFunctions) {
            if (id != f.name) continue;
            expect('(');
            NodePtr a = expr();
            NodePtr b;
            if (f.arity == 2) {
                expect(',');
                b = expr();
            }
            expect(')');
            return make(f.op, a, b);
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(id) + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// Forward-mode dual number over the three normal components.
struct Dual {
    double v;
    Eigen::Vector3d d;
};

Dual eval_dual(const PsiExpr::Node& n, const Eigen::Vector3d& x) {
    auto unit = [](Dual a, double f, double df) { return Dual{f, df * a.d}; };
    switch (n.op) {
        case Op::literal:
            return {n.value, Eigen::Vector3d::Zero()};
        case Op::var:
            return {x(n.var), Eigen::Vector3d::Unit(n.var)};
        case Op::neg: {
            Dual a = eval_dual(*n.lhs, x);
            return {-a.v, -a.d};
        }
        case Op::exp: {
            Dual a = eval_dual(*n.lhs, x);
            const double e = std::exp(a.v);
            return unit(a, e, e);
        }
        case Op::log: {
            Dual a = eval_dual(*n.lhs, x);
            return unit(a, std::log(a.v), 1.0 / a.v);
        }
        case Op::sin: {
            Dual a = eval_dual(*n.lhs, x);
            return unit(a, std::sin(a.v), std::cos(a.v));
        }
        case Op::cos: {
            Dual a = eval_dual(*n.lhs, x);
            return unit(a, std::cos(a.v), -std::sin(a.v));
        }
        case Op::sqrt: {
            Dual a = eval_dual(*n.lhs, x);
            const double r = std::sqrt(a.v);
            return unit(a, r, 0.5 / r);
        }
        case Op::abs: {
            Dual a = eval_dual(*n.lhs, x);
            return unit(a, std::abs(a.v), a.v < 0.0 ? -1.0 : 1.0);
        }
        default:
            break;
    }
    const Dual a = eval_dual(*n.lhs, x);
    const Dual b = eval_dual(*n.rhs, x);
    switch (n.op) {
        case Op::add:
            return {a.v + b.v, a.d + b.d};
        case Op::sub:
            return {a.v - b.v, a.d - b.d};
        case Op::mul:
            return {a.v * b.v, a.d * b.v + a.v * b.d};
        case Op::div:
            return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
        case Op::pow: {
            const double p = std::pow(a.v, b.v);
            Eigen::Vector3d d = Eigen::Vector3d::Zero();
            if (!a.d.isZero()) d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
            if (!b.d.isZero()) d += p * std::log(a.v) * b.d;
            return {p, d};
        }
        case Op::min:
            return a.v <= b.v ? a : b;
        case Op::max:
            return a.v >= b.v ? a : b;
        default:
            throw std::logic_error("malformed psi expression");
    }
}

double eval_plain(const PsiExpr::Node& n, const Eigen::Vector3d& x) {
    switch (n.op) {
        case Op::literal: return n.value;
        case Op::var: return x(n.var);
        case Op::neg: return -eval_plain(*n.lhs, x);
        case Op::exp: return std::exp(eval_plain(*n.lhs, x));
        case Op::log: return std::log(eval_plain(*n.lhs, x));
        case Op::sin: return std::sin(eval_plain(*n.lhs, x));
        case Op::cos: return std::cos(eval_plain(*n.lhs, x));
        case Op::sqrt: return std::sqrt(eval_plain(*n.lhs, x));
        case Op::abs: return std::abs(eval_plain(*n.lhs, x));
        default: break;
    }
    const double a = eval_plain(*n.lhs, x);
    const double b = eval_plain(*n.rhs, x);
    switch (n.op) {
        case Op::add: return a + b;
        case Op::sub: return a - b;
        case Op::mul: return a * b;
        case Op::div: return a / b;
        case Op::pow: return std::pow(a, b);
        case Op::min: return a <= b ? a : b;
        case Op::max: return a >= b ? a : b;
        default: throw std::logic_error("malformed psi expression");
    }
}

void print(const PsiExpr::Node& n, std::ostringstream& out) {
    static const char* names[] = {"", "", "+", "-", "*", "/", "^", "-", "exp", "log", "sin", "cos", "sqrt", "abs", "min", "max"};
    const char* name = names[static_cast<int>(n.op)];
    switch (n.op) {
        case Op::literal: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            // negative literals cannot come out of the parser, but keep them parseable
            if (n.value < 0) out << '(' << buf << ')';
            else out << buf;
            return;
        }
        case Op::var:
            out << 'n' << static_cast<char>('x' + n.var);
            return;
        case Op::neg:
            out << "(-";
            print(*n.lhs, out);
            out << ')';
            return;
        case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow:
            out << '(';
            print(*n.lhs, out);
            out << ' ' << name << ' ';
            print(*n.rhs, out);
            out << ')';
            return;
        default:
            out << name << '(';
            print(*n.lhs, out);
            if (n.rhs) {
                out << ", ";
                print(*n.rhs, out);
            }
            out << ')';
    }
}

bool smooth(const PsiExpr::Node& n) {
    if (n.op == Op::abs || n.op == Op::min || n.op == Op::max) return false;
    return (!n.lhs || smooth(*n.lhs)) && (!n.rhs || smooth(*n.rhs));
}

}  // namespace

PsiExpr PsiExpr::parse(std::string_view text) {
    PsiExpr e;
    e.root_ = Parser(text).parse();
    e.source_ = std::string(text);
    return e;
}

PsiExpr PsiExpr::constant(double value) {
    PsiExpr e;
    e.root_ = leaf(value);
    e.source_ = e.to_string();
    return e;
}

double PsiExpr::eval(const Eigen::Vector3d& n) const { return eval_plain(*root_, n); }

PsiEval PsiExpr::eval_with_gradient(const Eigen::Vector3d& eta) const {
    if (std::abs(eta.norm() - 1.0) > 1e-9) throw std::invalid_argument("psi evaluated off the unit sphere");
    const Dual d = eval_dual(*root_, eta);
    if (!(d.v > 0.0) || !std::isfinite(d.v) || !d.d.allFinite()) {
        std::ostringstream msg;
        msg << "psi = " << d.v << " is not positive at (" << eta(0) << ", " << eta(1) << ", " << eta(2) << ")";
        throw PsiPositivityError(msg.str());
    }
    PsiEval out;
    out.value = d.v;
    out.ambient_gradient = d.d;
    out.gradient = d.d - eta * eta.dot(d.d);
    return out;
}

std::string PsiExpr::to_string() const {
    std::ostringstream out;
    print(*root_, out);
    return out.str();
}

bool PsiExpr::is_smooth() const { return smooth(*root_); }

}  // namespace wk
