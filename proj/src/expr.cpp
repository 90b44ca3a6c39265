#include "qvi/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "qvi/errors.hpp"
#include "qvi/field_io.hpp"

namespace qvi {

const char* func_name(Expr::Func f) {
    switch (f) {
        case Expr::Func::Sin: return "sin";
        case Expr::Func::Cos: return "cos";
        case Expr::Func::Exp: return "exp";
        case Expr::Func::Abs: return "abs";
        case Expr::Func::Min: return "min";
        case Expr::Func::Max: return "max";
    }
    return "?";
}

Expr Expr::literal(double value, int dim) {
    Node n;
    n.kind = Kind::Literal;
    n.value = value;
    return Expr(std::move(n), dim);
}

bool Expr::is_literal(double value) const {
    return root_.kind == Kind::Literal && root_.value == value;
}

namespace {

const char* child_label(Expr::Kind kind, std::size_t i) {
    if (kind == Expr::Kind::Negate) return "operand";
    if (kind == Expr::Kind::Call) return i == 0 ? "arg0" : "arg1";
    return i == 0 ? "lhs" : "rhs";
}

void print(const Expr::Node& n, std::string& out) {
    using K = Expr::Kind;
    switch (n.kind) {
        case K::Literal: out += format_real(n.value); return;
        case K::Variable: out += "x" + std::to_string(n.variable + 1); return;
        case K::Negate:
            out += "(-";
            print(n.children[0], out);
            out += ")";
            return;
        case K::Call:
            out += func_name(n.func);
            out += "(";
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += ", ";
                print(n.children[i], out);
            }
            out += ")";
            return;
        default: break;
    }
    const char* op = n.kind == K::Add ? " + " : n.kind == K::Sub ? " - " : n.kind == K::Mul ? " * "
                     : n.kind == K::Div ? " / " : " ^ ";
    out += "(";
    print(n.children[0], out);
    out += op;
    print(n.children[1], out);
    out += ")";
}

double eval_node(const Expr::Node& n, std::span<const double> x, std::string& path) {
    using K = Expr::Kind;
    auto child = [&](std::size_t i) {
        const std::size_t mark = path.size();
        path += ".";
        path += child_label(n.kind, i);
        const double v = eval_node(n.children[i], x, path);
        path.resize(mark);
        return v;
    };
    double r = 0.0;
    switch (n.kind) {
        case K::Literal: return n.value;
        case K::Variable: return x[n.variable];
        case K::Negate: r = -child(0); break;
        case K::Add: r = child(0) + child(1); break;
        case K::Sub: r = child(0) - child(1); break;
        case K::Mul: r = child(0) * child(1); break;
        case K::Div: {
            const double a = child(0);
            const double b = child(1);
            if (b == 0.0) {
                std::string s;
                print(n, s);
                throw EvalError("division by zero in " + s, path);
            }
            r = a / b;
            break;
        }
        case K::Pow: {
            const double a = child(0);
            r = std::pow(a, child(1));
            break;
        }
        case K::Call: {
            const double a = child(0);
            switch (n.func) {
                case Expr::Func::Sin: r = std::sin(a); break;
                case Expr::Func::Cos: r = std::cos(a); break;
                case Expr::Func::Exp: r = std::exp(a); break;
                case Expr::Func::Abs: r = std::abs(a); break;
                case Expr::Func::Min: r = std::min(a, child(1)); break;
                case Expr::Func::Max: r = std::max(a, child(1)); break;
            }
            break;
        }
    }
    if (!std::isfinite(r)) {
        std::string s;
        print(n, s);
        throw EvalError("non-finite value from " + s, path);
    }
    return r;
}

class Parser {
public:
    Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

    Expr::Node parse() {
        skip();
        if (pos_ == s_.size()) fail("empty expression");
        Expr::Node n = sum();
        skip();
        if (pos_ != s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

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

    static Expr::Node binary(Expr::Kind k, Expr::Node a, Expr::Node b) {
        Expr::Node n;
        n.kind = k;
        n.children.push_back(std::move(a));
        n.children.push_back(std::move(b));
        return n;
    }

    Expr::Node sum() {
        Expr::Node lhs = product();
        for (;;) {
            if (accept('+')) {
                lhs = binary(Expr::Kind::Add, std::move(lhs), product());
            } else if (accept('-')) {
                lhs = binary(Expr::Kind::Sub, std::move(lhs), product());
            } else {
                return lhs;
            }
        }
    }

    Expr::Node product() {
        Expr::Node lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary(Expr::Kind::Mul, std::move(lhs), unary());
            } else if (accept('/')) {
                lhs = binary(Expr::Kind::Div, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    Expr::Node unary() {
        if (accept('-')) {
            Expr::Node n;
            n.kind = Expr::Kind::Negate;
            n.children.push_back(unary());
            return n;
        }
        return power();
    }

    Expr::Node power() {
        Expr::Node base = primary();
        if (accept('^')) return binary(Expr::Kind::Pow, std::move(base), unary());
        return base;
    }

    Expr::Node primary() {
        skip();
        if (pos_ == s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        if (accept('(')) {
            Expr::Node n = sum();
            expect(')');
            return n;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    Expr::Node number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        const std::string tok = s_.substr(start, pos_ - start);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        Expr::Node n;
        n.kind = Expr::Kind::Literal;
        n.value = v;
        return n;
    }

    Expr::Node identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (id.size() >= 2 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos &&
            id[1] != '0') {
            const long k = std::strtol(id.c_str() + 1, nullptr, 10);
            if (k > dim_) {
                pos_ = start;
                fail("variable " + id + " exceeds dimension " + std::to_string(dim_));
            }
            Expr::Node n;
            n.kind = Expr::Kind::Variable;
            n.variable = static_cast<int>(k - 1);
            return n;
        }
        static const std::pair<const char*, Expr::Func> table[] = {
            {"sin", Expr::Func::Sin}, {"cos", Expr::Func::Cos}, {"exp", Expr::Func::Exp},
            {"abs", Expr::Func::Abs}, {"min", Expr::Func::Min}, {"max", Expr::Func::Max}};
        for (const auto& [name, f] : table) {
            if (id != name) continue;
            Expr::Node n;
            n.kind = Expr::Kind::Call;
            n.func = f;
            expect('(');
            n.children.push_back(sum());
            if (f == Expr::Func::Min || f == Expr::Func::Max) {
                expect(',');
                n.children.push_back(sum());
            }
            expect(')');
            return n;
        }
        pos_ = start;
        fail("unknown identifier '" + id + "'");
    }

    const std::string& s_;
    int dim_;
    std::size_t pos_ = 0;
};

}  // namespace

double Expr::eval(std::span<const double> point) const {
    if (point.size() != static_cast<std::size_t>(dim_)) {
        throw ShapeError("expression expects " + std::to_string(dim_) + " coordinates, got " +
                         std::to_string(point.size()));
    }
    std::string path = "root";
    return eval_node(root_, point, path);
}

std::string Expr::to_string() const {
    std::string out;
    print(root_, out);
    return out;
}

Expr parse_expression(const std::string& text, int dim) {
    if (dim < 1 || dim > 3) throw ShapeError("expression dimension must be 1..3");
    return Expr(Parser(text, dim).parse(), dim);
}

}  // namespace qvi
