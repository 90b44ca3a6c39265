#pragma once

#include <span>
#include <string>
#include <vector>

namespace qvi {

// Closed-form coefficient expressions over x1..xn.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*          left associative
//   product := unary (('*' | '/') unary)*              left associative
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?                    right associative
//   primary := number | 'x'k | func '(' args ')' | '(' sum ')'
// Functions: sin cos exp abs (one argument), min max (two arguments).
class Expr {
public:
    enum class Kind { Literal, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
    enum class Func { Sin, Cos, Exp, Abs, Min, Max };

    struct Node {
        Kind kind = Kind::Literal;
        double value = 0.0;  // Literal
        int variable = 0;    // Variable, zero-based
        Func func = Func::Sin;
        std::vector<Node> children;

        bool operator==(const Node&) const = default;
    };

    Expr() = default;
    Expr(Node root, int dim) : root_(std::move(root)), dim_(dim) {}

    static Expr literal(double value, int dim);

    const Node& root() const { return root_; }
    int dim() const { return dim_; }

    double eval(std::span<const double> point) const;
    // Fully parenthesized; reparses to a structurally identical tree.
    std::string to_string() const;

    // True iff the tree is a single literal equal to value.
    bool is_literal(double value) const;

    bool operator==(const Expr&) const = default;

private:
    Node root_;
    int dim_ = 0;
};

Expr parse_expression(const std::string& text, int dim);

const char* func_name(Expr::Func f);

}  // namespace qvi
