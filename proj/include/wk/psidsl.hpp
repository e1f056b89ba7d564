#pragma once

// Prescribed curvature function psi(nx, ny, nz) given as an expression.
//
// Grammar (usual precedence, ^ binds tighter than unary minus and is right
// associative):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'nx' | 'ny' | 'nz' | func '(' expr (',' expr)? ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sqrt | abs | min | max

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wk {

class PsiSyntaxError : public std::runtime_error {
public:
    PsiSyntaxError(const std::string& what, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// psi <= 0 at an evaluation point, or a domain fault (log of a negative, ...).
class PsiPositivityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct PsiEval {
    double value = 0.0;
    Eigen::Vector3d ambient_gradient = Eigen::Vector3d::Zero();
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // tangential at eta
};

class PsiExpr {
public:
    struct Node;

    static PsiExpr parse(std::string_view text);
    static PsiExpr constant(double value);

    /// Plain value, no positivity check.
    double eval(const Eigen::Vector3d& n) const;

    /// Value and gradient by forward-mode differentiation; requires |eta| = 1
    /// within 1e-9 and psi(eta) > 0.
    PsiEval eval_with_gradient(const Eigen::Vector3d& eta) const;

    /// Fully parenthesized text that parses back to the same function.
    std::string to_string() const;

    /// False if abs, min or max occur.
    bool is_smooth() const;

    const std::string& source() const { return source_; }

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace wk
