#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace errsurf {

using Bindings = std::map<std::string, double>;

enum class BinaryOp { add, sub, mul, div, pow };
enum class UnaryFn { sin, cos, tan, exp, ln, sqrt };

enum class ExprKind { number, symbol, binary, negate, call };

/// Immutable expression tree. Nodes are shared, never mutated after
/// construction, so expressions can be copied and evaluated concurrently.
class Expr {
public:
    Expr() = default;  // empty handle; only valid after assignment

    static Expr number(double value);
    static Expr symbol(std::string name);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr negate(Expr operand);
    static Expr call(UnaryFn fn, Expr argument);

    bool valid() const noexcept { return node_ != nullptr; }

    ExprKind kind() const;
    double number_value() const;           // kind() == number
    const std::string& symbol_name() const;  // kind() == symbol
    BinaryOp op() const;                   // kind() == binary
    UnaryFn fn() const;                    // kind() == call
    const Expr& left() const;              // kind() == binary
    const Expr& right() const;             // kind() == binary
    const Expr& operand() const;           // kind() == negate || kind() == call

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Declared names a formula may reference. Variables are the directly
/// measured inputs; constants are exact quantities bound once per experiment
/// and treated as having derivative zero.
struct SymbolTable {
    std::vector<std::string> variables;
    std::vector<std::string> constants;

    bool is_variable(std::string_view name) const;
    bool is_constant(std::string_view name) const;
    bool is_declared(std::string_view name) const;
};

/// Parse a formula with the usual precedence (power before unary minus
/// before mul/div before add/sub; power is right-associative). Power
/// exponents must not contain variables so that the derivative rules stay
/// closed-form. Throws ParseError with the offending position.
Expr parse(std::string_view text, const SymbolTable& symbols);

/// Exact symbolic partial derivative with respect to `var`; every other
/// symbol is held constant. The result is returned simplified.
Expr differentiate(const Expr& e, const std::string& var);

/// differentiate(differentiate(e, vi), vj).
Expr second_partial(const Expr& e, const std::string& vi, const std::string& vj);

/// Evaluate with every free symbol bound. Division by zero, domain errors
/// (ln/sqrt out of range) and non-finite intermediate results all throw
/// EvalError rather than propagating inf/nan.
double evaluate(const Expr& e, const Bindings& bindings);

/// Constant folding plus 0/1 identity elimination; evaluation-equivalent.
Expr simplify(const Expr& e);

/// Render in the same surface syntax accepted by parse().
std::string to_string(const Expr& e);

std::set<std::string> free_symbols(const Expr& e);

const char* to_string(UnaryFn fn);

}  // namespace errsurf
