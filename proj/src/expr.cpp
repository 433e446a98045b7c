#include "errsurf/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "errsurf/error.hpp"

namespace errsurf {

struct Expr::Node {
    ExprKind kind;
    double number = 0.0;
    std::string symbol;
    BinaryOp op = BinaryOp::add;
    UnaryFn fn = UnaryFn::sin;
    Expr lhs;  // binary lhs, or the sole operand of negate/call
    Expr rhs;
};

Expr Expr::number(double value) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::number;
    n->number = value;
    return Expr(std::move(n));
}

Expr Expr::symbol(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::symbol;
    n->symbol = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::binary;
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::negate;
    n->lhs = std::move(operand);
    return Expr(std::move(n));
}

Expr Expr::call(UnaryFn fn, Expr argument) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::call;
    n->fn = fn;
    n->lhs = std::move(argument);
    return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
const std::string& Expr::symbol_name() const { return node_->symbol; }
BinaryOp Expr::op() const { return node_->op; }
UnaryFn Expr::fn() const { return node_->fn; }
const Expr& Expr::left() const { return node_->lhs; }
const Expr& Expr::right() const { return node_->rhs; }
const Expr& Expr::operand() const { return node_->lhs; }

bool SymbolTable::is_variable(std::string_view name) const {
    return std::find(variables.begin(), variables.end(), name) != variables.end();
}

bool SymbolTable::is_constant(std::string_view name) const {
    return std::find(constants.begin(), constants.end(), name) != constants.end();
}

bool SymbolTable::is_declared(std::string_view name) const {
    return is_variable(name) || is_constant(name);
}

const char* to_string(UnaryFn fn) {
    switch (fn) {
        case UnaryFn::sin: return "sin";
        case UnaryFn::cos: return "cos";
        case UnaryFn::tan: return "tan";
        case UnaryFn::exp: return "exp";
        case UnaryFn::ln: return "ln";
        case UnaryFn::sqrt: return "sqrt";
    }
    return "?";
}

namespace {

bool is_number(const Expr& e, double v) {
    return e.kind() == ExprKind::number && e.number_value() == v;
}

bool is_any_number(const Expr& e) { return e.kind() == ExprKind::number; }

// Smart constructors: fold constants (only when the result is finite) and
// strip 0/1 identities. differentiate() and simplify() both build through
// these, so derivatives come out pre-simplified.

Expr make_number(double v) { return Expr::number(v); }

Expr make_neg(Expr a) {
    if (is_any_number(a)) return make_number(-a.number_value());
    if (a.kind() == ExprKind::negate) return a.operand();
    return Expr::negate(std::move(a));
}

Expr make_add(Expr a, Expr b) {
    if (is_any_number(a) && is_any_number(b)) {
        const double v = a.number_value() + b.number_value();
        if (std::isfinite(v)) return make_number(v);
    }
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    return Expr::binary(BinaryOp::add, std::move(a), std::move(b));
}

Expr make_sub(Expr a, Expr b) {
    if (is_any_number(a) && is_any_number(b)) {
        const double v = a.number_value() - b.number_value();
        if (std::isfinite(v)) return make_number(v);
    }
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return make_neg(std::move(b));
    return Expr::binary(BinaryOp::sub, std::move(a), std::move(b));
}

Expr make_mul(Expr a, Expr b) {
    if (is_any_number(a) && is_any_number(b)) {
        const double v = a.number_value() * b.number_value();
        if (std::isfinite(v)) return make_number(v);
    }
    if (is_number(a, 0.0) || is_number(b, 0.0)) return make_number(0.0);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    return Expr::binary(BinaryOp::mul, std::move(a), std::move(b));
}

Expr make_div(Expr a, Expr b) {
    if (is_any_number(a) && is_any_number(b) && b.number_value() != 0.0) {
        const double v = a.number_value() / b.number_value();
        if (std::isfinite(v)) return make_number(v);
    }
    if (is_number(a, 0.0)) return make_number(0.0);
    if (is_number(b, 1.0)) return a;
    return Expr::binary(BinaryOp::div, std::move(a), std::move(b));
}

Expr make_pow(Expr a, Expr b) {
    if (is_any_number(a) && is_any_number(b)) {
        const double v = std::pow(a.number_value(), b.number_value());
        if (std::isfinite(v)) return make_number(v);
    }
    if (is_number(b, 1.0)) return a;
    if (is_number(b, 0.0)) return make_number(1.0);
    if (is_number(a, 1.0)) return make_number(1.0);
    return Expr::binary(BinaryOp::pow, std::move(a), std::move(b));
}

double apply_fn(UnaryFn fn, double a) {
    switch (fn) {
        case UnaryFn::sin: return std::sin(a);
        case UnaryFn::cos: return std::cos(a);
        case UnaryFn::tan: return std::tan(a);
        case UnaryFn::exp: return std::exp(a);
        case UnaryFn::ln: return std::log(a);
        case UnaryFn::sqrt: return std::sqrt(a);
    }
    return 0.0;
}

Expr make_call(UnaryFn fn, Expr a) {
    if (is_any_number(a)) {
        const double v = apply_fn(fn, a.number_value());
        if (std::isfinite(v)) return make_number(v);
    }
    return Expr::call(fn, std::move(a));
}

Expr make_binary(BinaryOp op, Expr a, Expr b) {
    switch (op) {
        case BinaryOp::add: return make_add(std::move(a), std::move(b));
        case BinaryOp::sub: return make_sub(std::move(a), std::move(b));
        case BinaryOp::mul: return make_mul(std::move(a), std::move(b));
        case BinaryOp::div: return make_div(std::move(a), std::move(b));
        case BinaryOp::pow: return make_pow(std::move(a), std::move(b));
    }
    return Expr();
}

bool mentions(const Expr& e, std::string_view name) {
    switch (e.kind()) {
        case ExprKind::number: return false;
        case ExprKind::symbol: return e.symbol_name() == name;
        case ExprKind::binary: return mentions(e.left(), name) || mentions(e.right(), name);
        case ExprKind::negate:
        case ExprKind::call: return mentions(e.operand(), name);
    }
    return false;
}

bool mentions_any_variable(const Expr& e, const SymbolTable& symbols) {
    switch (e.kind()) {
        case ExprKind::number: return false;
        case ExprKind::symbol: return symbols.is_variable(e.symbol_name());
        case ExprKind::binary:
            return mentions_any_variable(e.left(), symbols) ||
                   mentions_any_variable(e.right(), symbols);
        case ExprKind::negate:
        case ExprKind::call: return mentions_any_variable(e.operand(), symbols);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Parsing

struct Token {
    enum Type { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
    Type type = end;
    double value = 0.0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        current_ = Token{};
        current_.pos = pos_;
        if (pos_ >= text_.size()) {
            current_.type = Token::end;
            return;
        }
        const char c = text_[pos_];
        switch (c) {
            case '+': current_.type = Token::plus; ++pos_; return;
            case '-': current_.type = Token::minus; ++pos_; return;
            case '*': current_.type = Token::star; ++pos_; return;
            case '/': current_.type = Token::slash; ++pos_; return;
            case '^': current_.type = Token::caret; ++pos_; return;
            case '(': current_.type = Token::lparen; ++pos_; return;
            case ')': current_.type = Token::rparen; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.data() + pos_;
            char* endp = nullptr;
            const double v = std::strtod(begin, &endp);
            if (endp == begin || !std::isfinite(v))
                throw ParseError("malformed number", pos_);
            current_.type = Token::number;
            current_.value = v;
            pos_ += static_cast<std::size_t>(endp - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            current_.type = Token::ident;
            current_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token current_;
};

bool lookup_fn(const std::string& name, UnaryFn& out) {
    static const std::pair<const char*, UnaryFn> table[] = {
        {"sin", UnaryFn::sin}, {"cos", UnaryFn::cos}, {"tan", UnaryFn::tan},
        {"exp", UnaryFn::exp}, {"ln", UnaryFn::ln},   {"sqrt", UnaryFn::sqrt},
    };
    for (const auto& [fn_name, fn] : table)
        if (name == fn_name) {
            out = fn;
            return true;
        }
    return false;
}

class Parser {
public:
    Parser(std::string_view text, const SymbolTable& symbols)
        : lexer_(text), symbols_(symbols) {}

    Expr run() {
        if (lexer_.peek().type == Token::end) throw ParseError("empty formula", 0);
        Expr e = parse_sum();
        const Token& t = lexer_.peek();
        if (t.type != Token::end) throw ParseError("unexpected trailing input", t.pos);
        return e;
    }

private:
    Expr parse_sum() {
        Expr e = parse_product();
        while (true) {
            const Token::Type t = lexer_.peek().type;
            if (t == Token::plus) {
                lexer_.take();
                e = Expr::binary(BinaryOp::add, std::move(e), parse_product());
            } else if (t == Token::minus) {
                lexer_.take();
                e = Expr::binary(BinaryOp::sub, std::move(e), parse_product());
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_unary();
        while (true) {
            const Token::Type t = lexer_.peek().type;
            if (t == Token::star) {
                lexer_.take();
                e = Expr::binary(BinaryOp::mul, std::move(e), parse_unary());
            } else if (t == Token::slash) {
                lexer_.take();
                e = Expr::binary(BinaryOp::div, std::move(e), parse_unary());
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (lexer_.peek().type == Token::minus) {
            lexer_.take();
            return Expr::negate(parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (lexer_.peek().type != Token::caret) return base;
        const Token caret = lexer_.take();
        // right-associative; the exponent may carry its own unary minus
        Expr exponent = parse_unary();
        if (mentions_any_variable(exponent, symbols_))
            throw ParseError("power exponent must be a constant expression", caret.pos);
        return Expr::binary(BinaryOp::pow, std::move(base), std::move(exponent));
    }

    Expr parse_primary() {
        Token t = lexer_.take();
        switch (t.type) {
            case Token::number: return Expr::number(t.value);
            case Token::lparen: {
                Expr e = parse_sum();
                expect(Token::rparen, "expected ')'");
                return e;
            }
            case Token::ident: {
                if (lexer_.peek().type == Token::lparen) {
                    UnaryFn fn;
                    if (!lookup_fn(t.text, fn))
                        throw ParseError("unsupported function '" + t.text + "'", t.pos);
                    lexer_.take();  // '('
                    Expr arg = parse_sum();
                    expect(Token::rparen, "expected ')' after function argument");
                    return Expr::call(fn, std::move(arg));
                }
                if (!symbols_.is_declared(t.text))
                    throw ParseError("unknown symbol '" + t.text + "'", t.pos);
                return Expr::symbol(t.text);
            }
            default: throw ParseError("expected a value", t.pos);
        }
    }

    void expect(Token::Type type, const char* message) {
        const Token& t = lexer_.peek();
        if (t.type != type) throw ParseError(message, t.pos);
        lexer_.take();
    }

    Lexer lexer_;
    const SymbolTable& symbols_;
};

}  // namespace

Expr parse(std::string_view text, const SymbolTable& symbols) {
    return Parser(text, symbols).run();
}

Expr simplify(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::number:
        case ExprKind::symbol: return e;
        case ExprKind::binary:
            return make_binary(e.op(), simplify(e.left()), simplify(e.right()));
        case ExprKind::negate: return make_neg(simplify(e.operand()));
        case ExprKind::call: return make_call(e.fn(), simplify(e.operand()));
    }
    return e;
}

Expr differentiate(const Expr& e, const std::string& var) {
    switch (e.kind()) {
        case ExprKind::number: return Expr::number(0.0);
        case ExprKind::symbol: return Expr::number(e.symbol_name() == var ? 1.0 : 0.0);
        case ExprKind::negate: return make_neg(differentiate(e.operand(), var));
        case ExprKind::binary: {
            const Expr& u = e.left();
            const Expr& v = e.right();
            switch (e.op()) {
                case BinaryOp::add:
                    return make_add(differentiate(u, var), differentiate(v, var));
                case BinaryOp::sub:
                    return make_sub(differentiate(u, var), differentiate(v, var));
                case BinaryOp::mul:
                    return make_add(make_mul(differentiate(u, var), v),
                                    make_mul(u, differentiate(v, var)));
                case BinaryOp::div:
                    // u'/v - u v'/v^2
                    return make_sub(
                        make_div(differentiate(u, var), v),
                        make_div(make_mul(u, differentiate(v, var)),
                                 make_pow(v, Expr::number(2.0))));
                case BinaryOp::pow: {
                    if (mentions(v, var))
                        throw EvalError("cannot differentiate power with exponent depending on '" +
                                        var + "'");
                    // w constant in var: (u^w)' = w u^(w-1) u'
                    return make_mul(
                        make_mul(v, make_pow(u, make_sub(v, Expr::number(1.0)))),
                        differentiate(u, var));
                }
            }
            return Expr();
        }
        case ExprKind::call: {
            const Expr& u = e.operand();
            Expr du = differentiate(u, var);
            switch (e.fn()) {
                case UnaryFn::sin: return make_mul(make_call(UnaryFn::cos, u), std::move(du));
                case UnaryFn::cos:
                    return make_neg(make_mul(make_call(UnaryFn::sin, u), std::move(du)));
                case UnaryFn::tan:
                    return make_div(std::move(du),
                                    make_pow(make_call(UnaryFn::cos, u), Expr::number(2.0)));
                case UnaryFn::exp: return make_mul(make_call(UnaryFn::exp, u), std::move(du));
                case UnaryFn::ln: return make_div(std::move(du), u);
                case UnaryFn::sqrt:
                    return make_div(std::move(du),
                                    make_mul(Expr::number(2.0), make_call(UnaryFn::sqrt, u)));
            }
            return Expr();
        }
    }
    return Expr();
}

Expr second_partial(const Expr& e, const std::string& vi, const std::string& vj) {
    return differentiate(differentiate(e, vi), vj);
}

namespace {

void ensure_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
}

}  // namespace

double evaluate(const Expr& e, const Bindings& bindings) {
    switch (e.kind()) {
        case ExprKind::number: return e.number_value();
        case ExprKind::symbol: {
            auto it = bindings.find(e.symbol_name());
            if (it == bindings.end())
                throw EvalError("unbound symbol '" + e.symbol_name() + "'");
            return it->second;
        }
        case ExprKind::negate: return -evaluate(e.operand(), bindings);
        case ExprKind::binary: {
            const double l = evaluate(e.left(), bindings);
            const double r = evaluate(e.right(), bindings);
            double v = 0.0;
            switch (e.op()) {
                case BinaryOp::add: v = l + r; ensure_finite(v, "addition"); return v;
                case BinaryOp::sub: v = l - r; ensure_finite(v, "subtraction"); return v;
                case BinaryOp::mul: v = l * r; ensure_finite(v, "multiplication"); return v;
                case BinaryOp::div:
                    if (r == 0.0) throw EvalError("division by zero");
                    v = l / r;
                    ensure_finite(v, "division");
                    return v;
                case BinaryOp::pow:
                    v = std::pow(l, r);
                    ensure_finite(v, "power");
                    return v;
            }
            return 0.0;
        }
        case ExprKind::call: {
            const double a = evaluate(e.operand(), bindings);
            switch (e.fn()) {
                case UnaryFn::ln:
                    if (a <= 0.0) throw EvalError("logarithm of a non-positive value");
                    break;
                case UnaryFn::sqrt:
                    if (a < 0.0) throw EvalError("square root of a negative value");
                    break;
                default: break;
            }
            const double v = apply_fn(e.fn(), a);
            ensure_finite(v, to_string(e.fn()));
            return v;
        }
    }
    throw EvalError("empty expression");
}

namespace {

// plain precedence levels: +,- = 1; *,/ = 2; unary minus and negative
// literals = 3; ^ = 4; atoms = 5
int precedence_of(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::number: return e.number_value() < 0.0 ? 3 : 5;
        case ExprKind::symbol:
        case ExprKind::call: return 5;
        case ExprKind::negate: return 3;
        case ExprKind::binary:
            switch (e.op()) {
                case BinaryOp::add:
                case BinaryOp::sub: return 1;
                case BinaryOp::mul:
                case BinaryOp::div: return 2;
                case BinaryOp::pow: return 4;
            }
    }
    return 5;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print(const Expr& e, int min_prec, std::string& out) {
    const bool parens = precedence_of(e) < min_prec;
    if (parens) out += '(';
    switch (e.kind()) {
        case ExprKind::number: out += format_number(e.number_value()); break;
        case ExprKind::symbol: out += e.symbol_name(); break;
        case ExprKind::negate:
            out += '-';
            print(e.operand(), 4, out);
            break;
        case ExprKind::call:
            out += to_string(e.fn());
            out += '(';
            print(e.operand(), 0, out);
            out += ')';
            break;
        case ExprKind::binary: {
            const char* sep = "";
            int lp = 0, rp = 0;
            switch (e.op()) {
                case BinaryOp::add: sep = " + "; lp = 1; rp = 2; break;
                case BinaryOp::sub: sep = " - "; lp = 1; rp = 2; break;
                case BinaryOp::mul: sep = "*"; lp = 2; rp = 3; break;
                case BinaryOp::div: sep = "/"; lp = 2; rp = 3; break;
                case BinaryOp::pow: sep = "^"; lp = 5; rp = 4; break;
            }
            print(e.left(), lp, out);
            out += sep;
            print(e.right(), rp, out);
            break;
        }
    }
    if (parens) out += ')';
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
        case ExprKind::number: return;
        case ExprKind::symbol: out.insert(e.symbol_name()); return;
        case ExprKind::binary:
            collect_symbols(e.left(), out);
            collect_symbols(e.right(), out);
            return;
        case ExprKind::negate:
        case ExprKind::call: collect_symbols(e.operand(), out); return;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, 0, out);
    return out;
}

std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

}  // namespace errsurf
