#include "liereduce/expr.hpp"

#include <cctype>

namespace liereduce {

namespace {

class Parser {
public:
    Parser(const std::string& text, const CtxPtr& ctx) : text_(text), ctx_(ctx) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& text_;
    CtxPtr ctx_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }

    Expr parse_expr() {
        bool negate = false;
        char c = peek();
        if (c == '+' || c == '-') {
            negate = c == '-';
            ++pos_;
        }
        Expr e = parse_term();
        if (negate) e = -e;
        while (true) {
            char op = peek();
            if (op == '+' || op == '-') {
                ++pos_;
                Expr rhs = parse_term();
                e = op == '+' ? e + rhs : e - rhs;
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (true) {
            char op = peek();
            if (op == '*' || op == '/') {
                ++pos_;
                Expr rhs = parse_factor();
                e = op == '*' ? e * rhs : e / rhs;
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        Expr e = parse_base();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^' &&
            !(pos_ + 1 < text_.size() && text_[pos_ + 1] == '(')) {
            ++pos_;
            e = e.pow(parse_int());
        }
        return e;
    }

    int parse_int() {
        skip_ws();
        std::size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            neg = text_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw SyntaxError("expected an integer", start);
        long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 1000000000L) throw SyntaxError("integer exponent too large", start);
            ++pos_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    Expr parse_base() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw SyntaxError("expected a number, a name, or '('", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        mpz_class v(text_.substr(start, pos_ - start));
        return Expr::constant(ctx_, mpq_class(v));
    }

    Expr parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            // "_{" opens a derivative-order list, not part of the name
            if (text_[pos_] == '_' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '{') break;
            ++pos_;
        }
        std::string name = text_.substr(start, pos_ - start);
        auto arity = ctx_->function_arity(name);
        if (arity) return parse_atom(name, *arity, start);
        auto sym = ctx_->find_symbol(name);
        if (!sym) throw UnknownSymbol(name, start);
        return Expr::variable(ctx_, *sym);
    }

    // Function-atom forms: f(args), f'(args), f''(args), f^(k)(args), f_{d1,...,dn}(args).
    Expr parse_atom(const std::string& name, int arity, std::size_t start) {
        std::vector<int> orders(arity, 0);
        if (pos_ < text_.size() && text_[pos_] == '\'') {
            if (arity != 1)
                throw SyntaxError("prime derivative requires a one-argument function", pos_);
            while (pos_ < text_.size() && text_[pos_] == '\'') {
                ++orders[0];
                ++pos_;
            }
        } else if (pos_ + 1 < text_.size() && text_[pos_] == '^' && text_[pos_ + 1] == '(') {
            if (arity != 1)
                throw SyntaxError("order derivative requires a one-argument function", pos_);
            pos_ += 2;
            int k = parse_int();
            if (k < 0) throw SyntaxError("derivative order must be nonnegative", pos_);
            orders[0] = k;
            expect(')');
        } else if (pos_ + 1 < text_.size() && text_[pos_] == '_' && text_[pos_ + 1] == '{') {
            pos_ += 2;
            for (int i = 0; i < arity; ++i) {
                if (i) expect(',');
                int k = parse_int();
                if (k < 0) throw SyntaxError("derivative order must be nonnegative", pos_);
                orders[i] = k;
            }
            expect('}');
        }
        if (peek() != '(')
            throw SyntaxError("function '" + name + "' requires an argument list", start);
        ++pos_;
        std::vector<Expr> args;
        for (int i = 0; i < arity; ++i) {
            if (i) expect(',');
            args.push_back(parse_expr());
        }
        expect(')');
        return Expr::atom(ctx_, name, std::move(orders), std::move(args));
    }
};

} // namespace

Expr parse(const std::string& text, const CtxPtr& ctx) { return Parser(text, ctx).run(); }

} // namespace liereduce
