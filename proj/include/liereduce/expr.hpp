#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "liereduce/errors.hpp"

namespace liereduce {

class Context;
class Expr;
using CtxPtr = std::shared_ptr<Context>;

// Numeric bindings for opaque function atoms: fn(derivative_orders, arg_values).
using AtomFn = std::function<double(const std::vector<int>&, const std::vector<double>&)>;

struct AtomImpls {
    std::map<std::string, AtomFn> fns;
    bool synthesize_missing = false; // deterministic smooth stand-ins for unbound atoms

    void set(const std::string& name, AtomFn fn) { fns[name] = std::move(fn); }
    double call(const std::string& name, const std::vector<int>& orders,
                const std::vector<double>& args) const;

    static AtomFn builtin(const std::string& name); // sq, log, exp, sin, cos
};

// One monomial factor: variable id raised to a positive power.
struct VarPow {
    int id;
    int exp;
    bool operator==(const VarPow&) const = default;
};

struct Term {
    std::vector<VarPow> vars; // sorted by ascending canonical rank, exps > 0
    mpq_class coeff;          // nonzero
};

// Sparse multivariate polynomial with exact rational coefficients.
// Terms are kept sorted in descending graded-lex order of the owning context.
class Poly {
public:
    Poly() = default;
    static Poly constant(const mpq_class& c);
    static Poly variable(int id);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    const mpq_class& constant_value() const; // requires is_constant and nonzero
    const std::vector<Term>& terms() const { return terms_; }

    Poly add(const Poly& o, const Context& ctx) const;
    Poly sub(const Poly& o, const Context& ctx) const;
    Poly mul(const Poly& o, const Context& ctx) const;
    Poly mul_scalar(const mpq_class& c) const;
    Poly neg() const;
    Poly pow(int k, const Context& ctx) const; // k >= 0

    // Formal partial derivative: atoms are treated as independent variables.
    Poly derivative(int id, const Context& ctx) const;

    int degree(int id) const;
    int total_degree() const;
    bool contains(int id) const;
    void collect_vars(std::vector<int>& ids) const;

    // Rational content with the sign of the leading coefficient; zero poly -> 0.
    mpq_class content() const;
    Poly divide_scalar(const mpq_class& c) const;

    // Exact polynomial division; throws Error if the division is not exact.
    Poly divexact(const Poly& d, const Context& ctx) const;

    bool equal(const Poly& o) const;

    // Leading term under the context order (terms_ front).
    const Term& lead() const { return terms_.front(); }

    static Poly gcd(const Poly& a, const Poly& b, const Context& ctx);

    // View as univariate in v: degree -> coefficient poly.
    std::map<int, Poly> univariate(int v, const Context& ctx) const;
    static Poly from_univariate(const std::map<int, Poly>& coeffs, int v, const Context& ctx);

private:
    friend class Expr;
    std::vector<Term> terms_;

    void sort_terms(const Context& ctx);
    static Poly pseudo_rem(const Poly& a, const Poly& b, int v, const Context& ctx);
    static Poly gcd_primitive(Poly a, Poly b, const Context& ctx);
};

struct Atom {
    std::string name;
    std::vector<int> orders; // length = arity
    std::vector<Expr> args;  // length = arity, canonical
    std::string key;         // interning/order key, fixed at creation

    static std::string make_key(const std::string& name, const std::vector<int>& orders,
                                const std::vector<Expr>& args);
};

// Shared symbol table: named base symbols plus interned function-atom instances.
// Symbols occupy ids [0, symbol_count); atoms are appended after.
// Canonical ranks order symbols by name, then atoms by key; inserting a new
// variable never reorders two existing ones.
class Context : public std::enable_shared_from_this<Context> {
public:
    static CtxPtr make(const std::vector<std::string>& symbols);

    int add_symbol(const std::string& name);
    void declare_function(const std::string& name, int arity);
    std::optional<int> function_arity(const std::string& name) const;
    const std::map<std::string, int>& functions() const { return functions_; }

    std::optional<int> find_symbol(const std::string& name) const;
    int symbol_count() const { return static_cast<int>(symbols_.size()); }
    int var_count() const;

    bool is_atom(int id) const { return id >= symbol_count(); }
    const Atom& atom(int id) const;
    std::string symbol_name(int id) const;
    std::vector<std::string> symbol_names() const { return symbols_; }

    int intern_atom(const std::string& name, std::vector<int> orders, std::vector<Expr> args);

    int rank(int id) const;
    bool rank_less(int a, int b) const { return rank(a) < rank(b); }

    std::string var_string(int id) const; // canonical print of one variable

private:
    std::vector<std::string> symbols_;
    std::map<std::string, int> symbol_ids_;
    std::map<std::string, int> functions_;
    std::deque<Atom> atoms_; // deque: atom() references stay valid as atoms intern
    std::map<std::string, int> atom_ids_; // key -> var id
    std::vector<int> ranks_;              // id -> canonical position
    mutable std::recursive_mutex mutex_;

    void rebuild_ranks();
};

// Canonical rational function: scale * num / den with num, den primitive
// integer polynomials, gcd(num, den) = 1, positive leading coefficients.
// Zero is scale == 0, num == 0, den == 1.
class Expr {
public:
    Expr() = default; // empty; not usable until assigned

    static Expr zero(const CtxPtr& ctx);
    static Expr one(const CtxPtr& ctx);
    static Expr constant(const CtxPtr& ctx, const mpq_class& c);
    static Expr integer(const CtxPtr& ctx, long v);
    static Expr symbol(const CtxPtr& ctx, const std::string& name);
    static Expr variable(const CtxPtr& ctx, int id);
    static Expr atom(const CtxPtr& ctx, const std::string& name, std::vector<int> orders,
                     std::vector<Expr> args);
    static Expr fraction(const CtxPtr& ctx, const mpq_class& scale, Poly num, Poly den);

    const CtxPtr& ctx() const { return ctx_; }
    const mpq_class& scale() const { return scale_; }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    bool is_zero() const { return scale_ == 0; }
    bool is_one() const;
    bool is_constant() const;
    mpq_class constant_value() const; // requires is_constant

    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator*(const Expr& o) const;
    Expr operator/(const Expr& o) const;
    Expr operator-() const;
    Expr pow(int k) const;
    bool operator==(const Expr& o) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

    Expr derivative(int symbol_id) const;
    Expr derivative(const std::string& symbol) const;

    // Simultaneous substitution; unbound symbols pass through unchanged.
    Expr substitute(const std::map<int, Expr>& bindings) const;

    double evaluate(const std::map<int, double>& point, const AtomImpls& impls) const;

    void collect_vars(std::vector<int>& ids) const;
    bool depends_on(int id) const;

    std::string str() const;

private:
    CtxPtr ctx_;
    mpq_class scale_ = 0;
    Poly num_;
    Poly den_ = Poly::constant(1);

    Expr(CtxPtr ctx, mpq_class scale, Poly num, Poly den);
    void normalize();
    void require_same_ctx(const Expr& o) const;
};

Expr parse(const std::string& text, const CtxPtr& ctx);

std::string poly_string(const Poly& p, const Context& ctx);

} // namespace liereduce
