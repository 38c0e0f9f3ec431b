#include "liereduce/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace liereduce {

Expr::Expr(CtxPtr ctx, mpq_class scale, Poly num, Poly den)
    : ctx_(std::move(ctx)), scale_(std::move(scale)), num_(std::move(num)),
      den_(std::move(den)) {}

void Expr::normalize() {
    if (den_.is_zero()) throw DivisionByZero();
    if (scale_ == 0 || num_.is_zero()) {
        scale_ = 0;
        num_ = Poly();
        den_ = Poly::constant(1);
        return;
    }
    mpq_class cn = num_.content();
    mpq_class cd = den_.content();
    scale_ *= cn / cd;
    num_ = num_.divide_scalar(cn);
    den_ = den_.divide_scalar(cd);
    Poly g = Poly::gcd(num_, den_, *ctx_);
    if (!g.is_constant()) {
        num_ = num_.divexact(g, *ctx_);
        den_ = den_.divexact(g, *ctx_);
    }
}

Expr Expr::zero(const CtxPtr& ctx) { return Expr(ctx, 0, Poly(), Poly::constant(1)); }

Expr Expr::one(const CtxPtr& ctx) { return constant(ctx, 1); }

Expr Expr::constant(const CtxPtr& ctx, const mpq_class& c) {
    if (c == 0) return zero(ctx);
    return Expr(ctx, c, Poly::constant(1), Poly::constant(1));
}

Expr Expr::integer(const CtxPtr& ctx, long v) { return constant(ctx, mpq_class(v)); }

Expr Expr::symbol(const CtxPtr& ctx, const std::string& name) {
    auto id = ctx->find_symbol(name);
    if (!id) throw UnknownSymbol(name);
    return variable(ctx, *id);
}

Expr Expr::variable(const CtxPtr& ctx, int id) {
    return Expr(ctx, 1, Poly::variable(id), Poly::constant(1));
}

Expr Expr::atom(const CtxPtr& ctx, const std::string& name, std::vector<int> orders,
                std::vector<Expr> args) {
    for (const auto& a : args)
        if (a.ctx_ && a.ctx_ != ctx) throw ContextMismatch();
    int id = ctx->intern_atom(name, std::move(orders), std::move(args));
    return variable(ctx, id);
}

Expr Expr::fraction(const CtxPtr& ctx, const mpq_class& scale, Poly num, Poly den) {
    Expr e(ctx, scale, std::move(num), std::move(den));
    e.normalize();
    return e;
}

bool Expr::is_one() const { return scale_ == 1 && num_.is_constant() && den_.is_constant(); }

bool Expr::is_constant() const { return num_.is_constant() && den_.is_constant(); }

mpq_class Expr::constant_value() const {
    assert(is_constant());
    return scale_;
}

void Expr::require_same_ctx(const Expr& o) const {
    if (ctx_ != o.ctx_) throw ContextMismatch();
}

// Addition via Henrici's scheme: with d1 = g*e1, d2 = g*e2 and reduced inputs,
// the sum is content-extracted T = s1*n1*e2 + s2*n2*e1 over g*e1*e2, and the
// only possible common factor of pp(T) with the denominator divides g.
Expr Expr::operator+(const Expr& o) const {
    require_same_ctx(o);
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    const Context& c = *ctx_;
    Poly g = Poly::gcd(den_, o.den_, c);
    Poly e1 = den_.divexact(g, c);
    Poly e2 = o.den_.divexact(g, c);
    Poly t = num_.mul(e2, c).mul_scalar(scale_).add(o.num_.mul(e1, c).mul_scalar(o.scale_), c);
    if (t.is_zero()) return zero(ctx_);
    mpq_class ct = t.content();
    Poly pp = t.divide_scalar(ct);
    Poly h = Poly::gcd(pp, g, c);
    Poly num = h.is_constant() ? std::move(pp) : pp.divexact(h, c);
    Poly den = (h.is_constant() ? g : g.divexact(h, c)).mul(e1, c).mul(e2, c);
    return Expr(ctx_, ct, std::move(num), std::move(den));
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator-() const {
    Expr r = *this;
    r.scale_ = -r.scale_;
    return r;
}

Expr Expr::operator*(const Expr& o) const {
    require_same_ctx(o);
    if (is_zero() || o.is_zero()) return zero(ctx_);
    const Context& c = *ctx_;
    Poly g1 = Poly::gcd(num_, o.den_, c);
    Poly g2 = Poly::gcd(o.num_, den_, c);
    Poly n1 = g1.is_constant() ? num_ : num_.divexact(g1, c);
    Poly n2 = g2.is_constant() ? o.num_ : o.num_.divexact(g2, c);
    Poly d1 = g2.is_constant() ? den_ : den_.divexact(g2, c);
    Poly d2 = g1.is_constant() ? o.den_ : o.den_.divexact(g1, c);
    return Expr(ctx_, scale_ * o.scale_, n1.mul(n2, c), d1.mul(d2, c));
}

Expr Expr::operator/(const Expr& o) const {
    require_same_ctx(o);
    if (o.is_zero()) throw DivisionByZero();
    Expr inv(o.ctx_, 1 / o.scale_, o.den_, o.num_);
    return *this * inv;
}

Expr Expr::pow(int k) const {
    if (k == 0) return one(ctx_);
    if (is_zero()) {
        if (k < 0) throw DivisionByZero();
        return zero(ctx_);
    }
    if (k < 0) {
        Expr inv(ctx_, 1 / scale_, den_, num_);
        return inv.pow(-k);
    }
    const Context& c = *ctx_;
    mpq_class s = 1;
    mpq_class base_s = scale_;
    int kk = k;
    while (kk) {
        if (kk & 1) s *= base_s;
        base_s *= base_s;
        kk >>= 1;
    }
    return Expr(ctx_, s, num_.pow(k, c), den_.pow(k, c));
}

bool Expr::operator==(const Expr& o) const {
    require_same_ctx(o);
    return scale_ == o.scale_ && num_.equal(o.num_) && den_.equal(o.den_);
}

namespace {

// d/dx of a single variable: symbols differentiate formally, atoms by the
// chain rule through their arguments, bumping the matching derivative order.
Expr var_derivative(const CtxPtr& ctx, int id, int wrt) {
    if (!ctx->is_atom(id)) return id == wrt ? Expr::one(ctx) : Expr::zero(ctx);
    const Atom& a = ctx->atom(id);
    Expr total = Expr::zero(ctx);
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        Expr darg = a.args[i].derivative(wrt);
        if (darg.is_zero()) continue;
        std::vector<int> orders = a.orders;
        ++orders[i];
        total = total + Expr::atom(ctx, a.name, std::move(orders), a.args) * darg;
    }
    return total;
}

// Total derivative of a polynomial as an expression: the formal part in the
// symbol plus chain-rule contributions from every atom variable present.
Expr poly_derivative(const Poly& p, const CtxPtr& ctx, int wrt) {
    const Context& c = *ctx;
    Expr result = Expr::fraction(ctx, 1, p.derivative(wrt, c), Poly::constant(1));
    std::vector<int> ids;
    p.collect_vars(ids);
    for (int id : ids) {
        if (!c.is_atom(id)) continue;
        Expr dv = var_derivative(ctx, id, wrt);
        if (dv.is_zero()) continue;
        Expr coeff = Expr::fraction(ctx, 1, p.derivative(id, c), Poly::constant(1));
        result = result + coeff * dv;
    }
    return result;
}

} // namespace

Expr Expr::derivative(int symbol_id) const {
    if (is_zero()) return zero(ctx_);
    Expr n = fraction(ctx_, 1, num_, Poly::constant(1));
    Expr d = fraction(ctx_, 1, den_, Poly::constant(1));
    Expr dn = poly_derivative(num_, ctx_, symbol_id);
    Expr dd = poly_derivative(den_, ctx_, symbol_id);
    Expr s = constant(ctx_, scale_);
    return s * (dn * d - n * dd) / (d * d);
}

Expr Expr::derivative(const std::string& symbol) const {
    auto id = ctx_->find_symbol(symbol);
    if (!id) throw UnknownSymbol(symbol);
    return derivative(*id);
}

Expr Expr::substitute(const std::map<int, Expr>& bindings) const {
    if (is_zero()) return zero(ctx_);
    auto subst_var = [&](int id) -> Expr {
        auto it = bindings.find(id);
        if (it != bindings.end()) return it->second;
        if (ctx_->is_atom(id)) {
            const Atom& a = ctx_->atom(id);
            bool changed = false;
            std::vector<Expr> args;
            args.reserve(a.args.size());
            for (const auto& arg : a.args) {
                args.push_back(arg.substitute(bindings));
                if (!(args.back() == arg)) changed = true;
            }
            if (!changed) return variable(ctx_, id);
            return atom(ctx_, a.name, a.orders, std::move(args));
        }
        return variable(ctx_, id); // unbound symbols pass through
    };
    auto subst_poly = [&](const Poly& p) {
        Expr acc = zero(ctx_);
        for (const auto& t : p.terms()) {
            Expr term = constant(ctx_, t.coeff);
            for (const auto& vp : t.vars) term = term * subst_var(vp.id).pow(vp.exp);
            acc = acc + term;
        }
        return acc;
    };
    return constant(ctx_, scale_) * subst_poly(num_) / subst_poly(den_);
}

namespace {

double eval_var(const Context& ctx, int id, const std::map<int, double>& point,
                const AtomImpls& impls) {
    auto it = point.find(id);
    if (it != point.end()) return it->second;
    if (!ctx.is_atom(id)) throw EvalDomainError("unbound symbol '" + ctx.var_string(id) + "'");
    const Atom& a = ctx.atom(id);
    std::vector<double> args;
    args.reserve(a.args.size());
    for (const auto& arg : a.args) args.push_back(arg.evaluate(point, impls));
    return impls.call(a.name, a.orders, args);
}

double eval_poly(const Poly& p, const Context& ctx, const std::map<int, double>& point,
                 const AtomImpls& impls) {
    double acc = 0.0;
    for (const auto& t : p.terms()) {
        double m = t.coeff.get_d();
        for (const auto& vp : t.vars) m *= std::pow(eval_var(ctx, vp.id, point, impls), vp.exp);
        acc += m;
    }
    return acc;
}

} // namespace

double Expr::evaluate(const std::map<int, double>& point, const AtomImpls& impls) const {
    if (is_zero()) return 0.0;
    double n = eval_poly(num_, *ctx_, point, impls);
    double d = eval_poly(den_, *ctx_, point, impls);
    if (std::abs(d) < 1e-300) throw EvalDomainError("denominator vanishes at sample point");
    return scale_.get_d() * n / d;
}

void Expr::collect_vars(std::vector<int>& ids) const {
    std::vector<int> direct;
    num_.collect_vars(direct);
    den_.collect_vars(direct);
    for (int id : direct) {
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        if (ctx_->is_atom(id))
            for (const auto& arg : ctx_->atom(id).args) arg.collect_vars(ids);
    }
}

bool Expr::depends_on(int id) const {
    std::vector<int> ids;
    collect_vars(ids);
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string poly_string(const Poly& p, const Context& ctx) {
    if (p.is_zero()) return "0";
    // Print terms by ascending total degree; within a degree keep the stored
    // (descending lexicographic) order.
    std::vector<const Term*> order;
    order.reserve(p.terms().size());
    for (const auto& t : p.terms()) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const Term* a, const Term* b) {
        int da = 0, db = 0;
        for (const auto& vp : a->vars) da += vp.exp;
        for (const auto& vp : b->vars) db += vp.exp;
        return da < db;
    });
    std::ostringstream os;
    bool first = true;
    for (const Term* t : order) {
        mpq_class c = t->coeff;
        if (first) {
            if (c < 0) os << '-';
        } else {
            os << (c < 0 ? '-' : '+');
        }
        first = false;
        mpq_class mag = abs(c);
        if (mag != 1 || t->vars.empty()) os << mag.get_str();
        bool need_star = mag != 1 && !t->vars.empty();
        for (const auto& vp : t->vars) {
            if (need_star) os << '*';
            need_star = true;
            os << ctx.var_string(vp.id);
            if (vp.exp > 1) os << '^' << vp.exp;
        }
    }
    return os.str();
}

std::string Expr::str() const {
    if (is_zero()) return "0";
    Poly n = num_.mul_scalar(scale_.get_num());
    Poly d = den_.mul_scalar(scale_.get_den());
    if (d.is_constant() && d.constant_value() == 1) return poly_string(n, *ctx_);
    std::string ns = poly_string(n, *ctx_);
    if (n.terms().size() > 1) ns = "(" + ns + ")";
    std::string ds = poly_string(d, *ctx_);
    const Term& dt = d.terms()[0];
    bool simple = d.terms().size() == 1 &&
                  (dt.vars.empty() || (abs(dt.coeff) == 1 && dt.vars.size() == 1));
    if (!simple || dt.coeff < 0) ds = "(" + ds + ")";
    return ns + "/" + ds;
}

double AtomImpls::call(const std::string& name, const std::vector<int>& orders,
                       const std::vector<double>& args) const {
    auto it = fns.find(name);
    if (it != fns.end()) return it->second(orders, args);
    if (!synthesize_missing) throw MissingAtomImpl(name);
    // Deterministic smooth stand-in derived from the name: a*cos(b*sum + c).
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    double a = 0.5 + static_cast<double>(h % 1000) / 1000.0;
    double b = 0.5 + static_cast<double>((h >> 10) % 1000) / 1000.0;
    double c = static_cast<double>((h >> 20) % 6283) / 1000.0;
    double s = 0.0;
    for (double v : args) s += v;
    int k = 0;
    for (int o : orders) k += o;
    const double half_pi = 1.5707963267948966;
    return a * std::pow(b, k) * std::cos(b * s + c + k * half_pi);
}

AtomFn AtomImpls::builtin(const std::string& name) {
    if (name == "sq") {
        return [](const std::vector<int>& orders, const std::vector<double>& args) {
            int k = orders.at(0);
            double u = args.at(0);
            if (k == 0) return u * u;
            if (k == 1) return 2.0 * u;
            if (k == 2) return 2.0;
            return 0.0;
        };
    }
    if (name == "log") {
        return [](const std::vector<int>& orders, const std::vector<double>& args) {
            int k = orders.at(0);
            double u = args.at(0);
            if (k == 0) {
                if (u <= 0.0) throw EvalDomainError("log of a non-positive value");
                return std::log(u);
            }
            if (u == 0.0) throw EvalDomainError("log derivative at zero");
            double fact = 1.0;
            for (int i = 1; i < k; ++i) fact *= i;
            double sign = (k % 2 == 1) ? 1.0 : -1.0;
            return sign * fact / std::pow(u, k);
        };
    }
    if (name == "exp") {
        return [](const std::vector<int>&, const std::vector<double>& args) {
            return std::exp(args.at(0));
        };
    }
    if (name == "sin") {
        return [](const std::vector<int>& orders, const std::vector<double>& args) {
            const double half_pi = 1.5707963267948966;
            return std::sin(args.at(0) + orders.at(0) * half_pi);
        };
    }
    if (name == "cos") {
        return [](const std::vector<int>& orders, const std::vector<double>& args) {
            const double half_pi = 1.5707963267948966;
            return std::cos(args.at(0) + orders.at(0) * half_pi);
        };
    }
    throw Error("no builtin numeric implementation named '" + name + "'");
}

} // namespace liereduce
