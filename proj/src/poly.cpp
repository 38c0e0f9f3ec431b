#include "liereduce/expr.hpp"

#include <algorithm>
#include <cassert>

namespace liereduce {

namespace {

int monomial_degree(const std::vector<VarPow>& m) {
    int d = 0;
    for (const auto& vp : m) d += vp.exp;
    return d;
}

// Graded lexicographic order by canonical rank; lower rank = more significant.
int monomial_cmp(const std::vector<VarPow>& a, const std::vector<VarPow>& b, const Context& ctx) {
    int da = monomial_degree(a), db = monomial_degree(b);
    if (da != db) return da < db ? -1 : 1;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (i == a.size()) return -1; // b has a further factor: b wins lex
        if (j == b.size()) return 1;
        int ra = ctx.rank(a[i].id), rb = ctx.rank(b[j].id);
        if (ra < rb) return 1;  // a has the more significant variable
        if (ra > rb) return -1;
        if (a[i].exp != b[j].exp) return a[i].exp < b[j].exp ? -1 : 1;
        ++i;
        ++j;
    }
    return 0;
}

std::vector<VarPow> monomial_mul(const std::vector<VarPow>& a, const std::vector<VarPow>& b,
                                 const Context& ctx) {
    std::vector<VarPow> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (i == a.size()) {
            out.push_back(b[j++]);
        } else if (j == b.size()) {
            out.push_back(a[i++]);
        } else {
            int ra = ctx.rank(a[i].id), rb = ctx.rank(b[j].id);
            if (ra == rb) {
                out.push_back({a[i].id, a[i].exp + b[j].exp});
                ++i;
                ++j;
            } else if (ra < rb) {
                out.push_back(a[i++]);
            } else {
                out.push_back(b[j++]);
            }
        }
    }
    return out;
}

bool monomial_divides(const std::vector<VarPow>& d, const std::vector<VarPow>& m) {
    std::size_t j = 0;
    for (const auto& vp : d) {
        while (j < m.size() && m[j].id != vp.id) ++j;
        if (j == m.size() || m[j].exp < vp.exp) return false;
    }
    return true;
}

std::vector<VarPow> monomial_div(const std::vector<VarPow>& m, const std::vector<VarPow>& d) {
    std::vector<VarPow> out;
    std::size_t j = 0;
    for (const auto& vp : m) {
        int e = vp.exp;
        if (j < d.size() && d[j].id == vp.id) {
            e -= d[j].exp;
            ++j;
        }
        if (e > 0) out.push_back({vp.id, e});
    }
    return out;
}

mpz_class mpq_num(const mpq_class& q) { return q.get_num(); }
mpz_class mpq_den(const mpq_class& q) { return q.get_den(); }

} // namespace

Poly Poly::constant(const mpq_class& c) {
    Poly p;
    if (c != 0) p.terms_.push_back({{}, c});
    return p;
}

Poly Poly::variable(int id) {
    Poly p;
    p.terms_.push_back({{{id, 1}}, mpq_class(1)});
    return p;
}

bool Poly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].vars.empty());
}

const mpq_class& Poly::constant_value() const {
    assert(is_constant() && !terms_.empty());
    return terms_[0].coeff;
}

void Poly::sort_terms(const Context& ctx) {
    std::sort(terms_.begin(), terms_.end(), [&](const Term& a, const Term& b) {
        return monomial_cmp(a.vars, b.vars, ctx) > 0;
    });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!merged.empty() && monomial_cmp(merged.back().vars, t.vars, ctx) == 0)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coeff == 0; }),
                 merged.end());
    terms_ = std::move(merged);
}

Poly Poly::add(const Poly& o, const Context& ctx) const {
    Poly r;
    r.terms_.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
        if (i == terms_.size()) {
            r.terms_.push_back(o.terms_[j++]);
        } else if (j == o.terms_.size()) {
            r.terms_.push_back(terms_[i++]);
        } else {
            int c = monomial_cmp(terms_[i].vars, o.terms_[j].vars, ctx);
            if (c > 0) {
                r.terms_.push_back(terms_[i++]);
            } else if (c < 0) {
                r.terms_.push_back(o.terms_[j++]);
            } else {
                mpq_class s = terms_[i].coeff + o.terms_[j].coeff;
                if (s != 0) r.terms_.push_back({terms_[i].vars, s});
                ++i;
                ++j;
            }
        }
    }
    return r;
}

Poly Poly::sub(const Poly& o, const Context& ctx) const { return add(o.neg(), ctx); }

Poly Poly::neg() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

Poly Poly::mul(const Poly& o, const Context& ctx) const {
    Poly r;
    if (is_zero() || o.is_zero()) return r;
    r.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& ta : terms_)
        for (const auto& tb : o.terms_)
            r.terms_.push_back({monomial_mul(ta.vars, tb.vars, ctx), ta.coeff * tb.coeff});
    r.sort_terms(ctx);
    return r;
}

Poly Poly::mul_scalar(const mpq_class& c) const {
    if (c == 0) return Poly();
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff *= c;
    return r;
}

Poly Poly::pow(int k, const Context& ctx) const {
    assert(k >= 0);
    Poly r = Poly::constant(1);
    Poly base = *this;
    while (k > 0) {
        if (k & 1) r = r.mul(base, ctx);
        k >>= 1;
        if (k) base = base.mul(base, ctx);
    }
    return r;
}

Poly Poly::derivative(int id, const Context& ctx) const {
    Poly r;
    for (const auto& t : terms_) {
        for (std::size_t i = 0; i < t.vars.size(); ++i) {
            if (t.vars[i].id != id) continue;
            Term d;
            d.coeff = t.coeff * t.vars[i].exp;
            d.vars = t.vars;
            if (--d.vars[i].exp == 0) d.vars.erase(d.vars.begin() + i);
            r.terms_.push_back(std::move(d));
            break;
        }
    }
    r.sort_terms(ctx);
    return r;
}

int Poly::degree(int id) const {
    int d = 0;
    for (const auto& t : terms_)
        for (const auto& vp : t.vars)
            if (vp.id == id) d = std::max(d, vp.exp);
    return d;
}

int Poly::total_degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, monomial_degree(t.vars));
    return d;
}

bool Poly::contains(int id) const {
    for (const auto& t : terms_)
        for (const auto& vp : t.vars)
            if (vp.id == id) return true;
    return false;
}

void Poly::collect_vars(std::vector<int>& ids) const {
    for (const auto& t : terms_)
        for (const auto& vp : t.vars)
            if (std::find(ids.begin(), ids.end(), vp.id) == ids.end()) ids.push_back(vp.id);
}

mpq_class Poly::content() const {
    if (terms_.empty()) return 0;
    mpz_class num_gcd = 0, den_lcm = 1;
    for (const auto& t : terms_) {
        mpz_class n = mpq_num(t.coeff);
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), n.get_mpz_t());
        mpz_class d = mpq_den(t.coeff);
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), d.get_mpz_t());
    }
    mpq_class c(num_gcd, den_lcm);
    c.canonicalize();
    if (terms_.front().coeff < 0) c = -c;
    return c;
}

Poly Poly::divide_scalar(const mpq_class& c) const {
    assert(c != 0);
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff /= c;
    return r;
}

Poly Poly::divexact(const Poly& d, const Context& ctx) const {
    if (d.is_zero()) throw Error("exact division by zero polynomial");
    if (d.is_constant()) return divide_scalar(d.constant_value());
    Poly rem = *this;
    Poly quo;
    while (!rem.is_zero()) {
        const Term& lr = rem.lead();
        const Term& ld = d.lead();
        if (!monomial_divides(ld.vars, lr.vars)) throw Error("polynomial division is not exact");
        Term qt{monomial_div(lr.vars, ld.vars), lr.coeff / ld.coeff};
        Poly qp;
        qp.terms_.push_back(qt);
        quo.terms_.push_back(std::move(qt));
        rem = rem.sub(qp.mul(d, ctx), ctx);
    }
    quo.sort_terms(ctx);
    return quo;
}

bool Poly::equal(const Poly& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i)
        if (terms_[i].coeff != o.terms_[i].coeff || terms_[i].vars != o.terms_[i].vars)
            return false;
    return true;
}

std::map<int, Poly> Poly::univariate(int v, const Context& ctx) const {
    std::map<int, Poly> coeffs;
    for (const auto& t : terms_) {
        int e = 0;
        Term rest{{}, t.coeff};
        for (const auto& vp : t.vars) {
            if (vp.id == v)
                e = vp.exp;
            else
                rest.vars.push_back(vp);
        }
        coeffs[e].terms_.push_back(std::move(rest));
    }
    for (auto& [e, p] : coeffs) p.sort_terms(ctx);
    return coeffs;
}

Poly Poly::from_univariate(const std::map<int, Poly>& coeffs, int v, const Context& ctx) {
    Poly r;
    for (const auto& [e, p] : coeffs) {
        Poly vp = e == 0 ? Poly::constant(1) : Poly::variable(v).pow(e, ctx);
        r = r.add(p.mul(vp, ctx), ctx);
    }
    return r;
}

Poly Poly::pseudo_rem(const Poly& a, const Poly& b, int v, const Context& ctx) {
    int db = b.degree(v);
    assert(db > 0);
    auto ub = b.univariate(v, ctx);
    const Poly& lc = ub.rbegin()->second;
    Poly rem = a;
    int e = a.degree(v) - db + 1;
    while (!rem.is_zero() && rem.degree(v) >= db) {
        auto ur = rem.univariate(v, ctx);
        int dr = ur.rbegin()->first;
        const Poly& lr = ur.rbegin()->second;
        Poly shift = Poly::variable(v).pow(dr - db, ctx);
        rem = rem.mul(lc, ctx).sub(b.mul(lr, ctx).mul(shift, ctx), ctx);
        --e;
    }
    if (e > 0) rem = rem.mul(lc.pow(e, ctx), ctx);
    return rem;
}

namespace {

// Sign-normalized primitive part (integer coefficients, positive lead).
Poly primitive(const Poly& p) {
    if (p.is_zero()) return p;
    return p.divide_scalar(p.content());
}

// Content of p viewed as univariate in v: gcd of its coefficient polys.
Poly content_in(const Poly& p, int v, const Context& ctx) {
    Poly c;
    for (const auto& [e, coeff] : p.univariate(v, ctx)) {
        c = Poly::gcd(c, coeff, ctx);
        if (c.is_constant()) return Poly::constant(1);
    }
    return c;
}

constexpr std::uint64_t kPrime = (1ull << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kPrime);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, a);
        a = mulmod(a, a);
        e >>= 1;
    }
    return r;
}

std::uint64_t coeff_mod(const mpq_class& q) {
    mpz_class n = q.get_num() % mpz_class(static_cast<unsigned long>(kPrime));
    if (n < 0) n += mpz_class(static_cast<unsigned long>(kPrime));
    std::uint64_t nn = mpz_get_ui(n.get_mpz_t());
    if (q.get_den() == 1) return nn;
    mpz_class d = q.get_den() % mpz_class(static_cast<unsigned long>(kPrime));
    std::uint64_t dd = mpz_get_ui(d.get_mpz_t());
    return mulmod(nn, powmod(dd, kPrime - 2));
}

// Specialize all variables except v at the supplied values and reduce mod p.
// Returns the coefficient array of the resulting univariate polynomial.
std::vector<std::uint64_t> specialize(const Poly& p, int v,
                                      const std::map<int, std::uint64_t>& point) {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(p.degree(v)) + 1, 0);
    for (const auto& t : p.terms()) {
        std::uint64_t m = coeff_mod(t.coeff);
        int e = 0;
        for (const auto& vp : t.vars) {
            if (vp.id == v)
                e = vp.exp;
            else
                m = mulmod(m, powmod(point.at(vp.id), static_cast<std::uint64_t>(vp.exp)));
        }
        out[e] = (out[e] + m) % kPrime;
    }
    while (out.size() > 1 && out.back() == 0) out.pop_back();
    return out;
}

int univariate_gcd_degree(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
    auto trim = [](std::vector<std::uint64_t>& p) {
        while (!p.empty() && p.back() == 0) p.pop_back();
    };
    trim(a);
    trim(b);
    while (!b.empty()) {
        while (a.size() >= b.size() && !a.empty()) {
            std::uint64_t lead = a.back();
            if (lead == 0) {
                a.pop_back();
                continue;
            }
            // scale-free elimination: a = lc(b)*a - lc(a)*x^(da-db)*b
            std::uint64_t lb = b.back();
            std::size_t shift = a.size() - b.size();
            for (auto& c : a) c = mulmod(c, lb);
            for (std::size_t i = 0; i < b.size(); ++i) {
                std::uint64_t sub = mulmod(lead, b[i]);
                std::uint64_t& tgt = a[i + shift];
                tgt = (tgt + kPrime - sub % kPrime) % kPrime;
            }
            trim(a);
        }
        std::swap(a, b);
        trim(b);
    }
    return a.empty() ? -1 : static_cast<int>(a.size()) - 1;
}

// Sound coprimality certificate: if the leading v-coefficients of both inputs
// survive a specialization and the specialized gcd is constant, the true gcd
// has v-degree zero.  Inconclusive otherwise.
bool proven_coprime_in(const Poly& a, const Poly& b, int v, const Context& ctx,
                       const std::vector<int>& other_vars) {
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::map<int, std::uint64_t> point;
        for (int id : other_vars) {
            seed = seed * 6364136223846793005ull + 1442695040888963407ull;
            point[id] = (seed >> 16) % (kPrime - 2) + 1;
        }
        auto ua = specialize(a, v, point);
        auto ub = specialize(b, v, point);
        if (static_cast<int>(ua.size()) - 1 != a.degree(v)) continue; // lead vanished
        if (static_cast<int>(ub.size()) - 1 != b.degree(v)) continue;
        if (univariate_gcd_degree(ua, ub) == 0) return true;
    }
    (void)ctx;
    return false;
}

} // namespace

// Subresultant pseudo-remainder sequence on the chosen main variable.
Poly Poly::gcd_primitive(Poly a, Poly b, const Context& ctx) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_constant() || b.is_constant()) return Poly::constant(1);
    if (a.equal(b)) return a;

    std::vector<int> va, vb, shared_vars;
    a.collect_vars(va);
    b.collect_vars(vb);
    for (int id : va)
        if (std::find(vb.begin(), vb.end(), id) != vb.end()) shared_vars.push_back(id);
    if (shared_vars.empty()) return Poly::constant(1);

    // Main variable: smallest combined degree, ties broken by canonical rank.
    int v = shared_vars.front();
    int best = a.degree(v) + b.degree(v);
    for (int id : shared_vars) {
        int s = a.degree(id) + b.degree(id);
        if (s < best || (s == best && ctx.rank(id) < ctx.rank(v))) {
            best = s;
            v = id;
        }
    }

    std::vector<int> others;
    for (int id : va)
        if (id != v) others.push_back(id);
    for (int id : vb)
        if (id != v && std::find(others.begin(), others.end(), id) == others.end())
            others.push_back(id);

    Poly ca = primitive(content_in(a, v, ctx));
    Poly cb = primitive(content_in(b, v, ctx));
    Poly d = gcd_primitive(ca, cb, ctx);
    Poly pa = ca.is_constant() ? std::move(a) : a.divexact(ca, ctx);
    Poly pb = cb.is_constant() ? std::move(b) : b.divexact(cb, ctx);

    if (proven_coprime_in(pa, pb, v, ctx, others)) return d;

    if (pa.degree(v) < pb.degree(v)) std::swap(pa, pb);
    Poly g = Poly::constant(1);
    Poly h = Poly::constant(1);
    while (true) {
        int delta = pa.degree(v) - pb.degree(v);
        Poly r = pseudo_rem(pa, pb, v, ctx);
        if (r.is_zero()) break;
        if (r.degree(v) == 0) {
            pb = Poly::constant(1);
            break;
        }
        pa = pb;
        Poly divisor = g.mul(h.pow(delta, ctx), ctx);
        pb = divisor.is_constant() && divisor.constant_value() == 1 ? std::move(r)
                                                                    : r.divexact(divisor, ctx);
        g = pa.univariate(v, ctx).rbegin()->second;
        if (delta == 1) {
            h = g;
        } else if (delta > 1) {
            Poly gd = g.pow(delta, ctx);
            h = h.is_constant() && h.constant_value() == 1 ? std::move(gd)
                                                           : gd.divexact(h.pow(delta - 1, ctx), ctx);
        }
    }
    if (pb.is_constant()) return d;
    Poly cpb = content_in(pb, v, ctx);
    if (!cpb.is_constant()) pb = pb.divexact(cpb, ctx);
    return d.mul(primitive(pb), ctx);
}

Poly Poly::gcd(const Poly& a, const Poly& b, const Context& ctx) {
    if (a.is_zero()) return primitive(b);
    if (b.is_zero()) return primitive(a);
    Poly pa = primitive(a), pb = primitive(b);
    if (pa.is_constant() || pb.is_constant()) return Poly::constant(1);

    // Monomial fast path: gcd with a single term is the shared monomial part.
    auto monomial_gcd = [&](const Term& t, const Poly& p) {
        std::vector<VarPow> common = t.vars;
        for (const auto& pt : p.terms()) {
            std::vector<VarPow> next;
            for (const auto& vp : common) {
                for (const auto& ovp : pt.vars) {
                    if (ovp.id == vp.id) {
                        next.push_back({vp.id, std::min(vp.exp, ovp.exp)});
                        break;
                    }
                }
            }
            common = std::move(next);
            if (common.empty()) break;
        }
        Poly g = Poly::constant(1);
        for (const auto& vp : common) g = g.mul(Poly::variable(vp.id).pow(vp.exp, ctx), ctx);
        return g;
    };
    if (pa.terms().size() == 1) return monomial_gcd(pa.terms()[0], pb);
    if (pb.terms().size() == 1) return monomial_gcd(pb.terms()[0], pa);

    std::vector<int> va, vb;
    pa.collect_vars(va);
    pb.collect_vars(vb);
    bool shared = false;
    for (int id : va)
        if (std::find(vb.begin(), vb.end(), id) != vb.end()) shared = true;
    if (!shared) return Poly::constant(1);

    return gcd_primitive(std::move(pa), std::move(pb), ctx);
}

} // namespace liereduce
