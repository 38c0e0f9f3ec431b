#include "liereduce/reduce.hpp"

#include <algorithm>
#include <cstdlib>
#include <utility>

namespace liereduce {

namespace {

Poly poly_lcm(const Poly& a, const Poly& b, const Context& ctx) {
    if (a.is_zero() || b.is_zero()) return Poly();
    return a.mul(b.divexact(Poly::gcd(a, b, ctx), ctx), ctx);
}

CtxPtr fresh_invariant_ctx(int r) {
    std::vector<std::string> names;
    names.reserve(r);
    for (int j = 1; j <= r; ++j) names.push_back("w" + std::to_string(j));
    return Context::make(names);
}

VectorField zero_field_like(const VectorField& f) {
    return VectorField{f.ctx, f.vars, ExprVector(f.components.size(), Expr::zero(f.ctx))};
}

Expr transport_poly(const Poly& p, const CtxPtr& src, const CtxPtr& dst,
                    const std::map<int, Expr>& symbol_map, std::map<int, Expr>& cache) {
    Expr acc = Expr::zero(dst);
    for (const Term& t : p.terms()) {
        Expr prod = Expr::constant(dst, t.coeff);
        for (const VarPow& vp : t.vars) {
            auto it = cache.find(vp.id);
            if (it == cache.end()) {
                Expr img;
                if (src->is_atom(vp.id)) {
                    const Atom& a = src->atom(vp.id);
                    std::vector<Expr> dst_args;
                    dst_args.reserve(a.args.size());
                    for (const Expr& arg : a.args)
                        dst_args.push_back(transport(arg, dst, symbol_map));
                    dst->declare_function(a.name, static_cast<int>(a.args.size()));
                    img = Expr::atom(dst, a.name, a.orders, std::move(dst_args));
                } else {
                    auto mit = symbol_map.find(vp.id);
                    if (mit == symbol_map.end())
                        throw Error("transport: no image for symbol '" +
                                    src->symbol_name(vp.id) + "'");
                    img = mit->second;
                }
                it = cache.emplace(vp.id, std::move(img)).first;
            }
            prod = prod * it->second.pow(vp.exp);
        }
        acc = acc + prod;
    }
    return acc;
}

// Exponent vectors over m slots, total degree <= bound, ascending degree so
// low-degree representations are preferred.
void enumerate_degree(int m, int d, int pos, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
    if (pos == m - 1) {
        cur[pos] = d;
        out.push_back(cur);
        return;
    }
    for (int e = d; e >= 0; --e) {
        cur[pos] = e;
        enumerate_degree(m, d - e, pos + 1, cur, out);
    }
}

std::vector<std::vector<int>> monomial_exponents(int m, int bound) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(m, 0);
    for (int d = 0; d <= bound; ++d) enumerate_degree(m, d, 0, cur, out);
    return out;
}

// The invariants, then every function atom occurring in the target expression,
// with matching counterparts over the destination context.
struct AnsatzBasis {
    std::vector<Expr> gens_x;
    std::vector<Expr> gens_w;
};

std::optional<Expr> express_into(const Expr& e, const ReductionMap& psi, int degree_bound,
                                 const CtxPtr& wctx);

bool collect_atom_generators(const Expr& e, const ReductionMap& psi, int degree_bound,
                             const CtxPtr& wctx, AnsatzBasis& basis) {
    std::vector<int> ids;
    e.num().collect_vars(ids);
    e.den().collect_vars(ids);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const CtxPtr& ctx = e.ctx();
    for (int id : ids) {
        if (!ctx->is_atom(id)) continue;
        const Atom& a = ctx->atom(id);
        std::vector<Expr> wargs;
        wargs.reserve(a.args.size());
        for (const Expr& arg : a.args) {
            auto warg = express_into(arg, psi, degree_bound, wctx);
            if (!warg) return false;
            wargs.push_back(*warg);
        }
        wctx->declare_function(a.name, static_cast<int>(a.args.size()));
        basis.gens_x.push_back(Expr::variable(ctx, id));
        basis.gens_w.push_back(Expr::atom(wctx, a.name, a.orders, std::move(wargs)));
    }
    return true;
}

std::optional<Expr> express_into(const Expr& e, const ReductionMap& psi, int degree_bound,
                                 const CtxPtr& wctx) {
    if (e.is_zero()) return Expr::zero(wctx);
    if (e.is_constant()) return Expr::constant(wctx, e.constant_value());
    const CtxPtr& ctx = psi.ctx;
    if (e.ctx() != ctx) throw ContextMismatch();

    AnsatzBasis basis;
    basis.gens_x = psi.invariants;
    for (int j = 0; j < psi.size(); ++j) basis.gens_w.push_back(Expr::variable(wctx, j));
    if (!collect_atom_generators(e, psi, degree_bound, wctx, basis)) return std::nullopt;
    int m = static_cast<int>(basis.gens_x.size());
    if (m == 0) return std::nullopt;

    for (int bound = 1; bound <= degree_bound; ++bound) {
        auto exps = monomial_exponents(m, bound);
        int K = static_cast<int>(exps.size());

        std::vector<Expr> M(K), E(K);
        for (int b = 0; b < K; ++b) {
            Expr prod = Expr::one(ctx);
            for (int i = 0; i < m; ++i)
                if (exps[b][i]) prod = prod * basis.gens_x[i].pow(exps[b][i]);
            M[b] = prod;
            E[b] = e * prod;
        }

        // Clear to a common polynomial denominator; the coefficients of the
        // unknown numerator/denominator then satisfy a homogeneous rational
        // linear system, one equation per surviving monomial.
        Poly L = Poly::constant(1);
        for (const Expr& x : M)
            if (!x.is_zero()) L = poly_lcm(L, x.den(), *ctx);
        for (const Expr& x : E)
            if (!x.is_zero()) L = poly_lcm(L, x.den(), *ctx);
        auto cleared = [&](const Expr& x) -> Poly {
            if (x.is_zero()) return Poly();
            return x.num().mul(L.divexact(x.den(), *ctx), *ctx).mul_scalar(x.scale());
        };
        std::vector<Poly> P(K), Q(K);
        for (int b = 0; b < K; ++b) {
            P[b] = cleared(M[b]);
            Q[b] = cleared(E[b]);
        }

        using MonoKey = std::vector<std::pair<int, int>>;
        auto key_of = [](const Term& t) {
            MonoKey k;
            k.reserve(t.vars.size());
            for (const VarPow& vp : t.vars) k.emplace_back(vp.id, vp.exp);
            return k;
        };
        std::map<MonoKey, int> rows;
        auto note_rows = [&](const Poly& p) {
            for (const Term& t : p.terms()) {
                MonoKey k = key_of(t);
                if (!rows.count(k)) {
                    int r = static_cast<int>(rows.size());
                    rows.emplace(std::move(k), r);
                }
            }
        };
        for (const Poly& p : P) note_rows(p);
        for (const Poly& p : Q) note_rows(p);

        ExprMatrix A(static_cast<int>(rows.size()), 2 * K, ctx);
        for (int b = 0; b < K; ++b) {
            for (const Term& t : P[b].terms())
                A.at(rows[key_of(t)], b) = Expr::constant(ctx, t.coeff);
            for (const Term& t : Q[b].terms())
                A.at(rows[key_of(t)], K + b) = Expr::constant(ctx, -t.coeff);
        }
        auto kernel = kernel_basis(A);
        if (kernel.empty()) continue;

        std::vector<std::vector<mpq_class>> cands;
        for (const auto& v : kernel) {
            std::vector<mpq_class> c(2 * K);
            for (int i = 0; i < 2 * K; ++i)
                c[i] = v[i].is_zero() ? mpq_class(0) : v[i].constant_value();
            cands.push_back(std::move(c));
        }
        // A single kernel vector can encode a syzygy among the generators
        // (denominator vanishing identically); mix the basis deterministically
        // to escape that corner.
        std::size_t nb = cands.size();
        unsigned long lcg = 0x5bd1e995ul;
        for (int t = 0; t < 8 && nb > 1; ++t) {
            std::vector<mpq_class> c(2 * K, 0);
            for (std::size_t v = 0; v < nb; ++v) {
                lcg = lcg * 6364136223846793005ul + 1442695040888963407ul;
                long w = static_cast<long>((lcg >> 33) % 3) + 1;
                for (int i = 0; i < 2 * K; ++i) c[i] += w * cands[v][i];
            }
            cands.push_back(std::move(c));
        }

        for (const auto& c : cands) {
            Expr Nx = Expr::zero(ctx), Dx = Expr::zero(ctx);
            for (int b = 0; b < K; ++b) {
                if (c[b] != 0) Nx = Nx + Expr::constant(ctx, c[b]) * M[b];
                if (c[K + b] != 0) Dx = Dx + Expr::constant(ctx, c[K + b]) * M[b];
            }
            if (Dx.is_zero()) continue;
            if (!(Nx - e * Dx).is_zero()) continue;
            Expr Nw = Expr::zero(wctx), Dw = Expr::zero(wctx);
            for (int b = 0; b < K; ++b) {
                if (c[b] == 0 && c[K + b] == 0) continue;
                Expr prod = Expr::one(wctx);
                for (int i = 0; i < m; ++i)
                    if (exps[b][i]) prod = prod * basis.gens_w[i].pow(exps[b][i]);
                if (c[b] != 0) Nw = Nw + Expr::constant(wctx, c[b]) * prod;
                if (c[K + b] != 0) Dw = Dw + Expr::constant(wctx, c[K + b]) * prod;
            }
            return Nw / Dw;
        }
    }
    return std::nullopt;
}

} // namespace

Expr transport(const Expr& e, const CtxPtr& dst, const std::map<int, Expr>& symbol_map) {
    if (e.ctx() == dst) return e.substitute(symbol_map);
    if (e.is_zero()) return Expr::zero(dst);
    std::map<int, Expr> cache;
    Expr n = transport_poly(e.num(), e.ctx(), dst, symbol_map, cache);
    Expr d = transport_poly(e.den(), e.ctx(), dst, symbol_map, cache);
    return Expr::constant(dst, e.scale()) * n / d;
}

ReductionMap ReductionMap::make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                                const std::vector<std::string>& invariant_texts) {
    std::vector<int> vars;
    vars.reserve(coord_names.size());
    for (const auto& name : coord_names) {
        auto id = ctx->find_symbol(name);
        if (!id) throw UnknownSymbol(name);
        vars.push_back(*id);
    }
    std::vector<Expr> invs;
    invs.reserve(invariant_texts.size());
    for (const auto& text : invariant_texts) invs.push_back(parse(text, ctx));
    return from_exprs(ctx, std::move(vars), std::move(invs));
}

ReductionMap ReductionMap::from_exprs(const CtxPtr& ctx, std::vector<int> vars,
                                      std::vector<Expr> invariants) {
    ReductionMap m;
    m.ctx = ctx;
    m.vars = std::move(vars);
    m.invariants = std::move(invariants);
    m.generic_rank =
        m.invariants.empty() ? 0 : rank_generic(jacobian(m.invariants, m.vars));
    return m;
}

GroupData GroupData::make(std::vector<VectorField> generators, std::vector<Expr> invariant_polys,
                          std::optional<std::vector<VectorField>> columns) {
    if (generators.empty()) throw PreconditionFailed("group data needs at least one generator");
    const CtxPtr ctx = generators.front().ctx;
    const std::vector<int> vars = generators.front().vars;
    const int n = generators.front().dim();
    for (const auto& g : generators) {
        if (!g.same_frame(generators.front())) throw ContextMismatch();
        for (int c = 0; c < n; ++c) {
            Expr rebuilt = Expr::zero(ctx);
            for (int j = 0; j < n; ++j) {
                Expr d = g.components[c].derivative(vars[j]);
                if (!d.is_constant())
                    throw Error("group generator is not a linear field: " + g.str());
                rebuilt = rebuilt + d * Expr::variable(ctx, vars[j]);
            }
            if (!(rebuilt == g.components[c]))
                throw Error("group generator is not a linear field: " + g.str());
        }
    }
    for (const Expr& s : invariant_polys) {
        if (!s.den().is_constant()) throw Error("invariant is not polynomial: " + s.str());
        for (const auto& g : generators)
            if (!lie_derivative(g, s).is_zero())
                throw Error("generator does not annihilate invariant " + s.str());
    }
    GroupData G;
    G.generators = std::move(generators);
    G.invariant_polys = std::move(invariant_polys);
    if (columns) {
        G.gradients = std::move(*columns);
        for (const auto& q : G.gradients)
            if (!q.same_frame(G.generators.front())) throw ContextMismatch();
    } else {
        for (const Expr& s : G.invariant_polys) {
            ExprVector grad;
            grad.reserve(n);
            for (int j = 0; j < n; ++j) grad.push_back(s.derivative(vars[j]));
            G.gradients.push_back(VectorField{ctx, vars, std::move(grad)});
        }
    }
    if (static_cast<int>(G.generators.size() + G.gradients.size()) != n)
        throw Error("assembled columns do not form a square matrix");
    std::vector<ExprVector> cols;
    for (const auto& g : G.generators) cols.push_back(g.components);
    for (const auto& q : G.gradients) cols.push_back(q.components);
    G.theta = det(ExprMatrix::from_columns(cols));
    if (G.theta.is_zero())
        throw Error("assembled columns are generically singular (theta = 0)");
    return G;
}

bool check_symmetry(const VectorField& f, const VectorField& g) {
    return lie_bracket(g, f).is_zero();
}

std::optional<Expr> check_orbital_symmetry(const VectorField& f, const VectorField& g) {
    VectorField b = lie_bracket(g, f);
    auto sol = solve_linear(ExprMatrix::from_columns({f.components}), b.components);
    if (!sol) return std::nullopt;
    return (*sol)[0];
}

InvolutionSystem build_involution(const std::vector<VectorField>& G) {
    if (G.empty()) throw PreconditionFailed("involution system needs at least one generator");
    const CtxPtr& ctx = G.front().ctx;
    for (const auto& g : G)
        if (!g.same_frame(G.front())) throw ContextMismatch();
    const int s = static_cast<int>(G.size());
    std::vector<ExprVector> cols;
    cols.reserve(s);
    for (const auto& g : G) cols.push_back(g.components);
    ExprMatrix M = ExprMatrix::from_columns(cols);

    InvolutionSystem S;
    S.generators = G;
    S.closure_coeffs.assign(
        s, std::vector<std::vector<Expr>>(s, std::vector<Expr>(s, Expr::zero(ctx))));
    for (int i = 0; i < s; ++i) {
        for (int j = i + 1; j < s; ++j) {
            VectorField b = lie_bracket(G[i], G[j]);
            auto c = solve_linear(M, b.components);
            if (!c) throw NotInInvolution(i, j, b.str());
            for (int k = 0; k < s; ++k) {
                S.closure_coeffs[i][j][k] = (*c)[k];
                S.closure_coeffs[j][i][k] = -(*c)[k];
            }
        }
    }
    S.generic_rank = rank_generic(M);
    return S;
}

bool check_common_invariants(const InvolutionSystem& S, const ReductionMap& psi,
                             std::string* witness) {
    for (std::size_t i = 0; i < S.generators.size(); ++i) {
        if (S.generators[i].ctx != psi.ctx || S.generators[i].vars != psi.vars)
            throw ContextMismatch();
        for (std::size_t j = 0; j < psi.invariants.size(); ++j) {
            Expr e = lie_derivative(S.generators[i], psi.invariants[j]);
            if (!e.is_zero()) {
                if (witness)
                    *witness = "X_g" + std::to_string(i + 1) + "(psi" + std::to_string(j + 1) +
                               ") = " + e.str();
                return false;
            }
        }
    }
    const int expected = psi.dim() - S.generic_rank;
    if (psi.generic_rank != expected) {
        if (witness)
            *witness = "rank defect: rank(psi) = " + std::to_string(psi.generic_rank) +
                       ", expected " + std::to_string(expected);
        return false;
    }
    return true;
}

std::optional<Decomposition> module_decompose(const VectorField& v, const InvolutionSystem& S,
                                              const std::optional<VectorField>& adjoin_f) {
    std::vector<ExprVector> cols;
    if (adjoin_f) cols.push_back(adjoin_f->components);
    for (const auto& g : S.generators) cols.push_back(g.components);
    Decomposition d;
    if (cols.empty()) {
        if (!v.is_zero()) return std::nullopt;
        d.residual_zero = true;
        return d;
    }
    auto c = solve_linear(ExprMatrix::from_columns(cols), v.components);
    if (!c) return std::nullopt;
    std::size_t base = 0;
    if (adjoin_f) {
        d.f_coefficient = (*c)[0];
        base = 1;
    }
    d.module_coefficients.assign(c->begin() + base, c->end());
    VectorField acc = zero_field_like(v);
    if (adjoin_f) acc = acc + (*d.f_coefficient) * (*adjoin_f);
    for (std::size_t k = 0; k < S.generators.size(); ++k)
        acc = acc + d.module_coefficients[k] * S.generators[k];
    d.residual_zero = (acc == v);
    return d;
}

int default_degree_bound() {
    if (const char* s = std::getenv("LIEREDUCE_DEGREE_BOUND")) {
        int v = std::atoi(s);
        if (v >= 1) return v;
    }
    return 4;
}

std::optional<Expr> express_in_invariants(const Expr& e, const ReductionMap& psi,
                                          int degree_bound) {
    if (degree_bound < 1) throw PreconditionFailed("degree bound must be >= 1");
    return express_into(e, psi, degree_bound, fresh_invariant_ctx(psi.size()));
}

ReduceReport check_reducible(const VectorField& f, const ReductionMap& psi,
                             const InvolutionSystem& S,
                             const std::optional<std::vector<Expr>>& h) {
    ReduceReport rep;
    std::vector<Expr> d;
    d.reserve(psi.invariants.size());
    for (const Expr& p : psi.invariants) d.push_back(lie_derivative(f, p));

    if (h) {
        if (h->size() != psi.invariants.size())
            throw PreconditionFailed("reduced right-hand side has wrong length");
        std::map<int, Expr> to_source;
        for (int j = 0; j < psi.size(); ++j) to_source.emplace(j, psi.invariants[j]);
        rep.reducible = true;
        for (std::size_t j = 0; j < h->size(); ++j) {
            Expr residual = d[j] - transport((*h)[j], psi.ctx, to_source);
            rep.residuals.push_back(residual);
            if (!residual.is_zero()) {
                rep.reducible = false;
                rep.witnesses.push_back(residual);
            }
        }
        if (rep.reducible) {
            rep.h = *h;
            rep.h_explicit = true;
        }
        return rep;
    }

    for (const auto& g : S.generators)
        for (const Expr& dj : d) {
            Expr w = lie_derivative(g, dj);
            if (!w.is_zero()) rep.witnesses.push_back(w);
        }
    rep.reducible = rep.witnesses.empty();
    if (!rep.reducible) return rep;

    rep.trivial = f.is_zero() || (S.size() > 0 && module_decompose(f, S).has_value());

    CtxPtr wctx = fresh_invariant_ctx(psi.size());
    const int bound = default_degree_bound();
    std::vector<Expr> hs;
    hs.reserve(d.size());
    bool all_found = true;
    for (const Expr& dj : d) {
        auto hw = express_into(dj, psi, bound, wctx);
        if (!hw) {
            all_found = false;
            break;
        }
        hs.push_back(*hw);
    }
    if (all_found) {
        rep.h_explicit = true;
        rep.h = std::move(hs);
    }
    return rep;
}

std::optional<std::vector<Expr>> orbital_reduce(const VectorField& f, const ReductionMap& psi,
                                                const InvolutionSystem& S,
                                                const std::optional<Expr>& mu) {
    std::vector<Expr> d;
    d.reserve(psi.invariants.size());
    for (const Expr& p : psi.invariants) d.push_back(lie_derivative(f, p));

    std::vector<Expr> target;
    target.reserve(d.size());
    if (mu) {
        for (const Expr& dj : d) target.push_back(*mu * dj);
    } else {
        if (d.empty()) return std::vector<Expr>{};
        if (d[0].is_zero()) throw DegenerateDirection();
        target.push_back(Expr::one(psi.ctx));
        for (std::size_t j = 1; j < d.size(); ++j) target.push_back(d[j] / d[0]);
    }
    for (const Expr& t : target)
        for (const auto& g : S.generators)
            if (!lie_derivative(g, t).is_zero()) throw NotOrbitallyReducible(t.str());

    CtxPtr wctx = fresh_invariant_ctx(psi.size());
    const int bound = default_degree_bound();
    std::vector<Expr> out;
    out.reserve(target.size());
    for (const Expr& t : target) {
        auto hw = express_into(t, psi, bound, wctx);
        if (!hw) return std::nullopt;
        out.push_back(*hw);
    }
    return out;
}

VectorField construct_reducible(const VectorField& f, const InvolutionSystem& S,
                                const std::vector<Expr>& coeffs, bool orbital) {
    if (coeffs.size() != S.generators.size())
        throw PreconditionFailed("need one coefficient per generator");
    for (std::size_t i = 0; i < S.generators.size(); ++i) {
        if (orbital) {
            if (!check_orbital_symmetry(f, S.generators[i]))
                throw PreconditionFailed("generator g" + std::to_string(i + 1) +
                                         " is not an orbital symmetry of the base field");
        } else if (!check_symmetry(f, S.generators[i])) {
            throw PreconditionFailed("generator g" + std::to_string(i + 1) +
                                     " is not a symmetry of the base field: [g,f] = " +
                                     lie_bracket(S.generators[i], f).str());
        }
    }
    VectorField fstar = f;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        fstar = fstar + coeffs[i] * S.generators[i];
    for (const auto& g : S.generators) {
        auto dec = module_decompose(lie_bracket(g, fstar), S, fstar);
        if (!dec || !dec->residual_zero)
            throw Error("constructed field fails the bracket relation against the module");
    }
    return fstar;
}

bool verify_split(const VectorField& f_star, const VectorField& g, const Expr& rho,
                  bool orbital) {
    VectorField f = f_star - rho * g;
    if (!orbital) return lie_bracket(g, f).is_zero();
    return check_orbital_symmetry(f, g).has_value();
}

InvolutionSystem kernel_involution_from_map(const ReductionMap& psi) {
    if (psi.generic_rank == 0) throw RankDeficient("invariant map has generic rank 0");
    auto kernel = kernel_basis(jacobian(psi.invariants, psi.vars));
    if (kernel.empty()) return InvolutionSystem{};
    std::vector<VectorField> gens;
    gens.reserve(kernel.size());
    for (auto& v : kernel) gens.push_back(VectorField{psi.ctx, psi.vars, std::move(v)});
    return build_involution(gens);
}

std::optional<GroupSplit> group_decompose(const VectorField& f, const GroupData& G) {
    if (G.theta.is_zero()) return std::nullopt;
    std::vector<ExprVector> cols;
    for (const auto& g : G.generators) cols.push_back(g.components);
    for (const auto& q : G.gradients) cols.push_back(q.components);
    auto c = solve_linear(ExprMatrix::from_columns(cols), f.components);
    if (!c) return std::nullopt;
    GroupSplit split;
    split.alphas.assign(c->begin(), c->begin() + G.generators.size());
    split.betas.assign(c->begin() + G.generators.size(), c->end());
    VectorField acc = zero_field_like(f);
    for (std::size_t i = 0; i < G.generators.size(); ++i)
        acc = acc + split.alphas[i] * G.generators[i];
    for (std::size_t j = 0; j < G.gradients.size(); ++j)
        acc = acc + split.betas[j] * G.gradients[j];
    if (!(acc == f)) throw Error("group decomposition failed recombination");
    return split;
}

bool check_group_reducible(const VectorField& f, const GroupData& G, bool orbital) {
    auto split = group_decompose(f, G);
    if (!split) throw PreconditionFailed("group decomposition failed");
    if (!orbital) {
        for (const Expr& beta : split->betas)
            for (const auto& B : G.generators)
                if (!lie_derivative(B, beta).is_zero()) return false;
        return true;
    }
    int k = -1;
    for (std::size_t j = 0; j < split->betas.size(); ++j)
        if (!split->betas[j].is_zero()) {
            k = static_cast<int>(j);
            break;
        }
    if (k < 0) return true;
    for (const Expr& beta : split->betas) {
        Expr ratio = beta / split->betas[k];
        for (const auto& B : G.generators)
            if (!lie_derivative(B, ratio).is_zero()) return false;
    }
    return true;
}

} // namespace liereduce
