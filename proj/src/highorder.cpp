#include "liereduce/highorder.hpp"

#include "liereduce/errors.hpp"
#include "liereduce/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace liereduce {

namespace {

bool references_any(const Expr& e, const std::vector<int>& ids) {
    std::vector<int> seen;
    e.collect_vars(seen);
    for (int id : seen)
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) return true;
    return false;
}

// Truncated total derivative D_k = d/dx_0 + sum_{j=1..k} x_{j+1} d/dx_j on a
// frame whose jet coordinates are the context symbols 0..m in order.
Expr total_derivative(const Expr& e, int k, const CtxPtr& ctx) {
    Expr acc = e.derivative(0);
    for (int j = 1; j <= k; ++j)
        acc = acc + Expr::variable(ctx, j + 1) * e.derivative(j);
    return acc;
}

std::vector<int> jet_ids(int m) {
    std::vector<int> ids(m + 1);
    for (int i = 0; i <= m; ++i) ids[i] = i;
    return ids;
}

void check_jet_frame(const CtxPtr& ctx, int m) {
    if (m < 1) throw PreconditionFailed("order must be at least 1");
    if (ctx->symbol_count() < m + 1)
        throw PreconditionFailed("context declares fewer than " + std::to_string(m + 1) +
                                 " coordinates");
}

std::pair<VectorField, Expr> run_ladder(const Expr& g0, const Expr& g1,
                                        const std::optional<Expr>& lambda, int m) {
    const CtxPtr& ctx = g0.ctx();
    if (g1.ctx() != ctx || (lambda && lambda->ctx() != ctx)) throw ContextMismatch();
    check_jet_frame(ctx, m);
    std::vector<int> upper;
    for (int id = 2; id <= m; ++id) upper.push_back(id);
    if (references_any(g0, upper) || references_any(g1, upper))
        throw DependenceViolation("g0 and g1 may depend on the time and base coordinates only");
    if (lambda) {
        std::vector<int> beyond(upper.begin() + (upper.empty() ? 0 : 1), upper.end());
        if (references_any(*lambda, beyond))
            throw DependenceViolation(
                "lambda may depend on the time, base and first-derivative coordinates only");
    }

    Expr mu = -total_derivative(g0, 1, ctx);
    if (lambda) mu = mu - *lambda * g0;
    ExprVector comps{g0, g1};
    for (int k = 1; k < m; ++k) {
        Expr next = total_derivative(comps[k], k, ctx) + mu * Expr::variable(ctx, k + 1);
        if (lambda) next = next + *lambda * comps[k];
        comps.push_back(next);
    }
    return {VectorField{ctx, jet_ids(m), std::move(comps)}, mu};
}

// Old coordinate -> expression over the new frame, with parameters carried
// across by name.
std::map<int, Expr> pullback_map(const CtxPtr& src, const std::vector<int>& vars,
                                 const std::vector<Expr>& inverse) {
    const CtxPtr& dst = inverse.front().ctx();
    std::map<int, Expr> out;
    for (std::size_t k = 0; k < vars.size(); ++k) out.emplace(vars[k], inverse[k]);
    for (int id = 0; id < src->symbol_count(); ++id) {
        if (out.count(id)) continue;
        const std::string name = src->var_string(id);
        auto slot = dst->find_symbol(name);
        if (!slot) throw UnknownSymbol(name);
        out.emplace(id, Expr::variable(dst, *slot));
    }
    return out;
}

std::uint64_t lcg_next(std::uint64_t& state) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state >> 33;
}

} // namespace

HigherOrderEq HigherOrderEq::make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                                  const std::string& rhs_text) {
    if (coord_names.size() < 2)
        throw PreconditionFailed("need a time coordinate and at least one jet coordinate");
    std::vector<int> vars;
    vars.reserve(coord_names.size());
    for (const auto& name : coord_names) {
        auto id = ctx->find_symbol(name);
        if (!id) throw UnknownSymbol(name);
        vars.push_back(*id);
    }
    Expr rhs = parse(rhs_text, ctx);
    return HigherOrderEq{ctx, std::move(vars), static_cast<int>(coord_names.size()) - 1,
                         std::move(rhs)};
}

VectorField to_first_order(const HigherOrderEq& eq) {
    ExprVector comps{Expr::one(eq.ctx)};
    for (int k = 2; k <= eq.order; ++k) comps.push_back(Expr::variable(eq.ctx, eq.vars[k]));
    comps.push_back(eq.rhs);
    return VectorField{eq.ctx, eq.vars, std::move(comps)};
}

VectorField autonomize(const std::vector<Expr>& q, int time_var) {
    if (q.empty()) throw PreconditionFailed("need at least one state equation");
    const CtxPtr& ctx = q.front().ctx();
    for (const Expr& e : q)
        if (e.ctx() != ctx) throw ContextMismatch();
    std::vector<int> vars{time_var};
    for (int id = 0; id < ctx->symbol_count() && vars.size() < q.size() + 1; ++id)
        if (id != time_var) vars.push_back(id);
    if (vars.size() != q.size() + 1)
        throw PreconditionFailed("context declares fewer symbols than state equations");
    ExprVector comps{Expr::one(ctx)};
    comps.insert(comps.end(), q.begin(), q.end());
    return VectorField{ctx, std::move(vars), std::move(comps)};
}

std::vector<Expr> orbit_equations(const VectorField& f, int pivot) {
    if (pivot < 0 || pivot >= f.dim()) throw PreconditionFailed("pivot index out of range");
    const Expr& p = f.components[pivot];
    if (p.is_zero()) throw ZeroPivot();
    std::vector<Expr> out;
    out.reserve(f.dim() - 1);
    for (int j = 0; j < f.dim(); ++j)
        if (j != pivot) out.push_back(f.components[j] / p);
    return out;
}

std::pair<HigherOrderEq, CoordinateChange> raise_order(const VectorField& Q, const Expr& phi) {
    const CtxPtr& ctx = Q.ctx;
    if (phi.ctx() != ctx) throw ContextMismatch();
    const int m = Q.dim() - 1;
    if (m < 1) throw PreconditionFailed("field must have at least two components");
    if (!(Q.components[0] == Expr::one(ctx)))
        throw PreconditionFailed("field is not autonomized: first component must be 1");

    std::vector<Expr> iter{phi};
    for (int k = 1; k <= m; ++k) iter.push_back(lie_derivative(Q, iter.back()));

    const std::vector<int> state(Q.vars.begin() + 1, Q.vars.end());
    for (int k = 1; k <= m; ++k) {
        ExprVector head(iter.begin(), iter.begin() + k);
        if (rank_generic(jacobian(head, state)) < k) throw DependentDerivatives(k - 1);
    }

    // joint frame holding both the old coordinates and the new jet symbols
    std::vector<std::string> names = ctx->symbol_names();
    std::vector<std::string> ynames;
    for (int k = 1; k <= m; ++k) {
        std::string nm = "y" + std::to_string(k);
        while (std::find(names.begin(), names.end(), nm) != names.end()) nm = "_" + nm;
        names.push_back(nm);
        ynames.push_back(nm);
    }
    CtxPtr joint = Context::make(names);
    std::map<int, Expr> into_joint;
    for (int id = 0; id < ctx->symbol_count(); ++id)
        into_joint.emplace(id, Expr::variable(joint, id));

    std::vector<Expr> eqs;
    eqs.reserve(m);
    for (int k = 0; k < m; ++k)
        eqs.push_back(transport(iter[k], joint, into_joint) - Expr::symbol(joint, ynames[k]));
    Expr target = transport(iter[m], joint, into_joint);

    // isolate each old coordinate from a relation linear in it
    std::vector<int> unsolved = state;
    std::vector<std::pair<int, Expr>> solved;
    std::vector<bool> used(eqs.size(), false);
    for (int round = 0; round < m; ++round) {
        bool found = false;
        for (std::size_t e = 0; e < eqs.size() && !found; ++e) {
            if (used[e]) continue;
            for (std::size_t u = 0; u < unsolved.size() && !found; ++u) {
                const int xj = unsolved[u];
                int deg = 0;
                for (const auto& t : eqs[e].num().terms())
                    for (const auto& vp : t.vars)
                        if (vp.id == xj) deg = std::max(deg, vp.exp);
                if (deg != 1) continue;
                Expr slope =
                    Expr::fraction(joint, 1, eqs[e].num().derivative(xj, *joint), Poly::constant(1));
                if (slope.is_zero()) continue;
                Expr whole = Expr::fraction(joint, 1, eqs[e].num(), Poly::constant(1));
                Expr sol = Expr::variable(joint, xj) - whole / slope;
                std::map<int, Expr> one{{xj, sol}};
                if (!eqs[e].substitute(one).is_zero()) continue; // hidden atom dependence
                for (std::size_t o = 0; o < eqs.size(); ++o)
                    if (!used[o] && o != e) eqs[o] = eqs[o].substitute(one);
                target = target.substitute(one);
                for (auto& [id, ex] : solved) ex = ex.substitute(one);
                solved.emplace_back(xj, sol);
                used[e] = true;
                unsolved.erase(unsolved.begin() + static_cast<std::ptrdiff_t>(u));
                found = true;
            }
        }
        if (!found) {
            std::string msg = "cannot isolate";
            for (int xj : unsolved) msg += " " + joint->var_string(xj);
            msg += "; implicit relations:";
            for (std::size_t e = 0; e < eqs.size(); ++e)
                if (!used[e]) msg += " [" + eqs[e].str() + " = 0]";
            throw InversionUnsupported(msg);
        }
    }
    if (references_any(target, state))
        throw InversionUnsupported("eliminated coordinates persist in the top derivative");

    // clean jet frame: the old coordinate names, parameters appended
    std::vector<std::string> enames;
    for (int v : Q.vars) enames.push_back(ctx->var_string(v));
    for (int id = 0; id < ctx->symbol_count(); ++id)
        if (std::find(Q.vars.begin(), Q.vars.end(), id) == Q.vars.end())
            enames.push_back(ctx->var_string(id));
    CtxPtr ectx = Context::make(enames);
    std::map<int, Expr> to_e;
    to_e.emplace(Q.vars[0], Expr::variable(ectx, 0));
    for (int k = 1; k <= m; ++k)
        to_e.emplace(*joint->find_symbol(ynames[k - 1]), Expr::variable(ectx, k));
    for (int id = 0; id < ctx->symbol_count(); ++id)
        if (std::find(Q.vars.begin(), Q.vars.end(), id) == Q.vars.end())
            to_e.emplace(id, Expr::symbol(ectx, ctx->var_string(id)));

    HigherOrderEq eq{ectx, jet_ids(m), m, transport(target, ectx, to_e)};

    CoordinateChange change;
    change.forward.push_back(Expr::variable(ctx, Q.vars[0]));
    for (int k = 0; k < m; ++k) change.forward.push_back(iter[k]);
    std::vector<Expr> inverse;
    inverse.push_back(Expr::variable(ectx, 0));
    for (std::size_t pos = 1; pos < Q.vars.size(); ++pos) {
        const int xj = Q.vars[pos];
        auto it = std::find_if(solved.begin(), solved.end(),
                               [&](const auto& s) { return s.first == xj; });
        inverse.push_back(transport(it->second, ectx, to_e));
    }
    change.inverse = std::move(inverse);
    return {std::move(eq), std::move(change)};
}

RaiseResult raise_order_auto(const VectorField& Q) {
    const int m = Q.dim() - 1;
    if (m < 1) throw PreconditionFailed("field must have at least two components");
    std::vector<Expr> cands;
    for (int k = 1; k <= m; ++k) cands.push_back(Expr::variable(Q.ctx, Q.vars[k]));
    std::uint64_t state = 0x5bd1e995ull;
    for (int t = 0; t < 3; ++t) {
        Expr acc = Expr::zero(Q.ctx);
        for (int k = 1; k <= m; ++k)
            acc = acc + Expr::integer(Q.ctx, 1 + static_cast<long>(lcg_next(state) % 3)) *
                            Expr::variable(Q.ctx, Q.vars[k]);
        cands.push_back(acc);
    }
    std::optional<DependentDerivatives> last;
    for (const Expr& phi : cands) {
        try {
            auto [eq, change] = raise_order(Q, phi);
            return RaiseResult{std::move(eq), std::move(change), phi};
        } catch (const DependentDerivatives& e) {
            last = e;
        }
    }
    throw *last;
}

HigherOrderEq exceptional_reduce(const VectorField& Q, const Expr& phi, int l) {
    const CtxPtr& ctx = Q.ctx;
    if (phi.ctx() != ctx) throw ContextMismatch();
    const int m = Q.dim() - 1;
    if (l < 1 || l > m) throw PreconditionFailed("dependence level out of range");

    std::vector<Expr> iter{phi};
    for (int k = 1; k <= l; ++k) iter.push_back(lie_derivative(Q, iter.back()));

    // the iterates, with free parameters adjoined as trivially invariant slots
    std::vector<Expr> gens(iter.begin(), iter.begin() + l);
    std::vector<int> params;
    for (int id = 0; id < ctx->symbol_count(); ++id)
        if (std::find(Q.vars.begin(), Q.vars.end(), id) == Q.vars.end()) {
            params.push_back(id);
            gens.push_back(Expr::variable(ctx, id));
        }
    const std::vector<int> state(Q.vars.begin() + 1, Q.vars.end());
    auto inv_map = ReductionMap::from_exprs(ctx, state, gens);
    auto h = express_in_invariants(iter[l], inv_map);
    if (!h)
        throw AnsatzExhausted("order-" + std::to_string(l) +
                              " closure not expressible at degree bound " +
                              std::to_string(default_degree_bound()));

    std::vector<std::string> enames;
    for (int k = 0; k <= l; ++k) enames.push_back(ctx->var_string(Q.vars[k]));
    for (int id : params) enames.push_back(ctx->var_string(id));
    CtxPtr ectx = Context::make(enames);
    std::map<int, Expr> to_e;
    for (int k = 0; k < l; ++k) to_e.emplace(k, Expr::variable(ectx, k + 1));
    for (std::size_t p = 0; p < params.size(); ++p)
        to_e.emplace(l + static_cast<int>(p),
                     Expr::variable(ectx, l + 1 + static_cast<int>(p)));
    return HigherOrderEq{ectx, jet_ids(l), l, transport(*h, ectx, to_e)};
}

std::pair<VectorField, Expr> point_prolong(const Expr& g0, const Expr& g1, int m) {
    return run_ladder(g0, g1, std::nullopt, m);
}

std::pair<VectorField, Expr> lambda_prolong(const Expr& g0, const Expr& g1, const Expr& lambda,
                                            int m) {
    return run_ladder(g0, g1, lambda, m);
}

PipelineResult construct_higher_order(const VectorField& f, const InvolutionSystem& S,
                                      const std::vector<Expr>& coeffs, const Expr& phi,
                                      const std::optional<ReductionMap>& psi,
                                      const std::optional<Expr>& mu) {
    VectorField extended = construct_reducible(f, S, coeffs, /*orbital=*/true);
    Expr tau = extended.components[0];
    if (tau.is_zero()) throw ZeroTimeComponent();
    VectorField normalized = (Expr::one(f.ctx) / tau) * extended;

    auto [eq, change] = raise_order(normalized, phi);
    auto back = pullback_map(f.ctx, f.vars, *change.inverse);

    std::vector<VectorField> gens;
    gens.reserve(S.generators.size());
    for (const auto& g : S.generators) {
        ExprVector comps;
        comps.reserve(change.forward.size());
        for (const Expr& coord : change.forward)
            comps.push_back(transport(lie_derivative(g, coord), eq.ctx, back));
        gens.push_back(VectorField{eq.ctx, eq.vars, std::move(comps)});
    }

    std::vector<Expr> invs;
    std::optional<std::vector<Expr>> reduced;
    std::optional<Expr> factor;
    if (psi) {
        invs.reserve(psi->invariants.size());
        for (const Expr& p : psi->invariants) invs.push_back(transport(p, eq.ctx, back));
        reduced = orbital_reduce(extended, *psi, S, mu);
        if (reduced) {
            if (mu) {
                factor = *mu * tau;
            } else {
                factor = tau / lie_derivative(extended, psi->invariants[0]);
            }
        }
    }

    return PipelineResult{std::move(extended), std::move(normalized),  std::move(eq),
                          std::move(change),   std::move(gens),        std::move(invs),
                          std::move(reduced),  std::move(factor)};
}

Expr compute_lambda(const VectorField& f, const VectorField& g, const Expr& nu,
                    const CoordinateChange& change) {
    if (!change.inverse) throw PreconditionFailed("coordinate change has no inverse");
    if (!(f.components[0] == Expr::one(f.ctx)))
        throw PreconditionFailed("base field must be autonomized: first component must be 1");
    auto alpha = check_orbital_symmetry(f, g);
    if (!alpha) throw PreconditionFailed("g is not an orbital symmetry of the base field");

    Expr denom = Expr::one(f.ctx) + nu * g.components[0];
    if (denom.is_zero()) throw ZeroTimeComponent();
    Expr lam = (lie_derivative(g, nu) - *alpha * nu) / denom;

    // independent path: the g-coefficient of [g,H] decomposed in (H, g)
    VectorField extended = f + nu * g;
    VectorField H = (Expr::one(f.ctx) / extended.components[0]) * extended;
    auto sol = solve_linear(ExprMatrix::from_columns({H.components, g.components}),
                            lie_bracket(g, H).components);
    if (!sol) throw Error("bracket of the symmetry with the normalized field left the span");
    if (!((*sol)[1] == lam)) throw Error("scalar coefficient cross-check failed");

    return transport(lam, change.inverse->front().ctx(),
                     pullback_map(f.ctx, f.vars, *change.inverse));
}

} // namespace liereduce
