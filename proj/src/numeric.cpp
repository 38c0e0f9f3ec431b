#include "liereduce/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <random>

#include "liereduce/errors.hpp"

namespace liereduce {

namespace {

constexpr double kDenGuard = 1e-6;
constexpr int kMaxRejections = 1000;

// The mt19937_64 output sequence is pinned by the standard; mapping the raw
// draws ourselves keeps the sampled points identical across library versions.
double draw(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Non-atom symbols appearing anywhere in the expressions, ascending.
std::vector<int> bound_symbols(const CtxPtr& ctx, const std::vector<Expr>& exprs) {
    std::vector<int> ids;
    for (const Expr& e : exprs) e.collect_vars(ids);
    std::vector<int> out;
    for (int id : ids)
        if (!ctx->is_atom(id)) out.push_back(id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// One guard expression per non-constant denominator.
std::vector<Expr> denominator_guards(const std::vector<Expr>& exprs) {
    std::vector<Expr> guards;
    for (const Expr& e : exprs) {
        if (e.is_zero()) continue;
        const Poly& d = e.den();
        bool constant = d.terms().size() == 1 && d.terms().front().vars.empty();
        if (!constant) guards.push_back(Expr::fraction(e.ctx(), 1, d, Poly::constant(1)));
    }
    return guards;
}

std::vector<std::map<int, double>> sample_points(const CtxPtr& ctx,
                                                 const std::vector<Expr>& exprs,
                                                 const CheckConfig& cfg,
                                                 const AtomImpls& impls) {
    const std::vector<int> ids = bound_symbols(ctx, exprs);
    const std::vector<Expr> guards = denominator_guards(exprs);
    std::mt19937_64 eng(cfg.rng_seed);
    std::vector<std::map<int, double>> points;
    points.reserve(cfg.num_points);
    int rejections = 0;
    while (static_cast<int>(points.size()) < cfg.num_points) {
        std::map<int, double> pt;
        for (int id : ids) pt[id] = draw(eng, cfg.box_lo, cfg.box_hi);
        bool ok = true;
        for (const Expr& g : guards) {
            try {
                if (std::abs(g.evaluate(pt, impls)) < kDenGuard) {
                    ok = false;
                    break;
                }
            } catch (const EvalDomainError&) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            if (++rejections >= kMaxRejections) throw SamplingExhausted();
            continue;
        }
        points.push_back(std::move(pt));
    }
    return points;
}

// D(psi) f - h(psi) per component, assembled symbolically once.
std::vector<Expr> residual_exprs(const VectorField& f, const ReductionMap& psi,
                                 const std::vector<Expr>& h) {
    if (f.ctx != psi.ctx || f.vars != psi.vars)
        throw PreconditionFailed("field and reducing map use different frames");
    if (h.size() != psi.invariants.size())
        throw PreconditionFailed("target system size differs from the invariant count");
    std::map<int, Expr> into;
    for (std::size_t k = 0; k < psi.invariants.size(); ++k)
        into.emplace(static_cast<int>(k), psi.invariants[k]);
    std::vector<Expr> res;
    res.reserve(h.size());
    for (std::size_t j = 0; j < h.size(); ++j)
        res.push_back(lie_derivative(f, psi.invariants[j]) - transport(h[j], f.ctx, into));
    return res;
}

double max_abs_at(const std::vector<Expr>& exprs, const std::map<int, double>& pt,
                  const AtomImpls& impls) {
    double best = 0.0;
    for (const Expr& e : exprs) best = std::max(best, std::abs(e.evaluate(pt, impls)));
    return best;
}

// Evaluates per-point norms in parallel; exceptions are rethrown in point
// order so both variants fail identically.
double max_over_points(const std::vector<Expr>& exprs,
                       const std::vector<std::map<int, double>>& points,
                       const AtomImpls& impls, bool parallel) {
    if (!parallel) {
        double best = 0.0;
        for (const auto& pt : points) best = std::max(best, max_abs_at(exprs, pt, impls));
        return best;
    }
    const int n = static_cast<int>(points.size());
    std::vector<double> vals(n, 0.0);
    std::vector<std::exception_ptr> errs(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        try {
            vals[i] = max_abs_at(exprs, points[i], impls);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    }
    for (int i = 0; i < n; ++i)
        if (errs[i]) std::rethrow_exception(errs[i]);
    double best = 0.0;
    for (double v : vals) best = std::max(best, v);
    return best;
}

double residual_impl(const VectorField& f, const ReductionMap& psi, const std::vector<Expr>& h,
                     const CheckConfig& cfg, const AtomImpls& impls, bool parallel) {
    cfg.validate();
    std::vector<Expr> res = residual_exprs(f, psi, h);
    auto points = sample_points(f.ctx, res, cfg, impls);
    return max_over_points(res, points, impls, parallel);
}

bool zero_impl(const Expr& e, const CheckConfig& cfg, const AtomImpls& impls, bool parallel) {
    cfg.validate();
    std::vector<Expr> exprs{e};
    auto points = sample_points(e.ctx(), exprs, cfg, impls);
    return max_over_points(exprs, points, impls, parallel) < cfg.tol_pointwise;
}

} // namespace

void CheckConfig::validate() const {
    if (num_points < 1) throw PreconditionFailed("need at least one sample point");
    if (!(box_lo <= box_hi)) throw PreconditionFailed("empty sampling box");
    if (!(tol_pointwise > 0.0) || !(tol_drift > 0.0))
        throw PreconditionFailed("tolerances must be positive");
    if (!(step > 0.0) || !(t_end > 0.0))
        throw PreconditionFailed("step and horizon must be positive");
}

double residual_reduction(const VectorField& f, const ReductionMap& psi,
                          const std::vector<Expr>& h, const CheckConfig& cfg,
                          const AtomImpls& impls) {
    return residual_impl(f, psi, h, cfg, impls, true);
}

double residual_reduction_serial(const VectorField& f, const ReductionMap& psi,
                                 const std::vector<Expr>& h, const CheckConfig& cfg,
                                 const AtomImpls& impls) {
    return residual_impl(f, psi, h, cfg, impls, false);
}

bool probabilistic_zero(const Expr& e, const CheckConfig& cfg, const AtomImpls& impls) {
    return zero_impl(e, cfg, impls, true);
}

bool probabilistic_zero_serial(const Expr& e, const CheckConfig& cfg, const AtomImpls& impls) {
    return zero_impl(e, cfg, impls, false);
}

double drift_first_integral(const VectorField& f, const Expr& rho,
                            const std::vector<double>& start, const CheckConfig& cfg,
                            const AtomImpls& impls) {
    cfg.validate();
    if (static_cast<int>(start.size()) != f.dim())
        throw PreconditionFailed("start state dimension mismatch");
    Trajectory traj = integrate_rk4(f, start, cfg.t_end, cfg.step, impls);
    double ref = 0.0;
    double drift = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        std::map<int, double> pt;
        for (int k = 0; k < f.dim(); ++k) pt[f.vars[k]] = traj.states[i][k];
        double v;
        try {
            v = rho.evaluate(pt, impls);
        } catch (const EvalDomainError& e) {
            throw EvalDomainError(std::string(e.what()) + " at t=" + std::to_string(traj.times[i]));
        }
        if (i == 0)
            ref = v;
        else
            drift = std::max(drift, std::abs(v - ref));
    }
    return drift;
}

} // namespace liereduce
