#pragma once

#include "liereduce/reduce.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace liereduce {

// A single scalar equation x^(m) = rhs(x_0, x_1, ..., x_m), where x_0 is the
// independent variable and x_{k+1} stands for the k-th derivative of the
// unknown.  `vars` lists the m+1 jet coordinates in that order; any other
// context symbol is treated as a constant parameter.
struct HigherOrderEq {
    CtxPtr ctx;
    std::vector<int> vars;
    int order;
    Expr rhs;

    static HigherOrderEq make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                              const std::string& rhs_text);
};

// Invertible change to jet coordinates.  `forward` gives each new coordinate
// (time first) as an expression in the old frame; `inverse`, when present,
// gives each old coordinate as an expression over the new frame and satisfies
// forward(inverse(y)) = y symbolically.
struct CoordinateChange {
    std::vector<Expr> forward;
    std::optional<std::vector<Expr>> inverse;
};

// Everything produced by the reducible-equation construction pipeline.
struct PipelineResult {
    VectorField extended;            // f + sum(coeff_k * g_k), original frame
    VectorField normalized;          // extended divided by its time component
    HigherOrderEq equation;
    CoordinateChange change;
    std::vector<VectorField> transformed_generators; // over equation.ctx
    std::vector<Expr> transformed_invariants;        // over equation.ctx
    std::optional<std::vector<Expr>> reduced;        // over a fresh w-frame
    std::optional<Expr> time_factor; // mu with reduced_j = mu * X_normalized(psi_j)
};

// The autonomous first-order companion (1, x_2, ..., x_m, rhs).
VectorField to_first_order(const HigherOrderEq& eq);

// Prepends the constant-1 time component; the state frame is taken to be the
// first q.size() declared symbols other than time_var, in declaration order.
VectorField autonomize(const std::vector<Expr>& q, int time_var);

// Ratios f_j / f_pivot for j != pivot, ascending.  Throws ZeroPivot when the
// pivot component vanishes identically.
std::vector<Expr> orbit_equations(const VectorField& f, int pivot);

// Converts an autonomized field into a single equation of order m via the jet
// coordinates y_k = X_Q^{k-1}(phi).  Throws DependentDerivatives(l) when only
// l iterates are functionally independent, and InversionUnsupported when some
// original coordinate cannot be isolated linearly.
std::pair<HigherOrderEq, CoordinateChange> raise_order(const VectorField& Q, const Expr& phi);

// raise_order with the default coordinate ladder: tries each coordinate
// x_1..x_m, then three fixed pseudo-random linear combinations, and returns
// the first non-degenerate choice along with the phi that worked.
struct RaiseResult {
    HigherOrderEq equation;
    CoordinateChange change;
    Expr phi;
};
RaiseResult raise_order_auto(const VectorField& Q);

// Order reduction for the degenerate case: X_Q^l(phi) is a function of the
// first l iterates, so those iterates close into an order-l equation.  Throws
// AnsatzExhausted when the bounded-degree search cannot exhibit the function.
HigherOrderEq exceptional_reduce(const VectorField& Q, const Expr& phi, int l);

// Prolongs the pair (g0, g1), both functions of (x_0, x_1) only, to a field
// (g0, g1, ..., g_m) on the order-m jet frame.  Returns the field and the
// factor mu = -D(g0) appearing in the ladder g_{k+1} = D_k(g_k) + mu x_{k+1}.
std::pair<VectorField, Expr> point_prolong(const Expr& g0, const Expr& g1, int m);

// The lambda-ladder variant: mu = -D(g0) - lambda*g0 and
// g_{k+1} = D_k(g_k) + mu x_{k+1} + lambda g_k.  lambda may depend on
// (x_0, x_1, x_2) only.
std::pair<VectorField, Expr> lambda_prolong(const Expr& g0, const Expr& g1, const Expr& lambda,
                                            int m);

// Full pipeline: extend f by the module generators, normalize time, raise to
// a single higher-order equation via phi, and push the generators and (when
// given) the invariants through the coordinate change.  When psi is supplied
// the reduced system is computed as well; mu, when given, rescales the
// derived directions exactly as in orbital_reduce applied to the extended
// field.
PipelineResult construct_higher_order(const VectorField& f, const InvolutionSystem& S,
                                      const std::vector<Expr>& coeffs, const Expr& phi,
                                      const std::optional<ReductionMap>& psi = std::nullopt,
                                      const std::optional<Expr>& mu = std::nullopt);

// The scalar lambda with [g, H] = a*H + lambda*g for H = (f + nu*g) divided
// by its time component, computed as (X_g(nu) - alpha*nu)/(1 + nu*g_0) and
// rewritten through the inverse coordinate change; cross-checked against the
// brute-force bracket decomposition before returning.
Expr compute_lambda(const VectorField& f, const VectorField& g, const Expr& nu,
                    const CoordinateChange& change);

} // namespace liereduce
