#pragma once

#include <string>
#include <vector>

#include "liereduce/linalg.hpp"

namespace liereduce {

// Autonomous vector field on coordinates drawn from a shared context.  The
// context may hold extra symbols (constants); `vars` lists the coordinates.
struct VectorField {
    CtxPtr ctx;
    std::vector<int> vars;
    ExprVector components;

    int dim() const { return static_cast<int>(vars.size()); }

    static VectorField make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                            const std::vector<std::string>& component_texts);

    bool is_zero() const;
    bool same_frame(const VectorField& o) const { return ctx == o.ctx && vars == o.vars; }

    VectorField operator+(const VectorField& o) const;
    VectorField operator-(const VectorField& o) const;
    VectorField operator-() const;
    friend VectorField operator*(const Expr& s, const VectorField& v);
    bool operator==(const VectorField& o) const;

    std::string str() const; // "(c1, c2, ...)"
};

// X_f(e) = sum_i f_i * de/dx_i
Expr lie_derivative(const VectorField& f, const Expr& e);

// [g,f] = Df.g - Dg.f, so that X_[g,f] = X_g X_f - X_f X_g.
VectorField lie_bracket(const VectorField& g, const VectorField& f);

Expr iterated_derivative(const VectorField& f, const Expr& e, int k);

// r x n matrix of partials of psi with respect to vars.
ExprMatrix jacobian(const ExprVector& psi, const std::vector<int>& vars);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

// Classical fixed-step RK4 from t=0 to t_end (step adjusted to divide t_end).
Trajectory integrate_rk4(const VectorField& f, const std::vector<double>& x0, double t_end,
                         double step, const AtomImpls& impls);

} // namespace liereduce
