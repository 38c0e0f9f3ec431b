#include "liereduce/field.hpp"

#include <cmath>
#include <sstream>

namespace liereduce {

VectorField VectorField::make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                              const std::vector<std::string>& component_texts) {
    if (coord_names.size() != component_texts.size())
        throw Error("coordinate and component counts differ");
    VectorField v;
    v.ctx = ctx;
    for (const auto& n : coord_names) {
        auto id = ctx->find_symbol(n);
        if (!id) throw UnknownSymbol(n);
        v.vars.push_back(*id);
    }
    for (const auto& t : component_texts) v.components.push_back(parse(t, ctx));
    return v;
}

bool VectorField::is_zero() const {
    for (const auto& c : components)
        if (!c.is_zero()) return false;
    return true;
}

VectorField VectorField::operator+(const VectorField& o) const {
    if (!same_frame(o)) throw ContextMismatch();
    VectorField r = *this;
    for (std::size_t i = 0; i < components.size(); ++i)
        r.components[i] = components[i] + o.components[i];
    return r;
}

VectorField VectorField::operator-(const VectorField& o) const { return *this + (-o); }

VectorField VectorField::operator-() const {
    VectorField r = *this;
    for (auto& c : r.components) c = -c;
    return r;
}

VectorField operator*(const Expr& s, const VectorField& v) {
    VectorField r = v;
    for (auto& c : r.components) c = s * c;
    return r;
}

bool VectorField::operator==(const VectorField& o) const {
    if (!same_frame(o)) return false;
    for (std::size_t i = 0; i < components.size(); ++i)
        if (!(components[i] == o.components[i])) return false;
    return true;
}

std::string VectorField::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i) os << ", ";
        os << components[i].str();
    }
    os << ')';
    return os.str();
}

Expr lie_derivative(const VectorField& f, const Expr& e) {
    if (f.ctx != e.ctx()) throw ContextMismatch();
    Expr acc = Expr::zero(f.ctx);
    for (int i = 0; i < f.dim(); ++i) {
        if (f.components[i].is_zero()) continue;
        acc = acc + e.derivative(f.vars[i]) * f.components[i];
    }
    return acc;
}

VectorField lie_bracket(const VectorField& g, const VectorField& f) {
    if (!g.same_frame(f)) throw ContextMismatch();
    VectorField r = g;
    for (int i = 0; i < g.dim(); ++i)
        r.components[i] = lie_derivative(g, f.components[i]) - lie_derivative(f, g.components[i]);
    return r;
}

Expr iterated_derivative(const VectorField& f, const Expr& e, int k) {
    if (k < 0) throw Error("iterated derivative order must be nonnegative");
    Expr r = e;
    for (int i = 0; i < k; ++i) r = lie_derivative(f, r);
    return r;
}

ExprMatrix jacobian(const ExprVector& psi, const std::vector<int>& vars) {
    if (psi.empty()) throw Error("jacobian of an empty map");
    ExprMatrix m(static_cast<int>(psi.size()), static_cast<int>(vars.size()), psi.front().ctx());
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = psi[i].derivative(vars[j]);
    return m;
}

Trajectory integrate_rk4(const VectorField& f, const std::vector<double>& x0, double t_end,
                         double step, const AtomImpls& impls) {
    if (step <= 0.0) throw Error("integration step must be positive");
    if (static_cast<int>(x0.size()) != f.dim()) throw Error("initial state dimension mismatch");
    long n = std::lround(t_end / step);
    if (n < 1) n = 1;
    double h = t_end / static_cast<double>(n);

    auto rhs = [&](const std::vector<double>& x, double t) {
        std::map<int, double> pt;
        for (int i = 0; i < f.dim(); ++i) pt[f.vars[i]] = x[i];
        std::vector<double> dx(f.dim());
        try {
            for (int i = 0; i < f.dim(); ++i) dx[i] = f.components[i].evaluate(pt, impls);
        } catch (const EvalDomainError& e) {
            throw EvalDomainError(std::string(e.what()) + " at t=" + std::to_string(t));
        }
        return dx;
    };

    Trajectory traj;
    std::vector<double> x = x0;
    std::vector<double> comp(x.size(), 0.0); // compensated accumulation per component
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (long s = 0; s < n; ++s) {
        double t = h * static_cast<double>(s);
        auto k1 = rhs(x, t);
        std::vector<double> tmp(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        auto k2 = rhs(tmp, t + 0.5 * h);
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        auto k3 = rhs(tmp, t + 0.5 * h);
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + h * k3[i];
        auto k4 = rhs(tmp, t + h);
        for (std::size_t i = 0; i < x.size(); ++i) {
            double inc = h * ((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
            double y = inc - comp[i];
            double nx = x[i] + y;
            comp[i] = (nx - x[i]) - y;
            x[i] = nx;
        }
        traj.times.push_back(h * static_cast<double>(s + 1));
        traj.states.push_back(x);
    }
    return traj;
}

} // namespace liereduce
