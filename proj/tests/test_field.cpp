#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "liereduce/field.hpp"

using namespace liereduce;

namespace {

Expr P(const CtxPtr& ctx, const std::string& s) { return parse(s, ctx); }

VectorField random_field(const CtxPtr& ctx, const std::vector<std::string>& names,
                         std::mt19937& rng) {
    std::uniform_int_distribution<int> coeff(-2, 2);
    std::uniform_int_distribution<int> var(0, static_cast<int>(names.size()) - 1);
    std::vector<std::string> comps;
    VectorField v;
    v.ctx = ctx;
    for (const auto& n : names) v.vars.push_back(*ctx->find_symbol(n));
    for (std::size_t i = 0; i < names.size(); ++i) {
        Expr acc = Expr::zero(ctx);
        std::uniform_int_distribution<int> terms(1, 3);
        int t = terms(rng);
        for (int k = 0; k < t; ++k) {
            Expr term = Expr::integer(ctx, coeff(rng));
            if (rng() % 2) term = term * Expr::variable(ctx, v.vars[var(rng)]);
            if (rng() % 3 == 0) term = term * Expr::variable(ctx, v.vars[var(rng)]);
            acc = acc + term;
        }
        v.components.push_back(acc);
    }
    return v;
}

Expr random_scalar(const CtxPtr& ctx, const std::vector<int>& vars, std::mt19937& rng) {
    std::uniform_int_distribution<int> coeff(-2, 2);
    std::uniform_int_distribution<int> var(0, static_cast<int>(vars.size()) - 1);
    Expr acc = Expr::integer(ctx, coeff(rng));
    for (int k = 0; k < 3; ++k) {
        Expr term = Expr::integer(ctx, coeff(rng));
        term = term * Expr::variable(ctx, vars[var(rng)]);
        if (rng() % 2) term = term * Expr::variable(ctx, vars[var(rng)]);
        acc = acc + term;
    }
    return acc;
}

} // namespace

TEST_CASE("lie_derivative basics") {
    auto ctx = Context::make({"x1", "x2", "x3"});
    auto g = VectorField::make(ctx, {"x1", "x2", "x3"}, {"x2", "-x1", "0"});
    CHECK(lie_derivative(g, P(ctx, "x1^2+x2^2")).is_zero());
    CHECK(lie_derivative(g, P(ctx, "5")).is_zero());
}

TEST_CASE("lie_derivative: rational invariants of the scaled system") {
    // Hhat = f + nu*g with general scalar nu(x0,x1,x2) and opaque gamma.
    auto ctx = Context::make({"x0", "x1", "x2"});
    ctx->declare_function("gamma", 1);
    ctx->declare_function("nu", 3);
    auto hhat = VectorField::make(ctx, {"x0", "x1", "x2"},
                                  {"1+nu(x0,x1,x2)*x0", "x2+nu(x0,x1,x2)*x1", "gamma(x2)/x1"});
    Expr s1 = P(ctx, "x1/x0");
    Expr s2 = P(ctx, "x2");
    Expr lhs1 = P(ctx, "x0") * lie_derivative(hhat, s1);
    CHECK((lhs1 - (s2 - s1)).is_zero());
    Expr lhs2 = P(ctx, "x0") * lie_derivative(hhat, s2);
    CHECK((lhs2 - P(ctx, "gamma(x2)*x0/x1")).is_zero());
}

TEST_CASE("lie_bracket pinned values") {
    auto ctx3 = Context::make({"x0", "x1", "x2"});
    auto f = VectorField::make(ctx3, {"x0", "x1", "x2"}, {"1", "x2", "0"});
    auto g = VectorField::make(ctx3, {"x0", "x1", "x2"}, {"x2", "x1", "x2"});
    CHECK(lie_bracket(g, f).is_zero());
    CHECK(lie_bracket(f, f).is_zero());

    auto ctx4 = Context::make({"x0", "x1", "x2", "x3"});
    auto f4 = VectorField::make(ctx4, {"x0", "x1", "x2", "x3"}, {"1", "x2", "x3", "0"});
    auto g1 = VectorField::make(ctx4, {"x0", "x1", "x2", "x3"}, {"x0", "x1", "0", "-x3"});
    auto g2 = VectorField::make(ctx4, {"x0", "x1", "x2", "x3"}, {"0", "x1", "x2", "x3"});
    CHECK(lie_bracket(g1, f4) == -f4); // the fixed convention gives -f here
    CHECK(lie_bracket(g2, f4).is_zero());
    CHECK(lie_bracket(g1, g2).is_zero());
}

TEST_CASE("iterated_derivative") {
    auto ctx = Context::make({"x0", "x1", "x2"});
    Expr e = P(ctx, "x1*x2");
    auto f = VectorField::make(ctx, {"x0", "x1", "x2"}, {"1", "x2", "0"});
    CHECK(iterated_derivative(f, e, 0) == e);

    // H for the second-order example with nu = x1.
    auto h = VectorField::make(
        ctx, {"x0", "x1", "x2"},
        {"1", "(x2+x1^2)/(1+x1*x2)", "x1*x2/(1+x1*x2)"});
    CHECK(iterated_derivative(h, P(ctx, "x1"), 1) == P(ctx, "(x2+x1^2)/(1+x1*x2)"));

    // Time-led autonomized chain: coordinates (z0,z1,z2), second derivative
    // slot held by the extra symbol z3.
    auto zctx = Context::make({"z0", "z1", "z2", "z3"});
    auto q = VectorField::make(zctx, {"z0", "z1", "z2"}, {"1", "z2", "z3"});
    CHECK(iterated_derivative(q, P(zctx, "z1"), 2) == P(zctx, "z3"));
}

TEST_CASE("jacobian") {
    auto ctx = Context::make({"x0", "x1", "x2", "x3"});
    std::vector<int> v123{*ctx->find_symbol("x1"), *ctx->find_symbol("x2"),
                          *ctx->find_symbol("x3")};
    auto j = jacobian({P(ctx, "x1^2+x2^2"), P(ctx, "x3")}, v123);
    CHECK(j.at(0, 0) == P(ctx, "2*x1"));
    CHECK(j.at(0, 1) == P(ctx, "2*x2"));
    CHECK(j.at(0, 2).is_zero());
    CHECK(j.at(1, 0).is_zero());
    CHECK(j.at(1, 1).is_zero());
    CHECK(j.at(1, 2) == Expr::one(ctx));

    std::vector<int> v0123{0, 1, 2, 3};
    auto j2 = jacobian({P(ctx, "x0*x2/x1"), P(ctx, "x0^2*x3/x1")}, v0123);
    CHECK(j2.rows == 2);
    CHECK(j2.cols == 4);
    CHECK(j2.at(0, 1) == P(ctx, "-x0*x2/x1^2"));

    auto ctx1 = Context::make({"x1"});
    auto j3 = jacobian({P(ctx1, "x1")}, {0});
    CHECK(j3.at(0, 0) == Expr::one(ctx1));
}

TEST_CASE("bracket antisymmetry on random pairs") {
    std::mt19937 rng(21);
    for (int n = 2; n <= 4; ++n) {
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
        auto ctx = Context::make(names);
        for (int trial = 0; trial < 34; ++trial) {
            auto f = random_field(ctx, names, rng);
            auto g = random_field(ctx, names, rng);
            CHECK((lie_bracket(f, g) + lie_bracket(g, f)).is_zero());
        }
    }
}

TEST_CASE("Jacobi identity on random triples") {
    std::mt19937 rng(22);
    std::vector<std::string> names{"x0", "x1", "x2"};
    auto ctx = Context::make(names);
    for (int trial = 0; trial < 50; ++trial) {
        auto f = random_field(ctx, names, rng);
        auto g = random_field(ctx, names, rng);
        auto h = random_field(ctx, names, rng);
        auto sum = lie_bracket(f, lie_bracket(g, h)) + lie_bracket(g, lie_bracket(h, f)) +
                   lie_bracket(h, lie_bracket(f, g));
        CHECK(sum.is_zero());
    }
}

TEST_CASE("operator identity pins the bracket sign") {
    std::mt19937 rng(23);
    std::vector<std::string> names{"x0", "x1", "x2"};
    auto ctx = Context::make(names);
    std::vector<int> vars{0, 1, 2};
    for (int trial = 0; trial < 50; ++trial) {
        auto f = random_field(ctx, names, rng);
        auto g = random_field(ctx, names, rng);
        Expr phi = random_scalar(ctx, vars, rng);
        Expr lhs = lie_derivative(lie_bracket(g, f), phi);
        Expr rhs = lie_derivative(g, lie_derivative(f, phi)) -
                   lie_derivative(f, lie_derivative(g, phi));
        CHECK((lhs - rhs).is_zero());
    }
}

TEST_CASE("Leibniz rule") {
    std::mt19937 rng(24);
    std::vector<std::string> names{"x0", "x1", "x2"};
    auto ctx = Context::make(names);
    std::vector<int> vars{0, 1, 2};
    for (int trial = 0; trial < 100; ++trial) {
        auto f = random_field(ctx, names, rng);
        Expr a = random_scalar(ctx, vars, rng);
        Expr b = random_scalar(ctx, vars, rng);
        CHECK((lie_derivative(f, a * b) - a * lie_derivative(f, b) - b * lie_derivative(f, a))
                  .is_zero());
    }
}

TEST_CASE("RK4: exact on constant fields, accurate on z' = -z^2") {
    auto ctx = Context::make({"z"});
    AtomImpls impls;
    auto one = VectorField::make(ctx, {"z"}, {"1"});
    auto traj = integrate_rk4(one, {0.0}, 1.0, 0.1, impls);
    CHECK(traj.states.back()[0] == 1.0);
    CHECK(traj.times.size() == 11);

    auto decay = VectorField::make(ctx, {"z"}, {"-z^2"});
    auto t2 = integrate_rk4(decay, {1.0}, 1.0, 0.01, impls);
    CHECK(std::abs(t2.states.back()[0] - 0.5) < 1e-6);
}

TEST_CASE("RK4 converges at fourth order") {
    auto ctx = Context::make({"z"});
    AtomImpls impls;
    auto decay = VectorField::make(ctx, {"z"}, {"-z^2"});
    double e1 = std::abs(integrate_rk4(decay, {1.0}, 1.0, 0.2, impls).states.back()[0] - 0.5);
    double e2 = std::abs(integrate_rk4(decay, {1.0}, 1.0, 0.1, impls).states.back()[0] - 0.5);
    double ratio = e1 / e2;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("RK4 reports the failing time on domain errors") {
    auto ctx = Context::make({"z"});
    AtomImpls impls;
    auto f = VectorField::make(ctx, {"z"}, {"1/(2-z)"});
    try {
        // z grows past the pole of the right-hand side.
        integrate_rk4(f, {2.0}, 5.0, 0.5, impls);
        FAIL("expected EvalDomainError");
    } catch (const EvalDomainError& e) {
        CHECK(std::string(e.what()).find("at t=") != std::string::npos);
    }
}
