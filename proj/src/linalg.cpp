#include "liereduce/linalg.hpp"

#include <algorithm>

namespace liereduce {

namespace {

CtxPtr matrix_ctx(const ExprMatrix& m) {
    if (m.entries.empty()) throw Error("matrix has no entries");
    return m.entries.front().ctx();
}

Poly poly_lcm(const Poly& a, const Poly& b, const Context& ctx) {
    Poly g = Poly::gcd(a, b, ctx);
    return a.mul(g.is_constant() ? b : b.divexact(g, ctx), ctx);
}

// Reduced row echelon form over the expression field with deterministic
// pivoting: leftmost unresolved column, first symbolically nonzero row.
struct Echelon {
    ExprMatrix m;
    std::vector<std::pair<int, int>> pivots; // (row, col)
};

Echelon rref(ExprMatrix m) {
    int row = 0;
    std::vector<std::pair<int, int>> pivots;
    for (int col = 0; col < m.cols && row < m.rows; ++col) {
        int sel = -1;
        for (int r = row; r < m.rows; ++r) {
            if (!m.at(r, col).is_zero()) {
                sel = r;
                break;
            }
        }
        if (sel < 0) continue;
        for (int j = 0; j < m.cols; ++j) std::swap(m.at(row, j), m.at(sel, j));
        Expr inv = m.at(row, col);
        for (int j = col; j < m.cols; ++j) m.at(row, j) = m.at(row, j) / inv;
        for (int r = 0; r < m.rows; ++r) {
            if (r == row || m.at(r, col).is_zero()) continue;
            Expr factor = m.at(r, col);
            for (int j = col; j < m.cols; ++j)
                m.at(r, j) = m.at(r, j) - factor * m.at(row, j);
        }
        pivots.emplace_back(row, col);
        ++row;
    }
    return {std::move(m), std::move(pivots)};
}

} // namespace

ExprMatrix ExprMatrix::from_columns(const std::vector<ExprVector>& cols_list) {
    if (cols_list.empty() || cols_list.front().empty()) throw Error("matrix has no entries");
    ExprMatrix m(static_cast<int>(cols_list.front().size()), static_cast<int>(cols_list.size()),
                 cols_list.front().front().ctx());
    for (int j = 0; j < m.cols; ++j) {
        if (static_cast<int>(cols_list[j].size()) != m.rows)
            throw Error("columns have mismatched lengths");
        for (int i = 0; i < m.rows; ++i) m.at(i, j) = cols_list[j][i];
    }
    return m;
}

ExprMatrix ExprMatrix::identity(int n, const CtxPtr& ctx) {
    ExprMatrix m(n, n, ctx);
    for (int i = 0; i < n; ++i) m.at(i, i) = Expr::one(ctx);
    return m;
}

Expr det(const ExprMatrix& m) {
    if (m.rows != m.cols) throw NotSquare();
    CtxPtr ctx = matrix_ctx(m);
    const Context& c = *ctx;
    int n = m.rows;

    // Clear each row to polynomial entries; det scales by the row multipliers.
    std::vector<std::vector<Poly>> a(n, std::vector<Poly>(n));
    Expr scale = Expr::one(ctx); // product of row multipliers
    for (int i = 0; i < n; ++i) {
        Poly l = Poly::constant(1);
        mpz_class s = 1;
        for (int j = 0; j < n; ++j) {
            if (m.at(i, j).is_zero()) continue;
            l = poly_lcm(l, m.at(i, j).den(), c);
            mpz_lcm(s.get_mpz_t(), s.get_mpz_t(), m.at(i, j).scale().get_den().get_mpz_t());
        }
        for (int j = 0; j < n; ++j) {
            const Expr& e = m.at(i, j);
            if (e.is_zero()) {
                a[i][j] = Poly();
                continue;
            }
            a[i][j] = e.num().mul(l.divexact(e.den(), c), c).mul_scalar(e.scale() * s);
        }
        scale = scale * Expr::fraction(ctx, mpq_class(1, s), l, Poly::constant(1));
    }

    // Bareiss: every division is exact over the polynomial ring.
    int sign = 1;
    Poly prev = Poly::constant(1);
    for (int k = 0; k + 1 < n; ++k) {
        if (a[k][k].is_zero()) {
            int sel = -1;
            for (int r = k + 1; r < n; ++r) {
                if (!a[r][k].is_zero()) {
                    sel = r;
                    break;
                }
            }
            if (sel < 0) return Expr::zero(ctx);
            std::swap(a[k], a[sel]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a[i][j] = a[k][k].mul(a[i][j], c).sub(a[i][k].mul(a[k][j], c), c)
                              .divexact(prev, c);
        prev = a[k][k];
    }
    Expr d = Expr::fraction(ctx, sign, a[n - 1][n - 1], Poly::constant(1));
    return d / scale;
}

int rank_generic(const ExprMatrix& m) {
    return static_cast<int>(rref(m).pivots.size());
}

std::optional<ExprVector> solve_linear(const ExprMatrix& m, const ExprVector& b) {
    if (static_cast<int>(b.size()) != m.rows) throw Error("right-hand side length mismatch");
    CtxPtr ctx = matrix_ctx(m);
    ExprMatrix aug(m.rows, m.cols + 1, ctx);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
        aug.at(i, m.cols) = b[i];
    }
    Echelon e = rref(std::move(aug));
    ExprVector x(m.cols, Expr::zero(ctx));
    for (const auto& [r, c] : e.pivots) {
        if (c == m.cols) return std::nullopt; // pivot in the augmented column
        x[c] = e.m.at(r, m.cols);
    }
    return x;
}

std::vector<ExprVector> kernel_basis(const ExprMatrix& m) {
    CtxPtr ctx = matrix_ctx(m);
    Echelon e = rref(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (const auto& [r, c] : e.pivots) is_pivot[c] = true;
    std::vector<ExprVector> basis;
    for (int f = 0; f < m.cols; ++f) {
        if (is_pivot[f]) continue;
        ExprVector v(m.cols, Expr::zero(ctx));
        v[f] = Expr::one(ctx);
        for (const auto& [r, c] : e.pivots) v[c] = -e.m.at(r, f);
        basis.push_back(clear_denominators(v));
    }
    return basis;
}

ExprVector clear_denominators(const ExprVector& v) {
    if (v.empty()) return v;
    CtxPtr ctx = v.front().ctx();
    const Context& c = *ctx;
    Poly l = Poly::constant(1);
    mpz_class s = 1;
    for (const Expr& e : v) {
        if (e.is_zero()) continue;
        l = poly_lcm(l, e.den(), c);
        mpz_lcm(s.get_mpz_t(), s.get_mpz_t(), e.scale().get_den().get_mpz_t());
    }
    Expr mult = Expr::fraction(ctx, s, l, Poly::constant(1));
    ExprVector out;
    out.reserve(v.size());
    mpz_class g = 0;
    for (const Expr& e : v) {
        out.push_back(e * mult);
        if (!out.back().is_zero())
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(),
                    out.back().scale().get_num().get_mpz_t());
    }
    if (g > 1) {
        Expr div = Expr::constant(ctx, mpq_class(g));
        for (Expr& e : out) e = e / div;
    }
    return out;
}

} // namespace liereduce
