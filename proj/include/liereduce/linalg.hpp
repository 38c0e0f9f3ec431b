#pragma once

#include <optional>
#include <vector>

#include "liereduce/expr.hpp"

namespace liereduce {

using ExprVector = std::vector<Expr>;

// Dense row-major matrix over the expression field.
struct ExprMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Expr> entries;

    ExprMatrix() = default;
    ExprMatrix(int r, int c, const CtxPtr& ctx)
        : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, Expr::zero(ctx)) {}

    Expr& at(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
    const Expr& at(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }

    static ExprMatrix from_columns(const std::vector<ExprVector>& cols_list);
    static ExprMatrix identity(int n, const CtxPtr& ctx);
};

// Exact determinant (fraction-free Bareiss elimination on denominator-cleared rows).
Expr det(const ExprMatrix& m);

// Rank over the expression fraction field (generic rank on a dense subset).
int rank_generic(const ExprMatrix& m);

// One solution of M x = b with free variables set to zero; nullopt if inconsistent.
std::optional<ExprVector> solve_linear(const ExprMatrix& m, const ExprVector& b);

// Basis of the right kernel, denominator-cleared to polynomial entries.
std::vector<ExprVector> kernel_basis(const ExprMatrix& m);

// Remove denominators and common scalar content so entries are polynomial.
ExprVector clear_denominators(const ExprVector& v);

} // namespace liereduce
