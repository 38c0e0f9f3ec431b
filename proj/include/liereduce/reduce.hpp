#pragma once

#include "liereduce/field.hpp"
#include "liereduce/linalg.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace liereduce {

// A family g_1..g_s closed under the bracket: [g_i,g_j] = sum_k coeff[i][j][k] * g_k.
struct InvolutionSystem {
    std::vector<VectorField> generators;
    std::vector<std::vector<std::vector<Expr>>> closure_coeffs; // [i][j][k]
    int generic_rank = 0;

    int size() const { return static_cast<int>(generators.size()); }
};

// An invariant map psi = (psi_1..psi_r) over an explicit coordinate frame.
struct ReductionMap {
    CtxPtr ctx;
    std::vector<int> vars;
    std::vector<Expr> invariants;
    int generic_rank = 0;

    int dim() const { return static_cast<int>(vars.size()); }
    int size() const { return static_cast<int>(invariants.size()); }

    static ReductionMap make(const CtxPtr& ctx, const std::vector<std::string>& coord_names,
                             const std::vector<std::string>& invariant_texts);
    static ReductionMap from_exprs(const CtxPtr& ctx, std::vector<int> vars,
                                   std::vector<Expr> invariants);
};

// Result of writing a field in the module basis (optionally adjoining f itself).
struct Decomposition {
    std::optional<Expr> f_coefficient;
    std::vector<Expr> module_coefficients;
    bool residual_zero = false;
};

// Linear group generators together with invariants and the column fields used
// for the pointwise splitting; theta is the determinant of the assembled columns.
struct GroupData {
    std::vector<VectorField> generators;
    std::vector<Expr> invariant_polys;
    std::vector<VectorField> gradients;
    Expr theta;

    // Validates linearity of the generators, annihilation of the invariants and
    // theta != 0. When no custom columns are given the exact gradients of the
    // invariant polynomials are used.
    static GroupData make(std::vector<VectorField> generators, std::vector<Expr> invariant_polys,
                          std::optional<std::vector<VectorField>> columns = std::nullopt);
};

struct GroupSplit {
    std::vector<Expr> alphas;
    std::vector<Expr> betas;
};

// Outcome of a reducibility check.  In verification mode (target right-hand
// side supplied) `residuals` holds D(psi)*f - h(psi) per component.  In
// inference mode `witnesses` holds the non-vanishing X_g(X_f(psi_j)); when the
// check passes, `h` holds the reduced right-hand side over fresh invariant
// symbols w1..wr if a rational closed form was found (h_explicit), otherwise
// the system is reducible with the right-hand side left implicit.
struct ReduceReport {
    bool reducible = false;
    bool trivial = false; // f vanishes or lies inside the module itself
    bool h_explicit = false;
    std::vector<Expr> h;
    std::vector<Expr> residuals;
    std::vector<Expr> witnesses;
};

// True iff [g,f] = 0.
bool check_symmetry(const VectorField& f, const VectorField& g);

// Some(alpha) with [g,f] = alpha*f exactly, else nullopt.  alpha is found by a
// linear solve against the single column f.
std::optional<Expr> check_orbital_symmetry(const VectorField& f, const VectorField& g);

// Verifies closure of the family by solving [g_i,g_j] = sum_k mu_ijk g_k for
// every pair; throws NotInInvolution when a bracket escapes the module.
InvolutionSystem build_involution(const std::vector<VectorField>& G);

// True iff every generator annihilates every invariant and
// rank(psi) = n - rank(S).  On failure `witness` (if given) names the reason.
bool check_common_invariants(const InvolutionSystem& S, const ReductionMap& psi,
                             std::string* witness = nullptr);

// Solves (f?, g_1..g_s) * c = v over the expression field; the f column comes
// first when adjoined.  nullopt when the system is inconsistent.
std::optional<Decomposition> module_decompose(const VectorField& v, const InvolutionSystem& S,
                                              const std::optional<VectorField>& adjoin_f = std::nullopt);

// Decides reducibility of f by the invariants of psi.  When `h` is supplied
// its entries are read over their own context whose symbols stand, in
// declaration order, for psi_1..psi_r, and the identity D(psi)*f = h(psi) is
// verified symbolically.  Otherwise reducibility is decided by the
// annihilation criterion X_{g_i}(X_f(psi_j)) = 0 and a bounded-degree ansatz
// is attempted only to present h in closed form.
ReduceReport check_reducible(const VectorField& f, const ReductionMap& psi,
                             const InvolutionSystem& S,
                             const std::optional<std::vector<Expr>>& h = std::nullopt);

// Orbital reduction.  Without mu the orbit equations are returned, normalized
// so the first component is 1; with a known mu the full reduced right-hand
// side mu * X_f(psi_j) is expressed in the invariants.  Throws
// DegenerateDirection when X_f(psi_1) = 0 and NotOrbitallyReducible when a
// direction ratio fails the annihilation test; nullopt means the ratios are
// invariant but no rational closed form was found within the degree bound.
std::optional<std::vector<Expr>> orbital_reduce(const VectorField& f, const ReductionMap& psi,
                                                const InvolutionSystem& S,
                                                const std::optional<Expr>& mu = std::nullopt);

// Degree bound for the rational ansatz, from LIEREDUCE_DEGREE_BOUND (default 4).
int default_degree_bound();

// Searches for a rational function R with numerator and denominator total
// degree <= degree_bound such that e = R(psi_1..psi_r) exactly; the result is
// returned over a fresh context with symbols w1..wr.  Opaque function atoms
// are carried across by expressing their arguments recursively.  nullopt means
// no representation was found within the bound (not a proof of none existing).
std::optional<Expr> express_in_invariants(const Expr& e, const ReductionMap& psi,
                                          int degree_bound = default_degree_bound());

// Returns f + sum_i coeffs_i * g_i after checking that every generator is a
// symmetry (orbital=false) or orbital symmetry (orbital=true) of f; the
// bracket relation of the result against the module is re-verified.
VectorField construct_reducible(const VectorField& f, const InvolutionSystem& S,
                                const std::vector<Expr>& coeffs, bool orbital);

// Checks that f_star - rho*g brackets with g to zero (orbital=false) or to a
// scalar multiple of itself (orbital=true).
bool verify_split(const VectorField& f_star, const VectorField& g, const Expr& rho, bool orbital);

// Builds the involution system spanning the kernel of the jacobian of psi;
// every returned generator annihilates every invariant by construction.
InvolutionSystem kernel_involution_from_map(const ReductionMap& psi);

// Writes f as sum_i alpha_i B_i x + sum_j beta_j q_j by solving the n x n
// system of assembled columns; nullopt when the columns are generically
// singular.
std::optional<GroupSplit> group_decompose(const VectorField& f, const GroupData& G);

// Non-orbital: every beta_j is annihilated by every generator.  Orbital: all
// ratios beta_j / beta_k (k the smallest index with beta_k != 0) are.
bool check_group_reducible(const VectorField& f, const GroupData& G, bool orbital);

// Rebuilds e over another context, sending each symbol through symbol_map and
// carrying function atoms across (arguments transported recursively; the
// function is declared in the destination when missing).
Expr transport(const Expr& e, const CtxPtr& dst, const std::map<int, Expr>& symbol_map);

} // namespace liereduce
