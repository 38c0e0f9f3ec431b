#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liereduce/expr.hpp"
#include "liereduce/field.hpp"
#include "liereduce/reduce.hpp"

namespace liereduce {

// Parsed line-oriented system definition.  Directives:
//   vars: x0 x1 x2            coordinate names, in field order
//   params: nu c              extra free symbols
//   function gamma 1          opaque function declaration (name, arity)
//   field f: 1, x2, gamma(x2)/x1
//   invariant s1: x1/x0       reducing-map entries, in declaration order
//   scalar mu0: x0            named scalar expressions
//   reduced h: w2-w1, ...     target right-hand side over fresh symbols w1..wr
//   impl gamma sq             numeric binding to a builtin implementation
//   start: 1 1 1              trajectory start state, ordered like vars
//   integral I1: <expr>       conserved quantity for drift checks
//   integral I1 along f: ...  same, bound to a named field
//   group gen b1: -x2, x1, 0  linear group generator
//   group inv s: x1^2+x2^2    polynomial group invariant
//   group col c1: x1, x2, 0   custom splitting column
//   check <assertion>         corpus assertions, evaluated by the CLI
//   note <text>               free-form remarks propagated into reports
// '#' starts a comment; blank lines are ignored.
struct IntegralDef {
    std::string name;
    std::string field; // empty when not bound to a specific field
    Expr rho;
};

struct SystemFile {
    CtxPtr ctx;
    std::vector<std::string> var_names;
    std::vector<std::string> param_names;
    std::vector<std::pair<std::string, VectorField>> fields;
    std::vector<std::pair<std::string, Expr>> invariants;
    std::vector<std::pair<std::string, Expr>> scalars;
    std::optional<std::vector<Expr>> reduced; // over reduced_ctx
    CtxPtr reduced_ctx;
    AtomImpls impls;
    std::vector<double> start;
    std::vector<IntegralDef> integrals;
    std::vector<std::pair<std::string, VectorField>> group_generators;
    std::vector<std::pair<std::string, Expr>> group_invariants;
    std::vector<std::pair<std::string, VectorField>> group_columns;
    std::vector<std::string> checks;
    std::vector<std::string> notes;

    const VectorField& field(const std::string& name) const; // Error when missing
    Expr scalar(const std::string& name) const;
    Expr integral(const std::string& name) const;
    ReductionMap reduction_map() const;                // from the invariant lines
    GroupData group() const;                           // from the group lines
};

SystemFile parse_system_text(const std::string& text, const std::string& origin = "<input>");
SystemFile parse_system_file(const std::string& path);

} // namespace liereduce
