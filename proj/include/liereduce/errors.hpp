#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liereduce {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
    std::size_t offset;
    SyntaxError(const std::string& msg, std::size_t off)
        : Error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct UnknownSymbol : Error {
    std::string name;
    std::size_t offset;
    UnknownSymbol(const std::string& sym, std::size_t off)
        : Error("unknown symbol '" + sym + "' (at byte " + std::to_string(off) + ")"),
          name(sym), offset(off) {}
    explicit UnknownSymbol(const std::string& sym)
        : Error("unknown symbol '" + sym + "'"), name(sym), offset(std::string::npos) {}
};

struct ContextMismatch : Error {
    ContextMismatch() : Error("expressions belong to different variable contexts") {}
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by an identically zero expression") {}
};

struct EvalDomainError : Error {
    using Error::Error;
};

struct MissingAtomImpl : Error {
    explicit MissingAtomImpl(const std::string& name)
        : Error("no numeric implementation registered for function '" + name + "'") {}
};

struct NotSquare : Error {
    NotSquare() : Error("matrix is not square") {}
};

struct NotInInvolution : Error {
    int i, j;
    NotInInvolution(int gi, int gj, const std::string& witness)
        : Error("bracket [g" + std::to_string(gi + 1) + ",g" + std::to_string(gj + 1) +
                "] lies outside the module: " + witness),
          i(gi), j(gj) {}
};

struct PreconditionFailed : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct ZeroPivot : Error {
    ZeroPivot() : Error("pivot component is identically zero") {}
};

struct DependenceViolation : Error {
    using Error::Error;
};

struct InversionUnsupported : Error {
    using Error::Error;
};

struct DependentDerivatives : Error {
    int level;
    explicit DependentDerivatives(int l)
        : Error("derivative chain becomes dependent at iterate " + std::to_string(l)),
          level(l) {}
};

struct AnsatzExhausted : Error {
    using Error::Error;
};

struct SamplingExhausted : Error {
    SamplingExhausted() : Error("exceeded 1000 rejected sample points") {}
};

struct NotOrbitallyReducible : Error {
    std::string witness;
    explicit NotOrbitallyReducible(const std::string& w)
        : Error("direction ratio is not expressible in the invariants: " + w), witness(w) {}
};

struct DegenerateDirection : Error {
    DegenerateDirection()
        : Error("first derived direction vanishes identically; reorder the invariants") {}
};

struct ZeroTimeComponent : Error {
    ZeroTimeComponent()
        : Error("time component 1 + sum(coeff_k * g_k[0]) is identically zero") {}
};

} // namespace liereduce
