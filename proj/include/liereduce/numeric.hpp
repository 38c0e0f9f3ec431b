#pragma once

#include <cstdint>
#include <vector>

#include "liereduce/field.hpp"
#include "liereduce/reduce.hpp"

namespace liereduce {

// Sampling and integration parameters for the floating-point cross checks.
// All randomness is drawn from rng_seed, so every run is reproducible.
struct CheckConfig {
    int num_points = 20;
    double box_lo = 1.0; // per-coordinate sampling interval
    double box_hi = 2.0;
    double tol_pointwise = 1e-8;
    double tol_drift = 1e-6;
    std::uint64_t rng_seed = 42;
    double step = 1e-3; // RK4 step
    double t_end = 1.0;

    void validate() const; // PreconditionFailed on non-positive tolerances etc.
};

// max_j |D(psi) f - h(psi)|_j over cfg.num_points sampled points.  The h
// entries are read over their own context whose symbols stand, in declaration
// order, for psi_1..psi_r.  Every free symbol of the assembled residuals
// (coordinates and constants alike) is drawn from the box; candidate points
// where any denominator magnitude falls below 1e-6 are rejected and redrawn,
// and SamplingExhausted is thrown after 1000 rejections.  The two variants
// return identical values; the unsuffixed one fans the point evaluations out
// across threads when built with OpenMP.
double residual_reduction(const VectorField& f, const ReductionMap& psi,
                          const std::vector<Expr>& h, const CheckConfig& cfg,
                          const AtomImpls& impls);
double residual_reduction_serial(const VectorField& f, const ReductionMap& psi,
                                 const std::vector<Expr>& h, const CheckConfig& cfg,
                                 const AtomImpls& impls);

// True iff |e| < cfg.tol_pointwise at every accepted sample point.  Sampling
// follows the same rejection rule as residual_reduction.
bool probabilistic_zero(const Expr& e, const CheckConfig& cfg, const AtomImpls& impls);
bool probabilistic_zero_serial(const Expr& e, const CheckConfig& cfg, const AtomImpls& impls);

// max_t |rho(x(t)) - rho(x(0))| along the RK4 trajectory of f started at
// `start` (ordered like f.vars).  Trajectory integration is sequential;
// domain failures carry the offending time stamp.
double drift_first_integral(const VectorField& f, const Expr& rho,
                            const std::vector<double>& start, const CheckConfig& cfg,
                            const AtomImpls& impls);

} // namespace liereduce
